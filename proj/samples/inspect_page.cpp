// Copyright 2026 The trenc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Prints the simplified tree of an HTML page with its gold labels and the
// rule-based baseline's predictions.
//
//   inspect_page samples/pages/camping.html

#include <iomanip>
#include <iostream>

#include "trenc.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: inspect_page PAGE.html\n";
    return 2;
  }
  try {
    const trenc::DomTree tree = trenc::simplify_tree(trenc::parse_html(trenc::read_file(argv[1])));
    const auto levels = trenc::node_levels(tree);
    const auto rules = trenc::heuristic_classify(tree);
    std::cout << "id  gold rules  node\n";
    for (const auto& n : tree.nodes) {
      const auto i = static_cast<std::size_t>(n.id);
      const char* gold = n.label == trenc::Label::kPositive ? "1" : n.label == trenc::Label::kNegative ? "0" : "-";
      std::cout << std::setw(3) << n.id << "  " << std::setw(4) << gold << std::setw(6) << rules[i] << "  "
                << std::string(2 * static_cast<std::size_t>(levels[i]), ' ') << '<' << n.tag << "> " << n.text
                << '\n';
    }
  } catch (const trenc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
