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

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "trenc/dom.hpp"
#include "trenc/errors.hpp"
#include "trenc/text.hpp"

namespace trenc {

/// Attribute that carries a gold label on an element: data-pt="1" or "0".
inline constexpr std::string_view kLabelAttribute = "data-pt";

namespace html_detail {

inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

inline bool is_name_char(char c) {
  return is_alpha(c) || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == ':' || c == '.';
}

inline bool istarts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char a = s[pos + i];
    if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
    if (a != prefix[i]) return false;
  }
  return true;
}

inline std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (istarts_with(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

inline const std::unordered_set<std::string_view>& void_elements() {
  static const std::unordered_set<std::string_view> k = {
      "area", "base", "br", "col", "embed", "hr", "img", "input",
      "link", "meta", "param", "source", "track", "wbr"};
  return k;
}

// Elements whose content is dropped entirely and which produce no node.
inline const std::unordered_set<std::string_view>& skipped_raw_text() {
  static const std::unordered_set<std::string_view> k = {"script", "style"};
  return k;
}

// Elements whose content is raw text attached to the element itself.
inline const std::unordered_set<std::string_view>& rcdata_elements() {
  static const std::unordered_set<std::string_view> k = {"title", "textarea", "xmp"};
  return k;
}

// Opening one of these closes an open <p>.
inline const std::unordered_set<std::string_view>& closes_paragraph() {
  static const std::unordered_set<std::string_view> k = {
      "address", "article", "aside", "blockquote", "details", "div", "dl", "fieldset",
      "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
      "header", "hr", "main", "menu", "nav", "ol", "p", "pre", "section", "table", "ul"};
  return k;
}

inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    std::uint32_t cp = 0;
    bool ok = true;
    if (!name.empty() && name[0] == '#') {
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      const std::string_view digits = name.substr(hex ? 2 : 1);
      if (digits.empty()) ok = false;
      for (char c : digits) {
        int v = -1;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16u : 10u) + static_cast<std::uint32_t>(v);
      }
      if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) ok = false;
    } else if (name == "amp") {
      cp = '&';
    } else if (name == "lt") {
      cp = '<';
    } else if (name == "gt") {
      cp = '>';
    } else if (name == "quot") {
      cp = '"';
    } else if (name == "apos") {
      cp = '\'';
    } else if (name == "nbsp") {
      cp = ' ';
    } else {
      ok = false;
    }
    if (!ok) {
      out.push_back(s[i++]);
      continue;
    }
    append_utf8(out, cp);
    i = semi + 1;
  }
  return out;
}

struct StartTag {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  bool self_closing = false;
  std::size_t end = 0;  // one past '>'
};

// Parses "<name attr=... >" starting at pos (which points at '<').
inline StartTag read_start_tag(std::string_view s, std::size_t pos) {
  StartTag tag;
  std::size_t i = pos + 1;
  while (i < s.size() && is_name_char(s[i])) tag.name.push_back(s[i++]);
  tag.name = ascii_lower(tag.name);
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    if (i >= s.size()) break;
    if (s[i] == '>') {
      ++i;
      break;
    }
    if (s[i] == '/') {
      tag.self_closing = i + 1 < s.size() && s[i + 1] == '>';
      ++i;
      continue;
    }
    std::string name;
    while (i < s.size() && !is_ascii_space(s[i]) && s[i] != '=' && s[i] != '>' && s[i] != '/') {
      name.push_back(s[i++]);
    }
    if (name.empty()) {
      ++i;
      continue;
    }
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    std::string value;
    if (i < s.size() && s[i] == '=') {
      ++i;
      while (i < s.size() && is_ascii_space(s[i])) ++i;
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        const char quote = s[i++];
        const std::size_t close = s.find(quote, i);
        const std::size_t stop = close == std::string_view::npos ? s.size() : close;
        value = std::string(s.substr(i, stop - i));
        i = close == std::string_view::npos ? s.size() : close + 1;
      } else {
        while (i < s.size() && !is_ascii_space(s[i]) && s[i] != '>') value.push_back(s[i++]);
      }
    }
    tag.attributes.emplace_back(ascii_lower(name), decode_entities(value));
  }
  tag.end = i;
  return tag;
}

struct OpenElement {
  int node;
  std::string name;  // raw lowercase name (may be outside the vocabulary)
};

class TreeBuilder {
 public:
  TreeBuilder() {
    // Virtual document node, removed or renamed in finish().
    raw_text_.emplace_back();
    parents_.push_back(kNoParent);
    names_.emplace_back("#document");
    labels_.push_back(Label::kUnlabeled);
  }

  void text(std::string_view t) {
    const int target = stack_.empty() ? 0 : stack_.back().node;
    raw_text_[static_cast<std::size_t>(target)] += decode_entities(t);
  }

  // Returns the node index of the new element.
  int open(const StartTag& tag) {
    apply_implicit_closes(tag.name);
    const int parent = stack_.empty() ? 0 : stack_.back().node;
    const int id = static_cast<int>(parents_.size());
    parents_.push_back(parent);
    names_.push_back(tag.name);
    raw_text_.emplace_back();
    Label label = Label::kUnlabeled;
    for (const auto& [k, v] : tag.attributes) {
      if (k == kLabelAttribute) {
        const std::string val = collapse_whitespace(v);
        if (val == "1") label = Label::kPositive;
        else if (val == "0") label = Label::kNegative;
      }
    }
    labels_.push_back(label);
    if (!void_elements().count(tag.name) && !tag.self_closing) {
      stack_.push_back(OpenElement{id, tag.name});
    }
    return id;
  }

  void close(std::string_view name) {
    for (std::size_t k = stack_.size(); k-- > 0;) {
      if (stack_[k].name == name) {
        stack_.resize(k);
        return;
      }
    }
    // Unmatched end tag: ignored, as browsers do.
  }

  DomTree finish() {
    const std::size_t total = parents_.size();
    if (total <= 1) throw EmptyDocument("document contains no elements");
    int top_level_elements = 0;
    for (std::size_t i = 1; i < total; ++i) {
      if (parents_[i] == 0) ++top_level_elements;
    }
    const bool keep_virtual =
        top_level_elements != 1 || !collapse_whitespace(raw_text_[0]).empty();

    DomTree tree;
    const std::size_t first = keep_virtual ? 0 : 1;
    const int shift = static_cast<int>(first);
    for (std::size_t i = first; i < total; ++i) {
      DomNode n;
      n.id = static_cast<int>(i) - shift;
      n.parent = (i == first) ? kNoParent : parents_[i] - shift;
      n.tag = (i == 0) ? std::string("html") : canonical_tag(names_[i]);
      n.text = collapse_whitespace(raw_text_[i]);
      n.label = labels_[i];
      tree.nodes.push_back(std::move(n));
    }
    return tree;
  }

 private:
  bool on_stack(std::string_view name) const {
    return std::any_of(stack_.begin(), stack_.end(),
                       [&](const OpenElement& e) { return e.name == name; });
  }

  // Pops back to (and including) the nearest `name` unless a boundary
  // element is found first.
  void close_within(std::string_view name, std::initializer_list<std::string_view> boundary) {
    for (std::size_t k = stack_.size(); k-- > 0;) {
      const auto& n = stack_[k].name;
      if (n == name) {
        stack_.resize(k);
        return;
      }
      if (std::find(boundary.begin(), boundary.end(), n) != boundary.end()) return;
    }
  }

  void apply_implicit_closes(const std::string& name) {
    if (closes_paragraph().count(name) && on_stack("p")) {
      close_within("p", {"div", "section", "article", "td", "th", "li", "body", "html", "table",
                         "blockquote", "main", "aside", "dd", "dt", "button", "form"});
    }
    if (name == "li") {
      close_within("li", {"ul", "ol", "menu"});
    } else if (name == "dt" || name == "dd") {
      close_within("dt", {"dl"});
      close_within("dd", {"dl"});
    } else if (name == "tr") {
      close_within("td", {"tr", "table"});
      close_within("th", {"tr", "table"});
      close_within("tr", {"table", "tbody", "thead", "tfoot"});
    } else if (name == "td" || name == "th") {
      close_within("td", {"tr", "table"});
      close_within("th", {"tr", "table"});
    } else if (name == "option") {
      close_within("option", {"select", "datalist", "optgroup"});
    }
  }

  std::vector<OpenElement> stack_;
  std::vector<int> parents_;
  std::vector<std::string> names_;
  std::vector<std::string> raw_text_;
  std::vector<Label> labels_;
};

}  // namespace html_detail

/// Parses an HTML document into an unsimplified DOM tree, one node per element
/// in document order. Each node's text is the whitespace-normalized
/// concatenation of its direct text children. Script, style and comment
/// content never produce nodes.
inline DomTree parse_html(std::string_view html) {
  using namespace html_detail;
  if (!is_valid_utf8_text(html)) throw ParseError("input is not UTF-8 text");

  TreeBuilder builder;
  std::size_t i = 0;
  std::size_t text_start = 0;
  auto flush_text = [&](std::size_t end) {
    if (end > text_start) builder.text(html.substr(text_start, end - text_start));
  };

  while (i < html.size()) {
    if (html[i] != '<') {
      ++i;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      flush_text(i);
      const std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      text_start = i;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      flush_text(i);
      const std::size_t end = html.find('>', i + 2);
      i = end == std::string_view::npos ? html.size() : end + 1;
      text_start = i;
      continue;
    }
    if (i + 1 < html.size() && html[i + 1] == '/') {
      if (i + 2 < html.size() && is_alpha(html[i + 2])) {
        flush_text(i);
        std::size_t j = i + 2;
        std::string name;
        while (j < html.size() && is_name_char(html[j])) name.push_back(html[j++]);
        const std::size_t end = html.find('>', j);
        builder.close(ascii_lower(name));
        i = end == std::string_view::npos ? html.size() : end + 1;
        text_start = i;
        continue;
      }
      ++i;
      continue;
    }
    if (i + 1 < html.size() && is_alpha(html[i + 1])) {
      flush_text(i);
      StartTag tag = read_start_tag(html, i);
      i = tag.end;
      if (skipped_raw_text().count(tag.name)) {
        if (!tag.self_closing) {
          const std::size_t end = ifind(html, "</" + tag.name, i);
          if (end == std::string_view::npos) {
            i = html.size();
          } else {
            const std::size_t gt = html.find('>', end);
            i = gt == std::string_view::npos ? html.size() : gt + 1;
          }
        }
        text_start = i;
        continue;
      }
      builder.open(tag);
      if (rcdata_elements().count(tag.name) && !tag.self_closing) {
        const std::size_t end = ifind(html, "</" + tag.name, i);
        const std::size_t stop = end == std::string_view::npos ? html.size() : end;
        builder.text(html.substr(i, stop - i));
        builder.close(tag.name);
        if (end == std::string_view::npos) {
          i = html.size();
        } else {
          const std::size_t gt = html.find('>', end);
          i = gt == std::string_view::npos ? html.size() : gt + 1;
        }
      }
      text_start = i;
      continue;
    }
    ++i;  // a literal '<'
  }
  flush_text(html.size());
  return builder.finish();
}

}  // namespace trenc
