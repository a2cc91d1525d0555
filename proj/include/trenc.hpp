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

#include "trenc/baselines.hpp"
#include "trenc/checkpoint.hpp"
#include "trenc/config.hpp"
#include "trenc/dataset_io.hpp"
#include "trenc/dom.hpp"
#include "trenc/embedding.hpp"
#include "trenc/errors.hpp"
#include "trenc/evaluation.hpp"
#include "trenc/features.hpp"
#include "trenc/html_parser.hpp"
#include "trenc/linalg.hpp"
#include "trenc/manifest.hpp"
#include "trenc/mlp.hpp"
#include "trenc/nn.hpp"
#include "trenc/optimizer.hpp"
#include "trenc/prepare.hpp"
#include "trenc/simplify.hpp"
#include "trenc/synthetic.hpp"
#include "trenc/text.hpp"
#include "trenc/training.hpp"
#include "trenc/tree_index.hpp"
#include "trenc/trenc_model.hpp"
