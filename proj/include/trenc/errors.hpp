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

#include <stdexcept>
#include <string>

namespace trenc {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TRENC_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

TRENC_DEFINE_ERROR(ParseError);
TRENC_DEFINE_ERROR(EmptyDocument);
TRENC_DEFINE_ERROR(FormatError);
TRENC_DEFINE_ERROR(VersionError);
TRENC_DEFINE_ERROR(SplitImpossible);
TRENC_DEFINE_ERROR(DimensionMismatch);
TRENC_DEFINE_ERROR(KeyMissing);
TRENC_DEFINE_ERROR(ZeroNorm);
TRENC_DEFINE_ERROR(DegenerateRow);
TRENC_DEFINE_ERROR(NonFinite);
TRENC_DEFINE_ERROR(ConfigError);
TRENC_DEFINE_ERROR(EmptySplit);
TRENC_DEFINE_ERROR(TooFewInterests);

#undef TRENC_DEFINE_ERROR

}  // namespace trenc
