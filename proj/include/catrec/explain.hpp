// Copyright 2026 The CatRec Authors
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

#include <string>
#include <string_view>
#include <vector>

#include "catrec/catalog.hpp"
#include "catrec/preference_model.hpp"

namespace catrec {

inline constexpr std::string_view kExplanationPrefix =
    "Because you are looking for something that combines: ";
inline constexpr std::string_view kNoPreferenceText = "No strong category preference detected yet.";

struct ExplanationEntry {
  std::string category;
  int percent = 0;
  double preference = 0.0;
};

struct Explanation {
  std::vector<ExplanationEntry> entries;
  std::string text;
};

/// Categories strictly above `threshold`, strongest first (ties keep
/// vocabulary order), rendered as "Name(P%)" joined by ", " and " & ".
Explanation make_explanation(const CategoryPreference& pref, const CategoryVocabulary& vocab,
                             double threshold = 0.5);

/// Half-up rounding of 100 * p.
int rounded_percent(double p);

}  // namespace catrec
