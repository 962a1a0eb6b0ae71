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

#include "catrec/explain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace catrec {

int rounded_percent(double p) { return static_cast<int>(std::floor(100.0 * p + 0.5)); }

Explanation make_explanation(const CategoryPreference& pref, const CategoryVocabulary& vocab,
                             double threshold) {
  if (pref.size() != vocab.size())
    throw std::invalid_argument("make_explanation: preference length differs from vocabulary");
  Explanation out;
  for (std::size_t i = 0; i < pref.size(); ++i)
    if (pref[i] > threshold) out.entries.push_back({vocab.name(i), rounded_percent(pref[i]), pref[i]});
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const auto& a, const auto& b) { return a.preference > b.preference; });

  if (out.entries.empty()) {
    out.text = kNoPreferenceText;
    return out;
  }
  out.text = kExplanationPrefix;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    if (i > 0) out.text += i + 1 == out.entries.size() ? " & " : ", ";
    out.text += out.entries[i].category + "(" + std::to_string(out.entries[i].percent) + "%)";
  }
  return out;
}

}  // namespace catrec
