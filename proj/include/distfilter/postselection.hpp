// Copyright 2026 The distfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace distfilter {

/// Measurement record of one iteration. `bits` holds the device auxiliary
/// outcomes with device 1 as the most significant of s bits, so
/// `top * 2^s + bits` enumerates outcomes lexicographically. For s = 1 the top
/// qudit does not exist and `top` is always 0.
struct Outcome {
  int s = 1;
  int top = 0;
  std::uint32_t bits = 0;

  int bit(int device) const { return static_cast<int>((bits >> (s - 1 - device)) & 1U); }
  std::size_t index() const { return (static_cast<std::size_t>(top) << s) | bits; }

  static Outcome from_index(int s, std::size_t index) {
    return {s, static_cast<int>(index >> s), static_cast<std::uint32_t>(index & ((std::size_t{1} << s) - 1))};
  }

  /// "top/bits", e.g. "0/01"; a single device prints just its bit.
  std::string label() const {
    std::string b;
    for (int l = 0; l < s; ++l) b.push_back(bit(l) ? '1' : '0');
    return s == 1 ? b : std::to_string(top) + "/" + b;
  }

  bool operator==(const Outcome&) const = default;
};

struct IterationOutcome {
  int k = 0;
  Outcome outcome;
  double probability = 0.0;
  bool accepted = true;
};

enum class PostselectionPolicy { none, weak, strong };

inline std::string_view to_string(PostselectionPolicy p) {
  switch (p) {
    case PostselectionPolicy::none: return "none";
    case PostselectionPolicy::weak: return "weak";
    case PostselectionPolicy::strong: return "strong";
  }
  return "?";
}

inline PostselectionPolicy parse_policy(std::string_view s) {
  if (s == "none") return PostselectionPolicy::none;
  if (s == "weak") return PostselectionPolicy::weak;
  if (s == "strong") return PostselectionPolicy::strong;
  throw std::invalid_argument("unknown postselection policy '" + std::string(s) + "'");
}

/// weak: top == 0. strong: top == 0 and all device bits equal.
inline bool apply_postselection(const Outcome& o, PostselectionPolicy policy) {
  switch (policy) {
    case PostselectionPolicy::none: return true;
    case PostselectionPolicy::weak: return o.top == 0;
    case PostselectionPolicy::strong: {
      const std::uint32_t ones = (std::uint32_t{1} << o.s) - 1;
      return o.top == 0 && (o.bits == 0 || o.bits == ones);
    }
  }
  return false;
}

}  // namespace distfilter
