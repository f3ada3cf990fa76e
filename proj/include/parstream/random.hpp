// Copyright 2026 parstream Authors
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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace parstream::detail {

// Unbiased draw in [0, bound) via masked rejection. std::mt19937_64 output is
// fully specified by the standard, while std::uniform_int_distribution is
// implementation-defined; seeded results must be reproducible everywhere.
inline std::uint64_t draw_below(std::mt19937_64& eng, std::uint64_t bound) {
    if (bound <= 1) {
        return 0;
    }
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
        const std::uint64_t v = eng() & mask;
        if (v < bound) {
            return v;
        }
    }
}

/// Uniform integer in the closed range [lo, hi].
inline std::int64_t draw_int(std::mt19937_64& eng, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(draw_below(eng, span));
}

/// Uniform double in [0, 1) built from the top 53 engine bits.
inline double draw_unit(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. std::normal_distribution is
/// implementation-defined, so it cannot back seeded golden values.
inline double draw_normal(std::mt19937_64& eng) {
    const double u1 = 1.0 - draw_unit(eng); // (0, 1]: keeps the log finite
    const double u2 = draw_unit(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace parstream::detail
