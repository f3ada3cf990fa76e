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

#include <utility>
#include <vector>

#include "parstream/stream.hpp"

namespace testutil {

/// Calls f(trace) for every trace with the given prompt count, 1..max_rounds
/// rounds, and per-round (m, k) each in 0..max_size with m + k > 0.
template <typename F>
void for_each_small_trace(int max_rounds, int max_size, int prompt_count, F&& f) {
    std::vector<std::pair<int, int>> combos;
    for (int m = 0; m <= max_size; ++m) {
        for (int k = 0; k <= max_size; ++k) {
            if (m + k > 0) {
                combos.emplace_back(m, k);
            }
        }
    }
    const int base = static_cast<int>(combos.size());
    for (int rounds = 1; rounds <= max_rounds; ++rounds) {
        std::vector<int> pick(static_cast<std::size_t>(rounds), 0);
        while (true) {
            parstream::StreamTrace trace;
            trace.prompt_count = prompt_count;
            for (int r = 0; r < rounds; ++r) {
                const auto [m, k] = combos[static_cast<std::size_t>(pick[static_cast<std::size_t>(r)])];
                trace.rounds.push_back({r + 1, m, k});
            }
            f(trace);
            // odometer increment
            int pos = rounds - 1;
            while (pos >= 0 && ++pick[static_cast<std::size_t>(pos)] == base) {
                pick[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) {
                break;
            }
        }
    }
}

} // namespace testutil
