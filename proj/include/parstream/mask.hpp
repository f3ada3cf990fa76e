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

#include <cstdint>
#include <string>
#include <vector>

#include "parstream/errors.hpp"
#include "parstream/stream.hpp"

namespace parstream {

/// Dense boolean attention mask over tokens in arrival order. Row q lists
/// which keys k the query at arrival position q may attend to.
struct VisibilityMatrix {
    int size = 0;
    std::vector<std::uint8_t> bits; ///< row-major, size*size

    explicit VisibilityMatrix(int n = 0)
        : size(n), bits(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

    bool at(int q, int k) const {
        return bits[static_cast<std::size_t>(q) * static_cast<std::size_t>(size) +
                    static_cast<std::size_t>(k)] != 0;
    }
    void set(int q, int k, bool v) {
        bits[static_cast<std::size_t>(q) * static_cast<std::size_t>(size) +
             static_cast<std::size_t>(k)] = v ? 1 : 0;
    }
};

/// Plain causal mask in arrival order: query q sees keys k <= q.
inline VisibilityMatrix build_interleaved_mask(const StreamTrace& trace) {
    validate(trace);
    const int n = trace.total_tokens();
    VisibilityMatrix m(n);
    for (int q = 0; q < n; ++q) {
        for (int k = 0; k <= q; ++k) {
            m.set(q, k, true);
        }
    }
    return m;
}

/// Single-pair visibility rule for the parallel-streaming mask. Decides
/// whether the query token may attend to the key token, independent of any
/// matrix construction, so it can serve as an oracle against the builder.
///
/// Rules:
/// - prompt keys are visible to everyone; prompt queries are causal within
///   the prompt and see nothing else;
/// - a query sees its own segment causally (key offset <= query offset);
/// - a visual query V_i sees visual keys from earlier rounds only — never
///   any answer tokens, so perception is unaffected by concurrent output;
/// - an answer query A_i sees visual keys from rounds <= i and answer keys
///   from rounds < i.
inline bool visibility_oracle(const TokenRef& query, const TokenRef& key) {
    if (key.is_prompt()) {
        return query.is_prompt() ? key.offset <= query.offset : true;
    }
    if (query.is_prompt()) {
        return false;
    }
    if (query.group == key.group && query.round == key.round) {
        return key.offset <= query.offset;
    }
    if (key.group == Group::input) {
        return query.group == Group::input ? key.round < query.round : key.round <= query.round;
    }
    // key is an answer segment: visible only to later answer segments
    return query.group == Group::output && key.round < query.round;
}

/// Parallel-streaming mask, built by filling whole segment-pair blocks.
inline VisibilityMatrix build_parallel_mask(const StreamTrace& trace) {
    validate(trace);
    const std::vector<TokenRef> tokens = enumerate_tokens(trace);
    const int n = static_cast<int>(tokens.size());

    // arrival range of each segment: prompt, then V_i / A_i per round
    struct Span {
        int begin = 0;
        int end = 0; // exclusive
    };
    Span prompt{0, trace.prompt_count};
    std::vector<Span> vspan(trace.rounds.size());
    std::vector<Span> aspan(trace.rounds.size());
    int cursor = trace.prompt_count;
    for (const Round& r : trace.rounds) {
        const std::size_t i = static_cast<std::size_t>(r.index - 1);
        vspan[i] = {cursor, cursor + r.visual_count};
        cursor = vspan[i].end;
        aspan[i] = {cursor, cursor + r.text_count};
        cursor = aspan[i].end;
    }

    VisibilityMatrix m(n);
    auto fill_full = [&m](Span q, Span k) {
        for (int row = q.begin; row < q.end; ++row) {
            for (int col = k.begin; col < k.end; ++col) {
                m.set(row, col, true);
            }
        }
    };
    auto fill_causal = [&m](Span s) {
        for (int row = s.begin; row < s.end; ++row) {
            for (int col = s.begin; col <= row; ++col) {
                m.set(row, col, true);
            }
        }
    };

    fill_causal(prompt);
    for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
        // visual queries: prompt, earlier visual segments, causal self
        fill_full(vspan[i], prompt);
        for (std::size_t j = 0; j < i; ++j) {
            fill_full(vspan[i], vspan[j]);
        }
        fill_causal(vspan[i]);
        // answer queries: prompt, visual <= round, answers < round, causal self
        fill_full(aspan[i], prompt);
        for (std::size_t j = 0; j <= i; ++j) {
            fill_full(aspan[i], vspan[j]);
        }
        for (std::size_t j = 0; j < i; ++j) {
            fill_full(aspan[i], aspan[j]);
        }
        fill_causal(aspan[i]);
    }
    return m;
}

/// Row visibility counts and overall density of a mask.
struct MaskStats {
    std::vector<int> row_counts;
    std::int64_t visible = 0;
    std::int64_t total = 0;

    double density() const {
        return total == 0 ? 0.0 : static_cast<double>(visible) / static_cast<double>(total);
    }
};

inline MaskStats mask_stats(const VisibilityMatrix& m) {
    MaskStats s;
    s.row_counts.resize(static_cast<std::size_t>(m.size), 0);
    for (int q = 0; q < m.size; ++q) {
        int c = 0;
        for (int k = 0; k < m.size; ++k) {
            c += m.at(q, k) ? 1 : 0;
        }
        s.row_counts[static_cast<std::size_t>(q)] = c;
        s.visible += c;
    }
    s.total = static_cast<std::int64_t>(m.size) * static_cast<std::int64_t>(m.size);
    return s;
}

/// Renders the mask as lines of '0'/'1' characters, one row per line.
inline std::string render_grid(const VisibilityMatrix& m) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size) * static_cast<std::size_t>(m.size + 1));
    for (int q = 0; q < m.size; ++q) {
        for (int k = 0; k < m.size; ++k) {
            out.push_back(m.at(q, k) ? '1' : '0');
        }
        out.push_back('\n');
    }
    return out;
}

} // namespace parstream
