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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "parstream/errors.hpp"
#include "parstream/stream.hpp"

namespace parstream {

/// Position index allocation strategies.
///
/// - interleaved: globally continuous indices in arrival order. The next
///   segment cannot be numbered until the previous one has finished, which
///   serializes perception and generation.
/// - ospe: overlapped streaming. A_i and V_{i+1} share the starting index
///   E_i+1; the round marker advances by the larger of the two segment
///   lengths, so concurrently processed segments reuse index space.
/// - gdpe: group-decoupled. Input tokens (prompt + visual segments) and
///   output tokens (answer segments) each get their own contiguous index
///   space starting at zero.
/// - gipe: gap-isolated. GDPE plus a constant gap: output indices are the
///   GDPE output indices shifted by gap+1, so the first answer token sits
///   at gap+1 and the two index ranges are numerically disjoint whenever
///   the gap is large enough.
enum class Strategy : std::uint8_t { interleaved, ospe, gdpe, gipe };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::interleaved: return "interleaved";
        case Strategy::ospe: return "ospe";
        case Strategy::gdpe: return "gdpe";
        case Strategy::gipe: return "gipe";
    }
    return "?";
}

inline Strategy strategy_from_string(std::string_view name) {
    if (name == "interleaved") return Strategy::interleaved;
    if (name == "ospe") return Strategy::ospe;
    if (name == "gdpe") return Strategy::gdpe;
    if (name == "gipe") return Strategy::gipe;
    throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

/// Default gap for gap-isolated allocation.
inline constexpr std::int64_t kDefaultGap = 10000;

/// Per-round end markers. `visual_end` / `text_end` are the last index
/// assigned in V_i / A_i (an empty segment reports start-1 so that
/// end+1 always names the would-be start). `round_end` is the round marker
/// E_i used by the interleaved and overlapped recurrences.
struct RoundMarkers {
    std::int64_t visual_end = -1;
    std::int64_t text_end = -1;
    std::int64_t round_end = -1;
};

/// The result of running one strategy over a trace: a stream index per
/// token (arrival order) plus the per-round markers.
struct IndexAssignment {
    Strategy strategy = Strategy::interleaved;
    std::int64_t gap = 0;     ///< gap-isolated only
    bool gap_warning = false; ///< gap-isolated: output range overlaps input range
    std::vector<TokenRef> tokens;
    std::vector<std::int64_t> indices; ///< parallel to tokens
    std::vector<RoundMarkers> markers; ///< markers[i-1] belongs to round i

    std::int64_t index_at(int arrival) const {
        return indices[static_cast<std::size_t>(arrival)];
    }
};

namespace detail {

struct SegmentStarts {
    // start index of V_i / A_i at [i-1]; prompt always starts at 0
    std::vector<std::int64_t> visual;
    std::vector<std::int64_t> text;
};

inline IndexAssignment fill_assignment(const StreamTrace& trace, Strategy strategy,
                                       const SegmentStarts& starts) {
    IndexAssignment out;
    out.strategy = strategy;
    out.tokens = enumerate_tokens(trace);
    out.indices.resize(out.tokens.size());
    for (std::size_t t = 0; t < out.tokens.size(); ++t) {
        const TokenRef& tok = out.tokens[t];
        std::int64_t base = 0;
        if (!tok.is_prompt()) {
            base = tok.group == Group::input ? starts.visual[static_cast<std::size_t>(tok.round - 1)]
                                             : starts.text[static_cast<std::size_t>(tok.round - 1)];
        }
        out.indices[t] = base + tok.offset;
    }
    return out;
}

} // namespace detail

/// Globally continuous allocation: the token at arrival position p gets
/// index p. This is the baseline whose continuity couples the streams.
inline IndexAssignment allocate_interleaved(const StreamTrace& trace) {
    validate(trace);
    const int n = static_cast<int>(trace.rounds.size());
    detail::SegmentStarts starts;
    starts.visual.resize(static_cast<std::size_t>(n));
    starts.text.resize(static_cast<std::size_t>(n));
    IndexAssignment out;
    out.markers.resize(static_cast<std::size_t>(n));
    std::int64_t next = trace.prompt_count;
    for (const Round& r : trace.rounds) {
        const std::size_t i = static_cast<std::size_t>(r.index - 1);
        starts.visual[i] = next;
        next += r.visual_count;
        out.markers[i].visual_end = next - 1;
        starts.text[i] = next;
        next += r.text_count;
        out.markers[i].text_end = next - 1;
        out.markers[i].round_end = next - 1;
    }
    auto markers = std::move(out.markers);
    out = detail::fill_assignment(trace, Strategy::interleaved, starts);
    out.markers = std::move(markers);
    return out;
}

/// Overlapped streaming allocation. V_1 occupies prompt_count..E_1; for each
/// round, A_i and V_{i+1} both start at E_i+1, and the marker advances as
/// E_{i+1} = E_i + max(m_{i+1}, k_i). The final answer segment follows the
/// same rule with no paired visual segment.
inline IndexAssignment allocate_ospe(const StreamTrace& trace) {
    validate(trace);
    const int n = static_cast<int>(trace.rounds.size());
    detail::SegmentStarts starts;
    starts.visual.resize(static_cast<std::size_t>(n));
    starts.text.resize(static_cast<std::size_t>(n));
    std::vector<std::int64_t> marker(static_cast<std::size_t>(n)); // E_i at [i-1]
    starts.visual[0] = trace.prompt_count;
    marker[0] = trace.prompt_count + trace.rounds[0].visual_count - 1;
    for (int i = 1; i <= n; ++i) {
        const std::size_t idx = static_cast<std::size_t>(i - 1);
        starts.text[idx] = marker[idx] + 1;
        if (i < n) {
            starts.visual[idx + 1] = marker[idx] + 1;
            const std::int64_t m_next = trace.rounds[idx + 1].visual_count;
            const std::int64_t k_cur = trace.rounds[idx].text_count;
            marker[idx + 1] = marker[idx] + std::max(m_next, k_cur);
        }
    }
    IndexAssignment out = detail::fill_assignment(trace, Strategy::ospe, starts);
    out.markers.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        out.markers[idx].visual_end = starts.visual[idx] + trace.rounds[idx].visual_count - 1;
        out.markers[idx].text_end = starts.text[idx] + trace.rounds[idx].text_count - 1;
        out.markers[idx].round_end = marker[idx];
    }
    return out;
}

/// Group-decoupled allocation: the input group (prompt plus every visual
/// segment) is numbered contiguously from 0, and the output group (every
/// answer segment) is numbered contiguously from 0, independently.
inline IndexAssignment allocate_gdpe(const StreamTrace& trace) {
    validate(trace);
    const int n = static_cast<int>(trace.rounds.size());
    detail::SegmentStarts starts;
    starts.visual.resize(static_cast<std::size_t>(n));
    starts.text.resize(static_cast<std::size_t>(n));
    IndexAssignment out;
    out.markers.resize(static_cast<std::size_t>(n));
    std::int64_t next_in = trace.prompt_count;
    std::int64_t next_out = 0;
    for (const Round& r : trace.rounds) {
        const std::size_t i = static_cast<std::size_t>(r.index - 1);
        starts.visual[i] = next_in;
        next_in += r.visual_count;
        starts.text[i] = next_out;
        next_out += r.text_count;
        out.markers[i].visual_end = next_in - 1;
        out.markers[i].text_end = next_out - 1;
        out.markers[i].round_end = next_in - 1;
    }
    auto markers = std::move(out.markers);
    out = detail::fill_assignment(trace, Strategy::gdpe, starts);
    out.markers = std::move(markers);
    return out;
}

/// Gap-isolated allocation: input indices equal GDPE's, output indices are
/// the GDPE output indices plus gap+1. If the input range reaches gap+1 the
/// two ranges are not disjoint; that raises the warning flag rather than an
/// error, because the strategy is defined by the offset rule alone.
inline IndexAssignment allocate_gipe(const StreamTrace& trace, std::int64_t gap = kDefaultGap) {
    if (gap < 0) {
        throw ValidationError("gap must be >= 0");
    }
    IndexAssignment out = allocate_gdpe(trace);
    out.strategy = Strategy::gipe;
    out.gap = gap;
    std::int64_t max_input = -1;
    bool any_output = false;
    for (std::size_t t = 0; t < out.tokens.size(); ++t) {
        if (out.tokens[t].group == Group::output) {
            out.indices[t] += gap + 1;
            any_output = true;
        } else {
            max_input = std::max(max_input, out.indices[t]);
        }
    }
    for (RoundMarkers& m : out.markers) {
        m.text_end += gap + 1;
    }
    out.gap_warning = any_output && max_input >= gap + 1;
    return out;
}

inline IndexAssignment allocate(const StreamTrace& trace, Strategy strategy,
                                std::int64_t gap = kDefaultGap) {
    switch (strategy) {
        case Strategy::interleaved: return allocate_interleaved(trace);
        case Strategy::ospe: return allocate_ospe(trace);
        case Strategy::gdpe: return allocate_gdpe(trace);
        case Strategy::gipe: return allocate_gipe(trace, gap);
    }
    throw ValidationError("unknown strategy");
}

/// Three-axis position of one token: temporal, row, column.
struct Position3D {
    std::int64_t t = 0;
    std::int64_t x = 0;
    std::int64_t y = 0;

    bool operator==(const Position3D&) const = default;
};

/// Patch grid of one visual frame.
struct FrameGrid {
    int rows = 0;
    int cols = 0;
};

/// Lifts scalar stream indices to the 3D convention: textual tokens (prompt
/// and output group) become (s, s, s); a visual token in frame f of its
/// segment with patch coordinates (r, c) becomes (frame_base, r, c), where
/// frame_base is the scalar index of that frame's first token. Visual
/// segments must be whole frames.
inline std::vector<Position3D> lift_to_3d(const IndexAssignment& assignment, FrameGrid grid,
                                          int tokens_per_frame) {
    if (grid.rows < 1 || grid.cols < 1) {
        throw ValidationError("frame grid must be at least 1x1");
    }
    if (tokens_per_frame != grid.rows * grid.cols) {
        throw ValidationError("tokens_per_frame (" + std::to_string(tokens_per_frame) +
                              ") != rows*cols (" + std::to_string(grid.rows * grid.cols) + ")");
    }
    // visual segment sizes, recovered from the tokens themselves
    std::vector<int> visual_size;
    for (const TokenRef& tok : assignment.tokens) {
        if (tok.group == Group::input && tok.round >= 1) {
            if (static_cast<int>(visual_size.size()) < tok.round) {
                visual_size.resize(static_cast<std::size_t>(tok.round), 0);
            }
            auto& sz = visual_size[static_cast<std::size_t>(tok.round - 1)];
            sz = std::max(sz, tok.offset + 1);
        }
    }
    for (std::size_t i = 0; i < visual_size.size(); ++i) {
        if (visual_size[i] % tokens_per_frame != 0) {
            throw ValidationError("visual segment of round " + std::to_string(i + 1) + " has " +
                                  std::to_string(visual_size[i]) +
                                  " tokens, not a multiple of tokens_per_frame " +
                                  std::to_string(tokens_per_frame));
        }
    }
    std::vector<Position3D> out(assignment.tokens.size());
    for (std::size_t t = 0; t < assignment.tokens.size(); ++t) {
        const TokenRef& tok = assignment.tokens[t];
        const std::int64_t s = assignment.indices[t];
        if (tok.group == Group::output || tok.is_prompt()) {
            out[t] = {s, s, s};
        } else {
            const int within = tok.offset % tokens_per_frame;
            out[t].t = s - within; // frame base: indices are consecutive in-segment
            out[t].x = within / grid.cols;
            out[t].y = within % grid.cols;
        }
    }
    return out;
}

} // namespace parstream
