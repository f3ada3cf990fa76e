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

#include <charconv>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "parstream/errors.hpp"
#include "parstream/random.hpp"

namespace parstream {

/// Which stream a token belongs to. Visual segments and the leading prompt
/// are consumed (input); answer segments are generated (output).
enum class Group : std::uint8_t { input, output };

inline const char* to_string(Group g) {
    return g == Group::input ? "input" : "output";
}

/// One perception/generation round: a visual segment of `visual_count`
/// tokens followed by an answer segment of `text_count` tokens.
struct Round {
    int index = 0;        ///< 1-based round number
    int visual_count = 0; ///< m_i
    int text_count = 0;   ///< k_i

    bool operator==(const Round&) const = default;
};

/// The abstract video-text stream: an optional prompt prefix and an ordered
/// list of rounds. Immutable by convention after construction.
struct StreamTrace {
    int prompt_count = 0;
    std::vector<Round> rounds;

    bool operator==(const StreamTrace&) const = default;

    int total_tokens() const {
        int n = prompt_count;
        for (const Round& r : rounds) {
            n += r.visual_count + r.text_count;
        }
        return n;
    }
};

/// Stable identity of one token inside a trace. Prompt tokens are
/// input-group, round 0. Arrival order is prompt, V1, A1, V2, A2, ...
struct TokenRef {
    Group group = Group::input;
    int round = 0;
    int offset = 0;
    int arrival = 0;

    bool operator==(const TokenRef&) const = default;

    bool is_prompt() const { return group == Group::input && round == 0; }
};

/// Throws ValidationError unless the trace satisfies every documented
/// invariant (non-empty rounds, consecutive 1-based indices, non-negative
/// counts with at least one positive per round).
inline void validate(const StreamTrace& trace) {
    if (trace.prompt_count < 0) {
        throw ValidationError("negative prompt count");
    }
    if (trace.rounds.empty()) {
        throw ValidationError("trace has no rounds");
    }
    int expected = 1;
    for (const Round& r : trace.rounds) {
        if (r.index != expected) {
            throw ValidationError("non-consecutive round index: expected " +
                                  std::to_string(expected) + ", got " + std::to_string(r.index));
        }
        if (r.visual_count < 0 || r.text_count < 0) {
            throw ValidationError("round " + std::to_string(r.index) + " has a negative count");
        }
        if (r.visual_count == 0 && r.text_count == 0) {
            throw ValidationError("round " + std::to_string(r.index) + " is empty");
        }
        ++expected;
    }
}

/// Segment size of (group, round) within a trace; round 0 input is the prompt.
inline int segment_size(const StreamTrace& trace, Group group, int round) {
    if (round == 0) {
        return group == Group::input ? trace.prompt_count : 0;
    }
    if (round < 1 || round > static_cast<int>(trace.rounds.size())) {
        return 0;
    }
    const Round& r = trace.rounds[static_cast<std::size_t>(round - 1)];
    return group == Group::input ? r.visual_count : r.text_count;
}

/// All tokens of a trace in arrival order. The arrival fields are the
/// positions 0..total_tokens-1 in order prompt, V1, A1, V2, A2, ...
inline std::vector<TokenRef> enumerate_tokens(const StreamTrace& trace) {
    validate(trace);
    std::vector<TokenRef> tokens;
    tokens.reserve(static_cast<std::size_t>(trace.total_tokens()));
    int arrival = 0;
    for (int o = 0; o < trace.prompt_count; ++o) {
        tokens.push_back({Group::input, 0, o, arrival++});
    }
    for (const Round& r : trace.rounds) {
        for (int o = 0; o < r.visual_count; ++o) {
            tokens.push_back({Group::input, r.index, o, arrival++});
        }
        for (int o = 0; o < r.text_count; ++o) {
            tokens.push_back({Group::output, r.index, o, arrival++});
        }
    }
    return tokens;
}

namespace detail {

inline int parse_int_field(std::string_view field, int line_no) {
    int value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": expected a non-negative integer, got '" +
                         std::string(field) + "'");
    }
    if (value < 0) {
        throw ParseError("line " + std::to_string(line_no) + ": negative value");
    }
    return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

} // namespace detail

/// Parses the line-delimited trace format: an optional first line
/// `prompt,<n>` followed by one `round,visual_count,text_count` line per
/// round. Rounds must be consecutive starting at 1.
inline StreamTrace parse_trace(std::string_view text) {
    StreamTrace trace;
    int line_no = 0;
    bool first_content_line = true;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (first_content_line && fields.size() == 2 && fields[0] == "prompt") {
            trace.prompt_count = detail::parse_int_field(fields[1], line_no);
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        if (fields.size() != 3) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 'round,visual_count,text_count'");
        }
        Round r;
        r.index = detail::parse_int_field(fields[0], line_no);
        r.visual_count = detail::parse_int_field(fields[1], line_no);
        r.text_count = detail::parse_int_field(fields[2], line_no);
        trace.rounds.push_back(r);
    }
    validate(trace);
    return trace;
}

/// Inverse of parse_trace. Lines joined by LF with no trailing newline, so
/// parse_trace(emit_trace(t)) == t for every valid trace.
inline std::string emit_trace(const StreamTrace& trace) {
    validate(trace);
    std::string out;
    if (trace.prompt_count > 0) {
        out += "prompt," + std::to_string(trace.prompt_count);
    }
    for (const Round& r : trace.rounds) {
        if (!out.empty()) {
            out += '\n';
        }
        out += std::to_string(r.index) + ',' + std::to_string(r.visual_count) + ',' +
               std::to_string(r.text_count);
    }
    return out;
}

/// Deterministic randomized trace for property tests: m_i uniform in
/// 1..max_m, k_i uniform in 0..max_k.
inline StreamTrace synthesize_trace(std::uint64_t seed, int rounds, int max_m, int max_k) {
    if (rounds < 1) {
        throw ValidationError("synthesize_trace: rounds must be >= 1");
    }
    if (max_m < 1) {
        throw ValidationError("synthesize_trace: max_m must be >= 1");
    }
    if (max_k < 0) {
        throw ValidationError("synthesize_trace: max_k must be >= 0");
    }
    std::mt19937_64 eng(seed);
    StreamTrace trace;
    trace.rounds.reserve(static_cast<std::size_t>(rounds));
    for (int i = 1; i <= rounds; ++i) {
        Round r;
        r.index = i;
        r.visual_count = static_cast<int>(detail::draw_int(eng, 1, max_m));
        r.text_count = static_cast<int>(detail::draw_int(eng, 0, max_k));
        trace.rounds.push_back(r);
    }
    return trace;
}

} // namespace parstream
