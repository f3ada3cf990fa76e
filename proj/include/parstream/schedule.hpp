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
#include <random>
#include <string>
#include <vector>

#include "parstream/errors.hpp"
#include "parstream/random.hpp"
#include "parstream/stream.hpp"

namespace parstream {

/// One step of an emission schedule: how many frames arrive and how many
/// text tokens are emitted before the next frame is consumed.
struct ScheduleStep {
    int step = 0; ///< 0-based
    int frames_in = 0;
    int tokens_out = 0;

    bool operator==(const ScheduleStep&) const = default;
};

/// Fixed-rate schedule: one frame in, k tokens out, every step. Generation
/// stays exactly one frame behind perception throughout.
inline std::vector<ScheduleStep> build_waitk_schedule(int frames, int k) {
    if (frames < 1) {
        throw ValidationError("frames must be >= 1");
    }
    if (k < 1) {
        throw ValidationError("k must be >= 1");
    }
    std::vector<ScheduleStep> out(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) {
        out[static_cast<std::size_t>(i)] = {i, 1, k};
    }
    return out;
}

/// Disturbed schedule: one frame in per step, but tokens_out drawn uniformly
/// from [0, 2k] so the per-step emission count fluctuates around k. Useful
/// for checking that downstream consumers tolerate bursty emission.
inline std::vector<ScheduleStep> build_random_schedule(int frames, int k, std::uint64_t seed) {
    if (frames < 1) {
        throw ValidationError("frames must be >= 1");
    }
    if (k < 1) {
        throw ValidationError("k must be >= 1");
    }
    std::mt19937_64 eng(seed);
    std::vector<ScheduleStep> out(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) {
        const int tokens =
            static_cast<int>(detail::draw_int(eng, 0, 2 * static_cast<std::int64_t>(k)));
        out[static_cast<std::size_t>(i)] = {i, 1, tokens};
    }
    return out;
}

inline int total_tokens_out(const std::vector<ScheduleStep>& schedule) {
    int total = 0;
    for (const ScheduleStep& s : schedule) {
        total += s.tokens_out;
    }
    return total;
}

/// Converts a schedule into a stream trace: step i becomes round i with
/// frames_in * tokens_per_frame visual tokens and tokens_out text tokens.
inline StreamTrace schedule_to_trace(const std::vector<ScheduleStep>& schedule,
                                     int tokens_per_frame, int prompt_count = 0) {
    if (tokens_per_frame < 1) {
        throw ValidationError("tokens_per_frame must be >= 1");
    }
    StreamTrace trace;
    trace.prompt_count = prompt_count;
    trace.rounds.reserve(schedule.size());
    int round = 0;
    for (const ScheduleStep& s : schedule) {
        trace.rounds.push_back({++round, s.frames_in * tokens_per_frame, s.tokens_out});
    }
    validate(trace);
    return trace;
}

/// Why a training sample was discarded.
enum class DiscardReason : std::uint8_t {
    none,
    too_short,                ///< duration below the minimum
    too_long,                 ///< duration above the maximum
    insufficient_supervision, ///< caption shorter than the tokens the schedule will emit
    offline_like,             ///< caption more than twice the scheduled emission
};

inline const char* to_string(DiscardReason r) {
    switch (r) {
        case DiscardReason::none: return "none";
        case DiscardReason::too_short: return "too_short";
        case DiscardReason::too_long: return "too_long";
        case DiscardReason::insufficient_supervision: return "insufficient_supervision";
        case DiscardReason::offline_like: return "offline_like";
    }
    return "?";
}

/// Metadata of one candidate training sample.
struct SampleMeta {
    double duration_s = 0.0;
    int caption_tokens = 0;
    double fps = 2.0;
    int k = 3;
};

struct FilterDecision {
    bool keep = false;
    DiscardReason reason = DiscardReason::none;
    double expected_tokens = 0.0; ///< duration_s * k
};

/// Decides whether a sample suits fixed-rate streaming supervision.
/// Durations must lie in [5, 30] seconds (inclusive). With L caption tokens
/// and expected emission M = duration_s * k, the caption must satisfy
/// M <= L <= 2M (inclusive): shorter captions cannot supply k tokens per
/// step; captions beyond 2M resemble offline summaries rather than
/// commentary paced to the video.
inline FilterDecision filter_sample(const SampleMeta& meta) {
    if (meta.duration_s < 0 || meta.caption_tokens < 0 || meta.k < 0) {
        throw ValidationError("sample metadata must be non-negative");
    }
    FilterDecision d;
    d.expected_tokens = meta.duration_s * meta.k;
    if (meta.duration_s < 5.0) {
        d.reason = DiscardReason::too_short;
        return d;
    }
    if (meta.duration_s > 30.0) {
        d.reason = DiscardReason::too_long;
        return d;
    }
    const double tokens = static_cast<double>(meta.caption_tokens);
    if (tokens < d.expected_tokens) {
        d.reason = DiscardReason::insufficient_supervision;
        return d;
    }
    if (tokens > 2.0 * d.expected_tokens) {
        d.reason = DiscardReason::offline_like;
        return d;
    }
    d.keep = true;
    return d;
}

} // namespace parstream
