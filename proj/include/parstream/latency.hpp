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
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "parstream/errors.hpp"
#include "parstream/stream.hpp"

namespace parstream {

/// Sustained processing rates of the two engine resources, in tokens/second.
struct Throughput {
    double visual_rate = 1.0;
    double text_rate = 1.0;
};

inline void validate(const Throughput& th) {
    if (!(th.visual_rate > 0.0) || !(th.text_rate > 0.0)) {
        throw ValidationError("throughput rates must be strictly positive");
    }
}

/// Token counts of one streaming step: visual tokens to perceive, text
/// tokens to generate.
struct StepLoad {
    std::int64_t visual_tokens = 0;
    std::int64_t text_tokens = 0;

    bool operator==(const StepLoad&) const = default;
};

/// A whole run: one StepLoad per step.
struct Workload {
    std::vector<StepLoad> steps;
};

inline void validate(const Workload& w) {
    if (w.steps.empty()) {
        throw ValidationError("workload has no steps");
    }
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        if (w.steps[i].visual_tokens < 0 || w.steps[i].text_tokens < 0) {
            throw ValidationError("step " + std::to_string(i + 1) + " has a negative count");
        }
    }
}

/// Reinterprets a stream trace as a workload. The prompt, which is prefilled
/// before the first answer, is folded into step 1's visual load.
inline Workload workload_from_trace(const StreamTrace& trace) {
    validate(trace);
    Workload w;
    w.steps.reserve(trace.rounds.size());
    for (const Round& r : trace.rounds) {
        w.steps.push_back({r.visual_count, r.text_count});
    }
    w.steps[0].visual_tokens += trace.prompt_count;
    return w;
}

inline double perception_time(StepLoad s, const Throughput& th) {
    return static_cast<double>(s.visual_tokens) / th.visual_rate;
}

inline double generation_time(StepLoad s, const Throughput& th) {
    return static_cast<double>(s.text_tokens) / th.text_rate;
}

/// Duration of one step when perception and generation run back to back.
inline double step_interleave(StepLoad s, const Throughput& th) {
    validate(th);
    return perception_time(s, th) + generation_time(s, th);
}

/// Total duration of a serialized run: the sum of the per-step durations.
inline double total_interleave(const Workload& w, const Throughput& th) {
    validate(w);
    validate(th);
    double total = 0.0;
    for (StepLoad s : w.steps) {
        total += step_interleave(s, th);
    }
    return total;
}

/// Steady-state duration of one step when perception and generation overlap
/// perfectly: the slower of the two sides.
inline double step_parallel(StepLoad s, const Throughput& th) {
    validate(th);
    return std::max(perception_time(s, th), generation_time(s, th));
}

/// Steady-state total: the sum of per-step maxima. This ignores the pipeline
/// fill (the first perception has nothing to overlap with); the simulator
/// below reports the exact total including that term.
inline double total_parallel_steady(const Workload& w, const Throughput& th) {
    validate(w);
    validate(th);
    double total = 0.0;
    for (StepLoad s : w.steps) {
        total += step_parallel(s, th);
    }
    return total;
}

/// Perception-to-generation time ratio of one step. A step with no text
/// tokens has nothing on the generation side, reported as +infinity rather
/// than an error so sweeps over mixed workloads need no special casing.
inline double workload_ratio(StepLoad s, const Throughput& th) {
    validate(th);
    const double b = generation_time(s, th);
    if (b == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return perception_time(s, th) / b;
}

/// Per-step speedup of overlapped over serialized execution as a function
/// of the time ratio r: (1+r)/max(1,r). Peaks at 2 when r=1 and approaches
/// 1 in both starved limits (r -> 0 and r -> infinity).
inline double speedup_from_ratio(double r) {
    if (std::isnan(r) || r < 0.0) {
        throw ValidationError("ratio must be non-negative");
    }
    if (std::isinf(r)) {
        return 1.0;
    }
    return (1.0 + r) / std::max(1.0, r);
}

/// Per-step speedup (a+b)/max(a,b) for a concrete step. Undefined when the
/// step is empty.
inline double speedup(StepLoad s, const Throughput& th) {
    validate(th);
    const double a = perception_time(s, th);
    const double b = generation_time(s, th);
    if (a + b == 0.0) {
        throw ValidationError("speedup is undefined for an empty step");
    }
    return (a + b) / std::max(a, b);
}

/// How far perception may run ahead of generation in the pipeline simulator.
///
/// - paired: perception of step i+1 overlaps generation of step i and no
///   further — step j's perception waits for step j-2's generation. The
///   resulting total has the closed form a_1 + sum_i max(b_i, a_{i+1}).
/// - unbounded: perception is serialized only against itself and may run
///   arbitrarily far ahead (infinite prefetch buffer).
/// - serialized: perception of step j waits for generation of step j-1;
///   this reproduces the back-to-back total exactly.
enum class PrefetchPolicy : std::uint8_t { paired, unbounded, serialized };

inline const char* to_string(PrefetchPolicy p) {
    switch (p) {
        case PrefetchPolicy::paired: return "paired";
        case PrefetchPolicy::unbounded: return "unbounded";
        case PrefetchPolicy::serialized: return "serialized";
    }
    return "?";
}

inline PrefetchPolicy prefetch_policy_from_string(std::string_view name) {
    if (name == "paired") return PrefetchPolicy::paired;
    if (name == "unbounded") return PrefetchPolicy::unbounded;
    if (name == "serialized") return PrefetchPolicy::serialized;
    throw ValidationError("unknown prefetch policy '" + std::string(name) + "'");
}

namespace detail {

/// Two-resource discrete-event pipeline. Tasks 2i / 2i+1 are step i's
/// perception / generation. Each resource runs one task at a time; a task
/// becomes ready when all its predecessors have finished, and a freed
/// resource immediately starts the oldest ready task.
inline double run_pipeline(const std::vector<double>& a, const std::vector<double>& b,
                           PrefetchPolicy policy) {
    const std::size_t n = a.size();
    const std::size_t tasks = 2 * n;
    auto perception = [](std::size_t step) { return 2 * step; };
    auto generation = [](std::size_t step) { return 2 * step + 1; };

    std::vector<std::vector<std::uint32_t>> dependents(tasks);
    std::vector<int> pending(tasks, 0);
    auto add_edge = [&](std::size_t from, std::size_t to) {
        dependents[from].push_back(static_cast<std::uint32_t>(to));
        ++pending[to];
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            add_edge(perception(i - 1), perception(i));
            add_edge(generation(i - 1), generation(i));
        }
        add_edge(perception(i), generation(i));
        switch (policy) {
            case PrefetchPolicy::paired:
                if (i >= 2) add_edge(generation(i - 2), perception(i));
                break;
            case PrefetchPolicy::serialized:
                if (i >= 1) add_edge(generation(i - 1), perception(i));
                break;
            case PrefetchPolicy::unbounded:
                break;
        }
    }

    struct Event {
        double time;
        std::uint64_t seq;
        std::uint32_t task;
        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    std::array<std::queue<std::uint32_t>, 2> ready; // [0]=perception, [1]=generation
    std::array<bool, 2> busy = {false, false};
    std::uint64_t seq = 0;

    auto duration_of = [&](std::uint32_t task) {
        return task % 2 == 0 ? a[task / 2] : b[task / 2];
    };
    auto resource_of = [](std::uint32_t task) { return task % 2; };
    auto try_start = [&](unsigned res, double now) {
        if (!busy[res] && !ready[res].empty()) {
            const std::uint32_t task = ready[res].front();
            ready[res].pop();
            busy[res] = true;
            events.push({now + duration_of(task), seq++, task});
        }
    };

    for (std::uint32_t t = 0; t < tasks; ++t) {
        if (pending[t] == 0) {
            ready[resource_of(t)].push(t);
        }
    }
    try_start(0, 0.0);
    try_start(1, 0.0);

    double finish_last_generation = 0.0;
    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        busy[resource_of(ev.task)] = false;
        if (ev.task == generation(n - 1)) {
            finish_last_generation = ev.time;
        }
        for (std::uint32_t dep : dependents[ev.task]) {
            if (--pending[dep] == 0) {
                ready[resource_of(dep)].push(dep);
            }
        }
        try_start(0, ev.time);
        try_start(1, ev.time);
    }
    return finish_last_generation;
}

} // namespace detail

/// Exact completion time of the whole run under the given prefetch policy:
/// the instant the last step's generation finishes.
inline double simulate_pipeline(const Workload& w, const Throughput& th,
                                PrefetchPolicy policy = PrefetchPolicy::paired) {
    validate(w);
    validate(th);
    const std::size_t n = w.steps.size();
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = perception_time(w.steps[i], th);
        b[i] = generation_time(w.steps[i], th);
    }
    return detail::run_pipeline(a, b, policy);
}

/// Per-step and total timing of a workload under both execution models.
struct LatencyReport {
    PrefetchPolicy policy = PrefetchPolicy::paired;
    std::vector<double> step_interleave_s;
    std::vector<double> step_parallel_s;
    std::vector<double> step_ratio;   ///< +inf where the step has no text
    std::vector<double> step_speedup; ///< NaN where the step is empty
    double total_interleave_s = 0.0;
    double total_parallel_s = 0.0;  ///< steady-state sum of per-step maxima
    double simulated_total_s = 0.0; ///< exact pipeline completion time
    double measured_speedup = 1.0;  ///< total_interleave_s / simulated_total_s
};

inline LatencyReport analyze(const Workload& w, const Throughput& th,
                             PrefetchPolicy policy = PrefetchPolicy::paired) {
    validate(w);
    validate(th);
    LatencyReport rep;
    rep.policy = policy;
    rep.step_interleave_s.reserve(w.steps.size());
    rep.step_parallel_s.reserve(w.steps.size());
    rep.step_ratio.reserve(w.steps.size());
    rep.step_speedup.reserve(w.steps.size());
    for (StepLoad s : w.steps) {
        const double ti = step_interleave(s, th);
        const double tp = step_parallel(s, th);
        rep.step_interleave_s.push_back(ti);
        rep.step_parallel_s.push_back(tp);
        rep.step_ratio.push_back(workload_ratio(s, th));
        rep.step_speedup.push_back(ti > 0.0 ? speedup(s, th)
                                            : std::numeric_limits<double>::quiet_NaN());
        rep.total_interleave_s += ti;
        rep.total_parallel_s += tp;
    }
    rep.simulated_total_s = simulate_pipeline(w, th, policy);
    rep.measured_speedup =
        rep.simulated_total_s > 0.0 ? rep.total_interleave_s / rep.simulated_total_s : 1.0;
    return rep;
}

/// One sample of the speedup curve.
struct SweepPoint {
    double r = 0.0;
    double s = 0.0;
};

/// Evaluates the speedup curve at the given ratios.
inline std::vector<SweepPoint> sweep_speedup(const std::vector<double>& r_values) {
    std::vector<SweepPoint> out;
    out.reserve(r_values.size());
    for (double r : r_values) {
        if (!(r > 0.0)) {
            throw ValidationError("sweep ratios must be strictly positive");
        }
        out.push_back({r, speedup_from_ratio(r)});
    }
    return out;
}

/// n points from lo to hi, endpoints included.
inline std::vector<double> linear_spaced(double lo, double hi, int n) {
    if (n < 2) {
        throw ValidationError("need at least 2 points");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    const double span = hi - lo;
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            lo + span * (static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

/// n points from lo to hi spaced evenly in log10, endpoints included. The
/// exponent is interpolated as e_lo + span*(i/(n-1)) so that symmetric
/// ranges hit their midpoint exactly (e.g. 0.01..100 contains exactly 1).
inline std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > 0.0)) {
        throw ValidationError("log spacing needs positive bounds");
    }
    if (n < 2) {
        throw ValidationError("need at least 2 points");
    }
    const double e_lo = std::log10(lo);
    const double e_hi = std::log10(hi);
    std::vector<double> out(static_cast<std::size_t>(n));
    const double span = e_hi - e_lo;
    for (int i = 0; i < n; ++i) {
        const double e = e_lo + span * (static_cast<double>(i) / static_cast<double>(n - 1));
        out[static_cast<std::size_t>(i)] = std::pow(10.0, e);
    }
    return out;
}

} // namespace parstream
