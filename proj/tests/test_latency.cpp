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

#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "parstream/latency.hpp"
#include "parstream/random.hpp"

using namespace parstream;

namespace {

Workload constant_workload(int n, std::int64_t m, std::int64_t k) {
    Workload w;
    w.steps.assign(static_cast<std::size_t>(n), StepLoad{m, k});
    return w;
}

/// Exact rates: every duration is a dyadic rational, so double sums are
/// exact and closed-form comparisons can use operator==.
const double kExactRates[] = {0.25, 0.5, 1.0, 2.0, 4.0};

Workload random_workload(std::mt19937_64& eng) {
    Workload w;
    const int n = static_cast<int>(detail::draw_int(eng, 1, 12));
    for (int i = 0; i < n; ++i) {
        w.steps.push_back({detail::draw_int(eng, 0, 6), detail::draw_int(eng, 0, 6)});
    }
    return w;
}

double closed_form_paired(const Workload& w, const Throughput& th) {
    const std::size_t n = w.steps.size();
    double total = perception_time(w.steps[0], th);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = generation_time(w.steps[i], th);
        const double a_next = i + 1 < n ? perception_time(w.steps[i + 1], th) : 0.0;
        total += std::max(b, a_next);
    }
    return total;
}

double closed_form_unbounded(const Workload& w, const Throughput& th) {
    // free-running perception: completion = max_i (A_i + sum_{j>=i} b_j)
    const std::size_t n = w.steps.size();
    std::vector<double> a_prefix(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += perception_time(w.steps[i], th);
        a_prefix[i] = acc;
    }
    double best = 0.0;
    double b_suffix = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        b_suffix += generation_time(w.steps[i], th);
        best = std::max(best, a_prefix[i] + b_suffix);
    }
    return best;
}

} // namespace

TEST_CASE("per-step durations follow the two models", "[latency]") {
    const Throughput unit{1.0, 1.0};
    CHECK(step_interleave({4, 4}, unit) == 8.0);
    CHECK(step_interleave({0, 3}, Throughput{1.0, 3.0}) == 1.0);
    CHECK(step_interleave({6, 3}, Throughput{2.0, 3.0}) == 4.0);
    CHECK(step_parallel({4, 4}, unit) == 4.0);
    CHECK(step_parallel({3, 1}, unit) == 3.0);
    CHECK(step_parallel({0, 0}, unit) == 0.0);
    CHECK_THROWS_AS(step_interleave({1, 1}, Throughput{0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(step_parallel({1, 1}, Throughput{1.0, -2.0}), ValidationError);
}

TEST_CASE("serialized totals sum the per-step durations", "[latency]") {
    const Throughput unit{1.0, 1.0};
    CHECK(total_interleave(constant_workload(10, 4, 4), unit) == 80.0);
    Workload two;
    two.steps = {{1, 10}, {10, 1}};
    CHECK(total_interleave(two, unit) == 22.0);
    CHECK_THROWS_AS(total_interleave(Workload{}, unit), ValidationError);
}

TEST_CASE("per-step speedup and ratio", "[latency]") {
    const Throughput unit{1.0, 1.0};
    CHECK(speedup({4, 4}, unit) == 2.0);
    CHECK(speedup({5, 0}, unit) == 1.0);
    CHECK(speedup({3, 1}, unit) == Catch::Approx(4.0 / 3.0));
    CHECK_THROWS_AS(speedup({0, 0}, unit), ValidationError);
    CHECK(workload_ratio({4, 4}, unit) == 1.0);
    CHECK(workload_ratio({8, 2}, unit) == 4.0);
    CHECK(workload_ratio({2, 8}, unit) == 0.25);
    CHECK(std::isinf(workload_ratio({3, 0}, unit)));
}

TEST_CASE("ratio-form speedup matches the curve's landmarks", "[latency]") {
    CHECK(speedup_from_ratio(1.0) == 2.0);
    CHECK(speedup_from_ratio(0.1) == Catch::Approx(1.1).margin(1e-9));
    CHECK(speedup_from_ratio(10.0) == Catch::Approx(1.1).margin(1e-9));
    CHECK(speedup_from_ratio(1000.0) == Catch::Approx(1.001).margin(1e-9));
    CHECK(speedup_from_ratio(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK_THROWS_AS(speedup_from_ratio(-0.5), ValidationError);
}

TEST_CASE("pipeline simulation golden totals", "[latency]") {
    const Throughput unit{1.0, 1.0};
    const Workload w10 = constant_workload(10, 4, 4);
    CHECK(simulate_pipeline(w10, unit) == 44.0);
    const LatencyReport rep = analyze(w10, unit);
    CHECK(rep.total_interleave_s == 80.0);
    CHECK(rep.total_parallel_s == 40.0);
    CHECK(rep.simulated_total_s == 44.0);
    CHECK(rep.measured_speedup == Catch::Approx(80.0 / 44.0));

    Workload two;
    two.steps = {{1, 10}, {10, 1}};
    CHECK(simulate_pipeline(two, unit) == 12.0);
}

TEST_CASE("one-round pipelines cannot overlap", "[latency]") {
    const Throughput th{2.0, 4.0};
    Workload one;
    one.steps = {{6, 8}};
    CHECK(simulate_pipeline(one, th) == step_interleave({6, 8}, th));
}

TEST_CASE("prefetch policies order the completion times", "[latency]") {
    const Throughput unit{1.0, 1.0};
    // workload where one-ahead pairing and free-running prefetch differ
    Workload w;
    w.steps = {{1, 10}, {1, 1}, {10, 1}};
    CHECK(simulate_pipeline(w, unit, PrefetchPolicy::unbounded) == 13.0);
    CHECK(simulate_pipeline(w, unit, PrefetchPolicy::paired) == 22.0);
    CHECK(simulate_pipeline(w, unit, PrefetchPolicy::serialized) == 24.0);
}

TEST_CASE("paired simulation equals its closed form on random workloads", "[latency]") {
    std::mt19937_64 eng(2026);
    for (int it = 0; it < 1000; ++it) {
        const Workload w = random_workload(eng);
        const Throughput th{kExactRates[detail::draw_below(eng, 5)],
                            kExactRates[detail::draw_below(eng, 5)]};
        const double sim = simulate_pipeline(w, th, PrefetchPolicy::paired);
        REQUIRE(sim == closed_form_paired(w, th));
        REQUIRE(sim <= total_interleave(w, th));
    }
}

TEST_CASE("unbounded simulation equals the max-plus closed form", "[latency]") {
    std::mt19937_64 eng(4052);
    for (int it = 0; it < 1000; ++it) {
        const Workload w = random_workload(eng);
        const Throughput th{kExactRates[detail::draw_below(eng, 5)],
                            kExactRates[detail::draw_below(eng, 5)]};
        REQUIRE(simulate_pipeline(w, th, PrefetchPolicy::unbounded) ==
                closed_form_unbounded(w, th));
    }
}

TEST_CASE("serialized simulation reproduces the serialized total", "[latency]") {
    std::mt19937_64 eng(99);
    for (int it = 0; it < 1000; ++it) {
        const Workload w = random_workload(eng);
        const Throughput th{kExactRates[detail::draw_below(eng, 5)],
                            kExactRates[detail::draw_below(eng, 5)]};
        REQUIRE(simulate_pipeline(w, th, PrefetchPolicy::serialized) ==
                total_interleave(w, th));
    }
}

TEST_CASE("looser prefetch policies never finish later", "[latency]") {
    std::mt19937_64 eng(123);
    for (int it = 0; it < 1000; ++it) {
        const Workload w = random_workload(eng);
        const Throughput th{kExactRates[detail::draw_below(eng, 5)],
                            kExactRates[detail::draw_below(eng, 5)]};
        const double unbounded = simulate_pipeline(w, th, PrefetchPolicy::unbounded);
        const double paired = simulate_pipeline(w, th, PrefetchPolicy::paired);
        const double serialized = simulate_pipeline(w, th, PrefetchPolicy::serialized);
        REQUIRE(unbounded <= paired);
        REQUIRE(paired <= serialized);
    }
}

TEST_CASE("constant workloads pay exactly one fill term", "[latency]") {
    for (double rv : kExactRates) {
        for (double rt : kExactRates) {
            for (std::int64_t m = 1; m <= 4; ++m) {
                for (std::int64_t k = 1; k <= 4; ++k) {
                    const Throughput th{rv, rt};
                    const Workload w = constant_workload(8, m, k);
                    const double a = perception_time({m, k}, th);
                    const double b = generation_time({m, k}, th);
                    const double sim = simulate_pipeline(w, th);
                    REQUIRE(sim - total_parallel_steady(w, th) == std::min(a, b));
                }
            }
        }
    }
}

TEST_CASE("per-step speedups stay within [1, 2]", "[latency]") {
    std::mt19937_64 eng(555);
    for (int it = 0; it < 300; ++it) {
        const Workload w = random_workload(eng);
        const Throughput th{kExactRates[detail::draw_below(eng, 5)],
                            kExactRates[detail::draw_below(eng, 5)]};
        const LatencyReport rep = analyze(w, th);
        REQUIRE(rep.total_interleave_s >= rep.total_parallel_s);
        for (std::size_t i = 0; i < w.steps.size(); ++i) {
            if (rep.step_interleave_s[i] > 0.0) {
                REQUIRE(rep.step_speedup[i] >= 1.0);
                REQUIRE(rep.step_speedup[i] <= 2.0);
            } else {
                REQUIRE(std::isnan(rep.step_speedup[i]));
            }
        }
    }
}

TEST_CASE("traces fold their prompt into the first step", "[latency]") {
    StreamTrace t;
    t.prompt_count = 2;
    t.rounds = {{1, 3, 2}, {2, 2, 3}};
    const Workload w = workload_from_trace(t);
    REQUIRE(w.steps.size() == 2);
    CHECK(w.steps[0] == StepLoad{5, 2});
    CHECK(w.steps[1] == StepLoad{2, 3});
}

TEST_CASE("sweep grids hit their endpoints and the balanced point", "[latency]") {
    const std::vector<double> lin = linear_spaced(0.0, 10.0, 11);
    CHECK(lin.front() == 0.0);
    CHECK(lin.back() == 10.0);
    CHECK(lin[5] == 5.0);

    const std::vector<double> grid = log_spaced(0.01, 100.0, 201);
    REQUIRE(grid.size() == 201);
    CHECK(grid[100] == 1.0); // exact midpoint of the symmetric range
    CHECK(grid.front() == Catch::Approx(0.01).margin(1e-12));
    CHECK(grid.back() == Catch::Approx(100.0).margin(1e-9));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        REQUIRE(grid[i] > grid[i - 1]);
    }
    CHECK_THROWS_AS(log_spaced(0.0, 10.0, 5), ValidationError);
    CHECK_THROWS_AS(linear_spaced(0.0, 1.0, 1), ValidationError);
}

TEST_CASE("sweep evaluates the curve and rejects bad ratios", "[latency]") {
    const auto curve = sweep_speedup(log_spaced(0.01, 100.0, 201));
    REQUIRE(curve.size() == 201);
    CHECK(curve[100].r == 1.0);
    CHECK(curve[100].s == 2.0);
    // strictly increasing up to the peak, strictly decreasing after
    for (std::size_t i = 1; i <= 100; ++i) {
        REQUIRE(curve[i].s > curve[i - 1].s);
    }
    for (std::size_t i = 101; i < curve.size(); ++i) {
        REQUIRE(curve[i].s < curve[i - 1].s);
    }
    CHECK_THROWS_AS(sweep_speedup({1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(sweep_speedup({-1.0}), ValidationError);
}

TEST_CASE("policy names round-trip", "[latency]") {
    CHECK(prefetch_policy_from_string("paired") == PrefetchPolicy::paired);
    CHECK(prefetch_policy_from_string("unbounded") == PrefetchPolicy::unbounded);
    CHECK(prefetch_policy_from_string("serialized") == PrefetchPolicy::serialized);
    CHECK_THROWS_AS(prefetch_policy_from_string("eager"), ValidationError);
}
