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

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "parstream/parstream.hpp"

namespace {

using namespace parstream;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

FrameGrid parse_grid(const std::string& text) {
    const std::size_t x = text.find('x');
    if (x == std::string::npos) {
        throw ValidationError("grid must look like ROWSxCOLS, e.g. 2x2");
    }
    FrameGrid grid;
    try {
        grid.rows = std::stoi(text.substr(0, x));
        grid.cols = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
        throw ValidationError("grid must look like ROWSxCOLS, e.g. 2x2");
    }
    return grid;
}

void cmd_allocate(const std::string& trace_path, const std::string& strategy_name,
                  std::int64_t gap, const std::string& grid_text) {
    const StreamTrace trace = parse_trace(read_file(trace_path));
    const Strategy strategy = strategy_from_string(strategy_name);
    const IndexAssignment asg = allocate(trace, strategy, gap);
    if (asg.gap_warning) {
        std::cerr << "warning: input indices reach the output range; increase --gap\n";
    }
    std::vector<Position3D> lifted;
    const bool with_3d = !grid_text.empty();
    if (with_3d) {
        const FrameGrid grid = parse_grid(grid_text);
        lifted = lift_to_3d(asg, grid, grid.rows * grid.cols);
    }
    std::string out = with_3d ? "arrival,group,round,offset,index,t,x,y\n"
                              : "arrival,group,round,offset,index\n";
    for (std::size_t t = 0; t < asg.tokens.size(); ++t) {
        const TokenRef& tok = asg.tokens[t];
        out += std::to_string(tok.arrival);
        out += ',';
        out += to_string(tok.group);
        out += ',';
        out += std::to_string(tok.round);
        out += ',';
        out += std::to_string(tok.offset);
        out += ',';
        out += std::to_string(asg.indices[t]);
        if (with_3d) {
            out += ',';
            out += std::to_string(lifted[t].t);
            out += ',';
            out += std::to_string(lifted[t].x);
            out += ',';
            out += std::to_string(lifted[t].y);
        }
        out += '\n';
    }
    std::cout << out;
}

void cmd_mask(const std::string& trace_path, const std::string& paradigm,
              const std::string& emit) {
    const StreamTrace trace = parse_trace(read_file(trace_path));
    VisibilityMatrix m;
    if (paradigm == "interleaved") {
        m = build_interleaved_mask(trace);
    } else if (paradigm == "parallel") {
        m = build_parallel_mask(trace);
    } else {
        throw ValidationError("unknown paradigm '" + paradigm + "'");
    }
    if (emit == "grid") {
        std::cout << render_grid(m);
    } else if (emit == "csv") {
        const MaskStats stats = mask_stats(m);
        std::string out = "q,visible_count\n";
        for (std::size_t q = 0; q < stats.row_counts.size(); ++q) {
            out += std::to_string(q);
            out += ',';
            out += std::to_string(stats.row_counts[q]);
            out += '\n';
        }
        std::cout << out;
    } else {
        throw ValidationError("unknown emit format '" + emit + "'");
    }
}

void cmd_schedule(int frames, int k, bool random, std::uint64_t seed) {
    const std::vector<ScheduleStep> steps =
        random ? build_random_schedule(frames, k, seed) : build_waitk_schedule(frames, k);
    std::string out = "step,frames_in,tokens_out\n";
    for (const ScheduleStep& s : steps) {
        out += std::to_string(s.step);
        out += ',';
        out += std::to_string(s.frames_in);
        out += ',';
        out += std::to_string(s.tokens_out);
        out += '\n';
    }
    std::cout << out;
}

void cmd_filter(double duration, int tokens, int k, double fps) {
    SampleMeta meta;
    meta.duration_s = duration;
    meta.caption_tokens = tokens;
    meta.k = k;
    meta.fps = fps;
    const FilterDecision d = filter_sample(meta);
    if (d.keep) {
        std::cout << "keep\n";
    } else {
        std::cout << "discard:" << to_string(d.reason) << "\n";
    }
}

void cmd_simulate(const std::string& workload_path, double rv, double rt,
                  const std::string& policy_name) {
    const StreamTrace trace = parse_trace(read_file(workload_path));
    const Workload w = workload_from_trace(trace);
    const Throughput th{rv, rt};
    const PrefetchPolicy policy = prefetch_policy_from_string(policy_name);
    const LatencyReport rep = analyze(w, th, policy);
    std::string out = "step,visual_tokens,text_tokens,t_interleave,t_parallel,ratio,speedup\n";
    for (std::size_t i = 0; i < w.steps.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += std::to_string(w.steps[i].visual_tokens);
        out += ',';
        out += std::to_string(w.steps[i].text_tokens);
        out += ',';
        out += fmt(rep.step_interleave_s[i]);
        out += ',';
        out += fmt(rep.step_parallel_s[i]);
        out += ',';
        out += fmt(rep.step_ratio[i]);
        out += ',';
        out += fmt(rep.step_speedup[i]);
        out += '\n';
    }
    out += "\nmetric,value\n";
    out += "policy,";
    out += to_string(policy);
    out += '\n';
    out += "total_interleave," + fmt(rep.total_interleave_s) + "\n";
    out += "total_parallel_steady," + fmt(rep.total_parallel_s) + "\n";
    out += "total_simulated," + fmt(rep.simulated_total_s) + "\n";
    out += "measured_speedup," + fmt(rep.measured_speedup) + "\n";
    std::cout << out;
}

void cmd_sweep(double r_min, double r_max, int points, bool log_scale) {
    const std::vector<double> grid =
        log_scale ? log_spaced(r_min, r_max, points) : linear_spaced(r_min, r_max, points);
    const std::vector<SweepPoint> curve = sweep_speedup(grid);
    std::string out = "r,S\n";
    for (const SweepPoint& p : curve) {
        out += fmt(p.r);
        out += ',';
        out += fmt(p.s);
        out += '\n';
    }
    std::cout << out;
}

void cmd_verify(const std::string& trace_path, const std::string& strategy_name, int dim,
                std::uint64_t seed, std::int64_t gap, int& exit_code) {
    const StreamTrace trace = parse_trace(read_file(trace_path));
    const Strategy strategy = strategy_from_string(strategy_name);
    const HeadConfig cfg = HeadConfig::make(dim);
    const AttentionReport rep = allocator_attention_report(trace, strategy, cfg, seed, gap);
    std::string out = "invariant,status,max_deviation\n";
    for (const InvariantCheck& c : rep.checks) {
        out += c.name;
        out += ',';
        out += c.pass ? "pass" : "fail";
        out += ',';
        out += fmt(c.max_deviation);
        out += '\n';
    }
    std::cout << out;
    exit_code = rep.all_pass() ? 0 : 1;
}

void cmd_demo() {
    // showcase trace: two rounds, no prompt, small gap so numbers read well
    StreamTrace trace;
    trace.rounds = {{1, 3, 2}, {2, 2, 3}};
    const std::int64_t gap = 100;

    std::cout << "== token index assignment (rounds=[(3,2),(2,3)], gap=" << gap << ") ==\n";
    const IndexAssignment per_strategy[4] = {
        allocate_interleaved(trace),
        allocate_ospe(trace),
        allocate_gdpe(trace),
        allocate_gipe(trace, gap),
    };
    std::string out = "arrival,group,round,offset,interleaved,ospe,gdpe,gipe\n";
    for (std::size_t t = 0; t < per_strategy[0].tokens.size(); ++t) {
        const TokenRef& tok = per_strategy[0].tokens[t];
        out += std::to_string(tok.arrival);
        out += ',';
        out += to_string(tok.group);
        out += ',';
        out += std::to_string(tok.round);
        out += ',';
        out += std::to_string(tok.offset);
        for (const IndexAssignment& asg : per_strategy) {
            out += ',';
            out += std::to_string(asg.indices[t]);
        }
        out += '\n';
    }
    std::cout << out;

    std::cout << "\n== mask density ==\n";
    const MaskStats mi = mask_stats(build_interleaved_mask(trace));
    const MaskStats mp = mask_stats(build_parallel_mask(trace));
    std::cout << "paradigm,visible,total,density\n";
    std::cout << "interleaved," << mi.visible << "," << mi.total << "," << fmt(mi.density())
              << "\n";
    std::cout << "parallel," << mp.visible << "," << mp.total << "," << fmt(mp.density()) << "\n";

    std::cout << "\n== pipeline timing (10 steps, m=4, k=4, rv=1, rt=1) ==\n";
    Workload w;
    w.steps.assign(10, StepLoad{4, 4});
    const Throughput th{1.0, 1.0};
    const LatencyReport rep = analyze(w, th);
    std::cout << "interleave=" << fmt(rep.total_interleave_s) << "\n";
    std::cout << "parallel=" << fmt(rep.simulated_total_s) << "\n";
    std::cout << "speedup=" << fmt3(rep.measured_speedup) << "\n";

    std::cout << "\n== speedup sweep (201 log-spaced points, r in [0.01,100]) ==\n";
    const std::vector<SweepPoint> curve = sweep_speedup(log_spaced(0.01, 100.0, 201));
    std::size_t peak = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].s > curve[peak].s) {
            peak = i;
        }
    }
    std::cout << "r,S\n";
    std::cout << fmt(curve.front().r) << "," << fmt(curve.front().s) << "\n";
    std::cout << fmt(curve[peak].r) << "," << fmt(curve[peak].s) << "\n";
    std::cout << fmt(curve.back().r) << "," << fmt(curve.back().s) << "\n";
    std::cout << "peak: S=" << fmt(curve[peak].s) << " at r=" << fmt(curve[peak].r) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"positional-encoding and latency toolkit for parallel streaming inference"};
    app.require_subcommand(1);
    int exit_code = 0;

    // allocate
    auto* allocate_cmd = app.add_subcommand("allocate", "assign position indices to a trace");
    std::string alloc_trace;
    std::string alloc_strategy;
    std::int64_t alloc_gap = kDefaultGap;
    std::string alloc_grid;
    allocate_cmd->add_option("--trace", alloc_trace, "trace file")->required();
    allocate_cmd->add_option("--strategy", alloc_strategy, "interleaved|ospe|gdpe|gipe")
        ->required();
    allocate_cmd->add_option("--gap", alloc_gap, "gap for gap-isolated allocation");
    allocate_cmd->add_option("--grid", alloc_grid, "ROWSxCOLS patch grid: add 3D columns");
    allocate_cmd->callback(
        [&] { cmd_allocate(alloc_trace, alloc_strategy, alloc_gap, alloc_grid); });

    // mask
    auto* mask_cmd = app.add_subcommand("mask", "build a visibility mask for a trace");
    std::string mask_trace;
    std::string mask_paradigm;
    std::string mask_emit = "grid";
    mask_cmd->add_option("--trace", mask_trace, "trace file")->required();
    mask_cmd->add_option("--paradigm", mask_paradigm, "interleaved|parallel")->required();
    mask_cmd->add_option("--emit", mask_emit, "grid|csv (default grid)");
    mask_cmd->callback([&] { cmd_mask(mask_trace, mask_paradigm, mask_emit); });

    // schedule
    auto* schedule_cmd = app.add_subcommand("schedule", "emit a fixed-rate or disturbed schedule");
    int sched_frames = 0;
    int sched_k = 3;
    bool sched_random = false;
    std::uint64_t sched_seed = 0;
    schedule_cmd->add_option("--frames", sched_frames, "number of frames")->required();
    schedule_cmd->add_option("--k", sched_k, "tokens per step (default 3)");
    schedule_cmd->add_flag("--random", sched_random, "draw tokens_out uniformly from [0,2k]");
    schedule_cmd->add_option("--seed", sched_seed, "seed for --random (default 0)");
    schedule_cmd->callback([&] { cmd_schedule(sched_frames, sched_k, sched_random, sched_seed); });

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "decide whether a sample suits streaming");
    double filt_duration = 0.0;
    int filt_tokens = 0;
    int filt_k = 3;
    double filt_fps = 2.0;
    filter_cmd->add_option("--duration", filt_duration, "duration in seconds")->required();
    filter_cmd->add_option("--tokens", filt_tokens, "caption token count")->required();
    filter_cmd->add_option("--k", filt_k, "tokens per step (default 3)");
    filter_cmd->add_option("--fps", filt_fps, "frames per second (default 2)");
    filter_cmd->callback([&] { cmd_filter(filt_duration, filt_tokens, filt_k, filt_fps); });

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "time a workload under both paradigms");
    std::string sim_workload;
    double sim_rv = 1.0;
    double sim_rt = 1.0;
    std::string sim_policy = "paired";
    simulate_cmd->add_option("--workload", sim_workload, "workload file (trace format)")
        ->required();
    simulate_cmd->add_option("--rv", sim_rv, "visual tokens per second")->required();
    simulate_cmd->add_option("--rt", sim_rt, "text tokens per second")->required();
    simulate_cmd->add_option("--policy", sim_policy, "paired|unbounded|serialized");
    simulate_cmd->callback([&] { cmd_simulate(sim_workload, sim_rv, sim_rt, sim_policy); });

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "evaluate the speedup curve");
    double sweep_min = 0.01;
    double sweep_max = 100.0;
    int sweep_points = 201;
    bool sweep_log = false;
    sweep_cmd->add_option("--r-min", sweep_min, "lowest ratio")->required();
    sweep_cmd->add_option("--r-max", sweep_max, "highest ratio")->required();
    sweep_cmd->add_option("--points", sweep_points, "number of samples")->required();
    sweep_cmd->add_flag("--log", sweep_log, "log10 spacing");
    sweep_cmd->callback([&] { cmd_sweep(sweep_min, sweep_max, sweep_points, sweep_log); });

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "run the attention-invariant battery");
    std::string ver_trace;
    std::string ver_strategy;
    int ver_dim = 64;
    std::uint64_t ver_seed = 0;
    std::int64_t ver_gap = kDefaultGap;
    verify_cmd->add_option("--trace", ver_trace, "trace file")->required();
    verify_cmd->add_option("--strategy", ver_strategy, "interleaved|ospe|gdpe|gipe")->required();
    verify_cmd->add_option("--dim", ver_dim, "head dimension (default 64)");
    verify_cmd->add_option("--seed", ver_seed, "seed (default 0)");
    verify_cmd->add_option("--gap", ver_gap, "gap for gap-isolated allocation");
    verify_cmd->callback(
        [&] { cmd_verify(ver_trace, ver_strategy, ver_dim, ver_seed, ver_gap, exit_code); });

    // demo
    auto* demo_cmd = app.add_subcommand("demo", "deterministic showcase of every module");
    demo_cmd->callback([&] { cmd_demo(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const parstream::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
