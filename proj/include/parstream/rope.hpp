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
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "parstream/errors.hpp"
#include "parstream/mask.hpp"
#include "parstream/position.hpp"
#include "parstream/random.hpp"
#include "parstream/stream.hpp"

namespace parstream {

/// Rotary attention-head geometry. `sections` splits the dim/2 rotation
/// pairs into three contiguous blocks that rotate by the temporal, row, and
/// column coordinate respectively in the 3D variant; the scalar variant
/// rotates every pair by the same index. All pairs share one frequency
/// ladder theta_j = base^(-2j/dim).
struct HeadConfig {
    int dim = 64;
    double base = 10000.0;
    std::array<int, 3> sections = {16, 8, 8};

    static HeadConfig make(int dim, double base = 10000.0) {
        HeadConfig cfg;
        cfg.dim = dim;
        cfg.base = base;
        const int pairs = dim / 2;
        cfg.sections[0] = pairs / 2;
        cfg.sections[1] = pairs / 4;
        cfg.sections[2] = pairs - cfg.sections[0] - cfg.sections[1];
        return cfg;
    }
};

inline void validate(const HeadConfig& cfg) {
    if (cfg.dim < 2 || cfg.dim % 2 != 0) {
        throw ValidationError("head dim must be even and >= 2");
    }
    if (!(cfg.base > 0.0)) {
        throw ValidationError("frequency base must be positive");
    }
    int sum = 0;
    for (int s : cfg.sections) {
        if (s < 0) {
            throw ValidationError("sections must be non-negative");
        }
        sum += s;
    }
    if (sum != cfg.dim / 2) {
        throw ValidationError("sections must sum to dim/2");
    }
}

namespace detail {

inline double pair_theta(const HeadConfig& cfg, int j) {
    return std::pow(cfg.base, -2.0 * static_cast<double>(j) / static_cast<double>(cfg.dim));
}

/// Index that drives rotation pair j in the 3D variant.
inline double axis_index(const HeadConfig& cfg, int j, const Position3D& p) {
    if (j < cfg.sections[0]) {
        return static_cast<double>(p.t);
    }
    if (j < cfg.sections[0] + cfg.sections[1]) {
        return static_cast<double>(p.x);
    }
    return static_cast<double>(p.y);
}

} // namespace detail

/// Rotates consecutive pairs (v_{2j}, v_{2j+1}) by angle index * theta_j.
inline std::vector<double> rope_rotate(const std::vector<double>& v, double index,
                                       const HeadConfig& cfg) {
    validate(cfg);
    if (static_cast<int>(v.size()) != cfg.dim) {
        throw ValidationError("vector length != head dim");
    }
    std::vector<double> out(v.size());
    for (int j = 0; j < cfg.dim / 2; ++j) {
        const double angle = index * detail::pair_theta(cfg, j);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double x = v[static_cast<std::size_t>(2 * j)];
        const double y = v[static_cast<std::size_t>(2 * j + 1)];
        out[static_cast<std::size_t>(2 * j)] = x * c - y * s;
        out[static_cast<std::size_t>(2 * j + 1)] = x * s + y * c;
    }
    return out;
}

/// Rotates pair j by the coordinate its section selects (t, x, or y).
inline std::vector<double> rope_rotate3d(const std::vector<double>& v, const Position3D& pos,
                                         const HeadConfig& cfg) {
    validate(cfg);
    if (static_cast<int>(v.size()) != cfg.dim) {
        throw ValidationError("vector length != head dim");
    }
    std::vector<double> out(v.size());
    for (int j = 0; j < cfg.dim / 2; ++j) {
        const double angle = detail::axis_index(cfg, j, pos) * detail::pair_theta(cfg, j);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double x = v[static_cast<std::size_t>(2 * j)];
        const double y = v[static_cast<std::size_t>(2 * j + 1)];
        out[static_cast<std::size_t>(2 * j)] = x * c - y * s;
        out[static_cast<std::size_t>(2 * j + 1)] = x * s + y * c;
    }
    return out;
}

/// Attention logit of a query/key pair at scalar positions: the dot product
/// of the rotated vectors. Depends only on pos_q - pos_k for fixed q, k.
inline double score(const std::vector<double>& q, const std::vector<double>& k, double pos_q,
                    double pos_k, const HeadConfig& cfg) {
    if (q.size() != k.size()) {
        throw ValidationError("query/key dimension mismatch");
    }
    const std::vector<double> rq = rope_rotate(q, pos_q, cfg);
    const std::vector<double> rk = rope_rotate(k, pos_k, cfg);
    double dot = 0.0;
    for (std::size_t i = 0; i < rq.size(); ++i) {
        dot += rq[i] * rk[i];
    }
    return dot;
}

/// 3D-sectioned variant; depends only on the component-wise differences.
inline double score3d(const std::vector<double>& q, const std::vector<double>& k,
                      const Position3D& pos_q, const Position3D& pos_k, const HeadConfig& cfg) {
    if (q.size() != k.size()) {
        throw ValidationError("query/key dimension mismatch");
    }
    const std::vector<double> rq = rope_rotate3d(q, pos_q, cfg);
    const std::vector<double> rk = rope_rotate3d(k, pos_k, cfg);
    double dot = 0.0;
    for (std::size_t i = 0; i < rq.size(); ++i) {
        dot += rq[i] * rk[i];
    }
    return dot;
}

/// Per-token query/key vectors drawn from a seeded standard normal.
struct TokenVectors {
    std::vector<std::vector<double>> q;
    std::vector<std::vector<double>> k;
};

inline TokenVectors draw_token_vectors(int count, int dim, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    TokenVectors out;
    out.q.resize(static_cast<std::size_t>(count));
    out.k.resize(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) {
        out.q[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(dim));
        out.k[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
            out.q[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] =
                detail::draw_normal(eng);
            out.k[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] =
                detail::draw_normal(eng);
        }
    }
    return out;
}

/// Score of every visible (query, key) pair under the given index
/// assignment; entries hidden by the mask are zero.
inline std::vector<std::vector<double>> masked_score_matrix(const IndexAssignment& assignment,
                                                            const VisibilityMatrix& mask,
                                                            const TokenVectors& vecs,
                                                            const HeadConfig& cfg,
                                                            double index_shift = 0.0) {
    const int n = static_cast<int>(assignment.tokens.size());
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(n), 0.0));
    // rotate each token's vectors once, then take dot products
    std::vector<std::vector<double>> rq(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> rk(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        const double idx = static_cast<double>(assignment.indices[static_cast<std::size_t>(t)]) +
                           index_shift;
        rq[static_cast<std::size_t>(t)] = rope_rotate(vecs.q[static_cast<std::size_t>(t)], idx, cfg);
        rk[static_cast<std::size_t>(t)] = rope_rotate(vecs.k[static_cast<std::size_t>(t)], idx, cfg);
    }
    for (int qi = 0; qi < n; ++qi) {
        for (int ki = 0; ki < n; ++ki) {
            if (!mask.at(qi, ki)) {
                continue;
            }
            double dot = 0.0;
            const auto& a = rq[static_cast<std::size_t>(qi)];
            const auto& b = rk[static_cast<std::size_t>(ki)];
            for (std::size_t d = 0; d < a.size(); ++d) {
                dot += a[d] * b[d];
            }
            out[static_cast<std::size_t>(qi)][static_cast<std::size_t>(ki)] = dot;
        }
    }
    return out;
}

/// Result of one verification check.
struct InvariantCheck {
    std::string name;
    bool pass = false;
    double max_deviation = 0.0;
    double tolerance = 0.0;
};

/// Outcome of the allocator/attention verification battery.
struct AttentionReport {
    Strategy strategy = Strategy::interleaved;
    int dim = 0;
    std::uint64_t seed = 0;
    std::vector<InvariantCheck> checks;

    bool all_pass() const {
        for (const InvariantCheck& c : checks) {
            if (!c.pass) {
                return false;
            }
        }
        return true;
    }
};

/// Runs the verification battery tying the allocators to attention
/// semantics:
///  - isometry: rotation preserves vector norms;
///  - relative_shift: scalar scores depend only on index differences;
///  - global_shift: adding a constant to every index of the chosen
///    strategy's assignment leaves the masked score matrix unchanged;
///  - intra_segment_agreement: same-segment score submatrices coincide
///    across all four strategies (each keeps segments internally
///    contiguous);
///  - group_agreement: same-group scores coincide under the two
///    group-decoupled strategies (their in-group differences are equal);
///  - cross_modal_shift: output-to-input index differences under the
///    gap-isolated strategy exceed the group-decoupled ones by exactly
///    gap+1 (integer identity).
inline AttentionReport allocator_attention_report(const StreamTrace& trace, Strategy strategy,
                                                  const HeadConfig& cfg, std::uint64_t seed,
                                                  std::int64_t gap = kDefaultGap,
                                                  int shift_draws = 200) {
    validate(trace);
    validate(cfg);
    AttentionReport rep;
    rep.strategy = strategy;
    rep.dim = cfg.dim;
    rep.seed = seed;

    const std::vector<TokenRef> tokens = enumerate_tokens(trace);
    const int n = static_cast<int>(tokens.size());
    const TokenVectors vecs = draw_token_vectors(n, cfg.dim, seed);
    const VisibilityMatrix mask = build_parallel_mask(trace);

    const IndexAssignment by_strategy[4] = {
        allocate_interleaved(trace),
        allocate_ospe(trace),
        allocate_gdpe(trace),
        allocate_gipe(trace, gap),
    };
    const IndexAssignment& chosen = by_strategy[static_cast<int>(strategy)];
    const IndexAssignment& gdpe = by_strategy[static_cast<int>(Strategy::gdpe)];
    const IndexAssignment& gipe = by_strategy[static_cast<int>(Strategy::gipe)];

    std::mt19937_64 eng(seed ^ 0x9e3779b97f4a7c15ULL);

    // isometry
    {
        double dev = 0.0;
        for (int t = 0; t < n; ++t) {
            const auto& v = vecs.q[static_cast<std::size_t>(t)];
            const auto r = rope_rotate(
                v, static_cast<double>(chosen.indices[static_cast<std::size_t>(t)]), cfg);
            double n0 = 0.0;
            double n1 = 0.0;
            for (std::size_t d = 0; d < v.size(); ++d) {
                n0 += v[d] * v[d];
                n1 += r[d] * r[d];
            }
            dev = std::max(dev, std::abs(std::sqrt(n0) - std::sqrt(n1)));
        }
        rep.checks.push_back({"isometry", dev <= 1e-9, dev, 1e-9});
    }

    // relative_shift: random (q, k, p, p', delta) draws
    {
        double dev = 0.0;
        for (int it = 0; it < shift_draws; ++it) {
            std::vector<double> q(static_cast<std::size_t>(cfg.dim));
            std::vector<double> k(static_cast<std::size_t>(cfg.dim));
            for (int d = 0; d < cfg.dim; ++d) {
                q[static_cast<std::size_t>(d)] = detail::draw_normal(eng);
                k[static_cast<std::size_t>(d)] = detail::draw_normal(eng);
            }
            const double p = static_cast<double>(detail::draw_int(eng, -5000, 5000));
            const double p2 = static_cast<double>(detail::draw_int(eng, -5000, 5000));
            const double delta = static_cast<double>(detail::draw_int(eng, -5000, 5000));
            dev = std::max(dev, std::abs(score(q, k, p + delta, p2 + delta, cfg) -
                                         score(q, k, p, p2, cfg)));
        }
        rep.checks.push_back({"relative_shift", dev <= 1e-6, dev, 1e-6});
    }

    // global_shift: matrix under chosen strategy, indices vs indices + 1000
    {
        const auto base_m = masked_score_matrix(chosen, mask, vecs, cfg, 0.0);
        const auto shifted = masked_score_matrix(chosen, mask, vecs, cfg, 1000.0);
        double dev = 0.0;
        for (int qi = 0; qi < n; ++qi) {
            for (int ki = 0; ki < n; ++ki) {
                dev = std::max(dev, std::abs(base_m[static_cast<std::size_t>(qi)]
                                                   [static_cast<std::size_t>(ki)] -
                                             shifted[static_cast<std::size_t>(qi)]
                                                    [static_cast<std::size_t>(ki)]));
            }
        }
        rep.checks.push_back({"global_shift", dev <= 1e-6, dev, 1e-6});
    }

    // intra_segment_agreement: same-segment pairs score alike under all four
    {
        auto same_segment = [&](int t1, int t2) {
            return tokens[static_cast<std::size_t>(t1)].group ==
                       tokens[static_cast<std::size_t>(t2)].group &&
                   tokens[static_cast<std::size_t>(t1)].round ==
                       tokens[static_cast<std::size_t>(t2)].round;
        };
        double dev = 0.0;
        for (int t1 = 0; t1 < n; ++t1) {
            for (int t2 = 0; t2 < n; ++t2) {
                if (!same_segment(t1, t2)) {
                    continue;
                }
                double lo = std::numeric_limits<double>::infinity();
                double hi = -std::numeric_limits<double>::infinity();
                for (const IndexAssignment& asg : by_strategy) {
                    const double sc =
                        score(vecs.q[static_cast<std::size_t>(t1)],
                              vecs.k[static_cast<std::size_t>(t2)],
                              static_cast<double>(asg.indices[static_cast<std::size_t>(t1)]),
                              static_cast<double>(asg.indices[static_cast<std::size_t>(t2)]),
                              cfg);
                    lo = std::min(lo, sc);
                    hi = std::max(hi, sc);
                }
                dev = std::max(dev, hi - lo);
            }
        }
        rep.checks.push_back({"intra_segment_agreement", dev <= 1e-6, dev, 1e-6});
    }

    // group_agreement: same-group pairs score alike under gdpe and gipe
    {
        double dev = 0.0;
        for (int t1 = 0; t1 < n; ++t1) {
            for (int t2 = 0; t2 < n; ++t2) {
                if (tokens[static_cast<std::size_t>(t1)].group !=
                    tokens[static_cast<std::size_t>(t2)].group) {
                    continue;
                }
                const double s1 =
                    score(vecs.q[static_cast<std::size_t>(t1)],
                          vecs.k[static_cast<std::size_t>(t2)],
                          static_cast<double>(gdpe.indices[static_cast<std::size_t>(t1)]),
                          static_cast<double>(gdpe.indices[static_cast<std::size_t>(t2)]), cfg);
                const double s2 =
                    score(vecs.q[static_cast<std::size_t>(t1)],
                          vecs.k[static_cast<std::size_t>(t2)],
                          static_cast<double>(gipe.indices[static_cast<std::size_t>(t1)]),
                          static_cast<double>(gipe.indices[static_cast<std::size_t>(t2)]), cfg);
                dev = std::max(dev, std::abs(s1 - s2));
            }
        }
        rep.checks.push_back({"group_agreement", dev <= 1e-6, dev, 1e-6});
    }

    // cross_modal_shift: exact integer identity on output-minus-input gaps
    {
        std::int64_t dev = 0;
        for (int t1 = 0; t1 < n; ++t1) {
            if (tokens[static_cast<std::size_t>(t1)].group != Group::output) {
                continue;
            }
            for (int t2 = 0; t2 < n; ++t2) {
                if (tokens[static_cast<std::size_t>(t2)].group != Group::input) {
                    continue;
                }
                const std::int64_t d_gipe = gipe.indices[static_cast<std::size_t>(t1)] -
                                            gipe.indices[static_cast<std::size_t>(t2)];
                const std::int64_t d_gdpe = gdpe.indices[static_cast<std::size_t>(t1)] -
                                            gdpe.indices[static_cast<std::size_t>(t2)];
                dev = std::max(dev, std::abs(d_gipe - d_gdpe - (gap + 1)));
            }
        }
        rep.checks.push_back({"cross_modal_shift", dev == 0, static_cast<double>(dev), 0.0});
    }

    return rep;
}

} // namespace parstream
