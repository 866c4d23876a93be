// SPDX-License-Identifier: Apache-2.0
//
// ristensor: structured-tensor channel estimation for active-RIS SIMO-OFDM links
// Copyright (C) 2026 The ristensor authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RISTENSOR_ESTIMATOR_HPP
#define RISTENSOR_ESTIMATOR_HPP

#include "array_channel.hpp"
#include "esprit.hpp"
#include "probing.hpp"
#include "tensor.hpp"
#include "vscpd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ristensor
{

// Identification failure; the trial counts as unsuccessful.
struct EstimationFailure : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct PathIndexSets
{
    std::vector<std::size_t> direct;
    std::vector<std::size_t> cascaded;
    std::vector<std::vector<std::size_t>> groups; // Q groups of P column indices
};

struct ColumnEstimate
{
    bool cascaded = false;
    std::size_t group = 0;                                 // RIS-BS group (cascaded only)
    std::array<double, 5> omega{0.0, 0.0, 0.0, 0.0, 0.0}; // modes 1..5; modes 2/3 unused for direct columns
    double delay = 0.0;                                    // s
    double psi2 = 0.0, psi3 = 0.0;
    AnglePair bs;     // direct: own AOA, cascaded: group average
    AnglePair bs_own; // per-column AOA before group averaging
    cplx weight{0.0, 0.0};
    cplx gain{0.0, 0.0};
};

struct ChannelEstimate
{
    std::string stage;
    bool failed = false;
    std::string reason;
    bool warning = false;
    std::string warning_text;
    PathIndexSets sets;
    std::vector<ColumnEstimate> cols; // indexed by decomposition column
    std::vector<AnglePair> theta_R;   // per group
    std::array<cmat, 4> b;            // recovered columns of modes 2..5 used by the search stages
    std::size_t als_iterations = 0;

    static ChannelEstimate failure(std::string stage, std::string reason)
    {
        ChannelEstimate ce;
        ce.stage = std::move(stage);
        ce.failed = true;
        ce.reason = std::move(reason);
        return ce;
    }

    std::vector<double> delays(bool cascaded) const
    {
        std::vector<double> v;
        for (const auto &c : cols)
            if (c.cascaded == cascaded)
                v.push_back(c.delay);
        return v;
    }
    std::vector<double> psi(int which) const
    {
        std::vector<double> v;
        for (const auto &c : cols)
            if (c.cascaded)
                v.push_back(which == 2 ? c.psi2 : c.psi3);
        return v;
    }
    std::vector<AnglePair> theta_L() const
    {
        std::vector<AnglePair> v;
        for (const auto &c : cols)
            if (!c.cascaded)
                v.push_back(c.bs);
        return v;
    }
    std::vector<cplx> gains(bool cascaded) const
    {
        std::vector<cplx> v;
        for (const auto &c : cols)
            if (c.cascaded == cascaded)
                v.push_back(c.gain);
        return v;
    }
    std::vector<PathAtom> atoms() const
    {
        std::vector<PathAtom> v;
        for (const auto &c : cols)
            v.push_back({c.cascaded, c.gain, c.delay, c.psi2, c.psi3, c.bs});
        return v;
    }
};

struct ModeSchedule
{
    std::size_t E = 201;
    std::size_t I = 8;
    double zeta = 0.5;
    double delta1 = 0.0; // 0 -> U / (10 (E-1)/2)
    double U = pi;

    double initial_resolution() const
    {
        return delta1 > 0.0 ? delta1 : U / (10.0 * static_cast<double>((E - 1) / 2));
    }
    void validate() const
    {
        if (E < 1 || E % 2 == 0)
            throw std::invalid_argument("SearchSchedule: E must be odd.");
        if (!(zeta > 0.0 && zeta < 1.0))
            throw std::invalid_argument("SearchSchedule: zeta must lie in (0, 1).");
        if (I < 1)
            throw std::invalid_argument("SearchSchedule: I must be >= 1.");
        if (!(U > 0.0) || delta1 < 0.0)
            throw std::invalid_argument("SearchSchedule: U must be positive, delta1 non-negative.");
    }
};

struct SearchSchedule
{
    std::array<ModeSchedule, 4> mode; // modes 2..5

    static SearchSchedule defaults()
    {
        SearchSchedule s;
        s.mode[0].U = 0.4 * pi;
        s.mode[1].U = 0.4 * pi;
        s.mode[2].U = pi;
        s.mode[3].U = pi;
        return s;
    }
    void validate() const
    {
        for (const auto &m : mode)
            m.validate();
    }
};

namespace detail
{
inline double column_variance(const cvec &v)
{
    const double n = v.norm();
    if (!(n > 0.0))
        return 0.0;
    const cvec u = v / n;
    const cplx mean = u.mean();
    return (u.array() - mean).abs2().sum() / static_cast<double>(u.size());
}

inline std::vector<std::size_t> smallest_k(const std::vector<double> &vals, std::size_t k)
{
    std::vector<std::size_t> idx(vals.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Greedy partition of `cand` columns of B into q groups of size p.
inline std::vector<std::vector<std::size_t>> greedy_groups(const cmat &B, const std::vector<std::size_t> &cand, std::size_t P,
                                                           std::size_t Q)
{
    const std::size_t C = cand.size();
    rmat sim = rmat::Zero(static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(C));
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < C; ++j)
            if (i != j)
                sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    column_correlation(B.col(static_cast<Eigen::Index>(cand[i])), B.col(static_cast<Eigen::Index>(cand[j])));
    std::vector<bool> used(C, false);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t q = 0; q < Q; ++q)
    {
        std::size_t seed = C;
        double best = -1.0;
        for (std::size_t i = 0; i < C; ++i)
        {
            if (used[i])
                continue;
            double mass = 0.0;
            for (std::size_t j = 0; j < C; ++j)
                if (!used[j] && j != i)
                    mass += sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (mass > best)
            {
                best = mass;
                seed = i;
            }
        }
        used[seed] = true;
        std::vector<std::size_t> g{seed};
        for (std::size_t m = 1; m < P; ++m)
        {
            std::size_t pick = C;
            double bs = -1.0;
            for (std::size_t j = 0; j < C; ++j)
                if (!used[j] && sim(static_cast<Eigen::Index>(seed), static_cast<Eigen::Index>(j)) > bs)
                {
                    bs = sim(static_cast<Eigen::Index>(seed), static_cast<Eigen::Index>(j));
                    pick = j;
                }
            used[pick] = true;
            g.push_back(pick);
        }
        for (auto &i : g)
            i = cand[i];
        std::sort(g.begin(), g.end());
        groups.push_back(std::move(g));
    }
    return groups;
}

inline double wrap_phase(double w) { return std::arg(std::polar(1.0, w)); }

inline double checked_asin(double x)
{
    if (!std::isfinite(x) || std::abs(x) > 1.0 + 1e-6)
        throw EstimationFailure("angle-out-of-range");
    return std::asin(std::clamp(x, -1.0, 1.0));
}
} // namespace detail

// Direct columns have constant entries in modes 2/3, so they carry the L smallest variances.
inline PathIndexSets identify_direct(const cmat &B2, const cmat &B3, std::size_t L)
{
    const auto R = static_cast<std::size_t>(B2.cols());
    if (static_cast<std::size_t>(B3.cols()) != R || L > R)
        throw std::invalid_argument("identify_direct: inconsistent column counts.");
    std::vector<double> v2(R), v3(R);
    for (std::size_t r = 0; r < R; ++r)
    {
        v2[r] = detail::column_variance(B2.col(static_cast<Eigen::Index>(r)));
        v3[r] = detail::column_variance(B3.col(static_cast<Eigen::Index>(r)));
    }
    const auto l2 = detail::smallest_k(v2, L);
    const auto l3 = detail::smallest_k(v3, L);
    if (l2 != l3)
        throw EstimationFailure("identification-mismatch");
    PathIndexSets s;
    s.direct = l2;
    for (std::size_t r = 0; r < R; ++r)
        if (!std::binary_search(l2.begin(), l2.end(), r))
            s.cascaded.push_back(r);
    return s;
}

// Cascaded columns that share a RIS-BS sub-path coincide in modes 4/5.
inline std::vector<std::vector<std::size_t>> group_cascaded(const cmat &B4, const cmat &B5, const std::vector<std::size_t> &cascaded,
                                                            std::size_t P, std::size_t Q)
{
    if (cascaded.size() != P * Q)
        throw std::invalid_argument("group_cascaded: |C| must equal P*Q.");
    if (P == 0 || Q == 0)
        return {};
    auto g4 = detail::greedy_groups(B4, cascaded, P, Q);
    auto g5 = detail::greedy_groups(B5, cascaded, P, Q);
    std::set<std::vector<std::size_t>> s4(g4.begin(), g4.end()), s5(g5.begin(), g5.end());
    if (s4 != s5)
        throw EstimationFailure("grouping-mismatch");
    std::sort(g4.begin(), g4.end());
    return g4;
}

inline double delay_from_generator(double omega1, const SystemConfig &cfg)
{
    const double period = 1.0 / cfg.delta_f;
    double tau = -omega1 / (2.0 * pi * cfg.delta_f);
    tau = std::fmod(tau, period);
    if (tau < 0.0)
        tau += period;
    if (tau >= period)
        tau -= period;
    return tau;
}

inline double psi_from_generator(double omega, const SystemConfig &cfg) { return cfg.lambda * omega / (2.0 * pi * cfg.d_R); }

inline AnglePair bs_angles_from_generators(double omega4, double omega5, const SystemConfig &cfg)
{
    AnglePair a;
    a.el = detail::checked_asin(cfg.lambda * omega5 / (2.0 * pi * cfg.d_B));
    const double ce = std::cos(a.el);
    if (!(ce > 0.0))
        throw EstimationFailure("angle-out-of-range");
    a.az = detail::checked_asin(cfg.lambda * omega4 / (2.0 * pi * cfg.d_B * ce));
    return a;
}

// Generators -> delays, RIS parameters and BS angles; group angles are averaged.
inline void map_parameters(ChannelEstimate &ce, const SystemConfig &cfg)
{
    for (auto &c : ce.cols)
    {
        c.delay = delay_from_generator(c.omega[0], cfg);
        if (c.cascaded)
        {
            c.psi2 = psi_from_generator(c.omega[1], cfg);
            c.psi3 = psi_from_generator(c.omega[2], cfg);
        }
        c.bs_own = bs_angles_from_generators(c.omega[3], c.omega[4], cfg);
        c.bs = c.bs_own;
    }
    ce.theta_R.assign(ce.sets.groups.size(), AnglePair{});
    for (std::size_t q = 0; q < ce.sets.groups.size(); ++q)
    {
        const auto &grp = ce.sets.groups[q];
        AnglePair m;
        for (auto r : grp)
        {
            m.az += ce.cols[r].bs_own.az;
            m.el += ce.cols[r].bs_own.el;
        }
        m.az /= static_cast<double>(grp.size());
        m.el /= static_cast<double>(grp.size());
        ce.theta_R[q] = m;
        for (auto r : grp)
        {
            ce.cols[r].group = q;
            ce.cols[r].bs = m;
        }
    }
}

// Smoothed six-factor model of a set of path atoms; weights stay separate.
inline std::vector<cmat> smoothed_factors(const std::vector<PathAtom> &atoms, const SystemConfig &cfg, const ProbingDesign &d)
{
    const FactorSet fs = factors_from_atoms(atoms, cfg, d);
    rvec w1(static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t r = 0; r < atoms.size(); ++r)
        w1(static_cast<Eigen::Index>(r)) = delay_generator(atoms[r].delay, cfg);
    return {vandermonde(cfg.K1, w1), fs.factors[1], fs.factors[2], fs.factors[3], fs.factors[4], vandermonde(cfg.K2(), w1)};
}

// Least-squares weights of a fixed factor model: (Hadamard of Grams) w = KR^H vec(Y).
inline cvec least_squares_weights(const Tensor &Ysps, const std::vector<cmat> &F)
{
    const cmat E = gram_hadamard(F);
    const cmat M = mttkrp_conj(Ysps, F, 0);
    const Eigen::Index R = E.rows();
    cvec rhs(R);
    for (Eigen::Index r = 0; r < R; ++r)
        rhs(r) = F[0].col(r).dot(M.col(r)); // conj(b1)^T (Y_(1) conj(KR others))
    Eigen::JacobiSVD<cmat> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const rvec s = svd.singularValues();
    if (!(s(0) > 0.0) || s(R - 1) < 1e-10 * s(0))
        throw EstimationFailure("singular-gram");
    return svd.solve(rhs);
}

// Rebuild the factors from the mapped parameters, solve for the weights and remove the x, x*eta scalings.
inline void estimate_gains(ChannelEstimate &ce, const Tensor &Ysps, const SystemConfig &cfg, const ProbingDesign &d)
{
    std::vector<PathAtom> atoms = ce.atoms();
    for (auto &a : atoms)
        a.gain = 1.0;
    const auto F = smoothed_factors(atoms, cfg, d);
    const cvec w = least_squares_weights(Ysps, F);
    for (std::size_t r = 0; r < ce.cols.size(); ++r)
    {
        auto &c = ce.cols[r];
        c.weight = w(static_cast<Eigen::Index>(r));
        c.gain = c.cascaded ? c.weight / (d.x * d.eta) : c.weight / d.x;
    }
}

// Normalized correlation between a recovered column and the beamspace model T^H a(omega).
inline double cbs_objective(const cvec &bhat, const cmat &T, double omega)
{
    const cvec model = T.adjoint() * uniform_steering(static_cast<std::size_t>(T.rows()), omega);
    return column_correlation(bhat, model);
}

inline double iterative_cbs(const cvec &bhat, const cmat &T, double start, const ModeSchedule &s, std::size_t *evals = nullptr)
{
    double centre = start;
    double delta = s.initial_resolution();
    const auto half = static_cast<long>((s.E - 1) / 2);
    for (std::size_t i = 0; i < s.I; ++i)
    {
        double best = centre, bestv = -1.0;
        for (long e = -half; e <= half; ++e)
        {
            const double w = centre + static_cast<double>(e) * delta;
            if (w < -s.U - 1e-12 || w > s.U + 1e-12)
                continue;
            const double v = cbs_objective(bhat, T, w);
            if (evals)
                ++*evals;
            if (v > bestv)
            {
                bestv = v;
                best = w;
            }
        }
        centre = best;
        delta *= s.zeta;
    }
    return centre;
}

// Single uniform grid of S points on [-U, U].
inline double exhaustive_cbs(const cvec &bhat, const cmat &T, double U, std::size_t S, std::size_t *evals = nullptr)
{
    if (S < 2)
        throw std::invalid_argument("exhaustive_cbs: grid size must be >= 2.");
    double best = -U, bestv = -1.0;
    for (std::size_t s = 0; s < S; ++s)
    {
        const double w = -U + 2.0 * U * static_cast<double>(s) / static_cast<double>(S - 1);
        const double v = cbs_objective(bhat, T, w);
        if (evals)
            ++*evals;
        if (v > bestv)
        {
            bestv = v;
            best = w;
        }
    }
    return best;
}

struct DecodeInput
{
    const cmat *B2, *B3, *B4, *B5; // recovered columns
    rvec omega1;
};

namespace detail
{
inline const cmat &transform_for_mode(const ProbingDesign &d, std::size_t mode)
{
    switch (mode)
    {
    case 2:
        return d.T2;
    case 3:
        return d.T3;
    case 4:
        return d.T4;
    default:
        return d.T5;
    }
}

// Identification + transformed-space ESPRIT on recovered columns; no gains yet.
inline ChannelEstimate identify_and_esprit(const DecodeInput &in, const ProbingDesign &d, std::size_t L, std::size_t P,
                                           std::size_t Q, const PathIndexSets *fallback)
{
    ChannelEstimate ce;
    try
    {
        ce.sets = identify_direct(*in.B2, *in.B3, L);
        ce.sets.groups = group_cascaded(*in.B4, *in.B5, ce.sets.cascaded, P, Q);
    }
    catch (const EstimationFailure &)
    {
        if (!fallback)
            throw;
        ce.sets = *fallback;
        ce.warning = true;
        ce.warning_text = "re-identification failed; previous index sets kept";
    }
    ce.b = {*in.B2, *in.B3, *in.B4, *in.B5};
    const auto R = static_cast<std::size_t>(in.B2->cols());
    ce.cols.assign(R, ColumnEstimate{});
    for (auto r : ce.sets.cascaded)
        ce.cols[r].cascaded = true;

    const BeamspaceTransform bt2 = build_beamspace(d.T2), bt3 = build_beamspace(d.T3), bt4 = build_beamspace(d.T4),
                             bt5 = build_beamspace(d.T5);
    auto esprit = [](const cvec &b, const BeamspaceTransform &bt) {
        try
        {
            return transformed_esprit_column(b, bt);
        }
        catch (const std::invalid_argument &)
        {
            throw EstimationFailure("degenerate-esprit");
        }
    };
    for (std::size_t r = 0; r < R; ++r)
    {
        const auto ri = static_cast<Eigen::Index>(r);
        auto &c = ce.cols[r];
        c.omega[0] = in.omega1(ri);
        if (c.cascaded)
        {
            c.omega[1] = esprit(in.B2->col(ri), bt2);
            c.omega[2] = esprit(in.B3->col(ri), bt3);
        }
        c.omega[3] = esprit(in.B4->col(ri), bt4);
        c.omega[4] = esprit(in.B5->col(ri), bt5);
    }
    return ce;
}

inline void refine_columns(ChannelEstimate &ce, const ProbingDesign &d, const SearchSchedule &sched)
{
    for (std::size_t r = 0; r < ce.cols.size(); ++r)
    {
        auto &c = ce.cols[r];
        for (std::size_t n = 2; n <= 5; ++n)
        {
            if (!c.cascaded && n <= 3)
                continue;
            const auto &ms = sched.mode[n - 2];
            const double start = std::clamp(c.omega[n - 1], -ms.U, ms.U);
            c.omega[n - 1] = iterative_cbs(ce.b[n - 2].col(static_cast<Eigen::Index>(r)), transform_for_mode(d, n), start, ms);
        }
    }
}

template <class F> ChannelEstimate guarded(const std::string &stage, F &&body)
{
    try
    {
        ChannelEstimate ce = body();
        ce.stage = stage;
        return ce;
    }
    catch (const EstimationFailure &e)
    {
        return ChannelEstimate::failure(stage, e.what());
    }
    catch (const RankDeficiencyError &e)
    {
        return ChannelEstimate::failure(stage, std::string("rank-deficiency: ") + e.what());
    }
}
} // namespace detail

// Stage I: identification, transformed-space ESPRIT, parameter mapping and LS gains.
inline ChannelEstimate stage1(const VscpdResult &vr, const Tensor &Ysps, const SystemConfig &cfg, const ProbingDesign &d,
                              std::size_t L, std::size_t P, std::size_t Q)
{
    return detail::guarded("I", [&] {
        const DecodeInput in{&vr.factors[1], &vr.factors[2], &vr.factors[3], &vr.factors[4], vr.omega1};
        ChannelEstimate ce = detail::identify_and_esprit(in, d, L, P, Q, nullptr);
        map_parameters(ce, cfg);
        estimate_gains(ce, Ysps, cfg, d);
        return ce;
    });
}

// Stage II: iterative correlation search on modes 2..5 around the Stage I generators.
inline ChannelEstimate stage2_cbs(const ChannelEstimate &ce1, const Tensor &Ysps, const SystemConfig &cfg, const ProbingDesign &d,
                                  const SearchSchedule &sched)
{
    if (ce1.failed)
        return ChannelEstimate::failure("II", ce1.reason);
    return detail::guarded("II", [&] {
        ChannelEstimate ce = ce1;
        detail::refine_columns(ce, d, sched);
        map_parameters(ce, cfg);
        estimate_gains(ce, Ysps, cfg, d);
        return ce;
    });
}

struct AlsResult
{
    std::vector<cmat> factors;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> residuals; // ||Y - model||_F after each sweep
};

// Cyclic LS over all factors; weights are carried inside the factors.
// Stops when the relative change of the reconstruction drops below tol.
inline AlsResult als(const Tensor &Y, std::vector<cmat> F, std::size_t max_iter, double tol, bool track_residual = false)
{
    const std::size_t N = Y.order();
    if (F.size() != N)
        throw std::invalid_argument("als: factor count differs from tensor order.");
    AlsResult res;
    const double ynorm = Y.frobenius_norm();
    auto reconstruct = [&](const std::vector<cmat> &G) {
        FactorSet fs;
        fs.weights = cvec::Ones(G[0].cols());
        fs.factors = G;
        return cp_reconstruct(fs);
    };
    Tensor prev = reconstruct(F);
    for (std::size_t it = 0; it < max_iter; ++it)
    {
        for (std::size_t n = 0; n < N; ++n)
        {
            const cmat M = mttkrp_conj(Y, F, n);
            const cmat H = gram_hadamard(F, n).conjugate(); // Hermitian
            Eigen::LDLT<cmat> ldlt(H);
            cmat X;
            if (ldlt.info() == Eigen::Success && ldlt.isPositive())
                X = ldlt.solve(cmat(M.adjoint())).adjoint();
            else
                X = H.completeOrthogonalDecomposition().solve(cmat(M.adjoint())).adjoint();
            F[n] = X;
        }
        // keep column energy balanced across modes (scale moved into the last factor)
        for (Eigen::Index r = 0; r < F[0].cols(); ++r)
        {
            double s = 1.0;
            for (std::size_t n = 0; n + 1 < N; ++n)
            {
                const double c = F[n].col(r).norm();
                if (c > 0.0)
                {
                    F[n].col(r) /= c;
                    s *= c;
                }
            }
            F[N - 1].col(r) *= s;
        }
        Tensor cur = reconstruct(F);
        res.iterations = it + 1;
        if (track_residual)
            res.residuals.push_back((Y - cur).frobenius_norm());
        const double pn = prev.frobenius_norm();
        const double change = (cur - prev).frobenius_norm() / (pn > 0.0 ? pn : (ynorm > 0.0 ? ynorm : 1.0));
        prev = std::move(cur);
        if (change < tol)
        {
            res.converged = true;
            break;
        }
    }
    res.factors = std::move(F);
    return res;
}

// Circular mean of the two delay-generator readings of one column.
inline double combine_delay_generators(double a, double b) { return std::arg(std::polar(1.0, a) + std::polar(1.0, b)); }

// Stage III: ALS refinement from the Stage II model, then delays from modes 1/6 and a fresh
// identification + search pass on modes 2..5.
inline ChannelEstimate stage3_als(const Tensor &Ysps, const ChannelEstimate &ce2, const SystemConfig &cfg, const ProbingDesign &d,
                                  const SearchSchedule &sched, std::size_t max_iter, double tol, std::size_t L, std::size_t P,
                                  std::size_t Q)
{
    if (ce2.failed)
        return ChannelEstimate::failure("III", ce2.reason);
    return detail::guarded("III", [&] {
        std::vector<PathAtom> atoms = ce2.atoms();
        auto F = smoothed_factors(atoms, cfg, d);
        for (std::size_t r = 0; r < atoms.size(); ++r)
            F[5].col(static_cast<Eigen::Index>(r)) *= ce2.cols[r].weight;
        const AlsResult ar = als(Ysps, std::move(F), max_iter, tol);

        const auto R = static_cast<Eigen::Index>(ce2.cols.size());
        rvec w1(R);
        for (Eigen::Index r = 0; r < R; ++r)
            w1(r) = combine_delay_generators(element_esprit_column(ar.factors[0].col(r)), element_esprit_column(ar.factors[5].col(r)));
        const DecodeInput in{&ar.factors[1], &ar.factors[2], &ar.factors[3], &ar.factors[4], w1};
        ChannelEstimate ce = detail::identify_and_esprit(in, d, L, P, Q, &ce2.sets);
        detail::refine_columns(ce, d, sched);
        map_parameters(ce, cfg);
        estimate_gains(ce, Ysps, cfg, d);
        ce.als_iterations = ar.iterations;
        if (!ar.converged)
        {
            ce.warning = true;
            ce.warning_text += (ce.warning_text.empty() ? "" : "; ") + std::string("ALS reached the iteration cap");
        }
        return ce;
    });
}

} // namespace ristensor

#endif
