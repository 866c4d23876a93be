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

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"
#include "ristensor/estimator.hpp"
#include "ristensor/vscpd.hpp"

using namespace ristensor;
using namespace fixtures;
using Catch::Matchers::WithinAbs;

namespace
{
// Estimated column -> truth atom with the nearest delay (delays are >= 10 m apart in the default scene).
std::vector<std::size_t> match_by_delay(const std::vector<PathAtom> &truth, const ChannelEstimate &ce)
{
    std::vector<std::size_t> m;
    for (const auto &c : ce.cols)
    {
        std::size_t best = 0;
        for (std::size_t t = 1; t < truth.size(); ++t)
            if (std::abs(truth[t].delay - c.delay) < std::abs(truth[best].delay - c.delay))
                best = t;
        m.push_back(best);
    }
    return m;
}

double rel(double est, double ref) { return std::abs(est - ref) / std::max(std::abs(ref), 1e-300); }

// Relative for large values, absolute below one (angles and psi can be exactly zero).
bool near(double est, double ref) { return std::abs(est - ref) <= 1e-6 * std::max(std::abs(ref), 1.0); }

RunConfig los_config()
{
    RunConfig rc;
    rc.L = rc.P = rc.Q = 1;
    rc.scene.scatterers_ue_bs.clear();
    rc.scene.scatterers_ue_ris.clear();
    rc.scene.scatterers_ris_bs.clear();
    return rc;
}
} // namespace

TEST_CASE("variance principle")
{
    cmat B2(5, 4), B3(4, 4);
    B2.col(0) = cvec::Constant(5, cplx(0.3, 0.2));
    B2.col(2) = cvec::Constant(5, cplx(-1.0, 0.0));
    B2.col(1) = uniform_steering(5, 0.9) + 0.5 * uniform_steering(5, -1.7);
    B2.col(3) = uniform_steering(5, 2.1);
    B3.col(0) = cvec::Ones(4);
    B3.col(2) = cvec::Constant(4, cplx(0.0, 2.0));
    B3.col(1) = uniform_steering(4, 1.3);
    B3.col(3) = uniform_steering(4, -0.8) + 0.3 * uniform_steering(4, 2.5);
    const auto s = identify_direct(B2, B3, 2);
    REQUIRE(s.direct == std::vector<std::size_t>{0, 2});
    REQUIRE(s.cascaded == std::vector<std::size_t>{1, 3});

    // mode 2 says {0, 2}, mode 3 says {0, 3}
    cmat B3bad = B3;
    B3bad.col(2) = uniform_steering(4, 1.9);
    B3bad.col(3) = cvec::Ones(4);
    REQUIRE_THROWS_AS(identify_direct(B2, B3bad, 2), EstimationFailure);
}

TEST_CASE("similarity grouping")
{
    // columns 1,3 and 2,4 duplicate each other up to scale
    cmat B(6, 5);
    B.col(0) = uniform_steering(6, 0.1);
    B.col(1) = uniform_steering(6, 1.0);
    B.col(2) = uniform_steering(6, -2.0);
    B.col(3) = cplx(0.0, 3.0) * uniform_steering(6, 1.0);
    B.col(4) = 0.5 * uniform_steering(6, -2.0);
    const auto g = group_cascaded(B, B, {1, 2, 3, 4}, 2, 2);
    REQUIRE(g == std::vector<std::vector<std::size_t>>{{1, 3}, {2, 4}});

    // orthogonal columns are only grouped after every positive pair
    cmat O = cmat::Zero(4, 4);
    O(0, 0) = O(1, 1) = 1.0;
    O(0, 2) = O(1, 2) = 1.0;
    O(2, 3) = 1.0;
    const auto h = group_cascaded(O, O, {0, 1, 2, 3}, 2, 2);
    // column 2 is similar to both 0 and 1; 3 is orthogonal to everything and must close the last group
    REQUIRE(h.size() == 2);
    REQUIRE((h[0] == std::vector<std::size_t>{0, 2} || h[0] == std::vector<std::size_t>{1, 2}));

    cmat B5 = B;
    B5.col(3) = uniform_steering(6, -2.0);
    B5.col(4) = uniform_steering(6, 1.0);
    REQUIRE_THROWS_AS(group_cascaded(B, B5, {1, 2, 3, 4}, 2, 2), EstimationFailure);
    REQUIRE_THROWS(group_cascaded(B, B, {1, 2, 3}, 2, 2));
}

TEST_CASE("generator to parameter mapping")
{
    const SystemConfig cfg;
    REQUIRE(delay_from_generator(0.0, cfg) == 0.0);
    const double tau0 = 187.5e-9;
    REQUIRE_THAT(delay_from_generator(-2.0 * pi * cfg.delta_f * tau0, cfg), WithinAbs(tau0, 1e-18));
    // generators from the wrapped interval land in [0, 1/df)
    for (double w : {-pi, -3.0, -0.1, 0.0, 0.2, 3.1})
    {
        const double t = delay_from_generator(w, cfg);
        REQUIRE(t >= 0.0);
        REQUIRE(t < 1.0 / cfg.delta_f);
    }
    Rng rng = make_rng(42);
    std::uniform_real_distribution<double> u(-1.3, 1.3);
    for (int t = 0; t < 200; ++t)
    {
        const AnglePair a{u(rng), 0.5 * u(rng)};
        const AnglePair b = bs_angles_from_generators(spatial_generator_y(a, cfg.d_B, cfg.lambda),
                                                      spatial_generator_z(a, cfg.d_B, cfg.lambda), cfg);
        REQUIRE_THAT(b.az, WithinAbs(a.az, 1e-12));
        REQUIRE_THAT(b.el, WithinAbs(a.el, 1e-12));
        const double psi = 2.0 * u(rng) / 1.3;
        REQUIRE_THAT(psi_from_generator(ris_generator(psi, cfg), cfg), WithinAbs(psi, 1e-12));
    }
    REQUIRE_THROWS_AS(bs_angles_from_generators(0.0, 4.0, cfg), EstimationFailure);
}

TEST_CASE("noise-free Stage I is exact")
{
    const Scenario s = make_scenario(RunConfig{}, 201);
    const auto &cfg = s.cfg();
    const auto vr = vscpd(s.Y, s.rc.rank(), cfg.K1);
    const ChannelEstimate ce = stage1(vr, s.Ysps, cfg, s.d, s.rc.L, s.rc.P, s.rc.Q);
    REQUIRE_FALSE(ce.failed);
    REQUIRE(ce.sets.direct.size() == 2);
    REQUIRE(ce.sets.groups.size() == 2);

    const auto m = match_by_delay(s.truth, ce);
    std::set<std::size_t> seen(m.begin(), m.end());
    REQUIRE(seen.size() == s.truth.size());
    for (std::size_t r = 0; r < ce.cols.size(); ++r)
    {
        const auto &c = ce.cols[r];
        const auto &t = s.truth[m[r]];
        REQUIRE(c.cascaded == t.cascaded);
        REQUIRE(rel(c.delay * speed_of_light, t.delay * speed_of_light) < 1e-6);
        REQUIRE(near(c.bs.az, t.bs.az));
        REQUIRE(near(c.bs.el, t.bs.el));
        if (c.cascaded)
        {
            REQUIRE(near(c.psi2, t.psi2));
            REQUIRE(near(c.psi3, t.psi3));
        }
        REQUIRE(std::abs(c.gain - t.gain) <= 1e-8 * std::abs(t.gain));
    }
    // groups follow the RIS-BS sub-paths
    for (const auto &g : ce.sets.groups)
    {
        const std::size_t q = s.gt.cascaded[m[g[0]] - s.gt.L()].q;
        for (auto r : g)
            REQUIRE(s.gt.cascaded[m[r] - s.gt.L()].q == q);
    }
    for (std::size_t q = 0; q < 2; ++q)
    {
        const auto &th = ce.theta_R[q];
        bool found = false;
        for (const auto &p : s.gt.ris_bs)
            found = found || (near(th.az, p.bs.az) && near(th.el, p.bs.el));
        REQUIRE(found);
    }
}

TEST_CASE("Stage I failure paths")
{
    const Scenario s = make_scenario(RunConfig{}, 202);
    const auto &cfg = s.cfg();
    VscpdResult vr = vscpd(s.Y, s.rc.rank(), cfg.K1);
    const auto ok = stage1(vr, s.Ysps, cfg, s.d, 2, 2, 2);
    REQUIRE_FALSE(ok.failed);
    // move one constant column in mode 3 onto a cascaded index
    const std::size_t dl = ok.sets.direct[0], cs = ok.sets.cascaded[0];
    vr.factors[2].col(static_cast<Eigen::Index>(dl)).swap(vr.factors[2].col(static_cast<Eigen::Index>(cs)));
    const auto bad = stage1(vr, s.Ysps, cfg, s.d, 2, 2, 2);
    REQUIRE(bad.failed);
    REQUIRE(bad.reason == "identification-mismatch");
    REQUIRE(bad.cols.empty());
    REQUIRE(stage2_cbs(bad, s.Ysps, cfg, s.d, s.rc.sched).failed);
    REQUIRE(stage3_als(s.Ysps, bad, cfg, s.d, s.rc.sched, 10, 1e-8, 2, 2, 2).failed);
}

TEST_CASE("generator estimates are invariant to column scaling")
{
    const Scenario s = make_scenario(RunConfig{}, 203, 20.0);
    const auto &cfg = s.cfg();
    VscpdResult vr = vscpd(s.Y, s.rc.rank(), cfg.K1);
    const auto a = stage1(vr, s.Ysps, cfg, s.d, 2, 2, 2);
    Rng rng = make_rng(5);
    for (std::size_t n = 1; n <= 4; ++n)
        for (Eigen::Index r = 0; r < vr.factors[n].cols(); ++r)
            vr.factors[n].col(r) *= std::polar(0.1 + std::abs(complex_gaussian(rng, 4.0)), uniform_phase(rng));
    const auto b = stage1(vr, s.Ysps, cfg, s.d, 2, 2, 2);
    REQUIRE(a.failed == b.failed);
    if (!a.failed)
    {
        for (std::size_t r = 0; r < a.cols.size(); ++r)
            for (std::size_t n = 0; n < 5; ++n)
                REQUIRE_THAT(a.cols[r].omega[n], WithinAbs(b.cols[r].omega[n], 1e-12));
        const auto a2 = stage2_cbs(a, s.Ysps, cfg, s.d, s.rc.sched), b2 = stage2_cbs(b, s.Ysps, cfg, s.d, s.rc.sched);
        for (std::size_t r = 0; r < a2.cols.size(); ++r)
            for (std::size_t n = 1; n < 5; ++n)
                REQUIRE_THAT(a2.cols[r].omega[n], WithinAbs(b2.cols[r].omega[n], 1e-12));
    }
}

TEST_CASE("gain estimation")
{
    const Scenario s = make_scenario(RunConfig{}, 204);
    const auto &cfg = s.cfg();
    const auto vr = vscpd(s.Y, s.rc.rank(), cfg.K1);
    ChannelEstimate ce = stage1(vr, s.Ysps, cfg, s.d, 2, 2, 2);
    REQUIRE_FALSE(ce.failed);

    const Tensor zero(s.Ysps.dims());
    estimate_gains(ce, zero, cfg, s.d);
    for (const auto &c : ce.cols)
        REQUIRE(c.gain == cplx(0.0, 0.0));

    // two identical columns make the Gram singular
    ce.cols[1] = ce.cols[0];
    REQUIRE_THROWS_AS(estimate_gains(ce, s.Ysps, cfg, s.d), EstimationFailure);
}

TEST_CASE("correlation search")
{
    const Scenario s = make_scenario(RunConfig{}, 205);
    const auto &cfg = s.cfg();
    const auto vr = vscpd(s.Y, s.rc.rank(), cfg.K1);
    const ChannelEstimate ce1 = stage1(vr, s.Ysps, cfg, s.d, 2, 2, 2);
    const ChannelEstimate ce2 = stage2_cbs(ce1, s.Ysps, cfg, s.d, s.rc.sched);
    REQUIRE_FALSE(ce2.failed);
    for (std::size_t r = 0; r < ce1.cols.size(); ++r)
        for (std::size_t n = 2; n <= 5; ++n)
        {
            if (!ce1.cols[r].cascaded && n <= 3)
                continue;
            const auto &ms = s.rc.sched.mode[n - 2];
            const double final_res = ms.initial_resolution() * std::pow(ms.zeta, static_cast<double>(ms.I - 1));
            REQUIRE(std::abs(ce2.cols[r].omega[n - 1] - ce1.cols[r].omega[n - 1]) <= final_res);
        }

    Rng rng = make_rng(43);
    for (int t = 0; t < 200; ++t)
    {
        const cvec b = s.d.T4.adjoint() * uniform_steering(cfg.Ntilde_y, uniform_phase(rng)) + 0.1 * cvec::Random(4);
        const double v = cbs_objective(b, s.d.T4, uniform_phase(rng));
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0 + 1e-15);
    }

    // controlled perturbation within the first window
    for (std::size_t n = 2; n <= 5; ++n)
    {
        const auto &ms = s.rc.sched.mode[n - 2];
        const cmat &T = detail::transform_for_mode(s.d, n);
        const double final_res = ms.initial_resolution() * std::pow(ms.zeta, static_cast<double>(ms.I - 1));
        for (int t = 0; t < 20; ++t)
        {
            const double truth = 0.8 * ms.U * (2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) - 1.0);
            const cvec b = T.adjoint() * uniform_steering(static_cast<std::size_t>(T.rows()), truth);
            const double off = 0.4 * ms.initial_resolution() * static_cast<double>((ms.E - 1) / 2) * (t % 2 ? 1.0 : -1.0);
            std::size_t evals = 0;
            const double w = iterative_cbs(b, T, truth + off, ms, &evals);
            REQUIRE(std::abs(w - truth) <= final_res);
            REQUIRE(evals <= ms.E * ms.I);
        }
    }

    // exhaustive grid: best point within half a grid step
    const cvec b = s.d.T5.adjoint() * uniform_steering(cfg.Ntilde_z, 0.77);
    std::size_t evals = 0;
    REQUIRE(std::abs(exhaustive_cbs(b, s.d.T5, pi, 1001, &evals) - 0.77) <= pi / 1000.0);
    REQUIRE(evals == 1001);
}

TEST_CASE("ALS refinement")
{
    SECTION("noise-free exact start converges immediately")
    {
        const Scenario s = make_scenario(RunConfig{}, 206);
        const auto &cfg = s.cfg();
        const auto vr = vscpd(s.Y, s.rc.rank(), cfg.K1);
        const auto ce2 = stage2_cbs(stage1(vr, s.Ysps, cfg, s.d, 2, 2, 2), s.Ysps, cfg, s.d, s.rc.sched);
        // start from the exact model
        ChannelEstimate exact = ce2;
        const auto m = match_by_delay(s.truth, exact);
        for (std::size_t r = 0; r < exact.cols.size(); ++r)
        {
            const auto &t = s.truth[m[r]];
            auto &c = exact.cols[r];
            c.delay = t.delay;
            c.psi2 = t.psi2;
            c.psi3 = t.psi3;
            c.bs = t.bs;
            c.weight = t.cascaded ? t.gain * s.d.x * s.d.eta : t.gain * s.d.x;
        }
        const auto ce3 = stage3_als(s.Ysps, exact, cfg, s.d, s.rc.sched, 50, 1e-8, 2, 2, 2);
        REQUIRE_FALSE(ce3.failed);
        REQUIRE(ce3.als_iterations == 1);
        for (std::size_t r = 0; r < ce3.cols.size(); ++r)
            REQUIRE(rel(ce3.cols[r].delay, s.truth[m[r]].delay) < 1e-6);
    }
    SECTION("residual is non-increasing and exact-rank data is fitted")
    {
        Rng rng = make_rng(44);
        const std::vector<std::size_t> dims{4, 3, 3, 2, 2, 4};
        const Eigen::Index R = 3;
        std::vector<cmat> F, G;
        for (auto dn : dims)
        {
            cmat A(static_cast<Eigen::Index>(dn), R);
            for (Eigen::Index i = 0; i < A.size(); ++i)
                A.data()[i] = complex_gaussian(rng, 1.0);
            cmat P(A.rows(), R);
            for (Eigen::Index i = 0; i < P.size(); ++i)
                P.data()[i] = complex_gaussian(rng, 0.01);
            F.push_back(A);
            G.push_back(A + P);
        }
        const Tensor Y = cp_reconstruct(FactorSet{cvec::Ones(R), F});
        const AlsResult ar = als(Y, G, 50, 1e-14, true);
        for (std::size_t i = 1; i < ar.residuals.size(); ++i)
            REQUIRE(ar.residuals[i] <= ar.residuals[i - 1] * (1.0 + 1e-12) + 1e-14 * Y.frobenius_norm());
        REQUIRE(ar.residuals.back() < 1e-8 * Y.frobenius_norm());

        // noisy data, random start: monotone as well
        std::vector<cplx> noisy(Y.data().begin(), Y.data().end());
        for (auto &v : noisy)
            v += complex_gaussian(rng, 0.01);
        std::vector<cmat> H;
        for (auto dn : dims)
            H.push_back(cmat::Random(static_cast<Eigen::Index>(dn), R));
        const AlsResult an = als(Tensor(dims, noisy), H, 100, 1e-15, true);
        for (std::size_t i = 1; i < an.residuals.size(); ++i)
            REQUIRE(an.residuals[i] <= an.residuals[i - 1] * (1.0 + 1e-9));
    }
}

TEST_CASE("LOS at 30 dB: delay error below one metre")
{
    const RunConfig rc = los_config();
    double acc = 0.0;
    std::size_t n = 0;
    for (std::uint64_t t = 0; t < 100; ++t)
    {
        const Scenario s = make_scenario(rc, 1000 + t, 30.0);
        const auto vr = vscpd(s.Y, s.rc.rank(), s.cfg().K1);
        const auto ce = stage1(vr, s.Ysps, s.cfg(), s.d, 1, 1, 1);
        REQUIRE_FALSE(ce.failed);
        for (bool casc : {false, true})
        {
            const double e = (ce.delays(casc)[0] - (casc ? s.gt.cascaded[0].delay : s.gt.direct[0].delay)) * speed_of_light;
            acc += e * e;
            ++n;
        }
        for (const auto &c : ce.cols)
        {
            REQUIRE(c.delay >= 0.0);
            REQUIRE(c.delay < 1.0 / s.cfg().delta_f);
            REQUIRE(std::abs(c.psi2) <= 2.0 + 1e-6);
            REQUIRE(std::abs(c.psi3) <= 2.0 + 1e-6);
            REQUIRE(std::abs(c.bs.el) <= pi / 2);
        }
    }
    const double rmse = std::sqrt(acc / static_cast<double>(n));
    REQUIRE(std::isfinite(rmse));
    REQUIRE(rmse < 1.0);
}
