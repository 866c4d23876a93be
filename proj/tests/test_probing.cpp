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
#include "ristensor/baselines.hpp"
#include "ristensor/probing.hpp"

#include <cmath>

using namespace ristensor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
SystemConfig small_config()
{
    SystemConfig cfg;
    cfg.M_y = 4;
    cfg.M_z = 3;
    cfg.Ntilde_y = 4;
    cfg.Ntilde_z = 3;
    cfg.N1 = 3;
    cfg.N2 = 2;
    cfg.K = 6;
    cfg.K1 = 3;
    cfg.G1 = 3;
    cfg.G2 = 2;
    cfg.G = 6;
    return cfg;
}

MultipathGroundTruth scene_truth(const SystemConfig &cfg, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    return geometry_to_paths(Scene{}, cfg, rng);
}
} // namespace

TEST_CASE("probing design structure")
{
    const SystemConfig cfg = small_config();
    const double eta = 37.5;
    const ProbingDesign d = design_probing(cfg, eta, 21);
    REQUIRE(d.x == cplx(std::sqrt(cfg.P_T), 0.0));
    REQUIRE(d.Upsilon.rows() == 6);
    REQUIRE(d.Upsilon.cols() == 12);
    for (Eigen::Index i = 0; i < d.Upsilon.size(); ++i)
        REQUIRE_THAT(std::abs(d.Upsilon.data()[i]), WithinRel(eta, 1e-14));
    for (const rvec *nu : {&d.nu2, &d.nu3, &d.nu4, &d.nu5})
        for (Eigen::Index i = 0; i < nu->size(); ++i)
            REQUIRE(((*nu)(i) > -pi && (*nu)(i) <= pi));

    for (Eigen::Index c = 0; c < d.T4.cols(); ++c)
        for (Eigen::Index i = 0; i + 1 < d.T4.rows(); ++i)
            REQUIRE(std::abs(d.T4(i + 1, c) / d.T4(i, c) - std::polar(1.0, d.nu4(c))) < 1e-12);

    // x Upsilon against the unit-phase Kronecker entries built one by one
    for (std::size_t g1 = 0; g1 < cfg.G1; ++g1)
        for (std::size_t g2 = 0; g2 < cfg.G2; ++g2)
            for (std::size_t my = 0; my < cfg.M_y; ++my)
                for (std::size_t mz = 0; mz < cfg.M_z; ++mz)
                {
                    const double ph = -static_cast<double>(my) * d.nu2(g1) - static_cast<double>(mz) * d.nu3(g2);
                    const cplx expect = d.x * eta * std::polar(1.0, ph);
                    const cplx got = d.x * d.Upsilon(g1 * cfg.G2 + g2, my * cfg.M_z + mz);
                    REQUIRE(std::abs(got - expect) < 1e-12 * std::abs(expect));
                }
    REQUIRE((d.combiner - kronecker(d.T4, d.T5)).norm() == 0.0);

    // same seed, same design; different seed, different generators
    REQUIRE(design_probing(cfg, eta, 21).nu2 == d.nu2);
    REQUIRE(design_probing(cfg, eta, 22).nu2 != d.nu2);

    SystemConfig bad = cfg;
    bad.G = 5;
    REQUIRE_THROWS(design_probing(bad, eta, 1));
}

TEST_CASE("synthesis: zero gains give zero output")
{
    const SystemConfig cfg = small_config();
    auto gt = scene_truth(cfg, 1);
    for (auto *v : {&gt.direct, &gt.ue_ris, &gt.ris_bs})
        for (auto &p : *v)
            p.gain = 0.0;
    rebuild_cascade(gt);
    const auto d = design_probing(cfg, 3.0, 2);
    const auto blk = synthesize_rx(gt, cfg, d, false, 3);
    REQUIRE(signal_energy(blk) == 0.0);
}

TEST_CASE("synthesis: LOS-only matches scalar expansion")
{
    const SystemConfig cfg = small_config();
    MultipathGroundTruth gt;
    gt.direct.push_back({{2e-6, -1e-6}, 35e-9, {}, {0.4, -0.2}});
    const auto d = design_probing(cfg, 1.0, 4);
    const auto blk = synthesize_rx(gt, cfg, d, false, 5);
    const double wy = 2.0 * pi * cfg.d_B / cfg.lambda * std::sin(0.4) * std::cos(-0.2);
    const double wz = 2.0 * pi * cfg.d_B / cfg.lambda * std::sin(-0.2);
    for (std::size_t k = 0; k < cfg.K; ++k)
        for (std::size_t g = 0; g < cfg.G; ++g)
            for (std::size_t n1 = 0; n1 < cfg.N1; ++n1)
                for (std::size_t n2 = 0; n2 < cfg.N2; ++n2)
                {
                    // sum over BS elements of conj(combiner) * steering
                    cplx s{0.0, 0.0};
                    for (std::size_t iy = 0; iy < cfg.Ntilde_y; ++iy)
                        for (std::size_t iz = 0; iz < cfg.Ntilde_z; ++iz)
                            s += std::exp(cplx(0.0, -(static_cast<double>(iy) * d.nu4(n1) + static_cast<double>(iz) * d.nu5(n2)) +
                                                        static_cast<double>(iy) * wy + static_cast<double>(iz) * wz));
                    const cplx expect = d.x * gt.direct[0].gain *
                                        std::exp(cplx(0.0, -2.0 * pi * static_cast<double>(k) * cfg.delta_f * 35e-9)) * s;
                    REQUIRE(std::abs(blk.at(k, g)(n1 * cfg.N2 + n2) - expect) < 1e-12 * std::abs(d.x * gt.direct[0].gain));
                }
}

TEST_CASE("synthesis: full multipath matches the matrix form")
{
    const SystemConfig cfg = small_config();
    const auto gt = scene_truth(cfg, 6);
    const auto d = design_probing(cfg, 20.0, 7);
    const auto blk = synthesize_rx(gt, cfg, d, false, 8);
    const cmat RH = d.combiner.adjoint();
    for (std::size_t k = 0; k < cfg.K; ++k)
    {
        const auto h = channel_frequency_response(gt, cfg, k);
        for (std::size_t g = 0; g < cfg.G; ++g)
        {
            const cvec expect = RH * (h.h_L + h.H_R2 * d.profile(g).asDiagonal() * h.h_R1) * d.x;
            REQUIRE((blk.at(k, g) - expect).norm() <= 1e-12 * expect.norm());
        }
    }
}

TEST_CASE("synthesis: noise covariance by Monte Carlo")
{
    SystemConfig cfg = small_config();
    cfg.K = 1;
    cfg.K1 = 1;
    cfg.G1 = cfg.G2 = cfg.G = 1;
    auto gt = scene_truth(cfg, 9);
    for (auto &p : gt.direct)
        p.gain = 0.0;
    for (auto &p : gt.ue_ris)
        p.gain = 0.0;
    for (auto &p : gt.ris_bs)
        p.gain *= 1e4; // comparable RIS and BS noise contributions
    rebuild_cascade(gt);
    const auto d = design_probing(cfg, 2.0, 10);
    const NoiseLevels nl{1.0, 0.05};

    const auto h = channel_frequency_response(gt, cfg, 0);
    const cmat RH = d.combiner.adjoint();
    const cmat GR = RH * h.H_R2 * d.profile(0).asDiagonal();
    const cmat C = nl.sigma2_B * RH * RH.adjoint() + nl.sigma2_R * GR * GR.adjoint();
    const Eigen::Index N = C.rows();
    rmat Cr(2 * N, 2 * N);
    Cr << C.real(), -C.imag(), C.imag(), C.real();
    Cr *= 0.5;

    const int draws = 10000;
    rmat S = rmat::Zero(2 * N, 2 * N);
    for (int t = 0; t < draws; ++t)
    {
        const cvec y = synthesize_rx(gt, cfg, d, true, derive_seed(11, {static_cast<std::uint64_t>(t)}), nl).at(0, 0);
        rvec v(2 * N);
        v << y.real(), y.imag();
        S += v * v.transpose();
    }
    S /= draws;
    REQUIRE((S - Cr).norm() / Cr.norm() < 0.05);

    // closed-form trace agrees with the exact covariance
    REQUIRE_THAT(noise_trace_total(gt, cfg, d, nl), WithinRel(C.trace().real(), 1e-10));
}

TEST_CASE("synthesis is bit-reproducible for a fixed seed")
{
    SystemConfig cfg = small_config();
    cfg.sigma2_B = 1e-12;
    cfg.sigma2_R = 1e-13;
    const auto gt = scene_truth(cfg, 12);
    const auto d = design_probing(cfg, 5.0, 13);
    const auto a = synthesize_rx(gt, cfg, d, true, 14);
    const auto b = synthesize_rx(gt, cfg, d, true, 14);
    const auto c = synthesize_rx(gt, cfg, d, true, 15);
    for (std::size_t i = 0; i < a.y.size(); ++i)
        REQUIRE(a.y[i] == b.y[i]);
    REQUIRE(a.y[0] != c.y[0]);
}

TEST_CASE("signal tensor equals the analytic CP model")
{
    const SystemConfig cfg = small_config();
    const auto gt = scene_truth(cfg, 16);
    const auto d = design_probing(cfg, 30.0, 17);
    const Tensor Y = build_tensor(synthesize_rx(gt, cfg, d, false, 18), cfg);
    REQUIRE(Y.dims() == std::vector<std::size_t>{cfg.K, cfg.G1, cfg.G2, cfg.N1, cfg.N2});
    const auto atoms = atoms_from_truth(gt);
    const FactorSet fs = factors_from_atoms(atoms, cfg, d);
    const Tensor M = cp_reconstruct(fs);
    REQUIRE((Y.as_vector() - M.as_vector()).norm() <= 1e-10 * M.frobenius_norm());

    // direct columns of B2/B3 are constant; weights carry x and x eta
    for (std::size_t r = 0; r < atoms.size(); ++r)
    {
        const auto ri = static_cast<Eigen::Index>(r);
        if (!atoms[r].cascaded)
        {
            REQUIRE(fs.factors[1].col(ri) == cvec::Ones(cfg.G1));
            REQUIRE(fs.factors[2].col(ri) == cvec::Ones(cfg.G2));
        }
        const cplx scale = atoms[r].cascaded ? d.x * d.eta : d.x;
        REQUIRE(std::abs(fs.weights(ri) / scale - atoms[r].gain) <= 1e-8 * std::abs(atoms[r].gain));
    }

    ReceivedBlock bad;
    REQUIRE_THROWS(build_tensor(bad, cfg));
}

TEST_CASE("single direct and single cascaded path give a rank-2 tensor")
{
    const SystemConfig cfg = small_config();
    Scene s;
    s.scatterers_ue_bs.clear();
    s.scatterers_ue_ris.clear();
    s.scatterers_ris_bs.clear();
    Rng rng = make_rng(19);
    const auto gt = geometry_to_paths(s, cfg, rng);
    const auto d = design_probing(cfg, 2e4, 20); // keeps the cascaded term within ~20 dB of the direct one
    const Tensor Y = build_tensor(synthesize_rx(gt, cfg, d, false, 21), cfg);
    const auto ar = baseline_als_cpd(Y, 2, 23, 2000, 1e-15, true);
    REQUIRE(ar.residuals.back() <= 1e-6 * Y.frobenius_norm());
}

TEST_CASE("SNR accounting")
{
    REQUIRE(snr_db(3.5, 3.5) == 0.0);
    REQUIRE_THAT(snr_db(7.0, 3.5), WithinAbs(3.0102999566, 1e-9));
    REQUIRE_THROWS(snr_db(1.0, 0.0));

    SystemConfig cfg = small_config();
    cfg.sigma2_B = 1e-12;
    cfg.sigma2_R = 1e-13;
    const auto gt = scene_truth(cfg, 23);
    const auto d = design_probing(cfg, 10.0, 24);
    const auto blk = synthesize_rx(gt, cfg, d, false, 25);
    // independent two-pass accumulation over the entries
    double num = 0.0;
    for (const auto &y : blk.y)
        for (Eigen::Index i = 0; i < y.size(); ++i)
            num += std::norm(y(i));
    REQUIRE_THAT(signal_energy(blk), WithinRel(num, 1e-13));
    double den = 0.0;
    for (std::size_t k = 0; k < cfg.K; ++k)
        for (std::size_t g = 0; g < cfg.G; ++g)
        {
            const cmat GR = d.combiner.adjoint() * channel_frequency_response(gt, cfg, k).H_R2 * d.profile(g).asDiagonal();
            den += cfg.sigma2_B * d.combiner.squaredNorm() + cfg.sigma2_R * GR.squaredNorm();
        }
    REQUIRE_THAT(noise_trace_total(gt, cfg, d, {cfg.sigma2_B, cfg.sigma2_R}), WithinRel(den, 1e-10));

    // a common noise scale hits the requested SNR and keeps the B/R ratio
    for (double target : {10.0, 20.0, 30.0})
    {
        const auto nl = noise_for_snr(target, num, gt, cfg, d, {cfg.sigma2_B, cfg.sigma2_R});
        REQUIRE_THAT(snr_db(num, noise_trace_total(gt, cfg, d, nl)), WithinAbs(target, 1e-9));
        REQUIRE_THAT(nl.sigma2_B / nl.sigma2_R, WithinRel(10.0, 1e-12));
    }
}
