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
#include "ristensor/array_channel.hpp"

#include <cmath>

using namespace ristensor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
constexpr double deg = pi / 180.0;

// Independent straight-line distance.
double dist(double ax, double ay, double az, double bx, double by, double bz)
{
    return std::sqrt((ax - bx) * (ax - bx) + (ay - by) * (ay - by) + (az - bz) * (az - bz));
}

SystemConfig small_config()
{
    SystemConfig cfg;
    cfg.M_y = 3;
    cfg.M_z = 2;
    cfg.Ntilde_y = 4;
    cfg.Ntilde_z = 3;
    cfg.N1 = 2;
    cfg.N2 = 2;
    cfg.K = 6;
    cfg.K1 = 3;
    return cfg;
}

AnglePair random_angles(Rng &rng)
{
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    return {u(rng), 0.5 * u(rng)};
}
} // namespace

TEST_CASE("uniform steering examples")
{
    REQUIRE(uniform_steering(5, 0.0) == cvec::Ones(5));
    const cvec a = uniform_steering(2, pi);
    REQUIRE_THAT(a(0).real(), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(a(1).real(), WithinAbs(-1.0, 1e-15));
    REQUIRE_THAT(a(1).imag(), WithinAbs(0.0, 1e-15));

    Rng rng = make_rng(3);
    for (int t = 0; t < 50; ++t)
    {
        const cvec s = uniform_steering(7, uniform_phase(rng));
        for (Eigen::Index m = 0; m < s.size(); ++m)
            REQUIRE_THAT(std::abs(s(m)), WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("UPA response from element positions equals the Kronecker form")
{
    Rng rng = make_rng(4);
    const double lambda = 0.01, d = 0.1 * lambda;
    const rmat P = upa_positions(4, 3, d);
    for (int t = 0; t < 50; ++t)
    {
        const AnglePair a = random_angles(rng);
        const Eigen::Vector3d u = direction_vector(a);
        cvec pos(12);
        for (Eigen::Index m = 0; m < 12; ++m)
            pos(m) = std::polar(1.0, 2.0 * pi / lambda * P.row(m).dot(u));
        REQUIRE((pos - upa_steering(4, 3, a, d, lambda)).norm() < 1e-12);
    }
}

TEST_CASE("geometry: LOS delay and local angles")
{
    SystemConfig cfg;
    Scene s;
    s.ue = {0.0, 0.0, 0.0};
    s.bs = {10.0, 0.0, 0.0};
    s.ris = {5.0, 5.0, 0.0};
    s.bs_facing = {-1.0, 0.0, 0.0}; // BS looks back at the UE
    s.ris_facing = {0.0, -1.0, 0.0};
    s.scatterers_ue_bs.clear();
    s.scatterers_ue_ris.clear();
    s.scatterers_ris_bs.clear();
    Rng rng = make_rng(5);
    const auto gt = geometry_to_paths(s, cfg, rng);
    REQUIRE(gt.L() == 1);
    REQUIRE_THAT(gt.direct[0].delay * speed_of_light, WithinAbs(10.0, 1e-12));
    // arrival along local +X of a YOZ-plane array: both spatial generators vanish
    REQUIRE_THAT(spatial_generator_y(gt.direct[0].bs, cfg.d_B, cfg.lambda), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(spatial_generator_z(gt.direct[0].bs, cfg.d_B, cfg.lambda), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(std::abs(gt.direct[0].gain), WithinRel(cfg.lambda / (4.0 * pi * 10.0), 1e-12));

    Scene bad = s;
    bad.bs = bad.ue;
    REQUIRE_THROWS(geometry_to_paths(bad, cfg, rng));
}

TEST_CASE("geometry: scatterer delays match an independent distance routine")
{
    SystemConfig cfg;
    const Scene s;
    Rng rng = make_rng(6);
    const auto gt = geometry_to_paths(s, cfg, rng);
    REQUIRE(gt.L() == 2);
    REQUIRE(gt.P() == 2);
    REQUIRE(gt.Q() == 2);
    const double via = dist(-20, 22, 0, 4, 4, 2) + dist(4, 4, 2, 15, 16, 10);
    REQUIRE_THAT(gt.direct[1].delay, WithinRel(via / speed_of_light, 1e-14));
    REQUIRE_THAT(gt.ue_ris[1].delay * speed_of_light, WithinRel(dist(-20, 22, 0, -2, -4, 1) + dist(-2, -4, 1, 19, 2, 10), 1e-14));
    REQUIRE_THAT(gt.ris_bs[0].delay * speed_of_light, WithinRel(dist(19, 2, 10, 15, 16, 10), 1e-14));
    REQUIRE_NOTHROW(validate_delays(gt, cfg));
    for (const auto &c : gt.cascaded)
    {
        REQUIRE(std::abs(c.psi2) <= 2.0);
        REQUIRE(std::abs(c.psi3) <= 2.0);
        REQUIRE(std::abs(ris_generator(c.psi2, cfg)) < 0.4 * pi + 1e-12);
        REQUIRE(std::abs(ris_generator(c.psi3, cfg)) < 0.4 * pi + 1e-12);
    }
}

TEST_CASE("cascade parameters")
{
    PathComponent a, b;
    a.delay = 20.0;
    b.delay = 30.0;
    a.gain = {0.5, 0.5};
    b.gain = {0.0, 2.0};
    auto c = cascade_parameters(a, b);
    REQUIRE(c.delay == 50.0);
    REQUIRE(c.gain == a.gain * b.gain);
    REQUIRE(c.psi2 == 0.0);
    REQUIRE(c.psi3 == 0.0);

    a.ris = b.ris = {30.0 * deg, 45.0 * deg};
    c = cascade_parameters(a, b);
    REQUIRE_THAT(c.psi2, WithinAbs(2.0 * std::sin(30.0 * deg) * std::cos(45.0 * deg), 1e-15));
    REQUIRE_THAT(c.psi3, WithinAbs(2.0 * std::sin(45.0 * deg), 1e-15));

    // stored cascaded fields are bitwise reproducible from the one-hop links
    Rng rng = make_rng(7);
    const auto gt = geometry_to_paths(Scene{}, SystemConfig{}, rng);
    for (const auto &cc : gt.cascaded)
    {
        const auto re = cascade_parameters(gt.ue_ris[cc.p], gt.ris_bs[cc.q]);
        REQUIRE(re.gain == cc.gain);
        REQUIRE(re.delay == cc.delay);
        REQUIRE(re.psi2 == cc.psi2);
        REQUIRE(re.psi3 == cc.psi3);
    }
    REQUIRE(gt.cascaded[3].p == 1);
    REQUIRE(gt.cascaded[3].q == 1);
    REQUIRE(gt.cascaded[1].p == 1);
    REQUIRE(gt.cascaded[1].q == 0);
}

TEST_CASE("channel frequency response")
{
    SystemConfig cfg = small_config();
    MultipathGroundTruth one;
    one.direct.push_back(PathComponent{{1.0, 0.0}, 0.0, {}, {}});
    REQUIRE(channel_frequency_response(one, cfg, 0).h_L == cvec::Ones(12));

    Rng rng = make_rng(8);
    one.direct[0] = PathComponent{{0.3, -0.4}, 40e-9, {}, random_angles(rng)};
    for (std::size_t k = 0; k < cfg.K; ++k)
        REQUIRE_THAT(channel_frequency_response(one, cfg, k).h_L.norm(), WithinRel(0.5 * std::sqrt(12.0), 1e-12));
    REQUIRE_THROWS(channel_frequency_response(one, cfg, cfg.K));

    MultipathGroundTruth gt;
    for (int i = 0; i < 2; ++i)
    {
        gt.direct.push_back({complex_gaussian(rng, 1.0), 1e-8 * (i + 1), {}, random_angles(rng)});
        gt.ue_ris.push_back({complex_gaussian(rng, 1.0), 2e-8 * (i + 1), random_angles(rng), {}});
        gt.ris_bs.push_back({complex_gaussian(rng, 1.0), 3e-8 * (i + 1), random_angles(rng), random_angles(rng)});
    }
    const double kb = 2.0 * pi / cfg.lambda * cfg.d_B, kr = 2.0 * pi / cfg.lambda * cfg.d_R;
    for (std::size_t k = 0; k < cfg.K; ++k)
    {
        const auto h = channel_frequency_response(gt, cfg, k);
        const double f = static_cast<double>(k) * cfg.delta_f;
        auto elem = [](double kd, const AnglePair &a, std::size_t iy, std::size_t iz) {
            return std::exp(cplx(0.0, kd * (static_cast<double>(iy) * std::sin(a.az) * std::cos(a.el) +
                                            static_cast<double>(iz) * std::sin(a.el))));
        };
        for (std::size_t iy = 0; iy < cfg.Ntilde_y; ++iy)
            for (std::size_t iz = 0; iz < cfg.Ntilde_z; ++iz)
            {
                cplx s{0.0, 0.0};
                for (const auto &p : gt.direct)
                    s += p.gain * std::exp(cplx(0.0, -2.0 * pi * f * p.delay)) * elem(kb, p.bs, iy, iz);
                REQUIRE(std::abs(h.h_L(static_cast<Eigen::Index>(iy * cfg.Ntilde_z + iz)) - s) < 1e-12);
                for (std::size_t my = 0; my < cfg.M_y; ++my)
                    for (std::size_t mz = 0; mz < cfg.M_z; ++mz)
                    {
                        cplx t{0.0, 0.0};
                        for (const auto &p : gt.ris_bs)
                            t += p.gain * std::exp(cplx(0.0, -2.0 * pi * f * p.delay)) * elem(kb, p.bs, iy, iz) *
                                 elem(kr, p.ris, my, mz);
                        REQUIRE(std::abs(h.H_R2(static_cast<Eigen::Index>(iy * cfg.Ntilde_z + iz),
                                                static_cast<Eigen::Index>(my * cfg.M_z + mz)) -
                                         t) < 1e-12);
                    }
            }
        for (std::size_t my = 0; my < cfg.M_y; ++my)
            for (std::size_t mz = 0; mz < cfg.M_z; ++mz)
            {
                cplx s{0.0, 0.0};
                for (const auto &p : gt.ue_ris)
                    s += p.gain * std::exp(cplx(0.0, -2.0 * pi * f * p.delay)) * elem(kr, p.ris, my, mz);
                REQUIRE(std::abs(h.h_R1(static_cast<Eigen::Index>(my * cfg.M_z + mz)) - s) < 1e-12);
            }
    }
    // first subcarrier carries no delay phase
    MultipathGroundTruth z = gt;
    for (auto &p : z.direct)
        p.delay = 0.0;
    REQUIRE((channel_frequency_response(gt, cfg, 0).h_L - channel_frequency_response(z, cfg, 0).h_L).norm() == 0.0);
}

TEST_CASE("amplification budget")
{
    REQUIRE(amplification_from_budget(0.0, 1e-9, 1e-12, 64) == 1.0);
    REQUIRE_THROWS(amplification_from_budget(-1.0, 1e-9, 0.0, 64));
    REQUIRE_THROWS(amplification_from_budget(1.0, 0.0, 0.0, 64));

    const double P_R = 1.5e-3, P_in = 2e-10, s2 = 4e-12;
    const double e1 = amplification_from_budget(P_R, P_in, s2, 64);
    const double e2 = amplification_from_budget(P_R, P_in, s2, 128);
    REQUIRE(e1 >= 1.0);
    REQUIRE_THAT(e2 * e2 - 1.0, WithinRel(0.5 * (e1 * e1 - 1.0), 1e-12));
    REQUIRE_THAT(ris_power_consumption(e1, P_in, s2, 64), WithinRel(P_R, 1e-12));

    // default scene: large coefficient, and the budget is spent exactly
    SystemConfig cfg;
    cfg.sigma2_R = noise_power_from_psd(-174.0, 10.0, cfg.delta_f);
    Rng rng = make_rng(9);
    const auto gt = geometry_to_paths(Scene{}, cfg, rng);
    const double Pin = incident_power_per_element(gt, cfg);
    const double eta = amplification_from_budget(cfg.P_R, Pin, cfg.sigma2_R, cfg.ris_elements());
    REQUIRE(eta > 10.0);
    REQUIRE_THAT(ris_power_consumption(eta, Pin, cfg.sigma2_R, cfg.ris_elements()), WithinRel(cfg.P_R, 1e-12));

    // incident power: explicit mean over subcarriers of the UE-RIS response energy
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.K; ++k)
        acc += channel_frequency_response(gt, cfg, k).h_R1.squaredNorm();
    REQUIRE_THAT(Pin, WithinRel(cfg.P_T * acc / cfg.K / cfg.ris_elements(), 1e-12));
}

TEST_CASE("noise power from PSD")
{
    // -174 dBm/Hz + 10 dB over 2.5 MHz
    const double w = noise_power_from_psd(-174.0, 10.0, 2.5e6);
    REQUIRE_THAT(10.0 * std::log10(w) + 30.0, WithinAbs(-174.0 + 10.0 + 10.0 * std::log10(2.5e6), 1e-10));
}
