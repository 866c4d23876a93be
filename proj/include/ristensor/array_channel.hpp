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

#ifndef RISTENSOR_ARRAY_CHANNEL_HPP
#define RISTENSOR_ARRAY_CHANNEL_HPP

#include "random.hpp"
#include "tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ristensor
{

inline constexpr double speed_of_light = 299792458.0;

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

// Immutable parameter record of one experiment. Powers and noise variances in W, lengths in m.
struct SystemConfig
{
    // RIS (M_y x M_z) and BS (Ntilde_y x Ntilde_z) UPAs, combiner beams N1 x N2
    std::size_t M_y = 8, M_z = 8;
    std::size_t Ntilde_y = 8, Ntilde_z = 8;
    std::size_t N1 = 4, N2 = 4;

    // OFDM grid: K0 subcarriers, the first K carry pilots, G = G1 G2 slots
    std::size_t K0 = 128, K = 16, K1 = 8;
    std::size_t G = 25, G1 = 5, G2 = 5;
    double bandwidth = 320e6;
    double delta_f = 320e6 / 128.0;
    double f_c = 28e9;
    double lambda = speed_of_light / 28e9;
    double d_R = 0.1 * speed_of_light / 28e9;
    double d_B = 0.5 * speed_of_light / 28e9;

    double P_T = dbm_to_watt(7.0);
    double P_R = dbm_to_watt(1.76);
    double sigma2_B = 0.0;
    double sigma2_R = 0.0;
    bool active_ris = true;

    std::size_t ris_elements() const { return M_y * M_z; }
    std::size_t bs_elements() const { return Ntilde_y * Ntilde_z; }
    std::size_t beams() const { return N1 * N2; }
    std::size_t K2() const { return K - K1 + 1; }
    double subcarrier_frequency(std::size_t k) const { return static_cast<double>(k) * delta_f; } // k is 0-based

    void validate() const
    {
        auto pos = [](std::size_t v, const char *name) {
            if (v == 0)
                throw std::invalid_argument(std::string("SystemConfig: ") + name + " must be >= 1.");
        };
        pos(M_y, "M_y");
        pos(M_z, "M_z");
        pos(Ntilde_y, "Ntilde_y");
        pos(Ntilde_z, "Ntilde_z");
        pos(N1, "N1");
        pos(N2, "N2");
        pos(K0, "K0");
        pos(K, "K");
        pos(G, "G");
        pos(G1, "G1");
        pos(G2, "G2");
        if (G != G1 * G2)
            throw std::invalid_argument("SystemConfig: G must equal G1*G2.");
        if (K > K0)
            throw std::invalid_argument("SystemConfig: K must not exceed K0.");
        if (K1 < 1 || K1 > K)
            throw std::invalid_argument("SystemConfig: K1 must lie in [1, K].");
        if (!(d_R > 0.0) || !(d_B > 0.0))
            throw std::invalid_argument("SystemConfig: element spacings must be positive.");
        if (!(delta_f > 0.0) || !(lambda > 0.0))
            throw std::invalid_argument("SystemConfig: delta_f and lambda must be positive.");
        if (P_T < 0.0 || P_R < 0.0 || sigma2_B < 0.0 || sigma2_R < 0.0)
            throw std::invalid_argument("SystemConfig: powers must be non-negative.");
        if (N1 > Ntilde_y || N2 > Ntilde_z)
            throw std::invalid_argument("SystemConfig: combiner beams exceed BS array size.");
    }
};

// Per-subcarrier thermal noise power in W from a PSD (dBm/Hz), noise figure (dB) and spacing (Hz).
inline double noise_power_from_psd(double psd_dbm_hz, double nf_db, double delta_f)
{
    return dbm_to_watt(psd_dbm_hz + nf_db + 10.0 * std::log10(delta_f));
}

struct AnglePair
{
    double az = 0.0; // rad
    double el = 0.0; // rad, |el| <= pi/2
};

// One propagation path of a single link. Which angle pairs are meaningful depends on the link:
//   UE-BS:   bs  = AOA at the BS
//   UE-RIS:  ris = AOA at the RIS
//   RIS-BS:  ris = AOD at the RIS, bs = AOA at the BS
struct PathComponent
{
    cplx gain{0.0, 0.0};
    double delay = 0.0; // s
    AnglePair ris;
    AnglePair bs;
};

struct CascadedPath
{
    std::size_t p = 0, q = 0;
    cplx gain{0.0, 0.0};
    double delay = 0.0;
    double psi2 = 0.0, psi3 = 0.0;
};

// Direction vector d(az, el) in an array's local frame; the UPA lies in the local YOZ plane.
inline Eigen::Vector3d direction_vector(const AnglePair &a)
{
    return {std::cos(a.az) * std::cos(a.el), std::sin(a.az) * std::cos(a.el), std::sin(a.el)};
}

// [a^(M)(w)]_m = exp(j m w), m = 0..M-1
inline cvec uniform_steering(std::size_t M, double omega)
{
    cvec a(static_cast<Eigen::Index>(M));
    for (std::size_t m = 0; m < M; ++m)
        a(static_cast<Eigen::Index>(m)) = std::polar(1.0, static_cast<double>(m) * omega);
    return a;
}

inline double spatial_generator_y(const AnglePair &a, double spacing, double lambda)
{
    return 2.0 * pi / lambda * spacing * std::sin(a.az) * std::cos(a.el);
}

inline double spatial_generator_z(const AnglePair &a, double spacing, double lambda)
{
    return 2.0 * pi / lambda * spacing * std::sin(a.el);
}

// UPA response a^(My)(w_y) (x) a^(Mz)(w_z).
inline cvec upa_steering(std::size_t My, std::size_t Mz, double omega_y, double omega_z)
{
    return kronecker(uniform_steering(My, omega_y), uniform_steering(Mz, omega_z));
}

inline cvec upa_steering(std::size_t My, std::size_t Mz, const AnglePair &a, double spacing, double lambda)
{
    return upa_steering(My, Mz, spatial_generator_y(a, spacing, lambda), spatial_generator_z(a, spacing, lambda));
}

// Element positions [0, y (x) 1, 1 (x) z] of a uniformly spaced UPA, (My Mz) x 3.
inline rmat upa_positions(std::size_t My, std::size_t Mz, double spacing)
{
    rmat P = rmat::Zero(static_cast<Eigen::Index>(My * Mz), 3);
    for (std::size_t iy = 0; iy < My; ++iy)
        for (std::size_t iz = 0; iz < Mz; ++iz)
        {
            const auto row = static_cast<Eigen::Index>(iy * Mz + iz);
            P(row, 1) = static_cast<double>(iy) * spacing;
            P(row, 2) = static_cast<double>(iz) * spacing;
        }
    return P;
}

struct MultipathGroundTruth
{
    std::vector<PathComponent> direct; // L
    std::vector<PathComponent> ue_ris; // P
    std::vector<PathComponent> ris_bs; // Q
    std::vector<CascadedPath> cascaded; // C = P Q, index c = q P + p

    std::size_t L() const { return direct.size(); }
    std::size_t P() const { return ue_ris.size(); }
    std::size_t Q() const { return ris_bs.size(); }
    std::size_t C() const { return cascaded.size(); }
    std::size_t R() const { return direct.size() + cascaded.size(); }
};

inline CascadedPath cascade_parameters(const PathComponent &ue_ris, const PathComponent &ris_bs)
{
    CascadedPath c;
    c.gain = ue_ris.gain * ris_bs.gain;
    c.delay = ue_ris.delay + ris_bs.delay;
    c.psi2 = std::sin(ue_ris.ris.az) * std::cos(ue_ris.ris.el) + std::sin(ris_bs.ris.az) * std::cos(ris_bs.ris.el);
    c.psi3 = std::sin(ue_ris.ris.el) + std::sin(ris_bs.ris.el);
    return c;
}

// Effective RIS phase-shift spacing for a cascaded angle parameter psi.
inline double ris_generator(double psi, const SystemConfig &cfg) { return 2.0 * pi / cfg.lambda * cfg.d_R * psi; }

// Fills the derived cascaded entries from the one-hop links.
inline void rebuild_cascade(MultipathGroundTruth &gt)
{
    gt.cascaded.clear();
    for (std::size_t q = 0; q < gt.Q(); ++q)
        for (std::size_t p = 0; p < gt.P(); ++p)
        {
            auto c = cascade_parameters(gt.ue_ris[p], gt.ris_bs[q]);
            c.p = p;
            c.q = q;
            gt.cascaded.push_back(c);
        }
}

// Scene geometry in a global frame, metres. Arrays face along `*_facing` (their local +X).
// The default endpoints keep the six delays >= 10 m apart, below 1/delta_f, and the per-path
// tensor energies within ~11 dB of each other under the default power budget.
struct Scene
{
    Eigen::Vector3d ue{-20.0, 22.0, 0.0};
    Eigen::Vector3d bs{15.0, 16.0, 10.0};
    Eigen::Vector3d ris{19.0, 2.0, 10.0};
    Eigen::Vector3d bs_facing{-0.68346519, -0.72998311, 0.0};
    Eigen::Vector3d ris_facing{-0.93848483, 0.34532048, 0.0};
    std::vector<Eigen::Vector3d> scatterers_ue_bs{{4.0, 4.0, 2.0}};
    std::vector<Eigen::Vector3d> scatterers_ue_ris{{-2.0, -4.0, 1.0}};
    std::vector<Eigen::Vector3d> scatterers_ris_bs{{-1.0, 1.0, 5.0}};
};

// Rows are the local X, Y, Z axes expressed in the global frame.
inline Eigen::Matrix3d local_frame(const Eigen::Vector3d &facing)
{
    const double n = facing.norm();
    if (!(n > 0.0))
        throw std::invalid_argument("local_frame: facing vector must be non-zero.");
    Eigen::Vector3d x = facing / n;
    Eigen::Vector3d up{0.0, 0.0, 1.0};
    if (std::abs(x.dot(up)) > 1.0 - 1e-9)
        up = Eigen::Vector3d{0.0, 1.0, 0.0};
    Eigen::Vector3d z = (up - up.dot(x) * x).normalized();
    Eigen::Vector3d y = z.cross(x);
    Eigen::Matrix3d F;
    F.row(0) = x.transpose();
    F.row(1) = y.transpose();
    F.row(2) = z.transpose();
    return F;
}

inline AnglePair local_angles(const Eigen::Matrix3d &frame, const Eigen::Vector3d &from, const Eigen::Vector3d &to)
{
    const Eigen::Vector3d d = to - from;
    const double n = d.norm();
    if (!(n > 0.0))
        throw std::invalid_argument("geometry_to_paths: coincident endpoints.");
    const Eigen::Vector3d l = frame * (d / n);
    return {std::atan2(l.y(), l.x()), std::asin(std::clamp(l.z(), -1.0, 1.0))};
}

namespace detail
{
inline double distance(const Eigen::Vector3d &a, const Eigen::Vector3d &b)
{
    const double d = (a - b).norm();
    if (!(d > 0.0))
        throw std::invalid_argument("geometry_to_paths: coincident endpoints.");
    return d;
}

inline cplx free_space_gain(double length, double lambda, Rng &rng)
{
    return std::polar(lambda / (4.0 * pi * length), uniform_phase(rng));
}
} // namespace detail

// LOS path plus one single-bounce path per scatterer on every link. Delays are path length / c,
// gains are free-space magnitudes with uniform random phase drawn from `rng`.
inline MultipathGroundTruth geometry_to_paths(const Scene &scene, const SystemConfig &cfg, Rng &rng)
{
    const auto check = [](const Eigen::Vector3d &v) {
        if (!v.allFinite())
            throw std::invalid_argument("geometry_to_paths: non-finite position.");
    };
    check(scene.ue);
    check(scene.bs);
    check(scene.ris);
    const Eigen::Matrix3d fb = local_frame(scene.bs_facing);
    const Eigen::Matrix3d fr = local_frame(scene.ris_facing);
    MultipathGroundTruth gt;

    // UE -> BS
    {
        std::vector<Eigen::Vector3d> via{scene.ue};
        via.insert(via.end(), scene.scatterers_ue_bs.begin(), scene.scatterers_ue_bs.end());
        for (std::size_t i = 0; i < via.size(); ++i)
        {
            check(via[i]);
            const double len = i == 0 ? detail::distance(scene.ue, scene.bs)
                                      : detail::distance(scene.ue, via[i]) + detail::distance(via[i], scene.bs);
            PathComponent pc;
            pc.delay = len / speed_of_light;
            pc.gain = detail::free_space_gain(len, cfg.lambda, rng);
            pc.bs = local_angles(fb, scene.bs, via[i]);
            gt.direct.push_back(pc);
        }
    }
    // UE -> RIS
    {
        std::vector<Eigen::Vector3d> via{scene.ue};
        via.insert(via.end(), scene.scatterers_ue_ris.begin(), scene.scatterers_ue_ris.end());
        for (std::size_t i = 0; i < via.size(); ++i)
        {
            check(via[i]);
            const double len = i == 0 ? detail::distance(scene.ue, scene.ris)
                                      : detail::distance(scene.ue, via[i]) + detail::distance(via[i], scene.ris);
            PathComponent pc;
            pc.delay = len / speed_of_light;
            pc.gain = detail::free_space_gain(len, cfg.lambda, rng);
            pc.ris = local_angles(fr, scene.ris, via[i]);
            gt.ue_ris.push_back(pc);
        }
    }
    // RIS -> BS
    {
        std::vector<Eigen::Vector3d> via{scene.bs};
        via.insert(via.end(), scene.scatterers_ris_bs.begin(), scene.scatterers_ris_bs.end());
        for (std::size_t i = 0; i < via.size(); ++i)
        {
            check(via[i]);
            const double len = i == 0 ? detail::distance(scene.ris, scene.bs)
                                      : detail::distance(scene.ris, via[i]) + detail::distance(via[i], scene.bs);
            PathComponent pc;
            pc.delay = len / speed_of_light;
            pc.gain = detail::free_space_gain(len, cfg.lambda, rng);
            pc.ris = local_angles(fr, scene.ris, via[i]);
            pc.bs = local_angles(fb, scene.bs, i == 0 ? scene.ris : via[i]);
            gt.ris_bs.push_back(pc);
        }
    }
    rebuild_cascade(gt);
    return gt;
}

// Largest delay must stay below 1/delta_f so the frequency-domain generator inverts uniquely.
inline void validate_delays(const MultipathGroundTruth &gt, const SystemConfig &cfg)
{
    const double limit = 1.0 / cfg.delta_f;
    for (const auto &p : gt.direct)
        if (p.delay < 0.0 || p.delay >= limit)
            throw std::invalid_argument("scene: direct-path delay outside [0, 1/delta_f).");
    for (const auto &c : gt.cascaded)
        if (c.delay < 0.0 || c.delay >= limit)
            throw std::invalid_argument("scene: cascaded delay outside [0, 1/delta_f).");
}

struct ChannelResponse
{
    cvec h_L;  // Ntilde_y Ntilde_z
    cvec h_R1; // M_y M_z
    cmat H_R2; // (Ntilde_y Ntilde_z) x (M_y M_z)
};

inline cvec bs_steering(const AnglePair &a, const SystemConfig &cfg)
{
    return upa_steering(cfg.Ntilde_y, cfg.Ntilde_z, a, cfg.d_B, cfg.lambda);
}

inline cvec ris_steering(const AnglePair &a, const SystemConfig &cfg)
{
    return upa_steering(cfg.M_y, cfg.M_z, a, cfg.d_R, cfg.lambda);
}

inline cplx delay_phase(double f, double tau) { return std::polar(1.0, -2.0 * pi * f * tau); }

// CFRs of the three links on 0-based subcarrier k.
inline ChannelResponse channel_frequency_response(const MultipathGroundTruth &gt, const SystemConfig &cfg, std::size_t k)
{
    if (k >= cfg.K)
        throw std::invalid_argument("channel_frequency_response: subcarrier index out of range.");
    const double f = cfg.subcarrier_frequency(k);
    ChannelResponse h;
    h.h_L = cvec::Zero(static_cast<Eigen::Index>(cfg.bs_elements()));
    h.h_R1 = cvec::Zero(static_cast<Eigen::Index>(cfg.ris_elements()));
    h.H_R2 = cmat::Zero(static_cast<Eigen::Index>(cfg.bs_elements()), static_cast<Eigen::Index>(cfg.ris_elements()));
    for (const auto &p : gt.direct)
        h.h_L += p.gain * delay_phase(f, p.delay) * bs_steering(p.bs, cfg);
    for (const auto &p : gt.ue_ris)
        h.h_R1 += p.gain * delay_phase(f, p.delay) * ris_steering(p.ris, cfg);
    for (const auto &p : gt.ris_bs)
        h.H_R2 += p.gain * delay_phase(f, p.delay) * bs_steering(p.bs, cfg) * ris_steering(p.ris, cfg).transpose();
    return h;
}

// Mean incident power per RIS element over the training subcarriers at transmit power P_T.
inline double incident_power_per_element(const MultipathGroundTruth &gt, const SystemConfig &cfg)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.K; ++k)
    {
        cvec h = cvec::Zero(static_cast<Eigen::Index>(cfg.ris_elements()));
        const double f = cfg.subcarrier_frequency(k);
        for (const auto &p : gt.ue_ris)
            h += p.gain * delay_phase(f, p.delay) * ris_steering(p.ris, cfg);
        acc += h.squaredNorm();
    }
    return cfg.P_T * acc / static_cast<double>(cfg.K) / static_cast<double>(cfg.ris_elements());
}

// Amplification factor that spends the RIS power budget P_R = (eta^2 - 1) M (P_in + sigma_R^2).
inline double amplification_from_budget(double P_R, double P_in, double sigma2_R, std::size_t ris_elements)
{
    if (P_R < 0.0)
        throw std::invalid_argument("amplification_from_budget: negative RIS power budget.");
    if (!(P_in + sigma2_R > 0.0))
        throw std::invalid_argument("amplification_from_budget: incident plus noise power must be positive.");
    if (ris_elements == 0)
        throw std::invalid_argument("amplification_from_budget: no RIS elements.");
    return std::sqrt(1.0 + P_R / (static_cast<double>(ris_elements) * (P_in + sigma2_R)));
}

inline double ris_power_consumption(double eta, double P_in, double sigma2_R, std::size_t ris_elements)
{
    return (eta * eta - 1.0) * static_cast<double>(ris_elements) * (P_in + sigma2_R);
}

} // namespace ristensor

#endif
