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

#ifndef RISTENSOR_PROBING_HPP
#define RISTENSOR_PROBING_HPP

#include "array_channel.hpp"
#include "random.hpp"
#include "tensor.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ristensor
{

// M x G matrix with entries exp(j m nu_g).
inline cmat vandermonde(std::size_t M, const rvec &generators)
{
    cmat V(static_cast<Eigen::Index>(M), generators.size());
    for (Eigen::Index g = 0; g < generators.size(); ++g)
        V.col(g) = uniform_steering(M, generators(g));
    return V;
}

struct ProbingDesign
{
    cplx x{1.0, 0.0}; // pilot, |x|^2 = P_T
    double eta = 1.0; // RIS amplitude
    rvec nu2, nu3, nu4, nu5;
    cmat T2, T3, T4, T5;
    cmat Upsilon; // G x (M_y M_z), row g is the RIS profile of slot g = g1 G2 + g2
    cmat combiner; // T4 (x) T5, (Ntilde_y Ntilde_z) x (N1 N2)

    cvec profile(std::size_t g) const { return Upsilon.row(static_cast<Eigen::Index>(g)).transpose(); }
};

// Random Vandermonde transforms, the matching RIS profile and the combiner.
inline ProbingDesign design_probing(const SystemConfig &cfg, double eta, std::uint64_t seed)
{
    if (cfg.G != cfg.G1 * cfg.G2)
        throw std::invalid_argument("design_probing: G must equal G1*G2.");
    if (!(eta > 0.0))
        throw std::invalid_argument("design_probing: eta must be positive.");
    Rng rng(seed);
    auto draw = [&rng](std::size_t n) {
        rvec v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v(i) = uniform_phase(rng);
        return v;
    };
    ProbingDesign d;
    d.x = cplx(std::sqrt(cfg.P_T), 0.0);
    d.eta = eta;
    d.nu2 = draw(cfg.G1);
    d.nu3 = draw(cfg.G2);
    d.nu4 = draw(cfg.N1);
    d.nu5 = draw(cfg.N2);
    d.T2 = vandermonde(cfg.M_y, d.nu2);
    d.T3 = vandermonde(cfg.M_z, d.nu3);
    d.T4 = vandermonde(cfg.Ntilde_y, d.nu4);
    d.T5 = vandermonde(cfg.Ntilde_z, d.nu5);

    const cmat K23 = kronecker(cmat(d.T2.adjoint()), cmat(d.T3.adjoint())); // G x (My Mz)
    d.Upsilon = K23.unaryExpr([eta](const cplx &z) { return std::polar(eta, std::arg(z)); });
    d.combiner = kronecker(d.T4, d.T5);
    return d;
}

// One resolvable path expressed through the quantities the tensor model depends on.
struct PathAtom
{
    bool cascaded = false;
    cplx gain{0.0, 0.0};
    double delay = 0.0;
    double psi2 = 0.0, psi3 = 0.0; // cascaded only
    AnglePair bs;                  // AOA at the BS
};

// Direct paths first, then cascaded paths in index order c = q P + p.
inline std::vector<PathAtom> atoms_from_truth(const MultipathGroundTruth &gt)
{
    std::vector<PathAtom> out;
    for (const auto &p : gt.direct)
        out.push_back({false, p.gain, p.delay, 0.0, 0.0, p.bs});
    for (const auto &c : gt.cascaded)
        out.push_back({true, c.gain, c.delay, c.psi2, c.psi3, gt.ris_bs[c.q].bs});
    return out;
}

// Column generators per mode: delay, RIS y/z, BS y/z.
inline double delay_generator(double tau, const SystemConfig &cfg) { return -2.0 * pi * cfg.delta_f * tau; }

// Weight vector and the five factors A1, B2..B5 of the noise-free signal tensor.
inline FactorSet factors_from_atoms(const std::vector<PathAtom> &atoms, const SystemConfig &cfg, const ProbingDesign &d)
{
    const auto R = static_cast<Eigen::Index>(atoms.size());
    FactorSet fs;
    fs.weights.resize(R);
    fs.factors = {cmat(cfg.K, R), cmat(cfg.G1, R), cmat(cfg.G2, R), cmat(cfg.N1, R), cmat(cfg.N2, R)};
    for (Eigen::Index r = 0; r < R; ++r)
    {
        const auto &a = atoms[static_cast<std::size_t>(r)];
        fs.factors[0].col(r) = uniform_steering(cfg.K, delay_generator(a.delay, cfg));
        if (a.cascaded)
        {
            fs.weights(r) = d.x * d.eta * a.gain;
            fs.factors[1].col(r) = d.T2.adjoint() * uniform_steering(cfg.M_y, ris_generator(a.psi2, cfg));
            fs.factors[2].col(r) = d.T3.adjoint() * uniform_steering(cfg.M_z, ris_generator(a.psi3, cfg));
        }
        else
        {
            fs.weights(r) = d.x * a.gain;
            fs.factors[1].col(r).setOnes();
            fs.factors[2].col(r).setOnes();
        }
        fs.factors[3].col(r) = d.T4.adjoint() * uniform_steering(cfg.Ntilde_y, spatial_generator_y(a.bs, cfg.d_B, cfg.lambda));
        fs.factors[4].col(r) = d.T5.adjoint() * uniform_steering(cfg.Ntilde_z, spatial_generator_z(a.bs, cfg.d_B, cfg.lambda));
    }
    return fs;
}

inline Tensor tensor_from_atoms(const std::vector<PathAtom> &atoms, const SystemConfig &cfg, const ProbingDesign &d)
{
    if (atoms.empty())
        return Tensor({cfg.K, cfg.G1, cfg.G2, cfg.N1, cfg.N2});
    return cp_reconstruct(factors_from_atoms(atoms, cfg, d));
}

struct ReceivedBlock
{
    std::size_t K = 0, G = 0;
    std::vector<cvec> y; // index k G + g
    std::uint64_t seed = 0;
    double sigma2_B = 0.0, sigma2_R = 0.0;
    bool noise_on = false;

    const cvec &at(std::size_t k, std::size_t g) const { return y.at(k * G + g); }
};

struct NoiseLevels
{
    double sigma2_B = 0.0;
    double sigma2_R = 0.0;
};

namespace detail
{
// Low-rank view of the RIS-BS link: H_R2^(k) = sum_q c_q^(k) a_B^q a_R^qT, with R^H a_B^q cached.
struct LinkCache
{
    std::vector<cvec> RH_aB_direct, RH_aB_ris, a_R_ris, a_R_ue;
};

inline LinkCache make_cache(const MultipathGroundTruth &gt, const SystemConfig &cfg, const ProbingDesign &d)
{
    LinkCache c;
    const cmat RH = d.combiner.adjoint();
    for (const auto &p : gt.direct)
        c.RH_aB_direct.push_back(RH * bs_steering(p.bs, cfg));
    for (const auto &p : gt.ris_bs)
    {
        c.RH_aB_ris.push_back(RH * bs_steering(p.bs, cfg));
        c.a_R_ris.push_back(ris_steering(p.ris, cfg));
    }
    for (const auto &p : gt.ue_ris)
        c.a_R_ue.push_back(ris_steering(p.ris, cfg));
    return c;
}
} // namespace detail

// y^(k,g) = R^H (h_L + H_R2 Gamma_g h_R1) x + R^H (w_B + H_R2 Gamma_g w_R).
inline ReceivedBlock synthesize_rx(const MultipathGroundTruth &gt, const SystemConfig &cfg, const ProbingDesign &d,
                                   bool noise_on, std::uint64_t seed, NoiseLevels noise)
{
    const auto N = static_cast<Eigen::Index>(cfg.beams());
    const auto M = static_cast<Eigen::Index>(cfg.ris_elements());
    const auto NB = static_cast<Eigen::Index>(cfg.bs_elements());
    if (d.combiner.rows() != NB || d.combiner.cols() != N || d.Upsilon.rows() != static_cast<Eigen::Index>(cfg.G) ||
        d.Upsilon.cols() != M)
        throw std::invalid_argument("synthesize_rx: probing design does not match the configuration.");

    const auto cache = detail::make_cache(gt, cfg, d);
    Rng rng(seed);
    ReceivedBlock blk;
    blk.K = cfg.K;
    blk.G = cfg.G;
    blk.seed = seed;
    blk.noise_on = noise_on;
    blk.sigma2_B = noise_on ? noise.sigma2_B : 0.0;
    blk.sigma2_R = noise_on ? noise.sigma2_R : 0.0;
    blk.y.resize(cfg.K * cfg.G);

    const cmat RH = d.combiner.adjoint();
    for (std::size_t k = 0; k < cfg.K; ++k)
    {
        const double f = cfg.subcarrier_frequency(k);
        cvec direct = cvec::Zero(N);
        for (std::size_t l = 0; l < gt.L(); ++l)
            direct += gt.direct[l].gain * delay_phase(f, gt.direct[l].delay) * cache.RH_aB_direct[l];
        cvec h_R1 = cvec::Zero(M);
        for (std::size_t p = 0; p < gt.P(); ++p)
            h_R1 += gt.ue_ris[p].gain * delay_phase(f, gt.ue_ris[p].delay) * cache.a_R_ue[p];
        std::vector<cplx> cq(gt.Q());
        for (std::size_t q = 0; q < gt.Q(); ++q)
            cq[q] = gt.ris_bs[q].gain * delay_phase(f, gt.ris_bs[q].delay);

        for (std::size_t g = 0; g < cfg.G; ++g)
        {
            const cvec gam = d.profile(g);
            cvec incident = gam.cwiseProduct(h_R1) * d.x;
            cvec wR;
            if (noise_on && noise.sigma2_R > 0.0)
            {
                wR.resize(M);
                for (Eigen::Index m = 0; m < M; ++m)
                    wR(m) = complex_gaussian(rng, noise.sigma2_R);
                incident += gam.cwiseProduct(wR);
            }
            cvec y = direct * d.x;
            for (std::size_t q = 0; q < gt.Q(); ++q)
            {
                const cplx s = (cache.a_R_ris[q].transpose() * incident)(0);
                y += cq[q] * s * cache.RH_aB_ris[q];
            }
            if (noise_on && noise.sigma2_B > 0.0)
            {
                cvec wB(NB);
                for (Eigen::Index m = 0; m < NB; ++m)
                    wB(m) = complex_gaussian(rng, noise.sigma2_B);
                y += RH * wB;
            }
            blk.y[k * cfg.G + g] = std::move(y);
        }
    }
    return blk;
}

inline ReceivedBlock synthesize_rx(const MultipathGroundTruth &gt, const SystemConfig &cfg, const ProbingDesign &d,
                                   bool noise_on, std::uint64_t seed)
{
    return synthesize_rx(gt, cfg, d, noise_on, seed, {cfg.sigma2_B, cfg.sigma2_R});
}

// Y(k, g1, g2, n1, n2) = [y^(k, g1 G2 + g2)]_{n1 N2 + n2}
inline Tensor build_tensor(const ReceivedBlock &blk, const SystemConfig &cfg)
{
    if (blk.K != cfg.K || blk.G != cfg.G || blk.y.size() != cfg.K * cfg.G)
        throw std::invalid_argument("build_tensor: block shape does not match the configuration.");
    const std::size_t K = cfg.K, G1 = cfg.G1, G2 = cfg.G2, N1 = cfg.N1, N2 = cfg.N2;
    std::vector<cplx> data(K * G1 * G2 * N1 * N2);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t g1 = 0; g1 < G1; ++g1)
            for (std::size_t g2 = 0; g2 < G2; ++g2)
            {
                const cvec &y = blk.y[k * cfg.G + g1 * G2 + g2];
                if (static_cast<std::size_t>(y.size()) != N1 * N2)
                    throw std::invalid_argument("build_tensor: received vector has the wrong length.");
                for (std::size_t n1 = 0; n1 < N1; ++n1)
                    for (std::size_t n2 = 0; n2 < N2; ++n2)
                        data[k + K * (g1 + G1 * (g2 + G2 * (n1 + N1 * n2)))] = y(static_cast<Eigen::Index>(n1 * N2 + n2));
            }
    return {{K, G1, G2, N1, N2}, std::move(data)};
}

inline double signal_energy(const ReceivedBlock &blk)
{
    double e = 0.0;
    for (const auto &y : blk.y)
        e += y.squaredNorm();
    return e;
}

// Sum over (k,g) of tr C^(k,g) for the exact noise path: sigma_B^2 ||R||_F^2 + sigma_R^2 eta^2 ||R^H H_R2^(k)||_F^2.
inline double noise_trace_total(const MultipathGroundTruth &gt, const SystemConfig &cfg, const ProbingDesign &d,
                                NoiseLevels noise)
{
    const auto cache = detail::make_cache(gt, cfg, d);
    const double rb = d.combiner.squaredNorm();
    double total = 0.0;
    for (std::size_t k = 0; k < cfg.K; ++k)
    {
        const double f = cfg.subcarrier_frequency(k);
        cmat G = cmat::Zero(static_cast<Eigen::Index>(cfg.beams()), static_cast<Eigen::Index>(cfg.ris_elements()));
        for (std::size_t q = 0; q < gt.Q(); ++q)
            G += gt.ris_bs[q].gain * delay_phase(f, gt.ris_bs[q].delay) * cache.RH_aB_ris[q] * cache.a_R_ris[q].transpose();
        total += static_cast<double>(cfg.G) * (noise.sigma2_B * rb + noise.sigma2_R * d.eta * d.eta * G.squaredNorm());
    }
    return total;
}

inline double snr_db(double signal_energy, double noise_trace)
{
    if (!(noise_trace > 0.0))
        throw std::invalid_argument("snr: noise covariance trace must be positive.");
    return 10.0 * std::log10(signal_energy / noise_trace);
}

// Common factor on both noise variances that yields the requested SNR.
inline NoiseLevels noise_for_snr(double target_db, double signal_energy, const MultipathGroundTruth &gt,
                                 const SystemConfig &cfg, const ProbingDesign &d, NoiseLevels nominal)
{
    const double base = noise_trace_total(gt, cfg, d, nominal);
    if (!(base > 0.0))
        throw std::invalid_argument("noise_for_snr: nominal noise must be positive.");
    const double scale = signal_energy / (base * std::pow(10.0, target_db / 10.0));
    return {nominal.sigma2_B * scale, nominal.sigma2_R * scale};
}

} // namespace ristensor

#endif
