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

#ifndef RISTENSOR_CRLB_HPP
#define RISTENSOR_CRLB_HPP

#include "array_channel.hpp"
#include "probing.hpp"
#include "tensor.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ristensor
{

// Parameter vector layout (fixed):
//   [tau_L (L), tau_R (C), psi2 (C), psi3 (C), theta_L (2L, az/el interleaved), theta_R (2Q),
//    Re beta_L (L), Im beta_L (L), Re beta_R (C), Im beta_R (C) | nuisance |beta_R2^q|^2 (Q)]
struct ParamVector
{
    std::size_t L = 0, P = 0, Q = 0;
    std::vector<double> tau_L, tau_R, psi2, psi3;
    std::vector<AnglePair> theta_L, theta_R;
    std::vector<cplx> beta_L, beta_R;
    std::vector<double> nuisance;

    std::size_t C() const { return P * Q; }
    std::size_t R() const { return L + C(); }
    std::size_t interest_size() const { return 5 * R() + 2 * Q; }
    std::size_t size() const { return interest_size() + Q; }

    // offsets of each family inside the flat vector
    std::size_t off_tauL() const { return 0; }
    std::size_t off_tauR() const { return L; }
    std::size_t off_psi2() const { return L + C(); }
    std::size_t off_psi3() const { return L + 2 * C(); }
    std::size_t off_thetaL() const { return L + 3 * C(); }
    std::size_t off_thetaR() const { return 3 * L + 3 * C(); }
    std::size_t off_reL() const { return 3 * L + 3 * C() + 2 * Q; }
    std::size_t off_imL() const { return off_reL() + L; }
    std::size_t off_reR() const { return off_imL() + L; }
    std::size_t off_imR() const { return off_reR() + C(); }
    std::size_t off_nui() const { return off_imR() + C(); }

    rvec flatten() const
    {
        rvec v(static_cast<Eigen::Index>(size()));
        auto put = [&v](std::size_t i, double x) { v(static_cast<Eigen::Index>(i)) = x; };
        for (std::size_t l = 0; l < L; ++l)
        {
            put(off_tauL() + l, tau_L[l]);
            put(off_thetaL() + 2 * l, theta_L[l].az);
            put(off_thetaL() + 2 * l + 1, theta_L[l].el);
            put(off_reL() + l, beta_L[l].real());
            put(off_imL() + l, beta_L[l].imag());
        }
        for (std::size_t c = 0; c < C(); ++c)
        {
            put(off_tauR() + c, tau_R[c]);
            put(off_psi2() + c, psi2[c]);
            put(off_psi3() + c, psi3[c]);
            put(off_reR() + c, beta_R[c].real());
            put(off_imR() + c, beta_R[c].imag());
        }
        for (std::size_t q = 0; q < Q; ++q)
        {
            put(off_thetaR() + 2 * q, theta_R[q].az);
            put(off_thetaR() + 2 * q + 1, theta_R[q].el);
            put(off_nui() + q, nuisance[q]);
        }
        return v;
    }

    ParamVector with(const rvec &v) const
    {
        if (static_cast<std::size_t>(v.size()) != size())
            throw std::invalid_argument("ParamVector: length mismatch.");
        ParamVector p = *this;
        auto get = [&v](std::size_t i) { return v(static_cast<Eigen::Index>(i)); };
        for (std::size_t l = 0; l < L; ++l)
        {
            p.tau_L[l] = get(off_tauL() + l);
            p.theta_L[l] = {get(off_thetaL() + 2 * l), get(off_thetaL() + 2 * l + 1)};
            p.beta_L[l] = {get(off_reL() + l), get(off_imL() + l)};
        }
        for (std::size_t c = 0; c < C(); ++c)
        {
            p.tau_R[c] = get(off_tauR() + c);
            p.psi2[c] = get(off_psi2() + c);
            p.psi3[c] = get(off_psi3() + c);
            p.beta_R[c] = {get(off_reR() + c), get(off_imR() + c)};
        }
        for (std::size_t q = 0; q < Q; ++q)
        {
            p.theta_R[q] = {get(off_thetaR() + 2 * q), get(off_thetaR() + 2 * q + 1)};
            p.nuisance[q] = get(off_nui() + q);
        }
        return p;
    }
};

inline ParamVector params_from_truth(const MultipathGroundTruth &gt)
{
    ParamVector p;
    p.L = gt.L();
    p.P = gt.P();
    p.Q = gt.Q();
    for (const auto &d : gt.direct)
    {
        p.tau_L.push_back(d.delay);
        p.theta_L.push_back(d.bs);
        p.beta_L.push_back(d.gain);
    }
    for (const auto &c : gt.cascaded)
    {
        p.tau_R.push_back(c.delay);
        p.psi2.push_back(c.psi2);
        p.psi3.push_back(c.psi3);
        p.beta_R.push_back(c.gain);
    }
    for (const auto &q : gt.ris_bs)
    {
        p.theta_R.push_back(q.bs);
        p.nuisance.push_back(std::norm(q.gain));
    }
    return p;
}

// Real 2n x 2n representation of a complex Hermitian covariance: (1/2)[[Re, -Im], [Im, Re]].
inline rmat real_block(const cmat &A)
{
    const Eigen::Index n = A.rows();
    rmat out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = A.real();
    out.topRightCorner(n, n) = -A.imag();
    out.bottomLeftCorner(n, n) = A.imag();
    out.bottomRightCorner(n, n) = A.real();
    return 0.5 * out;
}

inline rmat stack_real(const cmat &A)
{
    rmat out(2 * A.rows(), A.cols());
    out.topRows(A.rows()) = A.real();
    out.bottomRows(A.rows()) = A.imag();
    return out;
}

// Beam-domain BS response R^H a_B(theta) = (T4^H a(w4)) (x) (T5^H a(w5)) and its angle derivatives.
struct BeamResponse
{
    cvec v, d_az, d_el;
};

inline BeamResponse beam_response(const AnglePair &a, const SystemConfig &cfg, const ProbingDesign &d)
{
    const double kb = 2.0 * pi / cfg.lambda * cfg.d_B;
    const double w4 = kb * std::sin(a.az) * std::cos(a.el);
    const double w5 = kb * std::sin(a.el);
    const double dw4_daz = kb * std::cos(a.az) * std::cos(a.el);
    const double dw4_del = -kb * std::sin(a.az) * std::sin(a.el);
    const double dw5_del = kb * std::cos(a.el);

    auto ramp = [](std::size_t M) {
        cvec r(static_cast<Eigen::Index>(M));
        for (std::size_t m = 0; m < M; ++m)
            r(static_cast<Eigen::Index>(m)) = cplx(0.0, static_cast<double>(m));
        return r;
    };
    const cvec a4 = uniform_steering(cfg.Ntilde_y, w4), a5 = uniform_steering(cfg.Ntilde_z, w5);
    const cvec b4 = d.T4.adjoint() * a4, b5 = d.T5.adjoint() * a5;
    const cvec db4 = d.T4.adjoint() * ramp(cfg.Ntilde_y).cwiseProduct(a4); // d b4 / d w4
    const cvec db5 = d.T5.adjoint() * ramp(cfg.Ntilde_z).cwiseProduct(a5);
    BeamResponse br;
    br.v = kronecker(b4, b5);
    br.d_az = dw4_daz * kronecker(db4, b5);
    br.d_el = dw4_del * kronecker(db4, b5) + dw5_del * kronecker(b4, db5);
    return br;
}

struct RisResponse
{
    cvec b, d_psi;
};

inline RisResponse ris_response(double psi, std::size_t M, const cmat &T, const SystemConfig &cfg)
{
    const double kr = 2.0 * pi / cfg.lambda * cfg.d_R;
    const cvec a = uniform_steering(M, kr * psi);
    cvec ra(static_cast<Eigen::Index>(M));
    for (std::size_t m = 0; m < M; ++m)
        ra(static_cast<Eigen::Index>(m)) = cplx(0.0, kr * static_cast<double>(m)) * a(static_cast<Eigen::Index>(m));
    return {T.adjoint() * a, T.adjoint() * ra};
}

// Noise-free mean of y^(k,g) in the cascaded-parameter form.
inline cvec mean_signal(const ParamVector &p, const SystemConfig &cfg, const ProbingDesign &d, std::size_t k, std::size_t g)
{
    const double f = cfg.subcarrier_frequency(k);
    const std::size_t g1 = g / cfg.G2, g2 = g % cfg.G2;
    cvec mu = cvec::Zero(static_cast<Eigen::Index>(cfg.beams()));
    for (std::size_t l = 0; l < p.L; ++l)
        mu += d.x * p.beta_L[l] * delay_phase(f, p.tau_L[l]) * beam_response(p.theta_L[l], cfg, d).v;
    for (std::size_t c = 0; c < p.C(); ++c)
    {
        const auto b2 = ris_response(p.psi2[c], cfg.M_y, d.T2, cfg);
        const auto b3 = ris_response(p.psi3[c], cfg.M_z, d.T3, cfg);
        const cplx rho = d.eta * b2.b(static_cast<Eigen::Index>(g1)) * b3.b(static_cast<Eigen::Index>(g2));
        mu += d.x * p.beta_R[c] * delay_phase(f, p.tau_R[c]) * rho * beam_response(p.theta_R[c / p.P], cfg, d).v;
    }
    return mu;
}

// d[Re mu; Im mu] / d phi, (2 N1 N2) x (5R + 3Q); nuisance columns are zero.
inline rmat mean_jacobian(const ParamVector &p, const SystemConfig &cfg, const ProbingDesign &d, std::size_t k, std::size_t g)
{
    const double f = cfg.subcarrier_frequency(k);
    const std::size_t g1 = g / cfg.G2, g2 = g % cfg.G2;
    const auto N = static_cast<Eigen::Index>(cfg.beams());
    cmat J = cmat::Zero(N, static_cast<Eigen::Index>(p.size()));
    auto col = [&J](std::size_t i) { return J.col(static_cast<Eigen::Index>(i)); };

    for (std::size_t l = 0; l < p.L; ++l)
    {
        const auto br = beam_response(p.theta_L[l], cfg, d);
        const cplx ph = d.x * delay_phase(f, p.tau_L[l]);
        const cvec unit = ph * br.v; // d mu / d Re(beta)
        col(p.off_tauL() + l) = cplx(0.0, -2.0 * pi * f) * p.beta_L[l] * unit;
        col(p.off_thetaL() + 2 * l) = p.beta_L[l] * ph * br.d_az;
        col(p.off_thetaL() + 2 * l + 1) = p.beta_L[l] * ph * br.d_el;
        col(p.off_reL() + l) = unit;
        col(p.off_imL() + l) = jay * unit;
    }
    std::vector<BeamResponse> brq;
    for (std::size_t q = 0; q < p.Q; ++q)
        brq.push_back(beam_response(p.theta_R[q], cfg, d));
    for (std::size_t c = 0; c < p.C(); ++c)
    {
        const std::size_t q = c / p.P;
        const auto b2 = ris_response(p.psi2[c], cfg.M_y, d.T2, cfg);
        const auto b3 = ris_response(p.psi3[c], cfg.M_z, d.T3, cfg);
        const auto i1 = static_cast<Eigen::Index>(g1), i2 = static_cast<Eigen::Index>(g2);
        const cplx rho = d.eta * b2.b(i1) * b3.b(i2);
        const cplx ph = d.x * delay_phase(f, p.tau_R[c]);
        const cvec unit = ph * rho * brq[q].v;
        col(p.off_tauR() + c) = cplx(0.0, -2.0 * pi * f) * p.beta_R[c] * unit;
        col(p.off_psi2() + c) = p.beta_R[c] * ph * d.eta * b2.d_psi(i1) * b3.b(i2) * brq[q].v;
        col(p.off_psi3() + c) = p.beta_R[c] * ph * d.eta * b2.b(i1) * b3.d_psi(i2) * brq[q].v;
        col(p.off_thetaR() + 2 * q) += p.beta_R[c] * ph * rho * brq[q].d_az;
        col(p.off_thetaR() + 2 * q + 1) += p.beta_R[c] * ph * rho * brq[q].d_el;
        col(p.off_reR() + c) = unit;
        col(p.off_imR() + c) = jay * unit;
    }
    return stack_real(J);
}

// Complex covariance sigma_B^2 R^H R + sigma_R^2 eta^2 M sum_q s_q v_q v_q^H (cross terms between RIS-BS paths dropped).
inline cmat noise_covariance_complex(const ParamVector &p, const SystemConfig &cfg, const ProbingDesign &d, NoiseLevels noise)
{
    cmat Cc = noise.sigma2_B * d.combiner.adjoint() * d.combiner;
    const double s = noise.sigma2_R * d.eta * d.eta * static_cast<double>(cfg.ris_elements());
    if (s > 0.0)
        for (std::size_t q = 0; q < p.Q; ++q)
        {
            const cvec v = beam_response(p.theta_R[q], cfg, d).v;
            Cc += s * p.nuisance[q] * v * v.adjoint();
        }
    return Cc;
}

inline rmat noise_covariance(const ParamVector &p, const SystemConfig &cfg, const ProbingDesign &d, NoiseLevels noise)
{
    return real_block(noise_covariance_complex(p, cfg, d, noise));
}

// Covariance of the exact noise path on (k, g), including the cross terms between RIS-BS paths.
inline cmat exact_noise_covariance_complex(const MultipathGroundTruth &gt, const SystemConfig &cfg, const ProbingDesign &d,
                                           NoiseLevels noise, std::size_t k, std::size_t g)
{
    const double f = cfg.subcarrier_frequency(k);
    const cmat RH = d.combiner.adjoint();
    cmat H = cmat::Zero(static_cast<Eigen::Index>(cfg.bs_elements()), static_cast<Eigen::Index>(cfg.ris_elements()));
    for (const auto &q : gt.ris_bs)
        H += q.gain * delay_phase(f, q.delay) * bs_steering(q.bs, cfg) * ris_steering(q.ris, cfg).transpose();
    const cmat GR = RH * H * d.profile(g).asDiagonal();
    return noise.sigma2_B * RH * RH.adjoint() + noise.sigma2_R * GR * GR.adjoint();
}

// Relative Frobenius size of the dropped cross terms, averaged over subcarriers (slot 0).
inline double covariance_approximation_error(const MultipathGroundTruth &gt, const SystemConfig &cfg, const ProbingDesign &d,
                                             NoiseLevels noise)
{
    const auto p = params_from_truth(gt);
    const cmat Ca = noise_covariance_complex(p, cfg, d, noise);
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.K; ++k)
        acc += (exact_noise_covariance_complex(gt, cfg, d, noise, k, 0) - Ca).norm() / Ca.norm();
    return acc / static_cast<double>(cfg.K);
}

// Non-zero derivatives of the real covariance: theta_R (az, el per group) and the nuisance magnitudes.
struct CovDerivative
{
    std::size_t index = 0;
    rmat dC;
};

inline std::vector<CovDerivative> cov_jacobian(const ParamVector &p, const SystemConfig &cfg, const ProbingDesign &d,
                                               NoiseLevels noise)
{
    std::vector<CovDerivative> out;
    const double s = noise.sigma2_R * d.eta * d.eta * static_cast<double>(cfg.ris_elements());
    if (!(s > 0.0))
        return out;
    for (std::size_t q = 0; q < p.Q; ++q)
    {
        const auto br = beam_response(p.theta_R[q], cfg, d);
        const cmat daz = s * p.nuisance[q] * (br.d_az * br.v.adjoint() + br.v * br.d_az.adjoint());
        const cmat del = s * p.nuisance[q] * (br.d_el * br.v.adjoint() + br.v * br.d_el.adjoint());
        out.push_back({p.off_thetaR() + 2 * q, real_block(daz)});
        out.push_back({p.off_thetaR() + 2 * q + 1, real_block(del)});
        out.push_back({p.off_nui() + q, real_block(s * br.v * br.v.adjoint())});
    }
    return out;
}

// Element-domain form of the same derivative: d(A_B)/d angle with [A_B]_ij = exp(j 2pi/lambda (p_i - p_j)^T d).
inline cmat steering_outer_derivative(const AnglePair &a, bool wrt_el, const SystemConfig &cfg)
{
    const rmat P = upa_positions(cfg.Ntilde_y, cfg.Ntilde_z, cfg.d_B);
    const Eigen::Vector3d dv = direction_vector(a);
    Eigen::Vector3d dd;
    if (wrt_el)
        dd = {-std::cos(a.az) * std::sin(a.el), -std::sin(a.az) * std::sin(a.el), std::cos(a.el)};
    else
        dd = {-std::sin(a.az) * std::cos(a.el), std::cos(a.az) * std::cos(a.el), 0.0};
    const Eigen::Index n = P.rows();
    cmat out(n, n);
    const double kk = 2.0 * pi / cfg.lambda;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const Eigen::Vector3d diff = (P.row(i) - P.row(j)).transpose();
            out(i, j) = cplx(0.0, kk * diff.dot(dd)) * std::polar(1.0, kk * diff.dot(dv));
        }
    return out;
}

struct CrlbReport
{
    rmat fim;       // (5R + 3Q)^2
    rmat fim_equiv; // (5R + 2Q)^2 after nuisance reduction
    rvec crlb;      // diag of fim_equiv^-1, SI units (s^2, rad^2, unitless, |gain|^2)
    bool nuisance_reduced = true;
    std::string warning;
    double condition = 0.0;
    ParamVector layout;

    // Family sums in reporting units: delays m^2, angles deg^2, psi unitless.
    double family(const std::string &name) const
    {
        const auto &p = layout;
        auto sum = [this](std::size_t off, std::size_t n, double scale) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += crlb(static_cast<Eigen::Index>(off + i));
            return s * scale;
        };
        const double c2 = speed_of_light * speed_of_light;
        const double d2 = (180.0 / pi) * (180.0 / pi);
        if (name == "tauL")
            return sum(p.off_tauL(), p.L, c2);
        if (name == "tauR")
            return sum(p.off_tauR(), p.C(), c2);
        if (name == "psi2")
            return sum(p.off_psi2(), p.C(), 1.0);
        if (name == "psi3")
            return sum(p.off_psi3(), p.C(), 1.0);
        if (name == "thetaL")
            return sum(p.off_thetaL(), 2 * p.L, d2);
        if (name == "thetaR")
            return sum(p.off_thetaR(), 2 * p.Q, d2);
        throw std::invalid_argument("CrlbReport: unknown family " + name);
    }
};

inline const std::vector<std::string> &crlb_families()
{
    static const std::vector<std::string> f{"tauL", "tauR", "psi2", "psi3", "thetaL", "thetaR"};
    return f;
}

struct FimOptions
{
    bool include_trace_term = true;
};

// Fisher information summed over all (k, g); the covariance and its derivatives are (k, g)-independent.
inline rmat fisher_information(const ParamVector &p, const SystemConfig &cfg, const ProbingDesign &d, NoiseLevels noise,
                               FimOptions opt = {})
{
    const rmat C = noise_covariance(p, cfg, d, noise);
    Eigen::LLT<rmat> llt(C);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("fim: noise covariance is not positive definite.");
    const auto D = static_cast<Eigen::Index>(p.size());
    rmat J = rmat::Zero(D, D);
    for (std::size_t k = 0; k < cfg.K; ++k)
        for (std::size_t g = 0; g < cfg.G; ++g)
        {
            const rmat Jm = mean_jacobian(p, cfg, d, k, g);
            const rmat W = llt.matrixL().solve(Jm); // L^-1 Jm
            J.noalias() += W.transpose() * W;
        }
    if (opt.include_trace_term)
    {
        const auto dCs = cov_jacobian(p, cfg, d, noise);
        std::vector<rmat> CidC;
        for (const auto &dc : dCs)
            CidC.push_back(llt.solve(dc.dC));
        const double slots = static_cast<double>(cfg.K * cfg.G);
        for (std::size_t a = 0; a < dCs.size(); ++a)
            for (std::size_t b = 0; b < dCs.size(); ++b)
            {
                const double t = 0.5 * (CidC[a].cwiseProduct(CidC[b].transpose())).sum();
                J(static_cast<Eigen::Index>(dCs[a].index), static_cast<Eigen::Index>(dCs[b].index)) += slots * t;
            }
    }
    return 0.5 * (J + J.transpose());
}

inline CrlbReport fim(const ParamVector &p, const SystemConfig &cfg, const ProbingDesign &d, NoiseLevels noise)
{
    if (!(noise.sigma2_B > 0.0))
        throw std::invalid_argument("fim: sigma_B^2 must be positive.");
    CrlbReport rep;
    rep.layout = p;
    rep.fim = fisher_information(p, cfg, d, noise);
    const auto Di = static_cast<Eigen::Index>(p.interest_size());
    const auto Dn = static_cast<Eigen::Index>(p.Q);
    const rmat J1 = rep.fim.topLeftCorner(Di, Di);
    const rmat J2 = rep.fim.topRightCorner(Di, Dn);
    const rmat J3 = rep.fim.bottomRightCorner(Dn, Dn);

    bool singular = Dn == 0;
    if (!singular)
    {
        Eigen::SelfAdjointEigenSolver<rmat> es(J3);
        const rvec ev = es.eigenvalues();
        singular = !(ev.maxCoeff() > 0.0) || ev.minCoeff() <= 1e-12 * ev.maxCoeff();
    }
    if (singular)
    {
        rep.fim_equiv = J1;
        rep.nuisance_reduced = false;
        if (Dn > 0)
            rep.warning = "nuisance block singular; reduction skipped";
    }
    else
        rep.fim_equiv = J1 - J2 * J3.ldlt().solve(J2.transpose());
    rep.fim_equiv = 0.5 * (rep.fim_equiv + rep.fim_equiv.transpose());

    // parameters span many orders of magnitude (s, rad, raw gains); invert the Jacobi-scaled matrix
    const rvec dg = rep.fim_equiv.diagonal();
    if (!(dg.minCoeff() > 0.0))
        throw std::runtime_error("fim: equivalent FIM has a non-informative parameter.");
    const rvec sc = dg.cwiseSqrt().cwiseInverse();
    const rmat S = sc.asDiagonal() * rep.fim_equiv * sc.asDiagonal();
    Eigen::SelfAdjointEigenSolver<rmat> es(S);
    const rvec ev = es.eigenvalues();
    rep.condition = ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff() : std::numeric_limits<double>::infinity();
    if (!(ev.minCoeff() > 0.0))
        throw std::runtime_error("fim: equivalent FIM is singular.");
    const rmat inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    rep.crlb = sc.cwiseProduct(inv.diagonal()).cwiseProduct(sc);
    return rep;
}

inline CrlbReport fim(const MultipathGroundTruth &gt, const SystemConfig &cfg, const ProbingDesign &d, NoiseLevels noise)
{
    return fim(params_from_truth(gt), cfg, d, noise);
}

} // namespace ristensor

#endif
