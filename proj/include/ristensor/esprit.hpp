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

#ifndef RISTENSOR_ESPRIT_HPP
#define RISTENSOR_ESPRIT_HPP

#include "tensor.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ristensor
{

// Raised when the shifted subspace loses column rank (the decomposition is not identifiable).
struct RankDeficiencyError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct ShiftPair
{
    std::vector<Eigen::Index> up, down;
};

// Rows of a (K1 * inner) matrix whose fastest index is the smoothed one.
inline ShiftPair smoothing_shift_pair(std::size_t K1, std::size_t inner)
{
    if (K1 < 2)
        throw RankDeficiencyError("smoothing_shift_pair: K1 must be at least 2.");
    ShiftPair s;
    for (std::size_t m = 0; m < inner; ++m)
        for (std::size_t k = 0; k + 1 < K1; ++k)
        {
            s.up.push_back(static_cast<Eigen::Index>(k + K1 * m));
            s.down.push_back(static_cast<Eigen::Index>(k + 1 + K1 * m));
        }
    return s;
}

inline cmat select_rows(const cmat &U, const std::vector<Eigen::Index> &rows)
{
    cmat out(static_cast<Eigen::Index>(rows.size()), U.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = U.row(rows[i]);
    return out;
}

struct EspritResult
{
    rvec omega;
    cmat mixing;
    double condition = 0.0; // of the up-shifted subspace
};

// Joint shift-invariance estimate: eigen-decomposition of (J_up U)^+ (J_down U).
inline EspritResult element_esprit_joint(const cmat &U, const ShiftPair &pair)
{
    if (pair.up.size() != pair.down.size())
        throw std::invalid_argument("element_esprit_joint: selection maps differ in length.");
    const Eigen::Index R = U.cols();
    if (R < 1)
        throw std::invalid_argument("element_esprit_joint: empty subspace.");
    if (static_cast<Eigen::Index>(pair.up.size()) < R)
        throw RankDeficiencyError("element_esprit_joint: fewer shifted rows than subspace columns.");
    const cmat Au = select_rows(U, pair.up);
    const cmat Ad = select_rows(U, pair.down);

    Eigen::JacobiSVD<cmat> svd(Au, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const rvec s = svd.singularValues();
    if (!(s(0) > 0.0) || s(R - 1) < 1e-10 * s(0))
        throw RankDeficiencyError("element_esprit_joint: shifted subspace is rank deficient.");
    const cmat Psi = svd.solve(Ad);

    Eigen::ComplexEigenSolver<cmat> es(Psi);
    if (es.info() != Eigen::Success)
        throw RankDeficiencyError("element_esprit_joint: eigen-decomposition failed.");
    EspritResult out;
    out.omega.resize(R);
    for (Eigen::Index r = 0; r < R; ++r)
        out.omega(r) = std::arg(es.eigenvalues()(r));
    out.mixing = es.eigenvectors();
    out.condition = s(0) / s(R - 1);
    return out;
}

// One-lag least-squares phase of a single Vandermonde-like column.
inline double element_esprit_column(const cvec &b)
{
    if (b.size() < 2)
        throw std::invalid_argument("element_esprit_column: need at least two entries.");
    const auto n = b.size() - 1;
    const cplx z = b.head(n).dot(b.tail(n)); // conj(head)^T tail
    if (std::abs(z) == 0.0)
        throw std::invalid_argument("element_esprit_column: zero vector.");
    return std::arg(z);
}

struct BeamspaceTransform
{
    cmat T;  // M x Gn, column g = uniform_steering(M, nu_g)
    rvec nu; // generators
    cvec F;  // diagonal of the shift operator, exp(-j nu)
    cmat Q;  // projector onto the complement of span{1, exp(-j M nu)}
    std::size_t M = 0;
};

inline BeamspaceTransform build_beamspace(const cmat &T)
{
    const Eigen::Index M = T.rows(), Gn = T.cols();
    if (M < 2 || Gn < 1)
        throw std::invalid_argument("build_beamspace: transform too small.");
    BeamspaceTransform bt;
    bt.T = T;
    bt.M = static_cast<std::size_t>(M);
    bt.nu.resize(Gn);
    bt.F.resize(Gn);
    for (Eigen::Index g = 0; g < Gn; ++g)
    {
        if (std::abs(T(0, g)) == 0.0)
            throw std::invalid_argument("build_beamspace: non-Vandermonde column.");
        const cplx ratio = T(1, g) / T(0, g);
        for (Eigen::Index m = 1; m < M; ++m)
            if (std::abs(T(m, g) - ratio * T(m - 1, g)) > 1e-8 * std::abs(T(m - 1, g)))
                throw std::invalid_argument("build_beamspace: non-Vandermonde column (ratio test failed).");
        bt.nu(g) = std::arg(ratio);
        bt.F(g) = std::polar(1.0, -bt.nu(g));
    }
    // J_up T = J_down T F
    const double resid = (T.topRows(M - 1) - T.bottomRows(M - 1) * bt.F.asDiagonal()).norm();
    if (resid > 1e-10 * std::max(1.0, T.norm()))
        throw std::invalid_argument("build_beamspace: shift invariance does not hold.");

    cmat V(Gn, 2);
    V.col(0).setOnes();
    for (Eigen::Index g = 0; g < Gn; ++g)
        V(g, 1) = std::polar(1.0, -static_cast<double>(M) * bt.nu(g));
    const cmat VhV = V.adjoint() * V;
    // pseudo-inverse handles the collinear case (all nu_g equal mod 2pi/M)
    Eigen::CompleteOrthogonalDecomposition<cmat> cod(VhV);
    bt.Q = cmat::Identity(Gn, Gn) - V * cod.pseudoInverse() * V.adjoint();
    return bt;
}

// With b = T^H a(w) (up to scale): exp(jw) F b = b - s 1 + t m; project out {1, m} and solve for exp(jw).
inline double transformed_esprit_column(const cvec &b, const BeamspaceTransform &bt)
{
    const Eigen::Index Gn = bt.T.cols();
    if (Gn < 3)
        throw std::invalid_argument("transformed_esprit_column: need at least three beams.");
    if (b.size() != Gn)
        throw std::invalid_argument("transformed_esprit_column: column length mismatch.");
    const cvec qfb = bt.Q * bt.F.cwiseProduct(b);
    const cvec qb = bt.Q * b;
    const double den = qfb.squaredNorm();
    if (!(den > 1e-24 * std::max(b.squaredNorm(), 1e-300)))
        throw std::invalid_argument("transformed_esprit_column: degenerate projection.");
    return std::arg(qfb.dot(qb));
}

} // namespace ristensor

#endif
