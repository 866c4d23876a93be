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

#ifndef RISTENSOR_VSCPD_HPP
#define RISTENSOR_VSCPD_HPP

#include "esprit.hpp"
#include "probing.hpp"
#include "tensor.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace ristensor
{

struct UniquenessReport
{
    bool unique = false;
    std::size_t specialized_bound = 0; // min(K1-1, K2)
    std::size_t generic_bound = 0;     // min((K1-1) G1 G2, K2 N1 N2)
    std::string detail;
};

inline UniquenessReport uniqueness_check(std::size_t K1, std::size_t K2, std::size_t G1, std::size_t G2, std::size_t N1,
                                         std::size_t N2, std::size_t R)
{
    UniquenessReport u;
    u.specialized_bound = std::min(K1 == 0 ? 0 : K1 - 1, K2);
    u.generic_bound = std::min((K1 == 0 ? 0 : K1 - 1) * G1 * G2, K2 * N1 * N2);
    u.unique = u.specialized_bound >= R;
    std::ostringstream os;
    os << "min(K1-1,K2)=" << u.specialized_bound << ", generic min((K1-1)G1G2,K2N1N2)=" << u.generic_bound << ", R=" << R;
    u.detail = os.str();
    return u;
}

struct UniquenessError : RankDeficiencyError
{
    using RankDeficiencyError::RankDeficiencyError;
};

struct VscpdResult
{
    std::vector<cmat> factors; // B1 (K1), B2 (G1), B3 (G2), B4 (N1), B5 (N2), B6 (K2)
    rvec omega1;               // ascending
    rvec singular_values;      // full spectrum of the unfolding
    double esprit_condition = 0.0;

    std::size_t rank() const { return static_cast<std::size_t>(omega1.size()); }
};

// Unit norm, first non-negligible entry real positive.
inline cvec normalize_column(const cvec &v)
{
    const double n = v.norm();
    if (!(n > 0.0))
        return v;
    cvec u = v / n;
    const double floor = 1e-12 * u.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (std::abs(u(i)) > floor)
        {
            u *= std::polar(1.0, -std::arg(u(i)));
            break;
        }
    return u;
}

namespace detail
{
// Dominant rank-1 pair of an m x n matrix M ~ a b^T, returned as (a, b).
inline std::pair<cvec, cvec> rank1_pair(const cmat &M)
{
    Eigen::JacobiSVD<cmat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU().col(0), svd.matrixV().col(0).conjugate()};
}
} // namespace detail

struct VscpdOptions
{
    bool enforce_uniqueness = true; // refuse to run outside the specialized identifiability bound
};

// Spatially smoothed Vandermonde-structured CPD of an order-5 tensor (K, G1, G2, N1, N2).
inline VscpdResult vscpd(const Tensor &Y, std::size_t R, std::size_t K1, VscpdOptions opt = {})
{
    if (Y.order() != 5)
        throw std::invalid_argument("vscpd: expects an order-5 tensor.");
    if (R < 1)
        throw std::invalid_argument("vscpd: rank must be positive.");
    const std::size_t K = Y.dim(0), G1 = Y.dim(1), G2 = Y.dim(2), N1 = Y.dim(3), N2 = Y.dim(4);
    if (K1 < 2 || K1 > K)
        throw std::invalid_argument("vscpd: K1 must lie in [2, K].");
    const std::size_t K2 = K - K1 + 1;
    const auto uq = uniqueness_check(K1, K2, G1, G2, N1, N2, R);
    if (opt.enforce_uniqueness && !uq.unique)
        throw UniquenessError("vscpd: identifiability condition violated (" + uq.detail + ").");

    const Tensor Ys = spatial_smooth(Y, K1);
    const std::size_t rows = K1 * G1 * G2, cols = N1 * N2 * K2;
    if (R > std::min(rows, cols))
        throw RankDeficiencyError("vscpd: rank exceeds unfolding dimensions.");
    // rows (k1, g1, g2), columns (n1, n2, k2): KR(B3,B2,B1) diag(w) KR(B6,B5,B4)^T
    const cmat Y3 = Ys.as_matrix(rows);

    Eigen::BDCSVD<cmat> svd(Y3, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto Ri = static_cast<Eigen::Index>(R);
    const cmat U = svd.matrixU().leftCols(Ri);
    const cmat V = svd.matrixV().leftCols(Ri);
    const rvec sv = svd.singularValues();
    if (!(sv(0) > 0.0))
        throw RankDeficiencyError("vscpd: zero tensor.");

    auto es = element_esprit_joint(U, smoothing_shift_pair(K1, G1 * G2));

    std::vector<Eigen::Index> perm(R);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) { return es.omega(a) < es.omega(b); });
    rvec omega(Ri);
    cmat D(Ri, Ri);
    for (Eigen::Index r = 0; r < Ri; ++r)
    {
        omega(r) = es.omega(perm[static_cast<std::size_t>(r)]);
        D.col(r) = es.mixing.col(perm[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<cmat> lu(D);
    if (!lu.isInvertible())
        throw RankDeficiencyError("vscpd: eigenvector matrix is singular.");
    const cmat DinvT = lu.inverse().transpose();

    VscpdResult out;
    out.omega1 = omega;
    out.singular_values = sv;
    out.esprit_condition = es.condition;
    const cmat B1 = vandermonde(K1, omega);
    const cmat B6 = vandermonde(K2, omega);
    cmat B2(G1, Ri), B3(G2, Ri), B4(N1, Ri), B5(N2, Ri);

    const cmat US = U * D;                                                      // columns ~ b3 (x) b2 (x) b1
    const cmat VS = V.conjugate() * sv.head(Ri).asDiagonal() * DinvT;          // columns ~ b6 (x) b5 (x) b4
    for (Eigen::Index r = 0; r < Ri; ++r)
    {
        // contract b1 out of u: M23(g1, g2) = sum_k1 conj(b1[k1]) u[k1 + K1 (g1 + G1 g2)]
        cmat M23(G1, G2);
        for (std::size_t g2 = 0; g2 < G2; ++g2)
            for (std::size_t g1 = 0; g1 < G1; ++g1)
                M23(g1, g2) = B1.col(r).dot(US.col(r).segment(static_cast<Eigen::Index>(K1 * (g1 + G1 * g2)), K1));
        auto [b2, b3] = detail::rank1_pair(M23);
        B2.col(r) = normalize_column(b2);
        B3.col(r) = normalize_column(b3);

        // contract b6: M45(n1, n2) = sum_k2 conj(b6[k2]) v[n1 + N1 (n2 + N2 k2)]
        cmat M45 = cmat::Zero(N1, N2);
        for (std::size_t k2 = 0; k2 < K2; ++k2)
        {
            const cplx c = std::conj(B6(static_cast<Eigen::Index>(k2), r));
            for (std::size_t n2 = 0; n2 < N2; ++n2)
                for (std::size_t n1 = 0; n1 < N1; ++n1)
                    M45(n1, n2) += c * VS(static_cast<Eigen::Index>(n1 + N1 * (n2 + N2 * k2)), r);
        }
        auto [b4, b5] = detail::rank1_pair(M45);
        B4.col(r) = normalize_column(b4);
        B5.col(r) = normalize_column(b5);
    }
    out.factors = {B1, B2, B3, B4, B5, B6};
    return out;
}

// Normalized correlation |a^H b| / (|a| |b|).
inline double column_correlation(const cvec &a, const cvec &b)
{
    const double d = a.norm() * b.norm();
    return d > 0.0 ? std::abs(a.dot(b)) / d : 0.0;
}

} // namespace ristensor

#endif
