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

#ifndef RISTENSOR_TENSOR_HPP
#define RISTENSOR_TENSOR_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Dense complex N-way arrays and the CP algebra used throughout the library.
//
// Layout convention (fixed everywhere):
//   * Tensor data is column-major over the dims in ascending mode order, i.e. the
//     linear index of (i_0, ..., i_{N-1}) is i_0 + d_0 (i_1 + d_1 (i_2 + ...)).
//   * khatri_rao(A, B) has columns a_r (x) b_r, so the *second* operand runs fastest.
//   * Consequently vec(cp_reconstruct(w; A_0..A_{N-1})) = KR(A_{N-1}, ..., A_0) w and
//     mode_unfold(T, n) = A_n diag(w) KR(A_{N-1}, .., A_{n+1}, A_{n-1}, .., A_0)^T.
// Modes are 0-based in the C++ API.

namespace ristensor
{

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx jay{0.0, 1.0};

class Tensor
{
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> dims)
        : dims_(std::move(dims)), data_(checked_size(dims_), cplx{0.0, 0.0})
    {
    }

    Tensor(std::vector<std::size_t> dims, std::vector<cplx> data)
        : dims_(std::move(dims)), data_(std::move(data))
    {
        if (checked_size(dims_) != data_.size())
            throw std::invalid_argument("Tensor: product(dims) does not match data length.");
    }

    const std::vector<std::size_t> &dims() const noexcept { return dims_; }
    std::size_t order() const noexcept { return dims_.size(); }
    std::size_t dim(std::size_t n) const { return dims_.at(n); }
    std::size_t size() const noexcept { return data_.size(); }
    std::span<const cplx> data() const noexcept { return data_; }

    std::size_t linear_index(std::span<const std::size_t> idx) const
    {
        if (idx.size() != dims_.size())
            throw std::invalid_argument("Tensor: index arity does not match tensor order.");
        std::size_t lin = 0;
        for (std::size_t n = dims_.size(); n-- > 0;)
        {
            if (idx[n] >= dims_[n])
                throw std::out_of_range("Tensor: index out of range.");
            lin = lin * dims_[n] + idx[n];
        }
        return lin;
    }

    cplx operator()(std::span<const std::size_t> idx) const { return data_[linear_index(idx)]; }
    cplx operator()(std::initializer_list<std::size_t> idx) const
    {
        return (*this)(std::span<const std::size_t>(idx.begin(), idx.size()));
    }
    cplx operator[](std::size_t lin) const { return data_[lin]; }

    // Column-major view of the data as a (rows x size/rows) matrix.
    Eigen::Map<const cmat> as_matrix(std::size_t rows) const
    {
        if (rows == 0 || data_.size() % rows != 0)
            throw std::invalid_argument("Tensor::as_matrix: rows must divide the element count.");
        return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(data_.size() / rows)};
    }

    Eigen::Map<const cvec> as_vector() const { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }

    double frobenius_norm() const { return as_vector().norm(); }

private:
    static std::size_t checked_size(const std::vector<std::size_t> &dims)
    {
        if (dims.empty())
            throw std::invalid_argument("Tensor: at least one mode is required.");
        std::size_t n = 1;
        for (auto d : dims)
        {
            if (d == 0)
                throw std::invalid_argument("Tensor: all extents must be positive.");
            n *= d;
        }
        return n;
    }

    std::vector<std::size_t> dims_;
    std::vector<cplx> data_;
};

inline Tensor operator+(const Tensor &a, const Tensor &b)
{
    if (a.dims() != b.dims())
        throw std::invalid_argument("Tensor addition: shape mismatch.");
    std::vector<cplx> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = a[i] + b[i];
    return {a.dims(), std::move(out)};
}

inline Tensor operator-(const Tensor &a, const Tensor &b)
{
    if (a.dims() != b.dims())
        throw std::invalid_argument("Tensor subtraction: shape mismatch.");
    std::vector<cplx> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = a[i] - b[i];
    return {a.dims(), std::move(out)};
}

inline Tensor scaled(const Tensor &t, cplx s)
{
    std::vector<cplx> out(t.data().begin(), t.data().end());
    for (auto &v : out)
        v *= s;
    return {t.dims(), std::move(out)};
}

// Weighted CP model: T = sum_r weights_r  a_{0,r} o a_{1,r} o ... o a_{N-1,r}.
struct FactorSet
{
    cvec weights;
    std::vector<cmat> factors;

    std::size_t rank() const noexcept { return static_cast<std::size_t>(weights.size()); }

    std::vector<std::size_t> dims() const
    {
        std::vector<std::size_t> d;
        d.reserve(factors.size());
        for (const auto &f : factors)
            d.push_back(static_cast<std::size_t>(f.rows()));
        return d;
    }

    void validate() const
    {
        if (factors.empty())
            throw std::invalid_argument("FactorSet: no factors.");
        for (const auto &f : factors)
        {
            if (f.cols() != weights.size())
                throw std::invalid_argument("FactorSet: factor column count differs from weight length.");
            if (f.rows() == 0)
                throw std::invalid_argument("FactorSet: factor with zero rows.");
        }
    }
};

// Column r of the result is A.col(r) (x) B.col(r).
inline cmat khatri_rao(const cmat &A, const cmat &B)
{
    if (A.cols() != B.cols())
        throw std::invalid_argument("khatri_rao: column counts differ.");
    cmat out(A.rows() * B.rows(), A.cols());
    for (Eigen::Index r = 0; r < A.cols(); ++r)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            out.col(r).segment(i * B.rows(), B.rows()) = A(i, r) * B.col(r);
    return out;
}

// khatri_rao over a list, left to right: KR(M_0, M_1, ..., M_k) with M_k fastest.
inline cmat khatri_rao(std::span<const cmat> mats)
{
    if (mats.empty())
        throw std::invalid_argument("khatri_rao: empty list.");
    cmat acc = mats[0];
    for (std::size_t i = 1; i < mats.size(); ++i)
        acc = khatri_rao(acc, mats[i]);
    return acc;
}

inline cmat kronecker(const cmat &A, const cmat &B)
{
    cmat out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

inline cvec kronecker(const cvec &a, const cvec &b)
{
    cvec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

// Khatri-Rao of all factors except `skip`, in descending mode order (the fixed reversal order).
inline cmat khatri_rao_reversed(const std::vector<cmat> &factors, std::size_t skip = static_cast<std::size_t>(-1))
{
    std::vector<cmat> list;
    for (std::size_t n = factors.size(); n-- > 0;)
        if (n != skip)
            list.push_back(factors[n]);
    if (list.empty())
        throw std::invalid_argument("khatri_rao_reversed: nothing to multiply.");
    return khatri_rao(std::span<const cmat>(list));
}

inline cmat mode_unfold(const Tensor &t, std::size_t n)
{
    if (n >= t.order())
        throw std::invalid_argument("mode_unfold: invalid mode index " + std::to_string(n) + ".");
    const auto &d = t.dims();
    std::size_t left = 1, right = 1;
    for (std::size_t m = 0; m < n; ++m)
        left *= d[m];
    for (std::size_t m = n + 1; m < d.size(); ++m)
        right *= d[m];
    const std::size_t In = d[n];

    cmat out(In, left * right);
    for (std::size_t rt = 0; rt < right; ++rt)
        for (std::size_t i = 0; i < In; ++i)
            for (std::size_t l = 0; l < left; ++l)
                out(i, rt * left + l) = t[l + left * (i + In * rt)];
    return out;
}

inline Tensor mode_fold(const cmat &M, std::size_t n, const std::vector<std::size_t> &dims)
{
    if (n >= dims.size())
        throw std::invalid_argument("mode_fold: invalid mode index.");
    std::size_t left = 1, right = 1;
    for (std::size_t m = 0; m < n; ++m)
        left *= dims[m];
    for (std::size_t m = n + 1; m < dims.size(); ++m)
        right *= dims[m];
    const std::size_t In = dims[n];
    if (static_cast<std::size_t>(M.rows()) != In || static_cast<std::size_t>(M.cols()) != left * right)
        throw std::invalid_argument("mode_fold: matrix shape does not match dims.");

    std::vector<cplx> data(In * left * right);
    for (std::size_t rt = 0; rt < right; ++rt)
        for (std::size_t i = 0; i < In; ++i)
            for (std::size_t l = 0; l < left; ++l)
                data[l + left * (i + In * rt)] = M(i, rt * left + l);
    return {dims, std::move(data)};
}

inline Tensor cp_reconstruct(const FactorSet &fs)
{
    fs.validate();
    const auto dims = fs.dims();
    // Mode-0 unfolding: A_0 diag(w) KR(A_{N-1}..A_1)^T, which is exactly the column-major data.
    cmat m0;
    if (fs.factors.size() == 1)
        m0 = fs.factors[0] * fs.weights;
    else
        m0 = fs.factors[0] * fs.weights.asDiagonal() * khatri_rao_reversed(fs.factors, 0).transpose();
    return {dims, std::vector<cplx>(m0.data(), m0.data() + m0.size())};
}

inline cvec vec(const Tensor &t) { return t.as_vector(); }

inline cvec vec(const cmat &M) { return Eigen::Map<const cvec>(M.data(), M.size()); }

inline cmat unvec(const cvec &v, std::size_t rows, std::size_t cols)
{
    if (static_cast<std::size_t>(v.size()) != rows * cols)
        throw std::invalid_argument("unvec: length does not match rows*cols.");
    return Eigen::Map<const cmat>(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

// Smoothing of mode 0 of an order-5 tensor (K, G1, G2, N1, N2) into an order-6 tensor
// (K1, G1, G2, N1, N2, K2) with out(k1, ..., k2) = in(k1 + k2, ...), K2 = K - K1 + 1.
inline Tensor spatial_smooth(const Tensor &t, std::size_t K1)
{
    if (t.order() != 5)
        throw std::invalid_argument("spatial_smooth: expects an order-5 tensor.");
    const auto &d = t.dims();
    const std::size_t K = d[0];
    if (K1 < 1 || K1 > K)
        throw std::invalid_argument("spatial_smooth: K1 must lie in [1, K].");
    const std::size_t K2 = K - K1 + 1;
    const std::size_t inner = d[1] * d[2] * d[3] * d[4];

    std::vector<cplx> out(K1 * inner * K2);
    for (std::size_t k2 = 0; k2 < K2; ++k2)
        for (std::size_t m = 0; m < inner; ++m)
            for (std::size_t k1 = 0; k1 < K1; ++k1)
                out[k1 + K1 * (m + inner * k2)] = t[(k1 + k2) + K * m];
    return {{K1, d[1], d[2], d[3], d[4], K2}, std::move(out)};
}

// Matricized tensor times Khatri-Rao product: Y_(n) conj(KR(others, reversed)).
// The transposed factor-side Gram is what ALS needs next, so this is the LS workhorse.
inline cmat mttkrp_conj(const Tensor &t, const std::vector<cmat> &factors, std::size_t n)
{
    const auto &d = t.dims();
    if (factors.size() != d.size())
        throw std::invalid_argument("mttkrp: factor count differs from tensor order.");
    const Eigen::Index R = factors[0].cols();
    std::size_t left = 1, right = 1;
    for (std::size_t m = 0; m < n; ++m)
        left *= d[m];
    for (std::size_t m = n + 1; m < d.size(); ++m)
        right *= d[m];
    const std::size_t In = d[n];

    cmat out = cmat::Zero(static_cast<Eigen::Index>(In), R);
    std::vector<cmat> lhs, rhs;
    for (std::size_t m = n; m-- > 0;)
        lhs.push_back(factors[m]);
    for (std::size_t m = d.size(); m-- > n + 1;)
        rhs.push_back(factors[m]);

    // Y viewed as (left) x (In * right); contract the left block first with one GEMM.
    const auto Y = t.as_matrix(left);
    cmat W;
    if (lhs.empty())
        W = Y.transpose();
    else
        W = Y.transpose() * khatri_rao(std::span<const cmat>(lhs)).conjugate(); // (In*right) x R
    if (W.cols() == 1 && R != 1)
        W = cmat(W.replicate(1, R));

    if (rhs.empty())
    {
        out = W.topRows(static_cast<Eigen::Index>(In));
        return out;
    }
    const cmat KRr = khatri_rao(std::span<const cmat>(rhs)).conjugate(); // right x R
    for (Eigen::Index r = 0; r < R; ++r)
    {
        Eigen::Map<const cmat> Wr(W.col(r).data(), static_cast<Eigen::Index>(In), static_cast<Eigen::Index>(right));
        out.col(r) = Wr * KRr.col(r);
    }
    return out;
}

// Hadamard product of the Gram matrices A_m^H A_m for all m != skip.
inline cmat gram_hadamard(const std::vector<cmat> &factors, std::size_t skip = static_cast<std::size_t>(-1))
{
    const Eigen::Index R = factors.at(0).cols();
    cmat G = cmat::Ones(R, R);
    for (std::size_t m = 0; m < factors.size(); ++m)
        if (m != skip)
            G = G.cwiseProduct(factors[m].adjoint() * factors[m]);
    return G;
}

} // namespace ristensor

#endif
