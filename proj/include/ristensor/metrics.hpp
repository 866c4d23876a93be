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

#ifndef RISTENSOR_METRICS_HPP
#define RISTENSOR_METRICS_HPP

#include "array_channel.hpp"
#include "estimator.hpp"
#include "probing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ristensor
{

// Squared error between the sorted copies of two vectors (one trial's contribution).
inline double sorted_sq_error(std::vector<double> truth, std::vector<double> est)
{
    if (truth.size() != est.size())
        throw std::invalid_argument("sorted_sq_error: length mismatch.");
    std::sort(truth.begin(), truth.end());
    std::sort(est.begin(), est.end());
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        s += (truth[i] - est[i]) * (truth[i] - est[i]);
    return s;
}

// RMSE over trials with per-trial sorting: sqrt(mean_t ||sort(est_t) - sort(truth_t)||^2).
inline double rmse_sorted(const std::vector<std::vector<double>> &truth, const std::vector<std::vector<double>> &est)
{
    if (truth.size() != est.size())
        throw std::invalid_argument("rmse_sorted: trial count mismatch.");
    if (truth.empty())
        return 0.0;
    double s = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t)
        s += sorted_sq_error(truth[t], est[t]);
    return std::sqrt(s / static_cast<double>(truth.size()));
}

inline double rmse_sorted(const std::vector<double> &truth, const std::vector<double> &est)
{
    return rmse_sorted(std::vector<std::vector<double>>{truth}, std::vector<std::vector<double>>{est});
}

// ||Y(est) - Y(truth)||_F^2 / ||Y(truth)||_F^2 with both tensors rebuilt through the same design.
inline double nmse(const std::vector<PathAtom> &truth, const std::vector<PathAtom> &est, const SystemConfig &cfg,
                   const ProbingDesign &d)
{
    const Tensor Yt = tensor_from_atoms(truth, cfg, d);
    const double den = Yt.frobenius_norm();
    if (!(den > 0.0))
        throw std::invalid_argument("nmse: zero-norm truth tensor.");
    const Tensor Ye = est.empty() ? Tensor(Yt.dims()) : tensor_from_atoms(est, cfg, d);
    const double num = (Ye - Yt).frobenius_norm();
    return (num * num) / (den * den);
}

// Per-trial squared errors of each parameter family in reporting units (m^2, deg^2, unitless).
struct FamilyErrors
{
    static constexpr std::array<const char *, 6> names{"tauL", "tauR", "psi2", "psi3", "thetaL", "thetaR"};
    std::array<double, 6> sq{0, 0, 0, 0, 0, 0};
};

inline const char *family_units(std::size_t i)
{
    static constexpr std::array<const char *, 6> u{"m", "m", "1", "1", "deg", "deg"};
    return u[i];
}

namespace detail
{
inline std::vector<double> scaled(const std::vector<double> &v, double s)
{
    std::vector<double> o(v);
    for (auto &x : o)
        x *= s;
    return o;
}

inline double angle_sq_error(const std::vector<AnglePair> &t, const std::vector<AnglePair> &e)
{
    std::vector<double> ta, te, tb, tf;
    const double k = 180.0 / pi;
    for (const auto &a : t)
    {
        ta.push_back(a.az * k);
        tb.push_back(a.el * k);
    }
    for (const auto &a : e)
    {
        te.push_back(a.az * k);
        tf.push_back(a.el * k);
    }
    return sorted_sq_error(ta, te) + sorted_sq_error(tb, tf);
}
} // namespace detail

inline FamilyErrors family_errors(const MultipathGroundTruth &gt, const ChannelEstimate &ce)
{
    FamilyErrors fe;
    std::vector<double> tl, tr, p2, p3;
    std::vector<AnglePair> al, ar;
    for (const auto &d : gt.direct)
    {
        tl.push_back(d.delay);
        al.push_back(d.bs);
    }
    for (const auto &c : gt.cascaded)
    {
        tr.push_back(c.delay);
        p2.push_back(c.psi2);
        p3.push_back(c.psi3);
    }
    for (const auto &q : gt.ris_bs)
        ar.push_back(q.bs);

    fe.sq[0] = sorted_sq_error(detail::scaled(tl, speed_of_light), detail::scaled(ce.delays(false), speed_of_light));
    fe.sq[1] = sorted_sq_error(detail::scaled(tr, speed_of_light), detail::scaled(ce.delays(true), speed_of_light));
    fe.sq[2] = sorted_sq_error(p2, ce.psi(2));
    fe.sq[3] = sorted_sq_error(p3, ce.psi(3));
    fe.sq[4] = detail::angle_sq_error(al, ce.theta_L());
    fe.sq[5] = detail::angle_sq_error(ar, ce.theta_R);
    return fe;
}

// Cascade-to-direct received power ratio of the noise-free tensor.
inline double cascade_power_ratio(const std::vector<PathAtom> &atoms, const SystemConfig &cfg, const ProbingDesign &d)
{
    std::vector<PathAtom> dir, cas;
    for (const auto &a : atoms)
        (a.cascaded ? cas : dir).push_back(a);
    if (dir.empty() || cas.empty())
        throw std::invalid_argument("cascade_power_ratio: needs both path kinds.");
    const double pd = tensor_from_atoms(dir, cfg, d).frobenius_norm();
    const double pc = tensor_from_atoms(cas, cfg, d).frobenius_norm();
    return (pc * pc) / (pd * pd);
}

} // namespace ristensor

#endif
