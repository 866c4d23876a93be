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

#ifndef RISTENSOR_BASELINES_HPP
#define RISTENSOR_BASELINES_HPP

#include "estimator.hpp"
#include "random.hpp"

#include <cstdint>
#include <vector>

namespace ristensor
{

// Unstructured CPD of the smoothed six-way tensor from a seeded complex Gaussian start.
inline AlsResult baseline_als_cpd(const Tensor &Ysps, std::size_t R, std::uint64_t seed, std::size_t max_iter, double tol,
                                  bool track_residual = false)
{
    if (R < 1)
        throw std::invalid_argument("baseline_als_cpd: rank must be positive.");
    Rng rng = make_rng(seed);
    std::vector<cmat> F;
    for (std::size_t n = 0; n < Ysps.order(); ++n)
    {
        cmat A(static_cast<Eigen::Index>(Ysps.dim(n)), static_cast<Eigen::Index>(R));
        for (Eigen::Index i = 0; i < A.size(); ++i)
            A.data()[i] = complex_gaussian(rng, 1.0);
        F.push_back(std::move(A));
    }
    return als(Ysps, std::move(F), max_iter, tol, track_residual);
}

// CPD+ESPRIT: identification on the unstructured factors, column-wise element ESPRIT on modes 1/6
// for the delays, transformed-space ESPRIT on modes 2..5, LS gains.
inline ChannelEstimate decode_cpd(const AlsResult &ar, const Tensor &Ysps, const SystemConfig &cfg, const ProbingDesign &d,
                                  std::size_t L, std::size_t P, std::size_t Q)
{
    return detail::guarded("cpd-esprit", [&] {
        const auto R = ar.factors[0].cols();
        rvec w1(R);
        for (Eigen::Index r = 0; r < R; ++r)
        {
            try
            {
                w1(r) = combine_delay_generators(element_esprit_column(ar.factors[0].col(r)),
                                                 element_esprit_column(ar.factors[5].col(r)));
            }
            catch (const std::invalid_argument &)
            {
                throw EstimationFailure("degenerate-esprit");
            }
        }
        const DecodeInput in{&ar.factors[1], &ar.factors[2], &ar.factors[3], &ar.factors[4], w1};
        ChannelEstimate ce = detail::identify_and_esprit(in, d, L, P, Q, nullptr);
        map_parameters(ce, cfg);
        estimate_gains(ce, Ysps, cfg, d);
        return ce;
    });
}

// Replace the mode-2..5 generators by a single uniform S-point grid search over each mode's range.
inline ChannelEstimate baseline_exhaustive_cbs(const ChannelEstimate &ce0, const Tensor &Ysps, const SystemConfig &cfg,
                                               const ProbingDesign &d, const SearchSchedule &sched, std::size_t S,
                                               const std::string &label, std::size_t *evals = nullptr)
{
    if (S < 2)
        throw std::invalid_argument("baseline_exhaustive_cbs: grid size must be >= 2.");
    if (ce0.failed)
        return ChannelEstimate::failure(label, ce0.reason);
    return detail::guarded(label, [&] {
        ChannelEstimate ce = ce0;
        for (std::size_t r = 0; r < ce.cols.size(); ++r)
        {
            auto &c = ce.cols[r];
            for (std::size_t n = 2; n <= 5; ++n)
            {
                if (!c.cascaded && n <= 3)
                    continue;
                c.omega[n - 1] = exhaustive_cbs(ce.b[n - 2].col(static_cast<Eigen::Index>(r)), detail::transform_for_mode(d, n),
                                                sched.mode[n - 2].U, S, evals);
            }
        }
        map_parameters(ce, cfg);
        estimate_gains(ce, Ysps, cfg, d);
        return ce;
    });
}

} // namespace ristensor

#endif
