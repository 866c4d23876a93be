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

// Shared scenario builder for the estimator-level tests.

#ifndef RISTENSOR_TEST_FIXTURES_HPP
#define RISTENSOR_TEST_FIXTURES_HPP

#include "ristensor/config.hpp"
#include "ristensor/probing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace fixtures
{
using namespace ristensor;

struct Scenario
{
    RunConfig rc;
    MultipathGroundTruth gt;
    ProbingDesign d;
    std::vector<PathAtom> truth;
    NoiseLevels nl;
    Tensor Y, Ysps;

    const SystemConfig &cfg() const { return rc.sys; }
};

// Default scene and budget; noise-free unless an SNR is given.
inline Scenario make_scenario(const RunConfig &rc, std::uint64_t seed, std::optional<double> snr_db = std::nullopt)
{
    Scenario s;
    s.rc = rc;
    const SystemConfig &cfg = s.rc.sys;
    Rng rng = make_rng(seed, {1});
    s.gt = geometry_to_paths(rc.scene, cfg, rng);
    const NoiseLevels nominal{rc.sigma2_B_nominal(), cfg.active_ris ? rc.sigma2_R_nominal() : 0.0};
    const double eta = cfg.active_ris
                           ? amplification_from_budget(cfg.P_R, incident_power_per_element(s.gt, cfg), nominal.sigma2_R,
                                                       cfg.ris_elements())
                           : 1.0;
    s.d = design_probing(cfg, eta, derive_seed(seed, {2}));
    s.truth = atoms_from_truth(s.gt);
    const ReceivedBlock clean = synthesize_rx(s.gt, cfg, s.d, false, 0);
    s.nl = noise_for_snr(snr_db.value_or(30.0), signal_energy(clean), s.gt, cfg, s.d, nominal);
    s.Y = snr_db ? build_tensor(synthesize_rx(s.gt, cfg, s.d, true, derive_seed(seed, {3}), s.nl), cfg)
                 : build_tensor(clean, cfg);
    s.Ysps = spatial_smooth(s.Y, cfg.K1);
    return s;
}

inline double phase_gap(double a, double b) { return std::abs(std::arg(std::polar(1.0, a - b))); }

// Best permutation by exhaustive search over the total score (R <= 8 here).
inline std::vector<std::size_t> best_assignment(const Eigen::MatrixXd &score)
{
    const auto R = static_cast<std::size_t>(score.rows());
    std::vector<std::size_t> p(R), best;
    std::iota(p.begin(), p.end(), std::size_t{0});
    double top = -1.0;
    do
    {
        double s = 0.0;
        for (std::size_t i = 0; i < R; ++i)
            s += score(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p[i]));
        if (s > top)
        {
            top = s;
            best = p;
        }
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}
} // namespace fixtures

#endif
