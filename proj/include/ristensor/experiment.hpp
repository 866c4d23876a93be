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

#ifndef RISTENSOR_EXPERIMENT_HPP
#define RISTENSOR_EXPERIMENT_HPP

#include "baselines.hpp"
#include "config.hpp"
#include "crlb.hpp"
#include "estimator.hpp"
#include "metrics.hpp"
#include "probing.hpp"
#include "random.hpp"
#include "vscpd.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ristensor
{

enum class ExperimentKind
{
    los,
    snr_sweep,
    k_sweep,
    active_vs_passive,
    crlb_only
};

inline std::string kind_name(ExperimentKind k)
{
    switch (k)
    {
    case ExperimentKind::los:
        return "los";
    case ExperimentKind::snr_sweep:
        return "snr-sweep";
    case ExperimentKind::k_sweep:
        return "k-sweep";
    case ExperimentKind::active_vs_passive:
        return "active-vs-passive";
    default:
        return "crlb-only";
    }
}

inline ExperimentKind parse_kind(const std::string &s)
{
    for (auto k : {ExperimentKind::los, ExperimentKind::snr_sweep, ExperimentKind::k_sweep, ExperimentKind::active_vs_passive,
                   ExperimentKind::crlb_only})
        if (kind_name(k) == s)
            return k;
    throw std::invalid_argument("unknown experiment '" + s + "'.");
}

// Method labels in output order.
inline const std::vector<std::string> &method_names()
{
    static const std::vector<std::string> m{"vscpd-I", "vscpd-II", "vscpd-III", "cpd-esprit", "cpd-cbs", "vscpd-cbs"};
    return m;
}

inline const std::vector<std::string> &baseline_names()
{
    static const std::vector<std::string> b{"cpd-esprit", "cpd-cbs", "vscpd-cbs"};
    return b;
}

struct ExperimentSpec
{
    ExperimentKind kind = ExperimentKind::snr_sweep;
    std::vector<double> snr_grid;   // empty -> config grid (sweeps) or the kind's default SNR
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::array<bool, 3> stages{true, true, true}; // emit Stage I / II / III
    std::set<std::string> baselines;
    bool per_trial = false;
    bool timing = false;
    bool crlb = true; // bound rows for SNR-type sweeps
    unsigned threads = 0;

    void validate() const
    {
        if (trials < 1)
            throw std::invalid_argument("trials must be >= 1.");
        for (const auto &b : baselines)
            if (std::find(baseline_names().begin(), baseline_names().end(), b) == baseline_names().end())
                throw std::invalid_argument("unknown baseline '" + b + "'.");
        if (!stages[0] && !stages[1] && !stages[2])
            throw std::invalid_argument("no stage selected.");
    }
};

struct MetricRow
{
    std::string experiment;
    double sweep_value = 0.0;
    std::string trial; // "all" for aggregates, trial index otherwise
    std::string method;
    std::string metric;
    double value = 0.0;
    std::string units;
    std::string value_text; // overrides `value` when set (exact integers such as seeds)
};

inline const char *csv_header() { return "experiment,sweep_value,trial,method,metric,value,units"; }

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline void write_csv(std::ostream &os, const std::vector<MetricRow> &rows)
{
    os << csv_header() << '\n';
    for (const auto &r : rows)
        os << r.experiment << ',' << format_number(r.sweep_value) << ',' << r.trial << ',' << r.method << ',' << r.metric << ','
           << (r.value_text.empty() ? format_number(r.value) : r.value_text) << ',' << r.units << '\n';
}

// One sweep point, fully resolved.
struct PointSetup
{
    RunConfig rc;
    double sweep_value = 0.0;
    double snr_db = 0.0;
    bool active = true;
    bool estimators = true;
    bool bounds = false;
};

inline std::vector<PointSetup> sweep_points(const ExperimentSpec &spec, const RunConfig &base)
{
    std::vector<PointSetup> pts;
    auto snrs = [&](const std::vector<double> &fallback) { return spec.snr_grid.empty() ? fallback : spec.snr_grid; };
    auto fixed = [&](double dflt) { return spec.snr_grid.empty() ? dflt : spec.snr_grid.front(); };
    switch (spec.kind)
    {
    case ExperimentKind::los: {
        RunConfig rc = base;
        rc.L = rc.P = rc.Q = 1;
        rc.scene.scatterers_ue_bs.clear();
        rc.scene.scatterers_ue_ris.clear();
        rc.scene.scatterers_ris_bs.clear();
        for (double s : snrs(base.snr_grid))
            pts.push_back({rc, s, s, base.sys.active_ris, true, spec.crlb});
        break;
    }
    case ExperimentKind::snr_sweep:
        for (double s : snrs(base.snr_grid))
            pts.push_back({base, s, s, base.sys.active_ris, true, spec.crlb});
        break;
    case ExperimentKind::crlb_only:
        for (double s : snrs(base.snr_grid))
            pts.push_back({base, s, s, base.sys.active_ris, false, true});
        break;
    case ExperimentKind::k_sweep: {
        const double s = fixed(15.0);
        for (auto K : base.k_grid)
        {
            RunConfig rc = base;
            rc.sys.K = K;
            rc.sys.K1 = K / 2;
            pts.push_back({rc, static_cast<double>(K), s, base.sys.active_ris, true, false});
        }
        break;
    }
    case ExperimentKind::active_vs_passive: {
        const double s = fixed(30.0);
        RunConfig act = base;
        act.sys.active_ris = true;
        RunConfig pas = base;
        pas.sys.active_ris = false;
        pas.sys.P_T = base.sys.P_T + base.sys.P_R; // matched total power
        pas.sys.P_R = 0.0;
        pts.push_back({act, 1.0, s, true, true, false});
        pts.push_back({pas, 0.0, s, false, true, false});
        break;
    }
    }
    for (auto &p : pts)
        p.rc.validate();
    return pts;
}

struct MethodOutcome
{
    bool ran = false;
    bool success = false;
    FamilyErrors fe;
    double nmse = 0.0;
    double ms = 0.0;
    std::string reason;
};

struct TrialResult
{
    std::map<std::string, MethodOutcome> methods;
    bool bound_ok = false;
    std::array<double, 6> bound{0, 0, 0, 0, 0, 0};
    double power_ratio = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

// Per-trial random streams: 1 path-gain phases, 2 probing design, 3 receiver noise, 4 baseline initialisation.
inline TrialResult run_trial(const PointSetup &pt, const ExperimentSpec &spec, std::size_t point, std::size_t trial)
{
    const auto &rc = pt.rc;
    const SystemConfig &cfg = rc.sys;
    const std::uint64_t pk = point, tk = trial;
    TrialResult tr;
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) { return std::chrono::duration<double, std::milli>(clock::now() - t0).count(); };

    Rng grng = make_rng(spec.seed, {pk, tk, 1});
    const MultipathGroundTruth gt = geometry_to_paths(rc.scene, cfg, grng);
    const double s2B = rc.sigma2_B_nominal();
    const double s2R = pt.active ? rc.sigma2_R_nominal() : 0.0;
    const double eta = pt.active ? amplification_from_budget(cfg.P_R, incident_power_per_element(gt, cfg), s2R, cfg.ris_elements()) : 1.0;
    const ProbingDesign d = design_probing(cfg, eta, derive_seed(spec.seed, {pk, tk, 2}));
    const auto truth = atoms_from_truth(gt);

    const ReceivedBlock clean = synthesize_rx(gt, cfg, d, false, 0);
    const NoiseLevels nl = noise_for_snr(pt.snr_db, signal_energy(clean), gt, cfg, d, {s2B, s2R});
    tr.power_ratio = cascade_power_ratio(truth, cfg, d);

    if (pt.bounds)
    {
        try
        {
            const auto rep = fim(gt, cfg, d, nl);
            for (std::size_t i = 0; i < 6; ++i)
                tr.bound[i] = rep.family(crlb_families()[i]);
            tr.bound_ok = true;
            if (!rep.warning.empty())
                tr.warnings.push_back("crlb: " + rep.warning);
        }
        catch (const std::exception &e)
        {
            tr.warnings.push_back(std::string("crlb: ") + e.what());
        }
    }
    if (!pt.estimators)
        return tr;

    const ReceivedBlock blk = synthesize_rx(gt, cfg, d, true, derive_seed(spec.seed, {pk, tk, 3}), nl);
    const Tensor Y = build_tensor(blk, cfg);
    const Tensor Ys = spatial_smooth(Y, cfg.K1);
    const std::size_t R = rc.rank();

    auto record = [&](const std::string &name, const ChannelEstimate &ce, double ms) {
        MethodOutcome m;
        m.ran = true;
        m.success = !ce.failed;
        m.ms = ms;
        m.reason = ce.reason;
        if (m.success)
        {
            m.fe = family_errors(gt, ce);
            m.nmse = nmse(truth, ce.atoms(), cfg, d);
        }
        if (ce.warning)
            tr.warnings.push_back(name + ": " + ce.warning_text);
        tr.methods[name] = m;
    };

    const bool want_vscpd = spec.stages[0] || spec.stages[1] || spec.stages[2] || spec.baselines.count("vscpd-cbs");
    ChannelEstimate ce1 = ChannelEstimate::failure("I", "not-run");
    if (want_vscpd)
    {
        auto t0 = clock::now();
        try
        {
            const VscpdResult vr = vscpd(Y, R, cfg.K1);
            ce1 = stage1(vr, Ys, cfg, d, rc.L, rc.P, rc.Q);
        }
        catch (const RankDeficiencyError &e)
        {
            ce1 = ChannelEstimate::failure("I", std::string("rank-deficiency: ") + e.what());
        }
        const double t1 = ms_since(t0);
        if (spec.stages[0])
            record("vscpd-I", ce1, t1);
        if (spec.stages[1] || spec.stages[2])
        {
            t0 = clock::now();
            const ChannelEstimate ce2 = stage2_cbs(ce1, Ys, cfg, d, rc.sched);
            const double t2 = t1 + ms_since(t0);
            if (spec.stages[1])
                record("vscpd-II", ce2, t2);
            if (spec.stages[2])
            {
                t0 = clock::now();
                const ChannelEstimate ce3 = stage3_als(Ys, ce2, cfg, d, rc.sched, rc.als_max_iter, rc.als_tol, rc.L, rc.P, rc.Q);
                record("vscpd-III", ce3, t2 + ms_since(t0));
            }
        }
        if (spec.baselines.count("vscpd-cbs"))
        {
            t0 = clock::now();
            const ChannelEstimate cb = baseline_exhaustive_cbs(ce1, Ys, cfg, d, rc.sched, rc.cbs_grid_vscpd, "vscpd-cbs");
            record("vscpd-cbs", cb, t1 + ms_since(t0));
        }
    }
    if (spec.baselines.count("cpd-esprit") || spec.baselines.count("cpd-cbs"))
    {
        auto t0 = clock::now();
        const AlsResult ar = baseline_als_cpd(Ys, R, derive_seed(spec.seed, {pk, tk, 4}), rc.baseline_max_iter, rc.baseline_tol);
        const ChannelEstimate ce = decode_cpd(ar, Ys, cfg, d, rc.L, rc.P, rc.Q);
        const double t1 = ms_since(t0);
        if (spec.baselines.count("cpd-esprit"))
            record("cpd-esprit", ce, t1);
        if (spec.baselines.count("cpd-cbs"))
        {
            t0 = clock::now();
            const ChannelEstimate cb = baseline_exhaustive_cbs(ce, Ys, cfg, d, rc.sched, rc.cbs_grid_cpd, "cpd-cbs");
            record("cpd-cbs", cb, t1 + ms_since(t0));
        }
    }
    return tr;
}

struct ExperimentResult
{
    std::vector<MetricRow> rows;
    std::size_t warnings = 0;
    std::vector<std::string> log;
};

// Runs trials on a small worker pool; results are keyed by trial index so the output does not depend on scheduling.
inline std::vector<TrialResult> run_point(const PointSetup &pt, const ExperimentSpec &spec, std::size_t point)
{
    std::vector<TrialResult> out(spec.trials);
    std::vector<std::string> errors(spec.trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < spec.trials; t = next++)
        {
            try
            {
                out[t] = run_trial(pt, spec, point, t);
            }
            catch (const std::exception &e)
            {
                errors[t] = e.what();
            }
        }
    };
    unsigned n = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, spec.trials));
    if (n <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    for (std::size_t t = 0; t < spec.trials; ++t)
        if (!errors[t].empty())
            throw std::runtime_error("trial " + std::to_string(t) + ": " + errors[t]);
    return out;
}

inline ExperimentResult run_experiment(const ExperimentSpec &spec, const RunConfig &base)
{
    spec.validate();
    const auto points = sweep_points(spec, base);
    ExperimentResult res;
    const std::string ex = kind_name(spec.kind);
    {
        MetricRow seed{ex, 0.0, "meta", "run", "seed", 0.0, "1", std::to_string(spec.seed)};
        res.rows.push_back(seed);
    }
    for (std::size_t pi_ = 0; pi_ < points.size(); ++pi_)
    {
        const auto &pt = points[pi_];
        std::ostringstream lg;
        lg << ex << " point " << pi_ << " sweep=" << pt.sweep_value << " snr=" << pt.snr_db << " dB config=" << std::hex
           << config_digest(pt.rc) << std::dec << " seed=" << spec.seed;
        res.log.push_back(lg.str());

        const auto trials = run_point(pt, spec, pi_);
        for (const auto &t : trials)
            res.warnings += t.warnings.size();
        auto row = [&](const std::string &trial, const std::string &method, const std::string &metric, double v,
                       const std::string &units) { res.rows.push_back({ex, pt.sweep_value, trial, method, metric, v, units, ""}); };

        if (pt.bounds)
        {
            std::array<double, 6> acc{0, 0, 0, 0, 0, 0};
            std::size_t n = 0;
            for (const auto &t : trials)
                if (t.bound_ok)
                {
                    ++n;
                    for (std::size_t i = 0; i < 6; ++i)
                        acc[i] += t.bound[i];
                }
            for (std::size_t i = 0; i < 6; ++i)
                row("all", "crlb", std::string("crlb_") + FamilyErrors::names[i],
                    n ? std::sqrt(acc[i] / static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN(), family_units(i));
        }
        if (!pt.estimators)
            continue;
        {
            double pr = 0.0;
            for (const auto &t : trials)
                pr += t.power_ratio;
            row("all", "truth", "power_ratio", pr / static_cast<double>(trials.size()), "1");
        }
        for (const auto &m : method_names())
        {
            if (!trials.front().methods.count(m))
                continue;
            std::size_t ok = 0;
            std::array<double, 6> sq{0, 0, 0, 0, 0, 0};
            double nm = 0.0, ms = 0.0;
            for (const auto &t : trials)
            {
                const auto &o = t.methods.at(m);
                ms += o.ms;
                if (!o.success)
                    continue;
                ++ok;
                nm += o.nmse;
                for (std::size_t i = 0; i < 6; ++i)
                    sq[i] += o.fe.sq[i];
            }
            const double nan = std::numeric_limits<double>::quiet_NaN();
            const double dn = static_cast<double>(ok);
            row("all", m, "success_rate", dn / static_cast<double>(trials.size()), "1");
            for (std::size_t i = 0; i < 6; ++i)
                row("all", m, std::string("rmse_") + FamilyErrors::names[i], ok ? std::sqrt(sq[i] / dn) : nan, family_units(i));
            row("all", m, "nmse", ok ? nm / dn : nan, "1");
            if (spec.timing)
                row("all", m, "runtime_ms", ms / static_cast<double>(trials.size()), "ms");

            std::map<std::string, std::size_t> reasons;
            for (const auto &t : trials)
                if (!t.methods.at(m).success)
                    ++reasons[t.methods.at(m).reason];
            for (const auto &[why, cnt] : reasons)
                res.log.push_back("  " + m + ": " + std::to_string(cnt) + " failed (" + why + ")");
        }
        if (spec.per_trial)
            for (std::size_t t = 0; t < trials.size(); ++t)
                for (const auto &m : method_names())
                {
                    const auto it = trials[t].methods.find(m);
                    if (it == trials[t].methods.end())
                        continue;
                    const auto &o = it->second;
                    const std::string ti = std::to_string(t);
                    row(ti, m, "success_rate", o.success ? 1.0 : 0.0, "1");
                    if (!o.success)
                        continue;
                    for (std::size_t i = 0; i < 6; ++i)
                        row(ti, m, std::string("rmse_") + FamilyErrors::names[i], std::sqrt(o.fe.sq[i]), family_units(i));
                    row(ti, m, "nmse", o.nmse, "1");
                    if (spec.timing)
                        row(ti, m, "runtime_ms", o.ms, "ms");
                }
    }
    return res;
}

} // namespace ristensor

#endif
