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

#include "ristensor/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{
constexpr int exit_ok = 0, exit_config = 1, exit_runtime = 2;

ristensor::RunConfig load(const std::string &path)
{
    if (path.empty())
        return {};
    std::ifstream in(path);
    if (!in)
        throw ristensor::ConfigError("cannot open config '" + path + "'.");
    return ristensor::parse_config(in);
}

std::set<std::string> parse_baselines(const std::string &s)
{
    std::set<std::string> out;
    if (s.empty() || s == "none")
        return out;
    if (s == "all")
        return {ristensor::baseline_names().begin(), ristensor::baseline_names().end()};
    for (const auto &b : ristensor::detail::split(s, ','))
        out.insert(b);
    return out;
}

std::array<bool, 3> parse_stages(const std::string &s)
{
    if (s == "I")
        return {true, false, false};
    if (s == "II")
        return {false, true, false};
    if (s == "III")
        return {false, false, true};
    if (s == "all")
        return {true, true, true};
    throw std::invalid_argument("--stages must be I, II, III or all.");
}
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"ristensor - tensor channel estimation for active-RIS SIMO-OFDM links"};
    app.require_subcommand(1);

    std::string config, experiment = "snr-sweep", snr_grid, out, stages = "all", baselines;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool per_trial = false, timing = false, quiet = false;

    auto *run = app.add_subcommand("run", "Monte Carlo experiment, CSV output");
    auto *crlb = app.add_subcommand("crlb", "Cramer-Rao bounds only (crlb-only experiment)");
    auto *check = app.add_subcommand("validate-config", "Parse and validate a configuration file");
    for (auto *sc : {run, crlb, check})
        sc->add_option("--config", config, "INI configuration file");
    for (auto *sc : {run, crlb})
    {
        sc->add_option("--trials", trials, "Trials per sweep point")->check(CLI::PositiveNumber);
        sc->add_option("--seed", seed, "Master seed");
        sc->add_option("--snr-grid", snr_grid, "Comma-separated SNR list in dB");
        sc->add_option("--out", out, "CSV path (default: stdout)");
        sc->add_option("--threads", threads, "Worker threads (0: hardware)");
        sc->add_flag("--quiet", quiet, "Suppress the summary on stderr");
    }
    run->add_option("--experiment", experiment, "los | snr-sweep | k-sweep | active-vs-passive | crlb-only")
        ->check(CLI::IsMember({"los", "snr-sweep", "k-sweep", "active-vs-passive", "crlb-only"}));
    run->add_option("--stages", stages, "I | II | III | all")->check(CLI::IsMember({"I", "II", "III", "all"}));
    run->add_option("--baselines", baselines, "Comma list of cpd-esprit,cpd-cbs,vscpd-cbs, or all/none");
    run->add_flag("--per-trial", per_trial, "Also emit per-trial rows");
    run->add_flag("--timing", timing, "Emit runtime_ms rows (output is no longer reproducible byte for byte)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    ristensor::RunConfig rc;
    ristensor::ExperimentSpec spec;
    try
    {
        rc = load(config);
        if (check->parsed())
        {
            std::cout << "config ok: R=" << rc.rank() << " K=" << rc.sys.K << " K1=" << rc.sys.K1 << " G=" << rc.sys.G
                      << " N=" << rc.sys.beams() << " digest=" << std::hex << ristensor::config_digest(rc) << std::dec << '\n';
            const auto &s = rc.sys;
            const auto u = ristensor::uniqueness_check(s.K1, s.K2(), s.G1, s.G2, s.N1, s.N2, rc.rank());
            std::cout << (u.unique ? "identifiable: " : "warning: not identifiable, estimators will fail: ") << u.detail << '\n';
            return exit_ok;
        }
        spec.kind = crlb->parsed() ? ristensor::ExperimentKind::crlb_only : ristensor::parse_kind(experiment);
        if (!snr_grid.empty())
            spec.snr_grid = ristensor::parse_double_list("--snr-grid", snr_grid);
        spec.trials = trials;
        spec.seed = seed;
        spec.stages = parse_stages(stages);
        spec.baselines = parse_baselines(baselines);
        spec.per_trial = per_trial;
        spec.timing = timing;
        spec.threads = threads;
        spec.validate();
        (void)ristensor::sweep_points(spec, rc); // validates every derived point before any trial runs
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }

    try
    {
        const auto res = ristensor::run_experiment(spec, rc);
        if (out.empty())
            ristensor::write_csv(std::cout, res.rows);
        else
        {
            std::ofstream os(out);
            if (!os)
                throw std::runtime_error("cannot write '" + out + "'.");
            ristensor::write_csv(os, res.rows);
        }
        if (!quiet)
        {
            for (const auto &l : res.log)
                std::cerr << l << '\n';
            for (const auto &r : res.rows)
                if (r.trial == "all" && r.metric == "success_rate")
                    std::cerr << "  " << r.method << " @ " << r.sweep_value << ": success " << r.value << '\n';
            if (res.warnings)
                std::cerr << res.warnings << " estimator/bound warnings\n";
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}
