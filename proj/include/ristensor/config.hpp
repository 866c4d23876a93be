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

#ifndef RISTENSOR_CONFIG_HPP
#define RISTENSOR_CONFIG_HPP

#include "array_channel.hpp"
#include "estimator.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ristensor
{

struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Everything a run needs besides the experiment selection.
struct RunConfig
{
    SystemConfig sys;
    Scene scene;
    std::size_t L = 2, P = 2, Q = 2;
    SearchSchedule sched = SearchSchedule::defaults();

    // dB-domain sources of the SystemConfig power fields
    double P_T_dBm = 7.0, P_R_dBm = 1.76;
    double noise_psd_dBm_Hz = -174.0, nf_B_dB = 10.0, nf_R_dB = 10.0;

    double als_tol = 1e-8;
    std::size_t als_max_iter = 200;
    double baseline_tol = 1e-15;
    std::size_t baseline_max_iter = 500;
    std::size_t cbs_grid_cpd = 10000;
    std::size_t cbs_grid_vscpd = 1608;
    std::vector<double> snr_grid{10.0, 15.0, 20.0, 25.0, 30.0};
    std::vector<std::size_t> k_grid{16, 24, 32, 40, 48}; // k-sweep, K1 = K/2

    std::size_t rank() const { return L + P * Q; }
    double sigma2_B_nominal() const { return noise_power_from_psd(noise_psd_dBm_Hz, nf_B_dB, sys.delta_f); }
    double sigma2_R_nominal() const { return noise_power_from_psd(noise_psd_dBm_Hz, nf_R_dB, sys.delta_f); }

    void validate() const
    {
        try
        {
            sys.validate();
            sched.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
        if (L < 1 || P < 1 || Q < 1)
            throw ConfigError("multipath: L, P, Q must be >= 1.");
        if (scene.scatterers_ue_bs.size() + 1 != L || scene.scatterers_ue_ris.size() + 1 != P ||
            scene.scatterers_ris_bs.size() + 1 != Q)
            throw ConfigError("scene: scatterer counts must equal L-1, P-1, Q-1.");
        if (!(als_tol > 0.0) || !(baseline_tol > 0.0) || als_max_iter < 1 || baseline_max_iter < 1)
            throw ConfigError("tolerances: ALS tolerances and caps must be positive.");
        if (cbs_grid_cpd < 2 || cbs_grid_vscpd < 2)
            throw ConfigError("tolerances: CBS grids need at least 2 points.");
        if (snr_grid.empty() || k_grid.empty())
            throw ConfigError("tolerances/ofdm: sweep grids must be non-empty.");
        for (auto k : k_grid)
            if (k < 4 || k > sys.K0)
                throw ConfigError("ofdm: k_grid entries must lie in [4, K0].");
        if (!(sys.bandwidth > 0.0) || !(sys.f_c > 0.0))
            throw ConfigError("ofdm: bandwidth and f_c must be positive.");
    }
};

// Horizontal look direction averaging the unit vectors toward `targets`.
inline Eigen::Vector3d facing_toward(const Eigen::Vector3d &from, const std::vector<Eigen::Vector3d> &targets)
{
    Eigen::Vector3d f = Eigen::Vector3d::Zero();
    for (const auto &t : targets)
        if ((t - from).norm() > 0.0)
            f += (t - from).normalized();
    f.z() = 0.0;
    if (f.norm() < 1e-12)
        return {1.0, 0.0, 0.0};
    return f.normalized();
}

namespace detail
{
inline std::string trim(std::string s)
{
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

inline std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("trailing");
        return x;
    }
    catch (const std::exception &)
    {
        throw ConfigError(key + ": expected a number, got '" + v + "'.");
    }
}

inline std::size_t parse_count(const std::string &key, const std::string &v)
{
    const double x = parse_double(key, v);
    if (x < 0.0 || x != static_cast<double>(static_cast<std::size_t>(x)))
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'.");
    return static_cast<std::size_t>(x);
}

inline bool parse_bool(const std::string &key, std::string v)
{
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'.");
}

// "0.5lambda" -> 0.5 * lambda, plain numbers are metres.
inline double parse_length(const std::string &key, const std::string &v, double lambda)
{
    static const std::string suffix = "lambda";
    if (v.size() > suffix.size() && v.compare(v.size() - suffix.size(), suffix.size(), suffix) == 0)
        return parse_double(key, trim(v.substr(0, v.size() - suffix.size()))) * lambda;
    return parse_double(key, v);
}

inline Eigen::Vector3d parse_point(const std::string &key, const std::string &v)
{
    const auto parts = split(v, ',');
    if (parts.size() != 3)
        throw ConfigError(key + ": expected 'x, y, z', got '" + v + "'.");
    return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

inline std::vector<Eigen::Vector3d> parse_points(const std::string &key, const std::string &v)
{
    std::vector<Eigen::Vector3d> out;
    for (const auto &p : split(v, ';'))
        out.push_back(parse_point(key, p));
    return out;
}

inline std::vector<double> parse_list(const std::string &key, const std::string &v)
{
    std::vector<double> out;
    for (const auto &p : split(v, ','))
        out.push_back(parse_double(key, p));
    if (out.empty())
        throw ConfigError(key + ": empty list.");
    return out;
}
} // namespace detail

inline std::vector<double> parse_double_list(const std::string &what, const std::string &v)
{
    return detail::parse_list(what, v);
}

// INI text -> RunConfig. Unspecified keys keep their defaults; unknown sections or keys are errors.
inline RunConfig parse_config(std::istream &in)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try
    {
        pt::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }

    RunConfig rc;
    auto &s = rc.sys;
    bool facing_bs = false, facing_ris = false, moved = false;
    std::map<std::string, std::string> lengths; // resolved after f_c is known

    using Handler = std::function<void(const std::string &, const std::string &)>;
    auto D = [](double &dst) { return Handler([&dst](const std::string &k, const std::string &v) { dst = detail::parse_double(k, v); }); };
    auto N = [](std::size_t &dst) { return Handler([&dst](const std::string &k, const std::string &v) { dst = detail::parse_count(k, v); }); };
    auto Len = [&lengths](const std::string &name) {
        return Handler([&lengths, name](const std::string &, const std::string &v) { lengths[name] = v; });
    };
    auto Pt = [&moved](Eigen::Vector3d &dst) {
        return Handler([&dst, &moved](const std::string &k, const std::string &v) {
            dst = detail::parse_point(k, v);
            moved = true;
        });
    };
    auto Pts = [&moved](std::vector<Eigen::Vector3d> &dst) {
        return Handler([&dst, &moved](const std::string &k, const std::string &v) {
            dst = v == "none" ? std::vector<Eigen::Vector3d>{} : detail::parse_points(k, v);
            moved = true;
        });
    };
    auto Facing = [](Eigen::Vector3d &dst, bool &flag) {
        return Handler([&dst, &flag](const std::string &k, const std::string &v) {
            const Eigen::Vector3d f = detail::parse_point(k, v);
            if (!(f.norm() > 0.0))
                throw ConfigError(k + ": facing must be non-zero.");
            dst = f.normalized();
            flag = true;
        });
    };
    auto Mode = [&rc](std::size_t i, double ModeSchedule::*field) {
        return Handler([&rc, i, field](const std::string &k, const std::string &v) { rc.sched.mode[i].*field = detail::parse_double(k, v); });
    };
    auto AllModes = [&rc](std::size_t ModeSchedule::*field) {
        return Handler([&rc, field](const std::string &k, const std::string &v) {
            for (auto &m : rc.sched.mode)
                m.*field = detail::parse_count(k, v);
        });
    };

    const std::map<std::string, std::map<std::string, Handler>> table{
        {"arrays",
         {{"M_y", N(s.M_y)},
          {"M_z", N(s.M_z)},
          {"Ntilde_y", N(s.Ntilde_y)},
          {"Ntilde_z", N(s.Ntilde_z)},
          {"N1", N(s.N1)},
          {"N2", N(s.N2)},
          {"d_R", Len("d_R")},
          {"d_B", Len("d_B")}}},
        {"ofdm",
         {{"K0", N(s.K0)},
          {"K", N(s.K)},
          {"K1", N(s.K1)},
          {"G", N(s.G)},
          {"G1", N(s.G1)},
          {"G2", N(s.G2)},
          {"bandwidth", D(s.bandwidth)},
          {"f_c", D(s.f_c)},
          {"k_grid", [&rc](const std::string &k, const std::string &v) {
               rc.k_grid.clear();
               for (double x : detail::parse_list(k, v))
                   rc.k_grid.push_back(detail::parse_count(k, std::to_string(static_cast<long long>(x))));
           }}}},
        {"power",
         {{"P_T_dBm", D(rc.P_T_dBm)},
          {"P_R_dBm", D(rc.P_R_dBm)},
          {"noise_psd_dBm_Hz", D(rc.noise_psd_dBm_Hz)},
          {"nf_B_dB", D(rc.nf_B_dB)},
          {"nf_R_dB", D(rc.nf_R_dB)},
          {"active", [&s](const std::string &k, const std::string &v) { s.active_ris = detail::parse_bool(k, v); }}}},
        {"multipath", {{"L", N(rc.L)}, {"P", N(rc.P)}, {"Q", N(rc.Q)}}},
        {"scene",
         {{"ue", Pt(rc.scene.ue)},
          {"bs", Pt(rc.scene.bs)},
          {"ris", Pt(rc.scene.ris)},
          {"bs_facing", Facing(rc.scene.bs_facing, facing_bs)},
          {"ris_facing", Facing(rc.scene.ris_facing, facing_ris)},
          {"scatterers_ue_bs", Pts(rc.scene.scatterers_ue_bs)},
          {"scatterers_ue_ris", Pts(rc.scene.scatterers_ue_ris)},
          {"scatterers_ris_bs", Pts(rc.scene.scatterers_ris_bs)}}},
        {"search",
         {{"E", AllModes(&ModeSchedule::E)},
          {"I", AllModes(&ModeSchedule::I)},
          {"zeta", [&rc](const std::string &k, const std::string &v) {
               for (auto &m : rc.sched.mode)
                   m.zeta = detail::parse_double(k, v);
           }},
          {"U_2", Mode(0, &ModeSchedule::U)},
          {"U_3", Mode(1, &ModeSchedule::U)},
          {"U_4", Mode(2, &ModeSchedule::U)},
          {"U_5", Mode(3, &ModeSchedule::U)},
          {"delta1_2", Mode(0, &ModeSchedule::delta1)},
          {"delta1_3", Mode(1, &ModeSchedule::delta1)},
          {"delta1_4", Mode(2, &ModeSchedule::delta1)},
          {"delta1_5", Mode(3, &ModeSchedule::delta1)}}},
        {"tolerances",
         {{"als_tol", D(rc.als_tol)},
          {"als_max_iter", N(rc.als_max_iter)},
          {"baseline_tol", D(rc.baseline_tol)},
          {"baseline_max_iter", N(rc.baseline_max_iter)},
          {"cbs_grid_cpd", N(rc.cbs_grid_cpd)},
          {"cbs_grid_vscpd", N(rc.cbs_grid_vscpd)},
          {"snr_grid", [&rc](const std::string &k, const std::string &v) { rc.snr_grid = detail::parse_list(k, v); }}}},
    };

    for (const auto &[section, body] : tree)
    {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config: key '" + section + "' outside of a section.");
        const auto sec = table.find(section);
        if (sec == table.end())
            throw ConfigError("config: unknown section [" + section + "].");
        for (const auto &[key, node] : body)
        {
            const auto h = sec->second.find(key);
            if (h == sec->second.end())
                throw ConfigError("config: unknown key '" + key + "' in [" + section + "].");
            h->second(section + "." + key, detail::trim(node.data()));
        }
    }

    s.delta_f = s.bandwidth / static_cast<double>(s.K0);
    s.lambda = speed_of_light / s.f_c;
    s.d_R = 0.1 * s.lambda;
    s.d_B = 0.5 * s.lambda;
    if (lengths.count("d_R"))
        s.d_R = detail::parse_length("arrays.d_R", lengths["d_R"], s.lambda);
    if (lengths.count("d_B"))
        s.d_B = detail::parse_length("arrays.d_B", lengths["d_B"], s.lambda);
    s.P_T = dbm_to_watt(rc.P_T_dBm);
    s.P_R = dbm_to_watt(rc.P_R_dBm);

    // repositioned endpoints without explicit facings look at their contacts
    if (moved && !facing_bs)
    {
        std::vector<Eigen::Vector3d> t{rc.scene.ue, rc.scene.ris};
        t.insert(t.end(), rc.scene.scatterers_ue_bs.begin(), rc.scene.scatterers_ue_bs.end());
        t.insert(t.end(), rc.scene.scatterers_ris_bs.begin(), rc.scene.scatterers_ris_bs.end());
        rc.scene.bs_facing = facing_toward(rc.scene.bs, t);
    }
    if (moved && !facing_ris)
    {
        std::vector<Eigen::Vector3d> t{rc.scene.ue, rc.scene.bs};
        t.insert(t.end(), rc.scene.scatterers_ue_ris.begin(), rc.scene.scatterers_ue_ris.end());
        t.insert(t.end(), rc.scene.scatterers_ris_bs.begin(), rc.scene.scatterers_ris_bs.end());
        rc.scene.ris_facing = facing_toward(rc.scene.ris, t);
    }
    rc.validate();
    return rc;
}

inline RunConfig parse_config_string(const std::string &text)
{
    std::istringstream in(text);
    return parse_config(in);
}

// Stable 64-bit FNV-1a digest of the resolved configuration, logged next to CRLB/estimator rows.
inline std::uint64_t config_digest(const RunConfig &rc)
{
    std::ostringstream os;
    os.precision(17);
    const auto &s = rc.sys;
    os << s.M_y << s.M_z << ' ' << s.Ntilde_y << s.Ntilde_z << ' ' << s.N1 << s.N2 << ' ' << s.K0 << ' ' << s.K << ' ' << s.K1
       << ' ' << s.G << s.G1 << s.G2 << ' ' << s.delta_f << ' ' << s.f_c << ' ' << s.d_R << ' ' << s.d_B << ' ' << s.P_T << ' '
       << s.P_R << ' ' << s.active_ris << ' ' << rc.L << rc.P << rc.Q << ' ' << rc.scene.ue.transpose() << ' '
       << rc.scene.bs.transpose() << ' ' << rc.scene.ris.transpose() << ' ' << rc.noise_psd_dBm_Hz << ' ' << rc.nf_B_dB << ' '
       << rc.nf_R_dB;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : os.str())
    {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace ristensor

#endif
