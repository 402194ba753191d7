// SPDX-License-Identifier: Apache-2.0
//
// cimsim - link-level simulator for RIS-assisted mmWave MIMO with cluster index modulation
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

#ifndef CIMSIM_CONFIG_HPP
#define CIMSIM_CONFIG_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"

namespace cimsim
{
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // How the line-of-sight departure/arrival directions of the Tx-RIS link
    // are determined:
    //   facing: each array's broadside faces its link partner, so the LOS
    //           direction is broadside in both local frames (the distances
    //           still come from the coordinates).
    //   global: arrays are mounted parallel to the global x-y plane; the LOS
    //           directions are the spherical angles of the connecting line.
    //   random: departure and arrival sampled uniformly per realization.
    enum class LosMode
    {
        Facing,
        Global,
        Random
    };

    inline LosMode parse_los_mode(const std::string &s)
    {
        if (s == "facing")
            return LosMode::Facing;
        if (s == "global")
            return LosMode::Global;
        if (s == "random")
            return LosMode::Random;
        throw ConfigError("los_mode must be one of facing, global, random");
    }

    inline std::string los_mode_name(LosMode m)
    {
        switch (m)
        {
        case LosMode::Facing: return "facing";
        case LosMode::Global: return "global";
        case LosMode::Random: return "random";
        }
        return "unknown";
    }

    // Flat simulation configuration. Defaults reproduce the reference 28 GHz
    // outdoor setup at desk scale (smaller arrays and trial counts); angles
    // in files are degrees, positions are meters.
    struct SimConfig
    {
        std::array<double, 3> tx_pos{3.0, 0.0, 12.0};
        std::array<double, 3> ris_pos{0.0, 3.0, 15.0};
        std::array<double, 3> rx_pos{3.0, 103.0, 6.0};

        double carrier_freq_hz = 28e9;
        double bandwidth_hz = 100e6;
        double psd_dbm_per_hz = -174.0;
        double gt_dbi = 24.5;
        double gr_dbi = 24.5;
        double spacing_wavelengths = 0.5;

        int nt_x = 4, nt_y = 4;   // Tx array
        int nr_x = 4, nr_y = 4;   // Rx array
        int ris_x = 6, ris_y = 6; // RIS

        int clusters = 8;
        int paths_per_cluster = 10;
        double spread_deg = 7.5;

        double pl_los_a = 61.4, pl_los_b = 2.0, pl_los_sigma = 5.8;
        double pl_nlos_a = 72.0, pl_nlos_b = 2.92, pl_nlos_sigma = 8.7;

        int mod_order = 4;     // M
        int codebook_order = 2; // B
        std::string strategy = "bgcs-cim";
        LosMode los_mode = LosMode::Facing;

        std::vector<double> powers_dbm{15.0, 20.0, 25.0, 30.0, 35.0, 40.0};
        std::uint64_t trials_per_point = 20000;
        int bound_realizations = 200;
        double angle_perturb_deg = 0.0;
        std::uint64_t seed = 1;
        int threads = 1;

        void validate() const
        {
            auto positive = [](double v, const char *name)
            {
                if (!(v > 0.0))
                    throw ConfigError(std::string(name) + " must be positive");
            };
            positive(carrier_freq_hz, "carrier_freq_hz");
            positive(bandwidth_hz, "bandwidth_hz");
            positive(spacing_wavelengths, "spacing_wavelengths");
            positive(spread_deg, "spread_deg");
            if (nt_x < 1 || nt_y < 1 || nr_x < 1 || nr_y < 1 || ris_x < 1 || ris_y < 1)
                throw ConfigError("array dimensions must be >= 1");
            if (clusters < 1 || paths_per_cluster < 1)
                throw ConfigError("cluster and path counts must be >= 1");
            auto power_of_two = [](int v) { return v >= 1 && (v & (v - 1)) == 0; };
            if (!power_of_two(mod_order) || mod_order < 2)
                throw ConfigError("mod_order must be a power of two >= 2");
            if (!power_of_two(codebook_order))
                throw ConfigError("codebook_order must be a power of two");
            if (powers_dbm.empty())
                throw ConfigError("powers_dbm must not be empty");
            if (bound_realizations < 0)
                throw ConfigError("bound_realizations must be >= 0");
            if (angle_perturb_deg < 0.0)
                throw ConfigError("angle_perturb_deg must be >= 0");
            if (threads < 1)
                throw ConfigError("threads must be >= 1");
            auto dist2 = [](const std::array<double, 3> &a, const std::array<double, 3> &b)
            {
                double s = 0.0;
                for (int i = 0; i < 3; ++i)
                    s += (a[i] - b[i]) * (a[i] - b[i]);
                return s;
            };
            if (!(dist2(tx_pos, ris_pos) > 0.0) || !(dist2(ris_pos, rx_pos) > 0.0))
                throw ConfigError("terminal positions must be distinct");
        }
    };

    namespace detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return "";
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        inline std::vector<double> parse_double_list(const std::string &s)
        {
            std::vector<double> out;
            std::stringstream ss(s);
            std::string tok;
            while (std::getline(ss, tok, ','))
            {
                tok = trim(tok);
                if (!tok.empty())
                    out.push_back(std::stod(tok));
            }
            return out;
        }
    }

    // key = value document, one pair per line, '#' starts a comment. Keys
    // mirror the SimConfig fields; unknown keys are rejected.
    inline void apply_config_entry(SimConfig &cfg, const std::string &key, const std::string &value)
    {
        auto as_d = [&value]() { return std::stod(value); };
        auto as_i = [&value]() { return std::stoi(value); };
        auto as_u64 = [&value]() { return static_cast<std::uint64_t>(std::stoull(value)); };

        try
        {
            if (key == "tx_pos_x") cfg.tx_pos[0] = as_d();
            else if (key == "tx_pos_y") cfg.tx_pos[1] = as_d();
            else if (key == "tx_pos_z") cfg.tx_pos[2] = as_d();
            else if (key == "ris_pos_x") cfg.ris_pos[0] = as_d();
            else if (key == "ris_pos_y") cfg.ris_pos[1] = as_d();
            else if (key == "ris_pos_z") cfg.ris_pos[2] = as_d();
            else if (key == "rx_pos_x") cfg.rx_pos[0] = as_d();
            else if (key == "rx_pos_y") cfg.rx_pos[1] = as_d();
            else if (key == "rx_pos_z") cfg.rx_pos[2] = as_d();
            else if (key == "carrier_freq_hz") cfg.carrier_freq_hz = as_d();
            else if (key == "bandwidth_hz") cfg.bandwidth_hz = as_d();
            else if (key == "psd_dbm_per_hz") cfg.psd_dbm_per_hz = as_d();
            else if (key == "gt_dbi") cfg.gt_dbi = as_d();
            else if (key == "gr_dbi") cfg.gr_dbi = as_d();
            else if (key == "spacing_wavelengths") cfg.spacing_wavelengths = as_d();
            else if (key == "nt_x") cfg.nt_x = as_i();
            else if (key == "nt_y") cfg.nt_y = as_i();
            else if (key == "nr_x") cfg.nr_x = as_i();
            else if (key == "nr_y") cfg.nr_y = as_i();
            else if (key == "ris_x") cfg.ris_x = as_i();
            else if (key == "ris_y") cfg.ris_y = as_i();
            else if (key == "clusters") cfg.clusters = as_i();
            else if (key == "paths_per_cluster") cfg.paths_per_cluster = as_i();
            else if (key == "spread_deg") cfg.spread_deg = as_d();
            else if (key == "pl_los_a") cfg.pl_los_a = as_d();
            else if (key == "pl_los_b") cfg.pl_los_b = as_d();
            else if (key == "pl_los_sigma") cfg.pl_los_sigma = as_d();
            else if (key == "pl_nlos_a") cfg.pl_nlos_a = as_d();
            else if (key == "pl_nlos_b") cfg.pl_nlos_b = as_d();
            else if (key == "pl_nlos_sigma") cfg.pl_nlos_sigma = as_d();
            else if (key == "mod_order") cfg.mod_order = as_i();
            else if (key == "codebook_order") cfg.codebook_order = as_i();
            else if (key == "strategy") cfg.strategy = value;
            else if (key == "los_mode") cfg.los_mode = parse_los_mode(value);
            else if (key == "powers_dbm") cfg.powers_dbm = detail::parse_double_list(value);
            else if (key == "trials_per_point") cfg.trials_per_point = as_u64();
            else if (key == "bound_realizations") cfg.bound_realizations = as_i();
            else if (key == "angle_perturb_deg") cfg.angle_perturb_deg = as_d();
            else if (key == "seed") cfg.seed = as_u64();
            else if (key == "threads") cfg.threads = as_i();
            else
                throw ConfigError("unknown config key '" + key + "'");
        }
        catch (const ConfigError &)
        {
            throw;
        }
        catch (const std::exception &)
        {
            throw ConfigError("invalid value '" + value + "' for config key '" + key + "'");
        }
    }

    inline SimConfig load_sim_config(std::istream &is)
    {
        SimConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            apply_config_entry(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        }
        cfg.validate();
        return cfg;
    }

    inline SimConfig load_sim_config(const std::string &path)
    {
        std::ifstream is(path);
        if (!is)
            throw ConfigError("cannot open config file " + path);
        return load_sim_config(is);
    }
}

#endif
