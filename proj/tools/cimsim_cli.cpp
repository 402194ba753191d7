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
//
// Batch front end. Subcommands:
//   curve          ABER vs transmit power, simulated + analytical bound
//   array-sweep    ABER vs array size at a fixed power
//   sparsity-sweep ABER over a (clusters x paths) grid at a fixed power
//   perturb-sweep  ABER degradation under stale angular information
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <cimsim/cimsim.hpp>

namespace
{
    struct CommonOpts
    {
        std::string config_path;
        std::string out_path;
        std::string strategy;
        std::uint64_t seed = 0;
        bool seed_set = false;
        std::uint64_t trials = 0;
        bool trials_set = false;
        int threads = 0;
    };

    void add_common(CLI::App *cmd, CommonOpts &opts)
    {
        cmd->add_option("--config", opts.config_path, "configuration file (key = value lines)");
        cmd->add_option("--out", opts.out_path, "output CSV path")->required();
        cmd->add_option("--strategy", opts.strategy, "codebook strategy: bgcs-cim, simple-cim, ssm, rcs");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&opts](std::uint64_t v) { opts.seed = v; opts.seed_set = true; }, "master seed");
        cmd->add_option_function<std::uint64_t>(
            "--trials", [&opts](std::uint64_t v) { opts.trials = v; opts.trials_set = true; },
            "Monte Carlo trials per point");
        cmd->add_option("--threads", opts.threads, "worker threads");
    }

    cimsim::SimConfig resolve_config(const CommonOpts &opts)
    {
        cimsim::SimConfig cfg = opts.config_path.empty() ? cimsim::SimConfig{}
                                                         : cimsim::load_sim_config(opts.config_path);
        if (opts.seed_set)
            cfg.seed = opts.seed;
        if (opts.trials_set)
            cfg.trials_per_point = opts.trials;
        if (!opts.strategy.empty())
            cfg.strategy = opts.strategy;
        if (opts.threads > 0)
            cfg.threads = opts.threads;
        cfg.validate();
        return cfg;
    }

    cimsim::ProgressFn progress_printer(const char *label)
    {
        return [label](std::size_t done, std::size_t total)
        {
            std::fprintf(stderr, "[cimsim] %s: %zu/%zu\n", label, done, total);
        };
    }

    std::vector<cimsim::ArrayDims> parse_sizes(const std::string &spec)
    {
        // "4x4:6x6,8x8:10x10" -> antenna dims : RIS dims, comma-separated
        std::vector<cimsim::ArrayDims> sizes;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            cimsim::ArrayDims d;
            if (std::sscanf(item.c_str(), "%dx%d:%dx%d", &d.ant_nx, &d.ant_ny, &d.ris_nx, &d.ris_ny) != 4)
                throw cimsim::ConfigError("bad size entry '" + item + "', expected AxA:RxR");
            sizes.push_back(d);
        }
        if (sizes.empty())
            throw cimsim::ConfigError("--sizes produced an empty list");
        return sizes;
    }

    std::vector<int> parse_int_list(const std::string &spec)
    {
        std::vector<int> out;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                out.push_back(std::stoi(tok));
        if (out.empty())
            throw cimsim::ConfigError("empty integer list");
        return out;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"cimsim - RIS-assisted mmWave link-level simulator with cluster index modulation"};
    app.require_subcommand(1);

    CommonOpts curve_opts, array_opts, sparsity_opts, perturb_opts;

    CLI::App *curve = app.add_subcommand("curve", "ABER vs transmit power");
    add_common(curve, curve_opts);

    CLI::App *array_sweep = app.add_subcommand("array-sweep", "ABER vs array size at one power");
    add_common(array_sweep, array_opts);
    std::string sizes_spec = "4x4:6x6,8x8:10x10";
    double array_power_dbm = 20.0;
    array_sweep->add_option("--sizes", sizes_spec, "antenna:RIS size list, e.g. 4x4:6x6,8x8:10x10");
    array_sweep->add_option("--power-dbm", array_power_dbm, "transmit power");

    CLI::App *sparsity = app.add_subcommand("sparsity-sweep", "ABER over a clusters x paths grid");
    add_common(sparsity, sparsity_opts);
    std::string clusters_spec = "2,8";
    std::string paths_spec = "2,10";
    double sparsity_power_dbm = 25.0;
    sparsity->add_option("--clusters", clusters_spec, "cluster counts, comma separated");
    sparsity->add_option("--paths", paths_spec, "paths per cluster, comma separated");
    sparsity->add_option("--power-dbm", sparsity_power_dbm, "transmit power");

    CLI::App *perturb = app.add_subcommand("perturb-sweep", "ABER under stale angular information");
    add_common(perturb, perturb_opts);
    std::string deltas_spec = "0,1,2,5";
    perturb->add_option("--deltas", deltas_spec, "angular offsets in degrees, comma separated");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (curve->parsed())
        {
            const cimsim::SimConfig cfg = resolve_config(curve_opts);
            const cimsim::BerCurve result = cimsim::run_curve(cfg, progress_printer("curve"));
            cimsim::emit_csv(result, curve_opts.out_path);
            std::cout << curve_opts.out_path << '\n';
        }
        else if (array_sweep->parsed())
        {
            const cimsim::SimConfig cfg = resolve_config(array_opts);
            const auto rows = cimsim::run_array_sweep(cfg, parse_sizes(sizes_spec), array_power_dbm,
                                                      progress_printer("array-sweep"));
            cimsim::emit_csv(rows, cfg, array_opts.out_path);
            std::cout << array_opts.out_path << '\n';
        }
        else if (sparsity->parsed())
        {
            const cimsim::SimConfig cfg = resolve_config(sparsity_opts);
            const auto rows = cimsim::run_sparsity_sweep(cfg, parse_int_list(clusters_spec),
                                                         parse_int_list(paths_spec), sparsity_power_dbm,
                                                         progress_printer("sparsity-sweep"));
            cimsim::emit_csv(rows, cfg, sparsity_opts.out_path);
            std::cout << sparsity_opts.out_path << '\n';
        }
        else if (perturb->parsed())
        {
            const cimsim::SimConfig cfg = resolve_config(perturb_opts);
            const std::vector<double> deltas = cimsim::detail::parse_double_list(deltas_spec);
            if (deltas.empty())
                throw cimsim::ConfigError("--deltas produced an empty list");
            const auto rows = cimsim::run_perturbation_sweep(cfg, deltas, progress_printer("perturb-sweep"));
            cimsim::emit_csv(rows, cfg, perturb_opts.out_path);
            std::cout << perturb_opts.out_path << '\n';
        }
    }
    catch (const cimsim::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
