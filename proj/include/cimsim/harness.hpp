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
// Experiment orchestration: Monte Carlo bit-error curves, array-size /
// sparsity / angular-perturbation sweeps, and CSV emission.
//
// Determinism contract: every trial derives its random streams from
// (master seed, power index, trial index) alone, so results are identical
// for any worker count and any scheduling. Error counts are integers
// aggregated by summation, which is order-independent.

#ifndef CIMSIM_HARNESS_HPP
#define CIMSIM_HARNESS_HPP

#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scenario.hpp"

namespace cimsim
{
    struct CurvePoint
    {
        double power_dbm = 0.0;
        std::uint64_t trials = 0;
        std::uint64_t bit_errors = 0;
        double aber_sim = 0.0;
        double aber_bound = 0.0;
        std::uint64_t whitening_redraws = 0; // diagnostics: singular draws rejected
    };

    struct BerCurve
    {
        std::vector<CurvePoint> points;
        std::string strategy;
        int mod_order = 0;
        int codebook_order = 0;
        std::uint64_t seed = 0;
    };

    inline double binomial_se(double p, double n_bits)
    {
        if (n_bits <= 0.0)
            return 0.0;
        return std::sqrt(std::max(p * (1.0 - p), 0.0) / n_bits);
    }

    using ProgressFn = std::function<void(std::size_t done_points, std::size_t total_points)>;

    namespace detail
    {
        struct TrialCounts
        {
            std::uint64_t bit_errors = 0;
            std::uint64_t redraws = 0;
        };

        // One transmission through a fresh realization. The channel stream is
        // consumed until a realization with a non-singular whitening build
        // appears; rejected draws are tallied.
        inline TrialCounts run_trial(const Scenario &s,
                                     double power_w,
                                     std::uint64_t seed,
                                     std::uint64_t point_idx,
                                     std::uint64_t trial_idx,
                                     double perturb_deg)
        {
            Rng chan = Rng::stream(seed, 0xC0, point_idx, trial_idx);
            Rng tx = Rng::stream(seed, 0x7A, point_idx, trial_idx);
            Rng rcs = Rng::stream(seed, 0x5C, point_idx, trial_idx);

            TrialCounts out;
            for (;;)
            {
                try
                {
                    const ChannelRealization real = draw_realization(s, chan);
                    const LinkBuild link = build_link(s, real, &rcs);

                    // With a nonzero perturbation the surface configuration
                    // and the combiner stay matched to the (now stale)
                    // angles while the clusters have shifted. Path gains are
                    // fast CSI: the detector tracks the branch gains through
                    // the current channel, so its hypotheses use the true
                    // gains seen through the stale beams.
                    const CMatrix *gains = &link.branch_gains;
                    CMatrix perturbed_gains;
                    ChannelRealization shifted;
                    if (perturb_deg > 0.0)
                    {
                        shifted = perturb_clusters(real, perturb_deg);
                        perturbed_gains = branch_gain_matrix(shifted, link.codebook, link.filter,
                                                             link.f_t, s.gain_product);
                        gains = &perturbed_gains;
                    }

                    const int eta = s.spectral_efficiency();
                    std::vector<int> bits(eta);
                    for (int i = 0; i < eta; ++i)
                        bits[i] = tx.bit();

                    const TxSymbol sym = modulate(bits, s.effective_codebook_order(), s.mod_order);
                    const CVector z = transmit(sym, *gains, link.filter, power_w, s.noise_var_w, tx);
                    const Detection det = ml_detect(z, *gains, power_w, s.mod_order);
                    const std::vector<int> bits_hat =
                        demap(det.codeword_index, det.symbol_index, s.effective_codebook_order(), s.mod_order);
                    out.bit_errors += hamming_distance(bits, bits_hat);
                    return out;
                }
                catch (const SingularMatrixError &)
                {
                    ++out.redraws;
                }
            }
        }

        inline TrialCounts run_point(const Scenario &s,
                                     double power_w,
                                     std::uint64_t seed,
                                     std::uint64_t point_idx,
                                     std::uint64_t trials,
                                     double perturb_deg,
                                     int threads)
        {
            if (threads <= 1 || trials < 2)
            {
                TrialCounts total;
                for (std::uint64_t t = 0; t < trials; ++t)
                {
                    const TrialCounts c = run_trial(s, power_w, seed, point_idx, t, perturb_deg);
                    total.bit_errors += c.bit_errors;
                    total.redraws += c.redraws;
                }
                return total;
            }

            std::atomic<std::uint64_t> next{0};
            std::vector<TrialCounts> partial(threads);
            std::vector<std::thread> pool;
            pool.reserve(threads);
            constexpr std::uint64_t block = 256;
            for (int w = 0; w < threads; ++w)
                pool.emplace_back(
                    [&, w]()
                    {
                        TrialCounts local;
                        for (;;)
                        {
                            const std::uint64_t begin = next.fetch_add(block);
                            if (begin >= trials)
                                break;
                            const std::uint64_t end = std::min(trials, begin + block);
                            for (std::uint64_t t = begin; t < end; ++t)
                            {
                                const TrialCounts c = run_trial(s, power_w, seed, point_idx, t, perturb_deg);
                                local.bit_errors += c.bit_errors;
                                local.redraws += c.redraws;
                            }
                        }
                        partial[w] = local;
                    });
            for (auto &th : pool)
                th.join();

            TrialCounts total;
            for (const TrialCounts &c : partial)
            {
                total.bit_errors += c.bit_errors;
                total.redraws += c.redraws;
            }
            return total;
        }
    }

    // Simulated curve plus the analytical upper bound over the configured
    // power sweep. trials_per_point == 0 yields an empty curve.
    inline BerCurve run_curve(const SimConfig &cfg, const ProgressFn &progress = {})
    {
        const Scenario s = make_scenario(cfg);
        BerCurve curve;
        curve.strategy = strategy_name(s.strategy);
        curve.mod_order = s.mod_order;
        curve.codebook_order = s.effective_codebook_order();
        curve.seed = cfg.seed;
        if (cfg.trials_per_point == 0)
            return curve;

        const int eta = s.spectral_efficiency();
        std::vector<double> bound(cfg.powers_dbm.size(), 0.0);
        if (cfg.bound_realizations > 0)
            bound = aber_upper_bound(s, cfg.powers_dbm, cfg.bound_realizations, cfg.seed);

        for (size_t p = 0; p < cfg.powers_dbm.size(); ++p)
        {
            const double power_w = dbm2watt(cfg.powers_dbm[p]);
            const detail::TrialCounts counts = detail::run_point(
                s, power_w, cfg.seed, p, cfg.trials_per_point, cfg.angle_perturb_deg, cfg.threads);

            CurvePoint pt;
            pt.power_dbm = cfg.powers_dbm[p];
            pt.trials = cfg.trials_per_point;
            pt.bit_errors = counts.bit_errors;
            pt.aber_sim = static_cast<double>(counts.bit_errors) /
                          (static_cast<double>(cfg.trials_per_point) * eta);
            pt.aber_bound = bound[p];
            pt.whitening_redraws = counts.redraws;
            curve.points.push_back(pt);
            if (progress)
                progress(p + 1, cfg.powers_dbm.size());
        }
        return curve;
    }

    // --- sweeps ----------------------------------------------------------------

    struct ArrayDims
    {
        int ant_nx = 4, ant_ny = 4; // Tx and Rx arrays (square deployment)
        int ris_nx = 6, ris_ny = 6;
    };

    struct ArraySweepRow
    {
        ArrayDims dims;
        CurvePoint point;
    };

    // Single-power curve per array size; rows share the master seed.
    inline std::vector<ArraySweepRow> run_array_sweep(const SimConfig &cfg,
                                                      const std::vector<ArrayDims> &sizes,
                                                      double power_dbm,
                                                      const ProgressFn &progress = {})
    {
        if (sizes.empty())
            throw ConfigError("array sweep needs at least one size");
        std::vector<ArraySweepRow> rows;
        rows.reserve(sizes.size());
        for (size_t i = 0; i < sizes.size(); ++i)
        {
            SimConfig c = cfg;
            c.nt_x = sizes[i].ant_nx;
            c.nt_y = sizes[i].ant_ny;
            c.nr_x = sizes[i].ant_nx;
            c.nr_y = sizes[i].ant_ny;
            c.ris_x = sizes[i].ris_nx;
            c.ris_y = sizes[i].ris_ny;
            c.powers_dbm = {power_dbm};
            const BerCurve curve = run_curve(c);
            rows.push_back({sizes[i], curve.points.empty() ? CurvePoint{power_dbm, 0, 0, 0.0, 0.0, 0}
                                                           : curve.points.front()});
            if (progress)
                progress(i + 1, sizes.size());
        }
        return rows;
    }

    struct SparsitySweepRow
    {
        int clusters = 0;
        int paths = 0;
        CurvePoint point;
    };

    // ABER grid over the Cartesian product of cluster and path counts at a
    // single power, shared seeds across cells.
    inline std::vector<SparsitySweepRow> run_sparsity_sweep(const SimConfig &cfg,
                                                            const std::vector<int> &cluster_counts,
                                                            const std::vector<int> &path_counts,
                                                            double power_dbm,
                                                            const ProgressFn &progress = {})
    {
        if (cluster_counts.empty() || path_counts.empty())
            throw ConfigError("sparsity sweep needs non-empty grids");
        std::vector<SparsitySweepRow> rows;
        rows.reserve(cluster_counts.size() * path_counts.size());
        size_t done = 0;
        for (int n_clusters : cluster_counts)
            for (int n_paths : path_counts)
            {
                SimConfig c = cfg;
                c.clusters = n_clusters;
                c.paths_per_cluster = n_paths;
                c.powers_dbm = {power_dbm};
                const BerCurve curve = run_curve(c);
                rows.push_back({n_clusters, n_paths,
                                curve.points.empty() ? CurvePoint{power_dbm, 0, 0, 0.0, 0.0, 0}
                                                     : curve.points.front()});
                if (progress)
                    progress(++done, cluster_counts.size() * path_counts.size());
            }
        return rows;
    }

    struct PerturbationSweepRow
    {
        double delta_deg = 0.0;
        BerCurve curve;
    };

    // Full power curve per angular offset; the codebook and combiner are
    // built from unperturbed angles while transmission runs through clusters
    // rigidly shifted by delta. Rows share the master seed.
    inline std::vector<PerturbationSweepRow> run_perturbation_sweep(const SimConfig &cfg,
                                                                    const std::vector<double> &deltas_deg,
                                                                    const ProgressFn &progress = {})
    {
        if (deltas_deg.empty())
            throw ConfigError("perturbation sweep needs at least one delta");
        std::vector<PerturbationSweepRow> rows;
        rows.reserve(deltas_deg.size());
        for (size_t i = 0; i < deltas_deg.size(); ++i)
        {
            if (deltas_deg[i] < 0.0)
                throw ConfigError("perturbation deltas must be >= 0");
            SimConfig c = cfg;
            c.angle_perturb_deg = deltas_deg[i];
            rows.push_back({deltas_deg[i], run_curve(c)});
            if (progress)
                progress(i + 1, deltas_deg.size());
        }
        return rows;
    }

    // Power offset (dB) by which `shifted` must be driven harder to reach the
    // ABER of `baseline` at the given reference power, found by log-linear
    // interpolation along the shifted curve.
    inline double power_offset_at_matched_aber(const BerCurve &baseline,
                                               const BerCurve &shifted,
                                               double reference_power_dbm)
    {
        auto aber_at = [](const BerCurve &c, double p) -> double
        {
            for (const CurvePoint &pt : c.points)
                if (pt.power_dbm == p)
                    return pt.aber_sim;
            throw std::invalid_argument("power_offset_at_matched_aber: reference power not on the curve");
        };
        const double target = aber_at(baseline, reference_power_dbm);
        if (!(target > 0.0))
            throw std::invalid_argument("power_offset_at_matched_aber: baseline ABER is zero at the reference");

        // find the bracketing segment of the shifted curve (ABER decreasing in P)
        const auto &pts = shifted.points;
        for (size_t i = 0; i + 1 < pts.size(); ++i)
        {
            const double hi = pts[i].aber_sim;
            const double lo = pts[i + 1].aber_sim;
            if (hi >= target && target > lo && lo > 0.0)
            {
                const double t = (std::log(target) - std::log(hi)) / (std::log(lo) - std::log(hi));
                const double p = pts[i].power_dbm + t * (pts[i + 1].power_dbm - pts[i].power_dbm);
                return p - reference_power_dbm;
            }
        }
        throw std::invalid_argument("power_offset_at_matched_aber: target ABER not bracketed by the shifted curve");
    }

    // --- CSV emission ------------------------------------------------------------
    //
    // Curve schema:      power_dbm,trials,bit_errors,aber_sim,aber_bound,strategy,M,B,seed
    // Array sweep:       ant_nx,ant_ny,ris_nx,ris_ny,power_dbm,trials,bit_errors,aber_sim,strategy,M,B,seed
    // Sparsity sweep:    clusters,paths,power_dbm,trials,bit_errors,aber_sim,strategy,M,B,seed
    // Perturbation sweep: delta_deg,power_dbm,trials,bit_errors,aber_sim,strategy,M,B,seed
    // Numbers are full-precision decimal.

    namespace detail
    {
        inline std::ofstream open_csv(const std::string &path)
        {
            std::ofstream os(path);
            if (!os)
                throw std::runtime_error("emit_csv: cannot open " + path + " for writing");
            return os;
        }
    }

    inline void emit_csv(const BerCurve &curve, std::ostream &os)
    {
        os << "power_dbm,trials,bit_errors,aber_sim,aber_bound,strategy,M,B,seed\n";
        for (const CurvePoint &pt : curve.points)
            os << detail::fmt_full(pt.power_dbm) << ',' << pt.trials << ',' << pt.bit_errors << ','
               << detail::fmt_full(pt.aber_sim) << ',' << detail::fmt_full(pt.aber_bound) << ','
               << curve.strategy << ',' << curve.mod_order << ',' << curve.codebook_order << ','
               << curve.seed << '\n';
    }

    inline void emit_csv(const BerCurve &curve, const std::string &path)
    {
        auto os = detail::open_csv(path);
        emit_csv(curve, os);
    }

    inline void emit_csv(const std::vector<ArraySweepRow> &rows, const SimConfig &cfg, std::ostream &os)
    {
        os << "ant_nx,ant_ny,ris_nx,ris_ny,power_dbm,trials,bit_errors,aber_sim,strategy,M,B,seed\n";
        for (const ArraySweepRow &r : rows)
            os << r.dims.ant_nx << ',' << r.dims.ant_ny << ',' << r.dims.ris_nx << ',' << r.dims.ris_ny << ','
               << detail::fmt_full(r.point.power_dbm) << ',' << r.point.trials << ',' << r.point.bit_errors << ','
               << detail::fmt_full(r.point.aber_sim) << ',' << cfg.strategy << ',' << cfg.mod_order << ','
               << cfg.codebook_order << ',' << cfg.seed << '\n';
    }

    inline void emit_csv(const std::vector<ArraySweepRow> &rows, const SimConfig &cfg, const std::string &path)
    {
        auto os = detail::open_csv(path);
        emit_csv(rows, cfg, os);
    }

    inline void emit_csv(const std::vector<SparsitySweepRow> &rows, const SimConfig &cfg, std::ostream &os)
    {
        os << "clusters,paths,power_dbm,trials,bit_errors,aber_sim,strategy,M,B,seed\n";
        for (const SparsitySweepRow &r : rows)
            os << r.clusters << ',' << r.paths << ',' << detail::fmt_full(r.point.power_dbm) << ','
               << r.point.trials << ',' << r.point.bit_errors << ',' << detail::fmt_full(r.point.aber_sim) << ','
               << cfg.strategy << ',' << cfg.mod_order << ',' << cfg.codebook_order << ',' << cfg.seed << '\n';
    }

    inline void emit_csv(const std::vector<SparsitySweepRow> &rows, const SimConfig &cfg, const std::string &path)
    {
        auto os = detail::open_csv(path);
        emit_csv(rows, cfg, os);
    }

    inline void emit_csv(const std::vector<PerturbationSweepRow> &rows, const SimConfig &cfg, std::ostream &os)
    {
        os << "delta_deg,power_dbm,trials,bit_errors,aber_sim,strategy,M,B,seed\n";
        for (const PerturbationSweepRow &r : rows)
            for (const CurvePoint &pt : r.curve.points)
                os << detail::fmt_full(r.delta_deg) << ',' << detail::fmt_full(pt.power_dbm) << ','
                   << pt.trials << ',' << pt.bit_errors << ',' << detail::fmt_full(pt.aber_sim) << ','
                   << cfg.strategy << ',' << cfg.mod_order << ',' << cfg.codebook_order << ',' << cfg.seed << '\n';
    }

    inline void emit_csv(const std::vector<PerturbationSweepRow> &rows, const SimConfig &cfg, const std::string &path)
    {
        auto os = detail::open_csv(path);
        emit_csv(rows, cfg, os);
    }
}

#endif
