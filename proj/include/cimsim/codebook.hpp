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
// Index-modulation codebook construction. A codebook is an ordered list of
// unit-modulus RIS phase codewords, one per index symbol, together with the
// matched receive combiner columns and the (cluster, path) each codeword
// steers through. Codeword order is selection order (descending gain) and
// defines the bit mapping: codeword k encodes the natural binary word k.

#ifndef CIMSIM_CODEBOOK_HPP
#define CIMSIM_CODEBOOK_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "common.hpp"
#include "rng.hpp"

namespace cimsim
{
    enum class CodebookStrategy
    {
        BgcsCim,   // greedy best-gain cluster selection through the full cascade
        SimpleCim, // cluster selection by the gains of R only
        Ssm,       // strongest individual paths, cluster membership ignored
        Rcs        // one cluster at random, no index bits
    };

    inline std::string strategy_name(CodebookStrategy s)
    {
        switch (s)
        {
        case CodebookStrategy::BgcsCim: return "bgcs-cim";
        case CodebookStrategy::SimpleCim: return "simple-cim";
        case CodebookStrategy::Ssm: return "ssm";
        case CodebookStrategy::Rcs: return "rcs";
        }
        return "unknown";
    }

    inline CodebookStrategy parse_strategy(std::string name)
    {
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        if (name == "bgcs-cim" || name == "bgcs")
            return CodebookStrategy::BgcsCim;
        if (name == "simple-cim" || name == "simple")
            return CodebookStrategy::SimpleCim;
        if (name == "ssm")
            return CodebookStrategy::Ssm;
        if (name == "rcs")
            return CodebookStrategy::Rcs;
        throw std::invalid_argument("unsupported codebook strategy '" + name + "'");
    }

    struct CimCodebook
    {
        CMatrix codewords;                         // N x B, unit-modulus entries
        CMatrix combiner;                          // Nr x B, unit-norm columns
        std::vector<std::pair<int, int>> selected; // (cluster, path), 0-based, selection order
        CodebookStrategy strategy = CodebookStrategy::BgcsCim;

        int order() const { return static_cast<int>(codewords.cols()); }
    };

    namespace detail
    {
        inline bool is_power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

        inline void check_order(int order, int limit, const char *what)
        {
            if (!is_power_of_two(order))
                throw std::invalid_argument("codebook order must be a power of two");
            if (order > limit)
                throw std::invalid_argument(std::string("codebook order exceeds the number of ") + what);
        }

        // Unit-modulus phase profile of a steering vector (entries have
        // modulus 1/sqrt(N); dividing by the modulus keeps only phases).
        inline CVector phase_codeword(const CVector &steering)
        {
            CVector cw(steering.size());
            for (Eigen::Index n = 0; n < steering.size(); ++n)
                cw(n) = steering(n) / std::abs(steering(n));
            return cw;
        }
    }

    // Effective gain of steering the RIS through path (cluster, path):
    //   sqrt(P) * Gt*Gr / sqrt(N) * a_rx^H * R * diag(a_ris) * G * f_t,
    // linear in sqrt(P). gain_product is the Tx*Rx antenna gain as an
    // amplitude factor.
    inline cxd effective_path_gain(const ChannelRealization &r,
                                   const CVector &f_t,
                                   int cluster,
                                   int path,
                                   double power_w,
                                   double gain_product)
    {
        if (cluster < 0 || cluster >= r.n_clusters() || path < 0 || path >= r.n_paths())
            throw std::out_of_range("effective_path_gain: path index out of range");
        const int col = r.path_column(cluster, path);
        const CVector g = r.G * f_t;
        const CVector reflected = r.a_ris_departure.col(col).cwiseProduct(g);
        const cxd through = r.a_rx_arrival.col(col).dot(r.R * reflected);
        return std::sqrt(power_w) * gain_product / std::sqrt(static_cast<double>(r.ris_geom.size())) * through;
    }

    // All effective path gains at once, as a C x L matrix (batched form of
    // effective_path_gain, identical values).
    inline CMatrix all_effective_path_gains(const ChannelRealization &r,
                                            const CVector &f_t,
                                            double power_w,
                                            double gain_product)
    {
        const int n_total = r.n_clusters() * r.n_paths();
        const CVector g = r.G * f_t;
        CMatrix reflected = r.a_ris_departure;
        for (int p = 0; p < n_total; ++p)
            reflected.col(p) = reflected.col(p).cwiseProduct(g);
        const CMatrix through = r.R * reflected; // Nr x (C*L)
        const double scale = std::sqrt(power_w) * gain_product / std::sqrt(static_cast<double>(r.ris_geom.size()));

        CMatrix gains(r.n_clusters(), r.n_paths());
        for (int c = 0; c < r.n_clusters(); ++c)
            for (int l = 0; l < r.n_paths(); ++l)
            {
                const int col = r.path_column(c, l);
                gains(c, l) = scale * (r.a_rx_arrival.col(col).dot(through.col(col)));
            }
        return gains;
    }

    namespace detail
    {
        // argmax of |metric| per cluster row, ties to the lowest path index
        inline std::vector<int> best_path_per_cluster_of(const CMatrix &metric)
        {
            std::vector<int> best(metric.rows());
            for (Eigen::Index c = 0; c < metric.rows(); ++c)
            {
                int arg = 0;
                double top = std::norm(metric(c, 0));
                for (Eigen::Index l = 1; l < metric.cols(); ++l)
                {
                    const double v = std::norm(metric(c, l));
                    if (v > top)
                    {
                        top = v;
                        arg = static_cast<int>(l);
                    }
                }
                best[c] = arg;
            }
            return best;
        }

        // Greedy selection with removal: repeatedly take the remaining
        // cluster whose representative metric is largest, ties to the lowest
        // cluster index.
        inline std::vector<int> greedy_clusters(const CMatrix &metric, const std::vector<int> &best, int order)
        {
            std::vector<bool> taken(metric.rows(), false);
            std::vector<int> picked;
            picked.reserve(order);
            for (int k = 0; k < order; ++k)
            {
                int arg = -1;
                double top = -1.0;
                for (Eigen::Index c = 0; c < metric.rows(); ++c)
                {
                    if (taken[c])
                        continue;
                    const double v = std::norm(metric(c, best[c]));
                    if (v > top)
                    {
                        top = v;
                        arg = static_cast<int>(c);
                    }
                }
                taken[arg] = true;
                picked.push_back(arg);
            }
            return picked;
        }

        inline CimCodebook from_selection(const ChannelRealization &r,
                                          std::vector<std::pair<int, int>> selected,
                                          CodebookStrategy strategy)
        {
            CimCodebook cb;
            cb.strategy = strategy;
            cb.selected = std::move(selected);
            const int order = static_cast<int>(cb.selected.size());
            cb.codewords.resize(r.ris_geom.size(), order);
            cb.combiner.resize(r.rx_geom.size(), order);
            for (int k = 0; k < order; ++k)
            {
                const auto [c, l] = cb.selected[k];
                const int col = r.path_column(c, l);
                cb.codewords.col(k) = phase_codeword(r.a_ris_departure.col(col));
                cb.combiner.col(k) = r.a_rx_arrival.col(col);
            }
            return cb;
        }
    }

    // Representative path of each cluster: the path maximizing the effective
    // gain magnitude, ties broken by the lowest path index.
    inline std::vector<int> best_path_per_cluster(const ChannelRealization &r,
                                                  const CVector &f_t,
                                                  double power_w,
                                                  double gain_product)
    {
        return detail::best_path_per_cluster_of(all_effective_path_gains(r, f_t, power_w, gain_product));
    }

    // Greedy best-gain cluster selection: every cluster is represented by its
    // best effective path; the `order` clusters with the largest
    // representative gains are selected one at a time (with removal), so the
    // codeword order is descending in gain.
    inline CimCodebook build_bgcs_codebook(const ChannelRealization &r,
                                           const CVector &f_t,
                                           int order,
                                           double power_w,
                                           double gain_product)
    {
        detail::check_order(order, r.n_clusters(), "clusters");
        const CMatrix gains = all_effective_path_gains(r, f_t, power_w, gain_product);
        const std::vector<int> best = detail::best_path_per_cluster_of(gains);
        const std::vector<int> picked = detail::greedy_clusters(gains, best, order);

        std::vector<std::pair<int, int>> selected;
        selected.reserve(order);
        for (int c : picked)
            selected.push_back({c, best[c]});
        return detail::from_selection(r, std::move(selected), CodebookStrategy::BgcsCim);
    }

    // Benchmark constructions. All cluster-indexing strategies mirror the
    // combiner rule of the main scheme (matched receive steering vector of
    // the selected path).
    //   simple-cim: clusters ranked by the path gains of R alone (|beta|),
    //               the cascade through G plays no role in the selection.
    //   ssm:        the `order` strongest individual paths by effective gain,
    //               regardless of cluster membership (clusters may repeat).
    //   rcs:        one cluster uniformly at random, represented by its best
    //               effective path; carries no index bits, so the result has
    //               order 1 whatever order was requested.
    inline CimCodebook build_benchmark_codebook(CodebookStrategy strategy,
                                                const ChannelRealization &r,
                                                const CVector &f_t,
                                                int order,
                                                double power_w,
                                                double gain_product,
                                                Rng *rng = nullptr)
    {
        switch (strategy)
        {
        case CodebookStrategy::SimpleCim:
        {
            detail::check_order(order, r.n_clusters(), "clusters");
            const std::vector<int> best = detail::best_path_per_cluster_of(r.beta);
            const std::vector<int> picked = detail::greedy_clusters(r.beta, best, order);
            std::vector<std::pair<int, int>> selected;
            selected.reserve(order);
            for (int c : picked)
                selected.push_back({c, best[c]});
            return detail::from_selection(r, std::move(selected), CodebookStrategy::SimpleCim);
        }
        case CodebookStrategy::Ssm:
        {
            detail::check_order(order, r.n_clusters() * r.n_paths(), "paths");
            const CMatrix gains = all_effective_path_gains(r, f_t, power_w, gain_product);
            std::vector<std::pair<int, int>> all;
            all.reserve(gains.size());
            for (int c = 0; c < gains.rows(); ++c)
                for (int l = 0; l < gains.cols(); ++l)
                    all.push_back({c, l});
            std::stable_sort(all.begin(), all.end(),
                             [&gains](const auto &a, const auto &b)
                             { return std::norm(gains(a.first, a.second)) > std::norm(gains(b.first, b.second)); });
            all.resize(order);
            return detail::from_selection(r, std::move(all), CodebookStrategy::Ssm);
        }
        case CodebookStrategy::Rcs:
        {
            if (rng == nullptr)
                throw std::invalid_argument("rcs codebook needs an rng");
            (void)order; // no index bits; the codebook is always a single entry
            const int c = static_cast<int>(rng->uniform_index(r.n_clusters()));
            const std::vector<int> best = best_path_per_cluster(r, f_t, power_w, gain_product);
            return detail::from_selection(r, {{c, best[c]}}, CodebookStrategy::Rcs);
        }
        case CodebookStrategy::BgcsCim:
            return build_bgcs_codebook(r, f_t, order, power_w, gain_product);
        }
        throw std::invalid_argument("unsupported codebook strategy");
    }

    inline CimCodebook build_codebook(CodebookStrategy strategy,
                                      const ChannelRealization &r,
                                      const CVector &f_t,
                                      int order,
                                      double power_w,
                                      double gain_product,
                                      Rng *rng = nullptr)
    {
        return build_benchmark_codebook(strategy, r, f_t, order, power_w, gain_product, rng);
    }

    // Flat dump of the control-link payload: per-element codeword phases in
    // radians plus the indexed (cluster, path) pairs.
    //   codeword,k,n,phase_rad
    //   selected,k,cluster,path
    inline void dump_codebook_csv(const CimCodebook &cb, std::ostream &os)
    {
        os << "strategy," << strategy_name(cb.strategy) << '\n';
        for (int k = 0; k < cb.order(); ++k)
            for (Eigen::Index n = 0; n < cb.codewords.rows(); ++n)
                os << "codeword," << k << ',' << n << ','
                   << detail::fmt_full(std::arg(cb.codewords(n, k))) << '\n';
        for (int k = 0; k < cb.order(); ++k)
            os << "selected," << k << ',' << cb.selected[k].first << ',' << cb.selected[k].second << '\n';
    }

    inline void dump_codebook_csv(const CimCodebook &cb, const std::string &path)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("dump_codebook_csv: cannot open " + path);
        dump_codebook_csv(cb, os);
    }
}

#endif
