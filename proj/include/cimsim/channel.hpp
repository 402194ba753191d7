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
// Clustered cascaded channel sampling. The Tx-to-RIS link G is a single
// line-of-sight rank-1 channel; the RIS-to-Rx link R is a clustered
// multipath channel (sum over clusters and intra-cluster paths of complex
// gains times receive/transmit array-response outer products). Path gains
// follow the outdoor 28 GHz path-loss model with log-normal shadowing.

#ifndef CIMSIM_CHANNEL_HPP
#define CIMSIM_CHANNEL_HPP

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arrays.hpp"
#include "common.hpp"
#include "rng.hpp"

namespace cimsim
{
    // PL(d) [dB] = a + 10*b*log10(d) + xi, xi ~ N(0, sigma_xi^2)
    struct PathLossParams
    {
        double intercept_db = 0.0;   // a
        double exponent = 2.0;       // b
        double shadow_sigma_db = 0.0; // sigma_xi

        void validate() const
        {
            if (exponent <= 0.0)
                throw std::invalid_argument("PathLossParams: exponent must be positive");
            if (shadow_sigma_db < 0.0)
                throw std::invalid_argument("PathLossParams: shadow sigma must be >= 0");
        }

        // 28 GHz urban measurement fits
        static PathLossParams los_28ghz() { return {61.4, 2.0, 5.8}; }
        static PathLossParams nlos_28ghz() { return {72.0, 2.92, 8.7}; }
    };

    inline double path_loss_db(double distance_m, const PathLossParams &params, double shadow_db)
    {
        params.validate();
        if (distance_m <= 0.0)
            throw std::invalid_argument("path_loss_db: distance must be positive");
        return params.intercept_db + 10.0 * params.exponent * std::log10(distance_m) + shadow_db;
    }

    struct PathAngles
    {
        Angle2D departure; // at the RIS, toward the cluster
        Angle2D arrival;   // at the Rx
    };

    struct Cluster
    {
        Angle2D departure_mean;
        Angle2D arrival_mean;
        std::vector<PathAngles> paths;
    };

    // Angular layout of the RIS-to-Rx channel: one mean direction pair per
    // cluster plus per-path offsets around it.
    struct ClusterGeometry
    {
        std::vector<Cluster> clusters;

        int n_clusters() const { return static_cast<int>(clusters.size()); }
        int n_paths() const { return clusters.empty() ? 0 : static_cast<int>(clusters.front().paths.size()); }
        const PathAngles &path(int c, int l) const { return clusters.at(c).paths.at(l); }
    };

    // Cluster means: azimuth ~ U[0, 2*pi), elevation ~ U[0, pi). Per-path
    // offsets are i.i.d. Laplacian in all four angle coordinates with the
    // given angular spread (standard deviation, degrees); the Laplacian scale
    // is spread/sqrt(2). Offsets are added to the mean and wrapped.
    inline ClusterGeometry sample_cluster_geometry(Rng &rng, int n_clusters, int n_paths, double spread_deg)
    {
        if (n_clusters < 1 || n_paths < 1)
            throw std::invalid_argument("sample_cluster_geometry: counts must be >= 1");
        if (spread_deg <= 0.0)
            throw std::invalid_argument("sample_cluster_geometry: spread must be positive");

        const double scale = deg2rad(spread_deg) / std::sqrt(2.0);
        ClusterGeometry geom;
        geom.clusters.resize(n_clusters);
        for (auto &cluster : geom.clusters)
        {
            cluster.departure_mean = Angle2D(rng.uniform(0.0, two_pi), rng.uniform(0.0, pi));
            cluster.arrival_mean = Angle2D(rng.uniform(0.0, two_pi), rng.uniform(0.0, pi));
            cluster.paths.resize(n_paths);
            for (auto &p : cluster.paths)
            {
                p.departure = Angle2D(cluster.departure_mean.azimuth + rng.laplacian(scale),
                                      cluster.departure_mean.elevation + rng.laplacian(scale));
                p.arrival = Angle2D(cluster.arrival_mean.azimuth + rng.laplacian(scale),
                                    cluster.arrival_mean.elevation + rng.laplacian(scale));
            }
        }
        return geom;
    }

    // One draw of the cascaded channel. G and R are stored together with all
    // angles and gains they were assembled from, so they can be reconstructed
    // bit-for-bit for regression checks. The a_* members are steering-vector
    // caches (one column per path, cluster-major), derived data only.
    struct ChannelRealization
    {
        ArrayGeometry tx_geom, ris_geom, rx_geom;

        CMatrix G;    // N x Nt, rank 1
        CMatrix R;    // Nr x N
        cxd alpha0;   // LOS complex gain of G
        CMatrix beta; // C x L complex path gains of R

        Angle2D los_departure_tx; // departure at the Tx toward the RIS
        Angle2D los_arrival_ris;  // arrival at the RIS from the Tx
        ClusterGeometry clusters;

        double scale_G = 1.0; // sqrt(N * Nt), aperture factor of G
        double scale_R = 1.0; // sqrt(N * Nr / (C * L))

        CMatrix a_ris_departure; // N  x (C*L), RIS response toward each path
        CMatrix a_rx_arrival;    // Nr x (C*L), Rx response of each path

        int n_clusters() const { return clusters.n_clusters(); }
        int n_paths() const { return clusters.n_paths(); }
        int path_column(int c, int l) const { return c * n_paths() + l; }
    };

    inline CMatrix reconstruct_G(const ChannelRealization &r)
    {
        const CVector a_ris = steering_vector(r.ris_geom, r.los_arrival_ris);
        const CVector a_tx = steering_vector(r.tx_geom, r.los_departure_tx);
        return (r.scale_G * r.alpha0) * (a_ris * a_tx.adjoint());
    }

    inline CMatrix reconstruct_R(const ChannelRealization &r)
    {
        const int nr = r.rx_geom.size();
        const int n = r.ris_geom.size();
        CMatrix out = CMatrix::Zero(nr, n);
        for (int c = 0; c < r.n_clusters(); ++c)
            for (int l = 0; l < r.n_paths(); ++l)
            {
                const PathAngles &p = r.clusters.path(c, l);
                const CVector a_rx = steering_vector(r.rx_geom, p.arrival);
                const CVector a_ris = steering_vector(r.ris_geom, p.departure);
                out.noalias() += r.beta(c, l) * (a_rx * a_ris.adjoint());
            }
        return r.scale_R * out;
    }

    namespace detail
    {
        inline void fill_path_caches(ChannelRealization &r)
        {
            const int n_paths_total = r.n_clusters() * r.n_paths();
            r.a_ris_departure.resize(r.ris_geom.size(), n_paths_total);
            r.a_rx_arrival.resize(r.rx_geom.size(), n_paths_total);
            for (int c = 0; c < r.n_clusters(); ++c)
                for (int l = 0; l < r.n_paths(); ++l)
                {
                    const int col = r.path_column(c, l);
                    const PathAngles &p = r.clusters.path(c, l);
                    r.a_ris_departure.col(col) = steering_vector(r.ris_geom, p.departure);
                    r.a_rx_arrival.col(col) = steering_vector(r.rx_geom, p.arrival);
                }
        }

        // R = scale_R * A_rx * diag(beta) * A_ris^H assembled as two GEMMs
        inline void assemble_R(ChannelRealization &r)
        {
            const int n_paths_total = r.n_clusters() * r.n_paths();
            CMatrix scaled = r.a_rx_arrival;
            for (int c = 0; c < r.n_clusters(); ++c)
                for (int l = 0; l < r.n_paths(); ++l)
                    scaled.col(r.path_column(c, l)) *= r.beta(c, l);
            (void)n_paths_total;
            r.R.noalias() = r.scale_R * (scaled * r.a_ris_departure.adjoint());
        }

        inline void assemble_G(ChannelRealization &r)
        {
            const CVector a_ris = steering_vector(r.ris_geom, r.los_arrival_ris);
            const CVector a_tx = steering_vector(r.tx_geom, r.los_departure_tx);
            r.G.noalias() = (r.scale_G * r.alpha0) * (a_ris * a_tx.adjoint());
        }
    }

    // Builds a realization from explicitly given angles and gains (used by
    // fixtures, deserialization and reconstruction checks).
    inline ChannelRealization assemble_realization(const ArrayGeometry &tx_geom,
                                                   const ArrayGeometry &ris_geom,
                                                   const ArrayGeometry &rx_geom,
                                                   cxd alpha0,
                                                   const Angle2D &los_departure_tx,
                                                   const Angle2D &los_arrival_ris,
                                                   const CMatrix &beta,
                                                   ClusterGeometry clusters)
    {
        if (beta.rows() != clusters.n_clusters() || beta.cols() != clusters.n_paths())
            throw std::invalid_argument("assemble_realization: beta shape does not match cluster geometry");
        ChannelRealization r;
        r.tx_geom = tx_geom;
        r.ris_geom = ris_geom;
        r.rx_geom = rx_geom;
        r.alpha0 = alpha0;
        r.los_departure_tx = los_departure_tx;
        r.los_arrival_ris = los_arrival_ris;
        r.beta = beta;
        r.clusters = std::move(clusters);
        const double n = ris_geom.size();
        r.scale_G = std::sqrt(n * tx_geom.size());
        r.scale_R = std::sqrt(n * rx_geom.size() / (r.n_clusters() * static_cast<double>(r.n_paths())));
        detail::fill_path_caches(r);
        detail::assemble_G(r);
        detail::assemble_R(r);
        return r;
    }

    struct LosDraw
    {
        CMatrix G;
        cxd alpha0;
        Angle2D departure_tx;
        Angle2D arrival_ris;
        double scale_G;
    };

    // LOS channel G = scale_G * alpha0 * a_ris(arrival) * a_tx(departure)^H
    // with alpha0 ~ CN(0, 10^(-0.1*PL(d))) and a fresh shadow sample per
    // draw. scale_G = sqrt(N*Nt) makes the per-element-pair gain magnitude
    // |alpha0|, mirroring the explicit sqrt(N*Nr/(C*L)) prefactor of R.
    // When los_angles is empty, departure and arrival are sampled uniformly.
    inline LosDraw generate_G(const ArrayGeometry &tx_geom,
                              const ArrayGeometry &ris_geom,
                              double distance_m,
                              const PathLossParams &params,
                              Rng &rng,
                              std::optional<std::pair<Angle2D, Angle2D>> los_angles = std::nullopt)
    {
        tx_geom.validate();
        ris_geom.validate();
        LosDraw out;
        if (los_angles)
        {
            out.departure_tx = los_angles->first;
            out.arrival_ris = los_angles->second;
        }
        else
        {
            out.departure_tx = Angle2D(rng.uniform(0.0, two_pi), rng.uniform(0.0, pi));
            out.arrival_ris = Angle2D(rng.uniform(0.0, two_pi), rng.uniform(0.0, pi));
        }
        const double shadow = params.shadow_sigma_db * rng.normal();
        const double pl_db = path_loss_db(distance_m, params, shadow);
        out.alpha0 = rng.cnormal(db2pow(-pl_db));
        out.scale_G = std::sqrt(static_cast<double>(tx_geom.size()) * ris_geom.size());

        const CVector a_ris = steering_vector(ris_geom, out.arrival_ris);
        const CVector a_tx = steering_vector(tx_geom, out.departure_tx);
        out.G.noalias() = (out.scale_G * out.alpha0) * (a_ris * a_tx.adjoint());
        return out;
    }

    struct NlosDraw
    {
        CMatrix R;
        CMatrix beta;
        double scale_R;
    };

    // Clustered channel R = sqrt(N*Nr/(C*L)) * sum_{c,l} beta_{c,l} *
    // a_rx(arrival) * a_ris(departure)^H. Path gains are i.i.d.
    // CN(0, 10^(-0.1*PL(d))) sharing one shadow sample per realization
    // (shadowing is a link-scale effect).
    inline NlosDraw generate_R(const ArrayGeometry &ris_geom,
                               const ArrayGeometry &rx_geom,
                               double distance_m,
                               const PathLossParams &params,
                               const ClusterGeometry &clusters,
                               Rng &rng)
    {
        ris_geom.validate();
        rx_geom.validate();
        const int n_clusters = clusters.n_clusters();
        const int n_paths = clusters.n_paths();
        if (n_clusters < 1 || n_paths < 1)
            throw std::invalid_argument("generate_R: cluster geometry is empty");

        const double shadow = params.shadow_sigma_db * rng.normal();
        const double variance = db2pow(-path_loss_db(distance_m, params, shadow));

        NlosDraw out;
        out.beta.resize(n_clusters, n_paths);
        for (int c = 0; c < n_clusters; ++c)
            for (int l = 0; l < n_paths; ++l)
                out.beta(c, l) = rng.cnormal(variance);
        out.scale_R = std::sqrt(static_cast<double>(ris_geom.size()) * rx_geom.size() /
                                (static_cast<double>(n_clusters) * n_paths));

        // assemble via a throwaway realization to share the GEMM path
        ChannelRealization tmp;
        tmp.ris_geom = ris_geom;
        tmp.rx_geom = rx_geom;
        tmp.beta = out.beta;
        tmp.clusters = clusters;
        tmp.scale_R = out.scale_R;
        detail::fill_path_caches(tmp);
        detail::assemble_R(tmp);
        out.R = std::move(tmp.R);
        return out;
    }

    // Draws a full cascaded realization: cluster geometry, then G, then R.
    inline ChannelRealization make_realization(const ArrayGeometry &tx_geom,
                                               const ArrayGeometry &ris_geom,
                                               const ArrayGeometry &rx_geom,
                                               double d_tx_ris_m,
                                               double d_ris_rx_m,
                                               const PathLossParams &los_params,
                                               const PathLossParams &nlos_params,
                                               int n_clusters,
                                               int n_paths,
                                               double spread_deg,
                                               std::optional<std::pair<Angle2D, Angle2D>> los_angles,
                                               Rng &rng)
    {
        ChannelRealization r;
        r.tx_geom = tx_geom;
        r.ris_geom = ris_geom;
        r.rx_geom = rx_geom;
        r.clusters = sample_cluster_geometry(rng, n_clusters, n_paths, spread_deg);

        LosDraw los = generate_G(tx_geom, ris_geom, d_tx_ris_m, los_params, rng, los_angles);
        r.G = std::move(los.G);
        r.alpha0 = los.alpha0;
        r.los_departure_tx = los.departure_tx;
        r.los_arrival_ris = los.arrival_ris;
        r.scale_G = los.scale_G;

        NlosDraw nlos = generate_R(ris_geom, rx_geom, d_ris_rx_m, nlos_params, r.clusters, rng);
        r.R = std::move(nlos.R);
        r.beta = std::move(nlos.beta);
        r.scale_R = nlos.scale_R;

        detail::fill_path_caches(r);
        return r;
    }

    // Rigidly shifts every cluster (means and all member paths, departure and
    // arrival, azimuth and elevation) by delta degrees and reassembles R.
    // Gains and the LOS channel are unchanged; models stale angular CSI.
    inline ChannelRealization perturb_clusters(const ChannelRealization &base, double delta_deg)
    {
        ChannelRealization r = base;
        const double d = deg2rad(delta_deg);
        for (auto &cluster : r.clusters.clusters)
        {
            cluster.departure_mean = Angle2D(cluster.departure_mean.azimuth + d,
                                             cluster.departure_mean.elevation + d);
            cluster.arrival_mean = Angle2D(cluster.arrival_mean.azimuth + d,
                                           cluster.arrival_mean.elevation + d);
            for (auto &p : cluster.paths)
            {
                p.departure = Angle2D(p.departure.azimuth + d, p.departure.elevation + d);
                p.arrival = Angle2D(p.arrival.azimuth + d, p.arrival.elevation + d);
            }
        }
        detail::fill_path_caches(r);
        detail::assemble_R(r);
        return r;
    }

    // --- serialization -----------------------------------------------------
    //
    // Text dump with one record per line (angles in radians, gains as re/im
    // pairs, full decimal precision):
    //   geom,<tx|ris|rx>,nx,ny,dx,dy,wavelength
    //   los,dep_az,dep_el,arr_az,arr_el
    //   alpha0,re,im
    //   cluster,c,dep_az,dep_el,arr_az,arr_el
    //   path,c,l,dep_az,dep_el,arr_az,arr_el,beta_re,beta_im

    namespace detail
    {
        inline std::string fmt_full(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return buf;
        }
    }

    inline void dump_channel_csv(const ChannelRealization &r, std::ostream &os)
    {
        auto geom_line = [&os](const char *name, const ArrayGeometry &g)
        {
            os << "geom," << name << ',' << g.nx << ',' << g.ny << ','
               << detail::fmt_full(g.dx) << ',' << detail::fmt_full(g.dy) << ','
               << detail::fmt_full(g.wavelength) << '\n';
        };
        geom_line("tx", r.tx_geom);
        geom_line("ris", r.ris_geom);
        geom_line("rx", r.rx_geom);
        os << "los," << detail::fmt_full(r.los_departure_tx.azimuth) << ','
           << detail::fmt_full(r.los_departure_tx.elevation) << ','
           << detail::fmt_full(r.los_arrival_ris.azimuth) << ','
           << detail::fmt_full(r.los_arrival_ris.elevation) << '\n';
        os << "alpha0," << detail::fmt_full(r.alpha0.real()) << ','
           << detail::fmt_full(r.alpha0.imag()) << '\n';
        for (int c = 0; c < r.n_clusters(); ++c)
        {
            const Cluster &cl = r.clusters.clusters[c];
            os << "cluster," << c << ','
               << detail::fmt_full(cl.departure_mean.azimuth) << ','
               << detail::fmt_full(cl.departure_mean.elevation) << ','
               << detail::fmt_full(cl.arrival_mean.azimuth) << ','
               << detail::fmt_full(cl.arrival_mean.elevation) << '\n';
            for (int l = 0; l < r.n_paths(); ++l)
            {
                const PathAngles &p = cl.paths[l];
                os << "path," << c << ',' << l << ','
                   << detail::fmt_full(p.departure.azimuth) << ','
                   << detail::fmt_full(p.departure.elevation) << ','
                   << detail::fmt_full(p.arrival.azimuth) << ','
                   << detail::fmt_full(p.arrival.elevation) << ','
                   << detail::fmt_full(r.beta(c, l).real()) << ','
                   << detail::fmt_full(r.beta(c, l).imag()) << '\n';
            }
        }
    }

    inline void dump_channel_csv(const ChannelRealization &r, const std::string &path)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("dump_channel_csv: cannot open " + path);
        dump_channel_csv(r, os);
    }

    inline ChannelRealization load_channel_csv(std::istream &is)
    {
        ArrayGeometry tx, ris, rx;
        Angle2D los_dep, los_arr;
        cxd alpha0;
        std::vector<Cluster> clusters;
        std::vector<std::vector<std::pair<PathAngles, cxd>>> paths;

        std::string line;
        while (std::getline(is, line))
        {
            if (line.empty() || line[0] == '#')
                continue;
            std::stringstream ss(line);
            std::string tag;
            std::getline(ss, tag, ',');
            auto next = [&ss]() -> std::string
            {
                std::string tok;
                if (!std::getline(ss, tok, ','))
                    throw std::runtime_error("load_channel_csv: truncated record");
                return tok;
            };
            auto next_d = [&next]() { return std::stod(next()); };
            auto next_i = [&next]() { return std::stoi(next()); };
            // reads sequenced explicitly; argument evaluation order is
            // unspecified
            auto next_angle = [&next_d]()
            {
                const double az = next_d();
                const double el = next_d();
                return Angle2D(az, el);
            };

            if (tag == "geom")
            {
                const std::string which = next();
                ArrayGeometry g;
                g.nx = next_i();
                g.ny = next_i();
                g.dx = next_d();
                g.dy = next_d();
                g.wavelength = next_d();
                if (which == "tx")
                    tx = g;
                else if (which == "ris")
                    ris = g;
                else if (which == "rx")
                    rx = g;
                else
                    throw std::runtime_error("load_channel_csv: unknown geometry '" + which + "'");
            }
            else if (tag == "los")
            {
                los_dep = next_angle();
                los_arr = next_angle();
            }
            else if (tag == "alpha0")
            {
                const double re = next_d();
                const double im = next_d();
                alpha0 = {re, im};
            }
            else if (tag == "cluster")
            {
                const int c = next_i();
                if (c != static_cast<int>(clusters.size()))
                    throw std::runtime_error("load_channel_csv: clusters out of order");
                Cluster cl;
                cl.departure_mean = next_angle();
                cl.arrival_mean = next_angle();
                clusters.push_back(cl);
                paths.emplace_back();
            }
            else if (tag == "path")
            {
                const int c = next_i();
                (void)next_i(); // path index, implicit by order
                if (c < 0 || c >= static_cast<int>(paths.size()))
                    throw std::runtime_error("load_channel_csv: path before its cluster");
                PathAngles p;
                p.departure = next_angle();
                p.arrival = next_angle();
                const double re = next_d();
                const double im = next_d();
                paths[c].push_back({p, cxd(re, im)});
            }
            else
                throw std::runtime_error("load_channel_csv: unknown record '" + tag + "'");
        }

        if (clusters.empty() || paths.front().empty())
            throw std::runtime_error("load_channel_csv: no path records");
        const int n_paths = static_cast<int>(paths.front().size());
        ClusterGeometry geom;
        CMatrix beta(static_cast<int>(clusters.size()), n_paths);
        for (size_t c = 0; c < clusters.size(); ++c)
        {
            if (static_cast<int>(paths[c].size()) != n_paths)
                throw std::runtime_error("load_channel_csv: ragged path counts");
            Cluster cl = clusters[c];
            for (int l = 0; l < n_paths; ++l)
            {
                cl.paths.push_back(paths[c][l].first);
                beta(static_cast<int>(c), l) = paths[c][l].second;
            }
            geom.clusters.push_back(std::move(cl));
        }
        return assemble_realization(tx, ris, rx, alpha0, los_dep, los_arr, beta, std::move(geom));
    }

    inline ChannelRealization load_channel_csv(const std::string &path)
    {
        std::ifstream is(path);
        if (!is)
            throw std::runtime_error("load_channel_csv: cannot open " + path);
        return load_channel_csv(is);
    }
}

#endif
