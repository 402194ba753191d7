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
// Derived physical scenario: turns a flat SimConfig into array geometries,
// link distances, LOS directions, noise power and antenna-gain factors, and
// provides the per-trial draw/build steps shared by the simulator and the
// analytical bound.

#ifndef CIMSIM_SCENARIO_HPP
#define CIMSIM_SCENARIO_HPP

#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "channel.hpp"
#include "codebook.hpp"
#include "config.hpp"
#include "signal_chain.hpp"
#include "theory.hpp"

namespace cimsim
{
    // Spherical angles of a direction vector in the global frame: azimuth is
    // measured in the x-y plane from +x, elevation is the polar angle from
    // +z (the mounting normal of globally aligned arrays).
    inline Angle2D direction_angles(const std::array<double, 3> &from, const std::array<double, 3> &to)
    {
        const double dx = to[0] - from[0];
        const double dy = to[1] - from[1];
        const double dz = to[2] - from[2];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (!(d > 0.0))
            throw std::invalid_argument("direction_angles: coincident points");
        return Angle2D(std::atan2(dy, dx), std::acos(dz / d));
    }

    inline double distance(const std::array<double, 3> &a, const std::array<double, 3> &b)
    {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }

    struct Scenario
    {
        ArrayGeometry tx_geom, rx_geom, ris_geom;
        double d_tx_ris = 0.0;
        double d_ris_rx = 0.0;
        PathLossParams los_params, nlos_params;
        std::optional<std::pair<Angle2D, Angle2D>> los_angles; // empty: sampled per realization
        int n_clusters = 1;
        int n_paths = 1;
        double spread_deg = 7.5;
        double gain_product = 1.0; // Gt*Gr as an amplitude factor
        double noise_var_w = 0.0;  // sigma^2 in watts
        int mod_order = 2;
        int codebook_order = 1;
        CodebookStrategy strategy = CodebookStrategy::BgcsCim;

        int spectral_efficiency() const // bits per channel use
        {
            return log2_exact(mod_order) + log2_exact(effective_codebook_order());
        }

        // RCS carries no index bits regardless of the configured order.
        int effective_codebook_order() const
        {
            return strategy == CodebookStrategy::Rcs ? 1 : codebook_order;
        }
    };

    inline Scenario make_scenario(const SimConfig &cfg)
    {
        cfg.validate();
        Scenario s;
        const double wavelength = speed_of_light / cfg.carrier_freq_hz;
        const double dx = cfg.spacing_wavelengths * wavelength;

        auto geom = [&](int nx, int ny)
        {
            ArrayGeometry g;
            g.nx = nx;
            g.ny = ny;
            g.dx = dx;
            g.dy = dx;
            g.wavelength = wavelength;
            g.validate();
            return g;
        };
        s.tx_geom = geom(cfg.nt_x, cfg.nt_y);
        s.rx_geom = geom(cfg.nr_x, cfg.nr_y);
        s.ris_geom = geom(cfg.ris_x, cfg.ris_y);

        s.d_tx_ris = distance(cfg.tx_pos, cfg.ris_pos);
        s.d_ris_rx = distance(cfg.ris_pos, cfg.rx_pos);
        s.los_params = {cfg.pl_los_a, cfg.pl_los_b, cfg.pl_los_sigma};
        s.nlos_params = {cfg.pl_nlos_a, cfg.pl_nlos_b, cfg.pl_nlos_sigma};

        switch (cfg.los_mode)
        {
        case LosMode::Facing:
            // Broadside of the Tx array and of the RIS face the connecting
            // line, so both local LOS directions are broadside.
            s.los_angles = std::make_pair(Angle2D(0.0, 0.0), Angle2D(0.0, 0.0));
            break;
        case LosMode::Global:
            s.los_angles = std::make_pair(direction_angles(cfg.tx_pos, cfg.ris_pos),
                                          direction_angles(cfg.ris_pos, cfg.tx_pos));
            break;
        case LosMode::Random:
            s.los_angles = std::nullopt;
            break;
        }

        s.n_clusters = cfg.clusters;
        s.n_paths = cfg.paths_per_cluster;
        s.spread_deg = cfg.spread_deg;
        s.gain_product = db2amp(cfg.gt_dbi) * db2amp(cfg.gr_dbi);
        s.noise_var_w = dbm2watt(noise_power_dbm(cfg.psd_dbm_per_hz, cfg.bandwidth_hz));
        s.mod_order = cfg.mod_order;
        s.codebook_order = cfg.codebook_order;
        s.strategy = parse_strategy(cfg.strategy);
        if (s.strategy != CodebookStrategy::Rcs && s.codebook_order > s.n_clusters)
            throw ConfigError("codebook_order must not exceed the cluster count");
        return s;
    }

    inline ChannelRealization draw_realization(const Scenario &s, Rng &rng)
    {
        return make_realization(s.tx_geom, s.ris_geom, s.rx_geom,
                                s.d_tx_ris, s.d_ris_rx,
                                s.los_params, s.nlos_params,
                                s.n_clusters, s.n_paths, s.spread_deg,
                                s.los_angles, rng);
    }

    // The Tx beamforms onto the dominant (LOS) departure direction.
    inline CVector tx_beamformer(const ChannelRealization &r)
    {
        return steering_vector(r.tx_geom, r.los_departure_tx);
    }

    // Everything the transceiver derives from one channel realization.
    struct LinkBuild
    {
        CimCodebook codebook;
        WhiteningFilter filter;
        CVector f_t;
        CMatrix branch_gains; // order x order, excludes sqrt(P)
    };

    // Builds codebook, whitening filter and branch gains for a realization.
    // Selection uses unit transmit power; the selected set is invariant to
    // positive power scaling. May throw SingularMatrixError when the
    // combiner columns are (numerically) colinear.
    inline LinkBuild build_link(const Scenario &s, const ChannelRealization &r, Rng *rcs_rng = nullptr)
    {
        LinkBuild link;
        link.f_t = tx_beamformer(r);
        link.codebook = build_codebook(s.strategy, r, link.f_t, s.effective_codebook_order(),
                                       1.0, s.gain_product, rcs_rng);
        link.filter = build_whitening(link.codebook.combiner, s.noise_var_w);
        link.branch_gains = branch_gain_matrix(r, link.codebook, link.filter, link.f_t, s.gain_product);
        return link;
    }

    // Per-power union bound, averaged over n_realizations channel draws per
    // power point. Realization r at power point p uses the deterministic
    // streams (seed, kind, p, r); the averaging order is fixed.
    inline std::vector<double> aber_upper_bound(const Scenario &s,
                                                const std::vector<double> &powers_dbm,
                                                int n_realizations,
                                                std::uint64_t seed)
    {
        if (n_realizations < 1)
            throw std::invalid_argument("aber_upper_bound: need at least one realization");

        std::vector<double> bound(powers_dbm.size(), 0.0);
        for (size_t p = 0; p < powers_dbm.size(); ++p)
        {
            const double power_w = dbm2watt(powers_dbm[p]);
            double acc = 0.0;
            int used = 0;
            for (int r_idx = 0; r_idx < n_realizations; ++r_idx)
            {
                Rng chan = Rng::stream(seed, 0xB0, p, static_cast<std::uint64_t>(r_idx));
                Rng rcs = Rng::stream(seed, 0xB5, p, static_cast<std::uint64_t>(r_idx));
                for (;;)
                {
                    try
                    {
                        const ChannelRealization real = draw_realization(s, chan);
                        const LinkBuild link = build_link(s, real, &rcs);
                        acc += union_bound_aber_single(link.branch_gains, link.filter.branch_noise_var,
                                                       power_w, s.mod_order);
                        ++used;
                        break;
                    }
                    catch (const SingularMatrixError &)
                    {
                        // colinear combiner draw; redraw from the same stream
                    }
                }
            }
            bound[p] = std::min(1.0, acc / used);
        }
        return bound;
    }
}

#endif
