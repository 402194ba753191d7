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

#ifndef CIMSIM_COMMON_HPP
#define CIMSIM_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace cimsim
{
    using cxd = std::complex<double>;
    using CVector = Eigen::VectorXcd;
    using CMatrix = Eigen::MatrixXcd;

    constexpr double pi = 3.141592653589793238462643;
    constexpr double two_pi = 2.0 * pi;
    constexpr double speed_of_light = 2.998e8; // m/s

    inline double deg2rad(double deg) { return deg * pi / 180.0; }
    inline double rad2deg(double rad) { return rad * 180.0 / pi; }

    inline double db2pow(double db) { return std::pow(10.0, 0.1 * db); }
    inline double pow2db(double p) { return 10.0 * std::log10(p); }
    inline double db2amp(double db) { return std::pow(10.0, db / 20.0); }
    inline double dbm2watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    inline double watt2dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

    // Noise power in dBm from a flat PSD in dBm/Hz and a bandwidth in Hz.
    inline double noise_power_dbm(double psd_dbm_per_hz, double bandwidth_hz)
    {
        return psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
    }

    // Wraps x into [0, period).
    inline double wrap_angle(double x, double period)
    {
        double y = x - period * std::floor(x / period);
        if (y >= period) // floor rounding at the boundary
            y -= period;
        return y;
    }

    // Thrown when a matrix that must be inverted is numerically rank-deficient.
    class SingularMatrixError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}

#endif
