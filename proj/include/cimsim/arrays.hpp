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

#ifndef CIMSIM_ARRAYS_HPP
#define CIMSIM_ARRAYS_HPP

#include <cmath>
#include <stdexcept>

#include "common.hpp"

namespace cimsim
{
    // Direction of departure or arrival. Azimuth is stored wrapped to
    // [0, 2*pi), elevation to [0, pi). Elevation is the polar angle measured
    // from the array broadside normal, so elevation 0 means broadside.
    struct Angle2D
    {
        double azimuth = 0.0;   // rad, in [0, 2*pi)
        double elevation = 0.0; // rad, in [0, pi)

        Angle2D() = default;
        Angle2D(double az, double el)
            : azimuth(wrap_angle(az, two_pi)), elevation(wrap_angle(el, pi)) {}
    };

    // Uniform planar array in the local x-y plane. Elements are indexed
    // row-major over (nx, ny) with the x index running fastest; element
    // (ix, iy) sits at (ix*dx, iy*dy).
    struct ArrayGeometry
    {
        int nx = 1;              // elements along x
        int ny = 1;              // elements along y
        double dx = 0.0;         // element spacing along x [m]
        double dy = 0.0;         // element spacing along y [m]
        double wavelength = 0.0; // carrier wavelength [m]

        int size() const { return nx * ny; }

        void validate() const
        {
            if (nx < 1 || ny < 1)
                throw std::invalid_argument("ArrayGeometry: element counts must be >= 1");
            if (dx <= 0.0 || dy <= 0.0)
                throw std::invalid_argument("ArrayGeometry: element spacing must be positive");
            if (wavelength <= 0.0)
                throw std::invalid_argument("ArrayGeometry: wavelength must be positive");
        }

        static ArrayGeometry half_wavelength(int nx, int ny, double wavelength)
        {
            ArrayGeometry g;
            g.nx = nx;
            g.ny = ny;
            g.dx = 0.5 * wavelength;
            g.dy = 0.5 * wavelength;
            g.wavelength = wavelength;
            g.validate();
            return g;
        }
    };

    // Normalized array response a(az, el) with entries
    //   exp(j * k(az, el)^T p_n) / sqrt(Na),
    // where k = (2*pi/lambda) * [sin(el)cos(az), sin(el)sin(az)] and p_n are
    // the element positions. The first entry is exactly 1/sqrt(Na) and the
    // Euclidean norm is 1. Phase factors are accumulated multiplicatively,
    // which keeps the per-entry modulus within ~1e-14 of 1/sqrt(Na).
    inline CVector steering_vector(const ArrayGeometry &geom, const Angle2D &angle)
    {
        geom.validate();
        const int na = geom.size();
        const double k = two_pi / geom.wavelength;
        const double sin_el = std::sin(angle.elevation);
        const double phase_x = k * sin_el * std::cos(angle.azimuth) * geom.dx;
        const double phase_y = k * sin_el * std::sin(angle.azimuth) * geom.dy;

        const cxd step_x(std::cos(phase_x), std::sin(phase_x));
        const cxd step_y(std::cos(phase_y), std::sin(phase_y));
        const double scale = 1.0 / std::sqrt(static_cast<double>(na));

        CVector a(na);
        cxd row_phase(1.0, 0.0);
        int idx = 0;
        for (int iy = 0; iy < geom.ny; ++iy)
        {
            cxd p = row_phase;
            for (int ix = 0; ix < geom.nx; ++ix)
            {
                a(idx++) = scale * p;
                p *= step_x;
            }
            row_phase *= step_y;
        }
        return a;
    }
}

#endif
