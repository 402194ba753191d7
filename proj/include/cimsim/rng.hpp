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

#ifndef CIMSIM_RNG_HPP
#define CIMSIM_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "common.hpp"

namespace cimsim
{
    // splitmix64 finalizer, used to derive independent stream seeds
    inline std::uint64_t mix64(std::uint64_t z)
    {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Deterministic random stream. All distributions are generated from raw
    // mt19937_64 output with fixed algorithms (no std::*_distribution), so a
    // given (master seed, stream id) pair produces the same sequence on every
    // platform and for any worker layout.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : eng_(seed) {}

        // Independent sub-stream addressed by up to three indices. Results of
        // a simulation must depend only on the master seed and the stream ids,
        // never on scheduling.
        static Rng stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
        {
            std::uint64_t s = mix64(master ^ 0xA076BE5F9D3C2E1Bull);
            s = mix64(s + a);
            s = mix64(s + b);
            s = mix64(s + c);
            return Rng(s);
        }

        std::uint64_t next_u64() { return eng_(); }

        // Uniform in [0, 1), 53-bit resolution
        double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        int bit() { return static_cast<int>(eng_() >> 63); }

        // Uniform integer in [0, n)
        std::uint64_t uniform_index(std::uint64_t n) { return eng_() % n; }

        // Standard normal via Box-Muller, second value cached
        double normal()
        {
            if (has_spare_)
            {
                has_spare_ = false;
                return spare_;
            }
            double u1 = uniform();
            while (u1 <= 0.0)
                u1 = uniform();
            const double u2 = uniform();
            const double r = std::sqrt(-2.0 * std::log(u1));
            spare_ = r * std::sin(two_pi * u2);
            has_spare_ = true;
            return r * std::cos(two_pi * u2);
        }

        // Circularly-symmetric complex Gaussian with E|x|^2 = variance
        // (real and imaginary parts i.i.d. N(0, variance/2))
        std::complex<double> cnormal(double variance)
        {
            const double s = std::sqrt(0.5 * variance);
            const double re = s * normal();
            const double im = s * normal();
            return {re, im};
        }

        // Zero-mean Laplacian with the given scale parameter b
        // (standard deviation = b * sqrt(2))
        double laplacian(double scale)
        {
            const double u = uniform() - 0.5;
            const double sign = (u < 0.0) ? -1.0 : 1.0;
            return -scale * sign * std::log1p(-2.0 * std::abs(u));
        }

    private:
        std::mt19937_64 eng_;
        double spare_ = 0.0;
        bool has_spare_ = false;
    };
}

#endif
