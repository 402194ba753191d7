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
// End-to-end transmit/receive path: index + M-PSK modulation, passive RIS
// reflection, receive combining, correlation-based zero-phase (ZCA-cor)
// noise whitening, and joint maximum-likelihood detection over all
// (codeword, symbol) hypotheses.

#ifndef CIMSIM_SIGNAL_CHAIN_HPP
#define CIMSIM_SIGNAL_CHAIN_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "codebook.hpp"
#include "common.hpp"
#include "rng.hpp"

namespace cimsim
{
    // --- bit mapping ---------------------------------------------------------

    inline int gray_encode(int v) { return v ^ (v >> 1); }

    inline int gray_decode(int g)
    {
        int v = 0;
        for (; g; g >>= 1)
            v ^= g;
        return v;
    }

    inline int log2_exact(int v)
    {
        int bits = 0;
        while ((1 << bits) < v)
            ++bits;
        if ((1 << bits) != v)
            throw std::invalid_argument("order must be a power of two");
        return bits;
    }

    // M-PSK constellation point k on the unit circle, phase 2*pi*k/M. Point k
    // carries the Gray label gray_encode(k), so neighbouring points differ in
    // one bit. For M=2 this is the {+1, -1} BPSK map.
    inline cxd psk_point(int index, int order)
    {
        if (order == 2)
            return index == 0 ? cxd(1.0, 0.0) : cxd(-1.0, 0.0);
        if (order == 4) // exact axis points
        {
            switch (index & 3)
            {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
            }
        }
        const double phase = two_pi * index / order;
        return {std::cos(phase), std::sin(phase)};
    }

    struct TxSymbol
    {
        int codeword_index = 0;   // 0-based index into the codebook
        int symbol_index = 0;     // 0-based constellation point index
        cxd symbol{1.0, 0.0};     // unit-modulus M-PSK point
        std::vector<int> bits;    // the log2(B) + log2(M) source bits
    };

    // First log2(B) bits select the codeword (natural binary, MSB first);
    // the remaining log2(M) bits select the M-PSK point via its Gray label.
    inline TxSymbol modulate(std::span<const int> bits, int codebook_order, int mod_order)
    {
        const int b_bits = log2_exact(codebook_order);
        const int m_bits = log2_exact(mod_order);
        if (static_cast<int>(bits.size()) != b_bits + m_bits)
            throw std::invalid_argument("modulate: wrong number of bits");

        TxSymbol sym;
        sym.bits.assign(bits.begin(), bits.end());
        int c = 0;
        for (int i = 0; i < b_bits; ++i)
            c = (c << 1) | bits[i];
        int label = 0;
        for (int i = 0; i < m_bits; ++i)
            label = (label << 1) | bits[b_bits + i];
        sym.codeword_index = c;
        sym.symbol_index = gray_decode(label);
        sym.symbol = psk_point(sym.symbol_index, mod_order);
        return sym;
    }

    // Inverse of modulate for a detected (codeword, constellation) pair.
    inline std::vector<int> demap(int codeword_index, int symbol_index, int codebook_order, int mod_order)
    {
        const int b_bits = log2_exact(codebook_order);
        const int m_bits = log2_exact(mod_order);
        std::vector<int> bits(b_bits + m_bits);
        for (int i = 0; i < b_bits; ++i)
            bits[i] = (codeword_index >> (b_bits - 1 - i)) & 1;
        const int label = gray_encode(symbol_index);
        for (int i = 0; i < m_bits; ++i)
            bits[b_bits + i] = (label >> (m_bits - 1 - i)) & 1;
        return bits;
    }

    inline int hamming_distance(std::span<const int> a, std::span<const int> b)
    {
        if (a.size() != b.size())
            throw std::invalid_argument("hamming_distance: length mismatch");
        int d = 0;
        for (size_t i = 0; i < a.size(); ++i)
            d += (a[i] != b[i]) ? 1 : 0;
        return d;
    }

    // --- RIS reflection and effective channel --------------------------------

    inline void validate_unit_modulus(const CVector &codeword, double tol = 1e-9)
    {
        for (Eigen::Index n = 0; n < codeword.size(); ++n)
            if (std::abs(std::abs(codeword(n)) - 1.0) > tol)
                throw std::invalid_argument("RIS codeword entries must be unit modulus (passive surface)");
    }

    // Passive reflection: elementwise phase rotation of the incident field,
    // no amplitude change.
    inline CVector reflect(const CVector &codeword, const CVector &incident)
    {
        if (codeword.size() != incident.size())
            throw std::invalid_argument("reflect: dimension mismatch");
        validate_unit_modulus(codeword);
        return codeword.cwiseProduct(incident);
    }

    // H_eff = Gt*Gr * R * diag(codeword) * G, with the antenna gains folded
    // in as the amplitude factor gain_product.
    inline CMatrix effective_channel(const CMatrix &G, const CMatrix &R, const CVector &codeword, double gain_product)
    {
        if (R.cols() != codeword.size() || codeword.size() != G.rows())
            throw std::invalid_argument("effective_channel: dimension mismatch");
        validate_unit_modulus(codeword);
        return gain_product * (R * codeword.asDiagonal() * G);
    }

    // --- whitening ------------------------------------------------------------

    // Inverse principal square root of a Hermitian positive definite matrix
    // via eigendecomposition. An eigenvalue below floor_rel times the largest
    // signals numerical rank deficiency and raises SingularMatrixError.
    inline CMatrix inverse_sqrt_hermitian(const CMatrix &m, double floor_rel = 1e-12)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(m);
        if (eig.info() != Eigen::Success)
            throw SingularMatrixError("inverse_sqrt_hermitian: eigendecomposition failed");
        const Eigen::VectorXd vals = eig.eigenvalues();
        const double top = vals.maxCoeff();
        if (!(top > 0.0))
            throw SingularMatrixError("inverse_sqrt_hermitian: matrix is not positive definite");
        Eigen::VectorXd inv_sqrt(vals.size());
        for (Eigen::Index i = 0; i < vals.size(); ++i)
        {
            if (vals(i) < floor_rel * top)
                throw SingularMatrixError("inverse_sqrt_hermitian: matrix is numerically singular");
            inv_sqrt(i) = 1.0 / std::sqrt(vals(i));
        }
        return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().adjoint();
    }

    // Noise-decorrelating transform for the combined receive filter. With
    // effective-noise covariance Sigma = sigma^2 * W^H W, variance part
    // V = diag(Sigma) and correlation P = V^-1/2 Sigma V^-1/2, the ZCA-cor
    // whitening transform is Bmat = P^-1/2 V^-1/2 and the combined filter is
    // Fr = W Bmat^H. The covariance of Fr^H n is then the identity, i.e. the
    // per-branch noise variance sigma^2 * ||f_r,i||^2 equals 1 exactly.
    struct WhiteningFilter
    {
        CMatrix Bmat;                    // B x B whitening transform
        CMatrix Fr;                      // Nr x B combined receive filter
        Eigen::VectorXd branch_noise_var; // sigma^2 * ||f_r,i||^2 per branch
    };

    inline WhiteningFilter build_whitening(const CMatrix &W, double noise_var)
    {
        if (W.cols() < 1 || W.rows() < W.cols())
            throw std::invalid_argument("build_whitening: combiner must be tall");
        if (!(noise_var > 0.0))
            throw std::invalid_argument("build_whitening: noise variance must be positive");

        const CMatrix sigma = noise_var * (W.adjoint() * W);
        Eigen::VectorXd v = sigma.diagonal().real();
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (!(v(i) > 0.0))
                throw SingularMatrixError("build_whitening: zero-variance combiner column");

        const Eigen::VectorXd v_inv_sqrt = v.cwiseSqrt().cwiseInverse();
        const CMatrix corr = v_inv_sqrt.asDiagonal() * sigma * v_inv_sqrt.asDiagonal();
        const CMatrix corr_inv_sqrt = inverse_sqrt_hermitian(corr);

        WhiteningFilter f;
        f.Bmat = corr_inv_sqrt * v_inv_sqrt.asDiagonal();
        f.Fr = W * f.Bmat.adjoint();
        f.branch_noise_var.resize(W.cols());
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            f.branch_noise_var(j) = noise_var * f.Fr.col(j).squaredNorm();
        return f;
    }

    // --- transmission and detection -------------------------------------------

    // Branch gain matrix: entry (i, j) = f_r,i^H * H_eff(codeword j) * f_t.
    // Column j is the combined signature the receiver sees when codeword j is
    // on the surface; the diagonal feeds the detector hypotheses. The
    // transmit power is not included.
    inline CMatrix branch_gain_matrix(const ChannelRealization &r,
                                      const CimCodebook &cb,
                                      const WhiteningFilter &filter,
                                      const CVector &f_t,
                                      double gain_product)
    {
        const CVector g = r.G * f_t;
        CMatrix h_cols(r.rx_geom.size(), cb.order());
        for (int j = 0; j < cb.order(); ++j)
            h_cols.col(j) = gain_product * (r.R * cb.codewords.col(j).cwiseProduct(g));
        return filter.Fr.adjoint() * h_cols;
    }

    // Received filtered signal for a transmitted symbol:
    //   z = sqrt(P) * Fr^H * H_eff(codeword) * f_t * s + Fr^H * n
    // with n fresh white noise of the given per-element variance.
    inline CVector transmit(const TxSymbol &sym,
                            const CMatrix &branch_gains,
                            const WhiteningFilter &filter,
                            double power_w,
                            double noise_var,
                            Rng &rng)
    {
        if (sym.codeword_index < 0 || sym.codeword_index >= branch_gains.cols())
            throw std::out_of_range("transmit: codeword index out of range");
        CVector z = std::sqrt(power_w) * sym.symbol * branch_gains.col(sym.codeword_index);
        if (noise_var > 0.0)
        {
            CVector n(filter.Fr.rows());
            for (Eigen::Index i = 0; i < n.size(); ++i)
                n(i) = rng.cnormal(noise_var);
            z.noalias() += filter.Fr.adjoint() * n;
        }
        return z;
    }

    inline CVector transmit(const TxSymbol &sym,
                            const ChannelRealization &r,
                            const CimCodebook &cb,
                            const WhiteningFilter &filter,
                            const CVector &f_t,
                            double gain_product,
                            double power_w,
                            double noise_var,
                            Rng &rng)
    {
        return transmit(sym, branch_gain_matrix(r, cb, filter, f_t, gain_product), filter, power_w, noise_var, rng);
    }

    struct Detection
    {
        int codeword_index = 0;
        int symbol_index = 0;
    };

    // Exhaustive joint search over all B*M hypotheses of
    //   |z(c) - sqrt(P) * branch_gains(c, c) * s|^2,
    // ties broken by the lowest codeword index, then the lowest constellation
    // index.
    inline Detection ml_detect(const CVector &z,
                               const CMatrix &branch_gains,
                               double power_w,
                               int mod_order)
    {
        const int order = static_cast<int>(branch_gains.cols());
        if (z.size() != order)
            throw std::invalid_argument("ml_detect: branch count mismatch");
        const double sqrt_p = std::sqrt(power_w);

        Detection best;
        double best_metric = std::numeric_limits<double>::infinity();
        for (int c = 0; c < order; ++c)
        {
            const cxd h = sqrt_p * branch_gains(c, c);
            for (int m = 0; m < mod_order; ++m)
            {
                const double metric = std::norm(z(c) - h * psk_point(m, mod_order));
                if (metric < best_metric)
                {
                    best_metric = metric;
                    best = {c, m};
                }
            }
        }
        return best;
    }

    // Per-hypothesis metrics in scan order, for inspection dumps.
    inline std::vector<double> ml_metrics(const CVector &z,
                                          const CMatrix &branch_gains,
                                          double power_w,
                                          int mod_order)
    {
        const int order = static_cast<int>(branch_gains.cols());
        const double sqrt_p = std::sqrt(power_w);
        std::vector<double> metrics;
        metrics.reserve(static_cast<size_t>(order) * mod_order);
        for (int c = 0; c < order; ++c)
        {
            const cxd h = sqrt_p * branch_gains(c, c);
            for (int m = 0; m < mod_order; ++m)
                metrics.push_back(std::norm(z(c) - h * psk_point(m, mod_order)));
        }
        return metrics;
    }
}

#endif
