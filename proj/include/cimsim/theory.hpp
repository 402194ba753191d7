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
// Closed-form pairwise error probabilities of the whitening ML detector and
// the union upper bound on the average bit error rate, evaluated by
// averaging over channel realizations.
//
// Conditioned on a realization, the detector compares per-branch residuals
// whose noise terms are independent after whitening. Two error kinds exist:
//
//  * correct index, wrong constellation point: the residual difference is
//    Gaussian; the pairwise probability is
//      Q( sqrt(P) |g_cc (s - s_hat)| / sqrt(2 v_c) ),
//    with g_cc the branch gain of the true codeword on its own combiner
//    branch and v_c that branch's noise variance.
//
//  * wrong index: the two residuals are an independent central and
//    non-central chi-square pair (2 dof each); P(chi_1 > chi_2) collapses to
//      exp(-Lambda/4) / 2,  Lambda = 2 P |g_hc s - g_hh s_hat|^2 / v_h,
//    where g_hc is the true codeword's leakage into the detected branch and
//    g_hh the detected branch's own hypothesis gain.

#ifndef CIMSIM_THEORY_HPP
#define CIMSIM_THEORY_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "codebook.hpp"
#include "common.hpp"
#include "signal_chain.hpp"

namespace cimsim
{
    // Standard Gaussian tail probability.
    inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

    // Pairwise error probability toward the same codeword index but a
    // different constellation point. branch_gain_cc excludes sqrt(P);
    // branch_noise_var is the whitened branch's noise variance.
    inline double cpep_correct_index(cxd branch_gain_cc,
                                     double branch_noise_var,
                                     double power_w,
                                     cxd s_true,
                                     cxd s_alt)
    {
        if (s_true == s_alt)
            throw std::invalid_argument("cpep_correct_index: hypotheses coincide");
        const double dist = std::abs(branch_gain_cc * (s_true - s_alt));
        if (dist == 0.0)
            return 0.5;
        return q_function(std::sqrt(power_w / (2.0 * branch_noise_var)) * dist);
    }

    // Pairwise error probability toward a different codeword index.
    // branch_gain_true_on_alt = f_alt^H H(b_true) f_t, branch_gain_alt_on_alt
    // = f_alt^H H(b_alt) f_t, both excluding sqrt(P).
    inline double cpep_erroneous_index(cxd branch_gain_true_on_alt,
                                       cxd branch_gain_alt_on_alt,
                                       double branch_noise_var,
                                       double power_w,
                                       cxd s_true,
                                       cxd s_alt)
    {
        const double diff = std::norm(branch_gain_true_on_alt * s_true - branch_gain_alt_on_alt * s_alt);
        const double lambda = 2.0 * power_w * diff / branch_noise_var;
        return 0.5 * std::exp(-lambda / 4.0);
    }

    // Convenience wrappers operating on a built link.

    inline double cpep_correct_index(const ChannelRealization &r,
                                     const CimCodebook &cb,
                                     const WhiteningFilter &filter,
                                     const CVector &f_t,
                                     double gain_product,
                                     double power_w,
                                     int c_true,
                                     cxd s_true,
                                     cxd s_alt)
    {
        const CMatrix bg = branch_gain_matrix(r, cb, filter, f_t, gain_product);
        return cpep_correct_index(bg(c_true, c_true), filter.branch_noise_var(c_true), power_w, s_true, s_alt);
    }

    inline double cpep_erroneous_index(const ChannelRealization &r,
                                       const CimCodebook &cb,
                                       const WhiteningFilter &filter,
                                       const CVector &f_t,
                                       double gain_product,
                                       double power_w,
                                       int c_true,
                                       int c_alt,
                                       cxd s_true,
                                       cxd s_alt)
    {
        if (c_true == c_alt)
            throw std::invalid_argument("cpep_erroneous_index: codeword indices coincide");
        const CMatrix bg = branch_gain_matrix(r, cb, filter, f_t, gain_product);
        return cpep_erroneous_index(bg(c_alt, c_true), bg(c_alt, c_alt),
                                    filter.branch_noise_var(c_alt), power_w, s_true, s_alt);
    }

    // Union bound contribution of one realization:
    //   (1 / (eta*M*B)) * sum over transmitted (c, s) and detected
    //   (c_hat, s_hat) != (c, s) of E_b * PEP,
    // where E_b counts differing bits in the concatenated index + Gray
    // constellation label.
    inline double union_bound_aber_single(const CMatrix &branch_gains,
                                          const Eigen::VectorXd &branch_noise_var,
                                          double power_w,
                                          int mod_order)
    {
        const int order = static_cast<int>(branch_gains.cols());
        const int eta = log2_exact(order) + log2_exact(mod_order);

        double total = 0.0;
        for (int c = 0; c < order; ++c)
            for (int m = 0; m < mod_order; ++m)
            {
                const std::vector<int> bits_true = demap(c, m, order, mod_order);
                const cxd s_true = psk_point(m, mod_order);
                for (int ch = 0; ch < order; ++ch)
                    for (int mh = 0; mh < mod_order; ++mh)
                    {
                        if (ch == c && mh == m)
                            continue;
                        const std::vector<int> bits_alt = demap(ch, mh, order, mod_order);
                        const int eb = hamming_distance(bits_true, bits_alt);
                        const cxd s_alt = psk_point(mh, mod_order);
                        const double pep =
                            (ch == c)
                                ? cpep_correct_index(branch_gains(c, c), branch_noise_var(c), power_w, s_true, s_alt)
                                : cpep_erroneous_index(branch_gains(ch, c), branch_gains(ch, ch),
                                                       branch_noise_var(ch), power_w, s_true, s_alt);
                        total += eb * pep;
                    }
            }
        return total / (static_cast<double>(eta) * mod_order * order);
    }

    // Truncated-series evaluation of P(chi_1 > chi_2) for an independent
    // central/non-central chi-square pair with 2 dof each:
    //   (exp(-Lambda/2)/2) * sum_i (Lambda/4)^i / i!
    // Converges to exp(-Lambda/4)/2; kept as an independent cross-check of
    // the closed form.
    inline double erroneous_index_pep_series(double lambda, int terms = 64)
    {
        double sum = 0.0;
        double term = 1.0;
        for (int i = 0; i < terms; ++i)
        {
            sum += term;
            term *= (lambda / 4.0) / (i + 1);
        }
        return 0.5 * std::exp(-lambda / 2.0) * sum;
    }
}

#endif
