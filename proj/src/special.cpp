// Copyright 2026 The qrkernel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qrk/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qrk {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// 1/Gamma(1+x) = sum c_k x^k (Abramowitz & Stegun 6.1.34, shifted).
constexpr double kRecipGamma[] = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
};

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
    gampl = 1.0 / std::tgamma(1.0 + mu);
    gammi = 1.0 / std::tgamma(1.0 - mu);
    if (std::abs(mu) < 0.1) {
        // odd/even parts of the series avoid the cancellation in gam1
        double odd = 0.0, even = 0.0, p = 1.0;
        for (int k = 0; k < static_cast<int>(std::size(kRecipGamma)); ++k) {
            if (k % 2) odd += kRecipGamma[k] * p;
            else even += kRecipGamma[k] * p;
            p *= mu;
        }
        gam1 = -odd / mu;
        if (mu == 0.0) gam1 = -kRecipGamma[1];
        gam2 = even;
    } else {
        gam1 = (gammi - gampl) / (2.0 * mu);
        gam2 = (gammi + gampl) / 2.0;
    }
}

}  // namespace

bool is_half_integer(double nu) {
    const double a = std::abs(nu) - 0.5;
    return a >= -1e-12 && std::abs(a - std::round(a)) <= 1e-12;
}

double bessel_k_half_integer(double nu, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("bessel_k requires x > 0");
    if (!is_half_integer(nu)) throw std::invalid_argument("order is not a half-integer");
    const int m = static_cast<int>(std::round(std::abs(nu) - 0.5));
    // K_{m+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_{j=0}^m (m+j)! / (j! (m-j)!) (2x)^{-j}
    double term = 1.0, sum = 1.0;
    for (int j = 1; j <= m; ++j) {
        term *= static_cast<double>((m + j) * (m - j + 1)) / (static_cast<double>(j) * 2.0 * x);
        sum += term;
    }
    return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
}

double bessel_k_general(double nu, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("bessel_k requires x > 0");
    if (!std::isfinite(nu)) throw std::invalid_argument("bessel_k requires a finite order");
    nu = std::abs(nu);
    const int nl = static_cast<int>(nu + 0.5);
    const double mu = nu - nl;  // |mu| <= 1/2
    const double mu2 = mu * mu;
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    double rkmu = 0.0, rk1 = 0.0;

    if (x < 2.0) {
        const double x2 = 0.5 * x;
        const double pimu = std::numbers::pi * mu;
        const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
        double d = -std::log(x2);
        double e = mu * d;
        const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
        double gam1, gam2, gampl, gammi;
        temme_gammas(mu, gam1, gam2, gampl, gammi);
        double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / gampl;
        double q = 0.5 / (e * gammi);
        double c = 1.0;
        d = x2 * x2;
        double sum1 = p;
        int i = 1;
        for (; i <= kMaxIter; ++i) {
            ff = (i * ff + p + q) / (i * i - mu2);
            c *= d / i;
            p /= i - mu;
            q /= i + mu;
            const double del = c * ff;
            sum += del;
            const double del1 = c * (p - i * ff);
            sum1 += del1;
            if (std::abs(del) < std::abs(sum) * kEps) break;
        }
        if (i > kMaxIter) throw std::runtime_error("bessel_k series failed to converge");
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        double b = 2.0 * (1.0 + x);
        double d = 1.0 / b;
        double h = d, delh = d;
        double q1 = 0.0, q2 = 1.0;
        const double a1 = 0.25 - mu2;
        double q = a1, c = a1;
        double a = -a1;
        double s = 1.0 + q * delh;
        int i = 1;
        for (; i <= kMaxIter; ++i) {
            a -= 2 * i;
            c = -a * c / (i + 1.0);
            const double qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            const double dels = q * delh;
            s += dels;
            if (std::abs(dels / s) < kEps) break;
        }
        if (i > kMaxIter) throw std::runtime_error("bessel_k continued fraction failed to converge");
        h = a1 * h;
        rkmu = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
        rk1 = rkmu * (mu + x + 0.5 - h) * xi;
    }
    for (int i = 1; i <= nl; ++i) {
        const double next = (mu + i) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = next;
    }
    return rkmu;
}

double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("bessel_k requires x > 0");
    if (is_half_integer(nu)) return bessel_k_half_integer(nu, x);
    return bessel_k_general(nu, x);
}

}  // namespace qrk
