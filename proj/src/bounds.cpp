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

#include "qrk/bounds.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace qrk {

BoundReport bound(const BoundInputs& in) {
    if (!(in.nu > 1.0)) throw std::invalid_argument("nu > 1 required by the bound");
    if (in.n < 2 || in.n % 2 != 0) throw std::invalid_argument("N must be a positive even number");
    if (!(in.delta > 0.0 && in.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(in.lambda_norm >= 0.0) || !(in.upsilon >= 0.0)) throw std::invalid_argument("Lambda and Upsilon must be nonnegative");
    if (!(in.xi > 0.0)) throw std::invalid_argument("xi must be positive");
    if (!(in.lambda_star >= 0.0 && in.lambda_star < 1.0)) throw std::invalid_argument("lambda_star must lie in [0, 1)");
    if (in.r < 1 || in.n_obs < 1 || in.w < 1 || in.g < 0) throw std::invalid_argument("R, |O| and w must be positive, g nonnegative");
    if (!(in.beta_g >= 0.0)) throw std::invalid_argument("beta_g must be nonnegative");

    const double n = static_cast<double>(in.n);
    const double mu = n / 2.0;
    const double lu = in.lambda_norm + in.upsilon;
    const double root_n = std::sqrt(n);

    BoundReport rep;
    rep.delta_prime = in.delta - 4.0 * (mu - 1.0) * in.beta_g;
    rep.vacuous = !(rep.delta_prime > 0.0);
    rep.truncation_term = (4.0 * in.lambda_norm * lu / in.xi) *
                          std::sqrt(in.nu * in.r * static_cast<double>(in.n_obs) / (in.nu - 1.0)) *
                          std::pow(in.lambda_star, static_cast<double>(in.w));
    if (rep.vacuous) {
        const double inf = std::numeric_limits<double>::infinity();
        rep.rademacher_term = inf;
        rep.mixing_penalty = inf;
        rep.total = inf;
        return rep;
    }
    rep.rademacher_term = 4.0 * std::sqrt(2.0) * in.lambda_norm * lu / root_n;
    rep.mixing_penalty = 3.0 * lu * lu * std::sqrt(std::log(4.0 / rep.delta_prime)) / root_n;
    rep.total = rep.rademacher_term + rep.mixing_penalty + rep.truncation_term;
    return rep;
}

double beta_from_geometric(double beta0, double beta1, double g) {
    if (!(beta0 >= 0.0) || !(beta1 > 0.0) || !(g >= 0.0))
        throw std::invalid_argument("geometric mixing needs beta0 >= 0, beta1 > 0, g >= 0");
    return beta0 * std::exp(-beta1 * g);
}

double window_mixing_upper(const std::function<double(double)>& beta_io_at, long long k, long long s, long long w) {
    if (k * s <= w) throw std::invalid_argument("window mixing needs k s > w");
    return beta_io_at(static_cast<double>(k * s - w));
}

void write_bound_csv(std::ostream& os, const std::vector<BoundInputs>& inputs, const std::vector<BoundReport>& reports) {
    if (inputs.size() != reports.size()) throw std::invalid_argument("inputs and reports differ in length");
    os << "N,w,g,Lambda,Upsilon_Y,nu,xi,R,n_obs,lambda_star,delta,beta_g,rademacher_term,mixing_penalty,"
          "truncation_term,total,delta_prime,vacuous\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const BoundInputs& b = inputs[i];
        const BoundReport& r = reports[i];
        os << b.n << ',' << b.w << ',' << b.g << ',' << b.lambda_norm << ',' << b.upsilon << ',' << b.nu << ',' << b.xi
           << ',' << b.r << ',' << b.n_obs << ',' << b.lambda_star << ',' << b.delta << ',' << b.beta_g << ','
           << r.rademacher_term << ',' << r.mixing_penalty << ',' << r.truncation_term << ',' << r.total << ','
           << r.delta_prime << ',' << (r.vacuous ? "true" : "false") << '\n';
    }
}

}  // namespace qrk
