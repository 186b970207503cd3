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

#pragma once

#include <functional>
#include <ostream>
#include <vector>

namespace qrk {

struct BoundInputs {
    long long n = 0;             ///< training windows, even
    long long w = 0;             ///< window length
    long long g = 0;             ///< gap
    double lambda_norm = 1.0;    ///< RKHS norm budget Lambda
    double upsilon = 1.0;        ///< label bound
    double nu = 1.5;
    double xi = 1.0;
    int r = 1;                   ///< sub-reservoirs
    long long n_obs = 1;         ///< observables per sub-reservoir
    double lambda_star = 0.0;    ///< largest reset rate
    double delta = 0.05;
    double beta_g = 0.0;         ///< input/output mixing coefficient at the gap
};

struct BoundReport {
    double rademacher_term = 0.0;
    double mixing_penalty = 0.0;
    double truncation_term = 0.0;
    double total = 0.0;
    double delta_prime = 0.0;
    bool vacuous = false;  ///< delta' <= 0; Rademacher, mixing and total are +inf
};

/// Three-term generalization bound on strided windows of a mixing process.
/// Throws std::invalid_argument for nu <= 1, odd N, or out-of-range inputs.
BoundReport bound(const BoundInputs& in);

/// beta0 * exp(-beta1 * g)
double beta_from_geometric(double beta0, double beta1, double g);

/// beta_io_at(k s - w); requires k s > w.
double window_mixing_upper(const std::function<double(double)>& beta_io_at, long long k, long long s, long long w);

/// Header plus one row per (inputs, report) pair.
void write_bound_csv(std::ostream& os, const std::vector<BoundInputs>& inputs, const std::vector<BoundReport>& reports);

}  // namespace qrk
