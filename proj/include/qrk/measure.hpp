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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qrk/projection.hpp"
#include "qrk/qcore.hpp"
#include "qrk/reservoir.hpp"
#include "qrk/rng.hpp"

namespace qrk {

/// Moment-map output: R * |O| values, r-major, observables in ObservableSet order.
using FeatureVector = Eigen::VectorXd;

/// One classical shadow: a measurement basis and outcome bit per qubit.
/// Outcome 0 is the +1 eigenvalue of the basis Pauli.
struct Snapshot {
    std::vector<Pauli> bases;
    std::vector<std::uint8_t> outcomes;
};

struct ShadowPlan {
    long long total_snapshots = 1000;  ///< M
    int groups = 10;                   ///< B (median-of-means batches)
    int locality = 2;                  ///< k
    double eps_cs = 0.0;               ///< target accuracy, informational

    /// Validates B >= 1 and M >= B. M is truncated to a multiple of B when used.
    static ShadowPlan make(long long total_snapshots, int groups, int locality = 2, double eps_cs = 0.0);
    long long per_group() const { return total_snapshots / groups; }
};

/// Default snapshot-budget constant.
inline constexpr double kShadowBudgetConstant = 34.0;

/// ceil(C (3/2)^k eps^-2 ln|O|), at least 1.
long long snapshot_budget(int k, double eps_cs, std::size_t n_obs, double constant = kShadowBudgetConstant);

/// Exact <O> for every state and observable.
FeatureVector exact_features(std::span<const DensityOperator> states, const ObservableSet& obs);

/// Born-rule sampler of random-Pauli-basis snapshots for one state. Outcome
/// distributions of all 3^n product bases are tabulated up front.
class ShadowSampler {
public:
    explicit ShadowSampler(const CMatrix& rho);

    int num_qubits() const { return n_; }
    /// Probability of `outcome` (bit j of the index = qubit j, qubit 0 most
    /// significant) when measuring in the product basis `basis_index`
    /// (base-3 digits, qubit 0 most significant, 0=X 1=Y 2=Z).
    double probability(std::size_t basis_index, std::size_t outcome) const;
    Snapshot sample(Rng& rng) const;

private:
    int n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> cdf_;  // 3^n blocks of 2^n cumulative probabilities
};

Snapshot collect_snapshot(const DensityOperator& rho, Rng& rng);

/// Single-snapshot inversion estimate of <P>: prod over support of 3 * (+-1)
/// when every supported basis matches, else 0.
double shadow_single_estimate(const Snapshot& s, const PauliString& p);

/// Median-of-means shadow estimate of every feature.
FeatureVector estimate_features(std::span<const DensityOperator> states, const ObservableSet& obs,
                                const ShadowPlan& plan, Rng& rng);

struct InjectivityReport {
    double min_pairwise_distance = 0.0;
    std::size_t collisions = 0;
    std::vector<std::pair<std::size_t, std::size_t>> colliding_pairs;  ///< first few, for diagnostics
};

/// Exhaustive pairwise audit over feature rows; a collision is a distance below tol.
InjectivityReport injectivity_audit(const Eigen::MatrixXd& features, double tol = 1e-8);

enum class Backend { Exact, Shadows };

struct MeasurementConfig {
    Backend backend = Backend::Exact;
    ShadowPlan plan;
    std::uint64_t seed = 0;  ///< shadow streams derive from (seed, window id, sub-reservoir)
};

/// Feature matrix (one row per window). Windows are embedded in parallel;
/// window i uses shadow stream id (first_window_id + i). The result does not
/// depend on the thread count.
Eigen::MatrixXd featurize(const std::vector<Window>& windows, const ReservoirConfig& config,
                          const JlProjector& projector, const ObservableSet& obs, const MeasurementConfig& meas,
                          std::uint64_t first_window_id = 0);
/// Single-threaded reference of `featurize`.
Eigen::MatrixXd featurize_serial(const std::vector<Window>& windows, const ReservoirConfig& config,
                                 const JlProjector& projector, const ObservableSet& obs,
                                 const MeasurementConfig& meas, std::uint64_t first_window_id = 0);

}  // namespace qrk
