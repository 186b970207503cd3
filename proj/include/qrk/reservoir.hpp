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
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qrk/projection.hpp"
#include "qrk/qcore.hpp"

namespace qrk {

/// Qubit connectivity (V, E) with V = {0, ..., n-1}.
struct Topology {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::string name;

    /// (0,1), (1,2), ..., (n-2,n-1), (0,n-1). Degenerate rings for n < 3 drop duplicates.
    static Topology ring(int n);
    /// Validates: i < j < n, no duplicates.
    static Topology from_edges(int n, std::vector<std::pair<int, int>> edges);
};

/// Sampled parameters of one sub-reservoir.
struct SubReservoirParams {
    std::vector<double> theta_x;   ///< one per qubit
    std::vector<double> theta_z;   ///< one per qubit
    std::vector<double> theta_zz;  ///< one per edge, in edge-list order
    double lambda = 0.5;           ///< contraction in (0, 1)
    std::uint64_t seed = 0;

    /// Angles i.i.d. uniform on (-pi, pi), lambda uniform on (lambda_lo, lambda_hi).
    static SubReservoirParams sample(std::uint64_t seed, const Topology& topo, double lambda_lo, double lambda_hi);
};

inline constexpr double kDefaultLambdaLo = 0.7;
inline constexpr double kDefaultLambdaHi = 0.95;

/// R independently sampled sub-reservoirs sharing a topology.
struct ReservoirConfig {
    int n = 0;
    Topology topology;
    std::vector<SubReservoirParams> subs;
    std::uint64_t master_seed = 0;
    double lambda_lo = kDefaultLambdaLo;
    double lambda_hi = kDefaultLambdaHi;

    /// Sub-reservoir r is drawn from derive_seed(master_seed, reservoir stream, r).
    static ReservoirConfig make(int n, int num_subs, Topology topo, std::uint64_t master_seed,
                                double lambda_lo = kDefaultLambdaLo, double lambda_hi = kDefaultLambdaHi);

    int num_subs() const { return static_cast<int>(subs.size()); }
    /// max_r lambda_r
    double lambda_star() const;
};

/// Ising-like entangler W = prod R_x * prod R_z * prod R_zz (R_zz block acts first).
CMatrix build_entangler(const SubReservoirParams& params, const Topology& topo);

/// Encoding angle pi * tanh(z).
double encoding_angle(double z);

/// V = W (x)_j R_y(pi tanh z_j).
CMatrix injection_unitary(const SubReservoirParams& params, const Topology& topo, std::span<const double> z);
CMatrix injection_unitary(const CMatrix& entangler, std::span<const double> z);

/// lambda rho + (1 - lambda) |+><+|^n
DensityOperator reset_channel(const DensityOperator& rho, double lambda);
void reset_channel_in_place(CMatrix& rho, double lambda);

/// Reset channel realized by its SWAP dilation on 2n+1 qubits (n ancillas
/// prepared in |+>, one coin rotated by R_y(2 asin sqrt(1 - lambda)),
/// coin-controlled SWAPs), followed by tracing out ancillas and coin.
DensityOperator dilation_reset_channel(const DensityOperator& rho, double lambda);
/// Pr[coin = 1] after the coin rotation of the dilation circuit.
double dilation_coin_one_probability(double lambda);

/// One reservoir update T(rho, x) = E_lambda(V(x) rho V(x)^dagger) with z = Pi x.
DensityOperator step(const DensityOperator& rho, std::span<const double> x, const SubReservoirParams& params,
                     const Topology& topo, const JlProjector& projector);

/// A window is a w x d matrix whose rows are the time points, oldest first.
using Window = Eigen::MatrixXd;

/// Folds `step` over the window starting from |+><+|^n.
DensityOperator embed_window(const Window& window, const SubReservoirParams& params, const Topology& topo,
                             const JlProjector& projector);
/// Same fold from an arbitrary initial state.
DensityOperator embed_window_from(const DensityOperator& initial, const Window& window, const SubReservoirParams& params,
                                  const Topology& topo, const JlProjector& projector);

/// One embedding per sub-reservoir, in sub-reservoir order.
std::vector<DensityOperator> embed_multiplexed(const Window& window, const ReservoirConfig& config,
                                               const JlProjector& projector);

/// Sub-reservoir with its entangler precomputed; the hot path of batch embedding.
class SubReservoir {
public:
    SubReservoir(SubReservoirParams params, const Topology& topo);

    const SubReservoirParams& params() const { return params_; }
    const CMatrix& entangler() const { return entangler_; }

    void step_in_place(CMatrix& rho, std::span<const double> z) const;
    /// Window embedding from |+><+|^n; `projected` holds z_t = Pi x_t as rows.
    CMatrix embed_projected(const Eigen::MatrixXd& projected) const;

private:
    SubReservoirParams params_;
    int n_ = 0;
    CMatrix entangler_;
};

/// Rows of the result are Pi x_t for each row x_t of the window.
Eigen::MatrixXd project_window(const Window& window, const JlProjector& projector);

}  // namespace qrk
