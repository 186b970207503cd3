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

#include "qrk/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "qrk/rng.hpp"

namespace qrk {
namespace {

void require_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("contraction lambda must lie in (0, 1)");
}

void require_params(const SubReservoirParams& p, const Topology& topo) {
    if (static_cast<int>(p.theta_x.size()) != topo.n || static_cast<int>(p.theta_z.size()) != topo.n ||
        p.theta_zz.size() != topo.edges.size())
        throw std::invalid_argument("sub-reservoir parameters do not match the topology");
}

// Kronecker product of single-qubit R_y rotations; real-valued.
Eigen::MatrixXd ry_layer(std::span<const double> z) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
    // qubit 0 ends up as the leftmost factor
    for (auto it = z.rbegin(); it != z.rend(); ++it) {
        const double zj = *it;
        if (!std::isfinite(zj)) throw std::invalid_argument("projected input must be finite");
        const double a = encoding_angle(zj);
        const double c = std::cos(a / 2), s = std::sin(a / 2);
        Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
        next << c * out, -s * out, s * out, c * out;
        out = std::move(next);
    }
    return out;
}

}  // namespace

Topology Topology::ring(int n) {
    if (n < 1) throw std::invalid_argument("topology needs at least one qubit");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    if (n >= 3) edges.emplace_back(0, n - 1);
    Topology t = from_edges(n, std::move(edges));
    t.name = "ring";
    return t;
}

Topology Topology::from_edges(int n, std::vector<std::pair<int, int>> edges) {
    if (n < 1) throw std::invalid_argument("topology needs at least one qubit");
    std::set<std::pair<int, int>> seen;
    for (const auto& [i, j] : edges) {
        if (!(0 <= i && i < j && j < n)) throw std::invalid_argument("edges must satisfy 0 <= i < j < n");
        if (!seen.insert({i, j}).second) throw std::invalid_argument("duplicate edge in topology");
    }
    return Topology{n, std::move(edges), "edges"};
}

SubReservoirParams SubReservoirParams::sample(std::uint64_t seed, const Topology& topo, double lambda_lo,
                                              double lambda_hi) {
    if (!(0.0 < lambda_lo && lambda_lo < lambda_hi && lambda_hi < 1.0))
        throw std::invalid_argument("lambda interval must satisfy 0 < lo < hi < 1");
    constexpr double pi = std::numbers::pi;
    Rng rng(seed);
    SubReservoirParams p;
    p.seed = seed;
    for (int j = 0; j < topo.n; ++j) p.theta_x.push_back(rng.uniform_open(-pi, pi));
    for (int j = 0; j < topo.n; ++j) p.theta_z.push_back(rng.uniform_open(-pi, pi));
    for (std::size_t e = 0; e < topo.edges.size(); ++e) p.theta_zz.push_back(rng.uniform_open(-pi, pi));
    p.lambda = rng.uniform_open(lambda_lo, lambda_hi);
    return p;
}

ReservoirConfig ReservoirConfig::make(int n, int num_subs, Topology topo, std::uint64_t master_seed, double lambda_lo,
                                      double lambda_hi) {
    if (n < 1 || num_subs < 1) throw std::invalid_argument("reservoir needs n >= 1 and R >= 1");
    if (topo.n != n) throw std::invalid_argument("topology qubit count does not match n");
    ReservoirConfig c;
    c.n = n;
    c.master_seed = master_seed;
    c.lambda_lo = lambda_lo;
    c.lambda_hi = lambda_hi;
    for (int r = 0; r < num_subs; ++r)
        c.subs.push_back(
            SubReservoirParams::sample(derive_seed(master_seed, stream::kReservoir, static_cast<std::uint64_t>(r)),
                                       topo, lambda_lo, lambda_hi));
    c.topology = std::move(topo);
    return c;
}

double ReservoirConfig::lambda_star() const {
    double m = 0.0;
    for (const auto& s : subs) m = std::max(m, s.lambda);
    return m;
}

CMatrix build_entangler(const SubReservoirParams& params, const Topology& topo) {
    require_params(params, topo);
    const int n = topo.n;
    const Eigen::Index dim = Eigen::Index{1} << n;
    // R_zz and R_z layers are diagonal; accumulate their phases.
    Eigen::VectorXd phase = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
        auto zval = [&](int q) { return ((b >> (n - 1 - q)) & 1) ? -1.0 : 1.0; };
        double ph = 0.0;
        for (std::size_t e = 0; e < topo.edges.size(); ++e)
            ph -= 0.5 * params.theta_zz[e] * zval(topo.edges[e].first) * zval(topo.edges[e].second);
        for (int q = 0; q < n; ++q) ph -= 0.5 * params.theta_z[static_cast<std::size_t>(q)] * zval(q);
        phase(b) = ph;
    }
    CMatrix rx = CMatrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) rx = kron(rx, gate_rx(params.theta_x[static_cast<std::size_t>(q)]));
    CMatrix w(dim, dim);
    for (Eigen::Index b = 0; b < dim; ++b) w.col(b) = rx.col(b) * std::polar(1.0, phase(b));
    return w;
}

double encoding_angle(double z) { return std::numbers::pi * std::tanh(z); }

CMatrix injection_unitary(const CMatrix& entangler, std::span<const double> z) {
    if (entangler.rows() != (Eigen::Index{1} << z.size())) throw std::invalid_argument("input length does not match qubit count");
    return entangler * ry_layer(z).cast<Complex>();
}

CMatrix injection_unitary(const SubReservoirParams& params, const Topology& topo, std::span<const double> z) {
    if (static_cast<int>(z.size()) != topo.n) throw std::invalid_argument("input length does not match qubit count");
    return injection_unitary(build_entangler(params, topo), z);
}

void reset_channel_in_place(CMatrix& rho, double lambda) {
    require_lambda(lambda);
    const double fill = (1.0 - lambda) / static_cast<double>(rho.rows());
    rho *= lambda;
    rho.array() += fill;
}

DensityOperator reset_channel(const DensityOperator& rho, double lambda) {
    CMatrix m = rho.matrix();
    reset_channel_in_place(m, lambda);
    return DensityOperator::trusted(std::move(m));
}

double dilation_coin_one_probability(double lambda) {
    require_lambda(lambda);
    const double theta = 2.0 * std::asin(std::sqrt(1.0 - lambda));
    const Eigen::Vector2cd coin = gate_ry(theta) * Eigen::Vector2cd(1.0, 0.0);
    return std::norm(coin(1));
}

DensityOperator dilation_reset_channel(const DensityOperator& rho, double lambda) {
    require_lambda(lambda);
    const int n = rho.num_qubits();
    const int total = 2 * n + 1;
    if (total > 13) throw std::invalid_argument("dilation is limited to n <= 6");
    const Eigen::Index dim = Eigen::Index{1} << total;

    // Register layout: reservoir q_0..q_{n-1}, ancillas a_0..a_{n-1}, coin c.
    CMatrix zero_anc = CMatrix::Zero(Eigen::Index{1} << (n + 1), Eigen::Index{1} << (n + 1));
    zero_anc(0, 0) = 1.0;
    CMatrix state = kron(rho.matrix(), zero_anc);

    const double theta = 2.0 * std::asin(std::sqrt(1.0 - lambda));
    CMatrix prep = CMatrix::Identity(dim, dim);
    for (int i = 0; i < n; ++i) prep = embed_gate(gate_h(), n + i, total) * prep;
    prep = embed_gate(gate_ry(theta), 2 * n, total) * prep;
    state = conjugate(state, prep);

    for (int i = 0; i < n; ++i) {
        const int sq = total - 1 - i;        // bit of q_i
        const int sa = total - 1 - (n + i);  // bit of a_i
        CMatrix cswap = CMatrix::Zero(dim, dim);
        for (Eigen::Index b = 0; b < dim; ++b) {
            Eigen::Index target = b;
            if (b & 1) {  // coin is the least significant bit
                const Eigen::Index bq = (b >> sq) & 1, ba = (b >> sa) & 1;
                if (bq != ba) target = b ^ ((Eigen::Index{1} << sq) | (Eigen::Index{1} << sa));
            }
            cswap(target, b) = 1.0;
        }
        state = conjugate(state, cswap);
    }
    return DensityOperator::trusted(partial_trace_trailing(state, n, total));
}

DensityOperator step(const DensityOperator& rho, std::span<const double> x, const SubReservoirParams& params,
                     const Topology& topo, const JlProjector& projector) {
    if (rho.num_qubits() != topo.n || projector.n() != topo.n) throw std::invalid_argument("state, topology and projector disagree on n");
    require_lambda(params.lambda);
    const Eigen::VectorXd z = projector.project(x);
    const CMatrix v = injection_unitary(params, topo, std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
    CMatrix m = conjugate(rho.matrix(), v);
    reset_channel_in_place(m, params.lambda);
    return DensityOperator::trusted(std::move(m));
}

Eigen::MatrixXd project_window(const Window& window, const JlProjector& projector) {
    if (window.cols() != projector.d()) throw std::invalid_argument("window dimension does not match projector");
    return window * projector.matrix().transpose();
}

DensityOperator embed_window_from(const DensityOperator& initial, const Window& window, const SubReservoirParams& params,
                                  const Topology& topo, const JlProjector& projector) {
    if (window.rows() < 1) throw std::invalid_argument("window must contain at least one point");
    if (initial.num_qubits() != topo.n || projector.n() != topo.n) throw std::invalid_argument("state, topology and projector disagree on n");
    require_params(params, topo);
    require_lambda(params.lambda);
    const SubReservoir sub(params, topo);
    const Eigen::MatrixXd z = project_window(window, projector);
    CMatrix rho = initial.matrix();
    for (Eigen::Index t = 0; t < z.rows(); ++t) {
        const Eigen::VectorXd zt = z.row(t).transpose();
        sub.step_in_place(rho, std::span<const double>(zt.data(), static_cast<std::size_t>(zt.size())));
    }
    return DensityOperator::trusted(std::move(rho));
}

DensityOperator embed_window(const Window& window, const SubReservoirParams& params, const Topology& topo,
                             const JlProjector& projector) {
    return embed_window_from(DensityOperator::plus_state(topo.n), window, params, topo, projector);
}

std::vector<DensityOperator> embed_multiplexed(const Window& window, const ReservoirConfig& config,
                                               const JlProjector& projector) {
    std::vector<DensityOperator> out;
    out.reserve(config.subs.size());
    for (const auto& sub : config.subs) out.push_back(embed_window(window, sub, config.topology, projector));
    return out;
}

SubReservoir::SubReservoir(SubReservoirParams params, const Topology& topo)
    : params_(std::move(params)), n_(topo.n), entangler_(build_entangler(params_, topo)) {
    require_lambda(params_.lambda);
}

void SubReservoir::step_in_place(CMatrix& rho, std::span<const double> z) const {
    const CMatrix v = injection_unitary(entangler_, z);
    rho = conjugate(rho, v);
    reset_channel_in_place(rho, params_.lambda);
}

CMatrix SubReservoir::embed_projected(const Eigen::MatrixXd& projected) const {
    if (projected.rows() < 1) throw std::invalid_argument("window must contain at least one point");
    if (projected.cols() != n_) throw std::invalid_argument("projected window width does not match n");
    CMatrix rho = DensityOperator::plus_state(n_).matrix();
    Eigen::VectorXd zt(n_);
    for (Eigen::Index t = 0; t < projected.rows(); ++t) {
        zt = projected.row(t).transpose();
        step_in_place(rho, std::span<const double>(zt.data(), static_cast<std::size_t>(zt.size())));
    }
    return rho;
}

}  // namespace qrk
