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

#include "qrk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace qrk {
namespace {

// Rotations mapping the X, Y and Z eigenbases onto the computational basis.
const Eigen::Matrix2cd& basis_rotation(int digit) {
    static const Eigen::Matrix2cd rot[3] = {
        gate_h(),
        (Eigen::Matrix2cd() << Complex(1, 0), Complex(0, -1), Complex(1, 0), Complex(0, 1)).finished() / std::sqrt(2.0),
        Eigen::Matrix2cd::Identity(),
    };
    return rot[digit];
}

// rho <- U_q rho U_q^dagger for a single-qubit U on qubit q.
void conjugate_single(CMatrix& rho, const Eigen::Matrix2cd& u, int q, int n) {
    const Eigen::Index dim = rho.rows();
    const Eigen::Index bit = Eigen::Index{1} << (n - 1 - q);
    for (Eigen::Index i0 = 0; i0 < dim; ++i0) {
        if (i0 & bit) continue;
        const Eigen::Index i1 = i0 | bit;
        for (Eigen::Index c = 0; c < dim; ++c) {
            const Complex a = rho(i0, c), b = rho(i1, c);
            rho(i0, c) = u(0, 0) * a + u(0, 1) * b;
            rho(i1, c) = u(1, 0) * a + u(1, 1) * b;
        }
    }
    for (Eigen::Index j0 = 0; j0 < dim; ++j0) {
        if (j0 & bit) continue;
        const Eigen::Index j1 = j0 | bit;
        for (Eigen::Index r = 0; r < dim; ++r) {
            const Complex a = rho(r, j0), b = rho(r, j1);
            rho(r, j0) = a * std::conj(u(0, 0)) + b * std::conj(u(0, 1));
            rho(r, j1) = a * std::conj(u(1, 0)) + b * std::conj(u(1, 1));
        }
    }
}

void tabulate(const CMatrix& rho, int q, int n, std::vector<double>& cdf) {
    if (q == n) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            acc += std::max(0.0, rho(i, i).real());
            cdf.push_back(acc);
        }
        // normalise away round-off so that the last entry is exactly 1
        const std::size_t dim = static_cast<std::size_t>(rho.rows());
        for (std::size_t i = cdf.size() - dim; i < cdf.size(); ++i) cdf[i] /= acc;
        cdf.back() = 1.0;
        return;
    }
    for (int digit = 0; digit < 3; ++digit) {
        CMatrix rotated = rho;
        conjugate_single(rotated, basis_rotation(digit), q, n);
        tabulate(rotated, q + 1, n, cdf);
    }
}

double median_of(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

void require_states(std::span<const DensityOperator> states, const ObservableSet& obs) {
    if (states.empty()) throw std::invalid_argument("at least one state is required");
    for (const auto& s : states)
        if (s.num_qubits() != obs.num_qubits()) throw std::invalid_argument("state and observable set disagree on n");
}

}  // namespace

ShadowPlan ShadowPlan::make(long long total_snapshots, int groups, int locality, double eps_cs) {
    if (groups < 1) throw std::invalid_argument("median-of-means needs at least one group");
    if (total_snapshots < groups) throw std::invalid_argument("snapshot count must be at least the group count");
    if (locality < 1) throw std::invalid_argument("locality must be positive");
    return ShadowPlan{total_snapshots, groups, locality, eps_cs};
}

long long snapshot_budget(int k, double eps_cs, std::size_t n_obs, double constant) {
    if (k < 1) throw std::invalid_argument("locality k must be >= 1");
    if (!(eps_cs > 0.0 && eps_cs < 1.0)) throw std::invalid_argument("eps_cs must lie in (0, 1)");
    if (n_obs < 1) throw std::invalid_argument("observable count must be >= 1");
    if (!(constant > 0.0)) throw std::invalid_argument("budget constant must be positive");
    const double m = constant * std::pow(1.5, k) / (eps_cs * eps_cs) * std::log(static_cast<double>(n_obs));
    return std::max<long long>(1, static_cast<long long>(std::ceil(m)));
}

FeatureVector exact_features(std::span<const DensityOperator> states, const ObservableSet& obs) {
    require_states(states, obs);
    FeatureVector f(static_cast<Eigen::Index>(states.size() * obs.size()));
    Eigen::Index k = 0;
    for (const auto& rho : states)
        for (const auto& p : obs.strings()) f(k++) = expectation(rho, p);
    return f;
}

ShadowSampler::ShadowSampler(const CMatrix& rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 2) throw std::invalid_argument("sampler needs a square state matrix");
    n_ = 0;
    while ((Eigen::Index{1} << n_) < rho.rows()) ++n_;
    if ((Eigen::Index{1} << n_) != rho.rows()) throw std::invalid_argument("state dimension is not a power of two");
    dim_ = static_cast<std::size_t>(rho.rows());
    std::size_t combos = 1;
    for (int q = 0; q < n_; ++q) combos *= 3;
    cdf_.reserve(combos * dim_);
    tabulate(rho, 0, n_, cdf_);
}

double ShadowSampler::probability(std::size_t basis_index, std::size_t outcome) const {
    const std::size_t base = basis_index * dim_;
    return outcome == 0 ? cdf_[base] : cdf_[base + outcome] - cdf_[base + outcome - 1];
}

Snapshot ShadowSampler::sample(Rng& rng) const {
    Snapshot s;
    s.bases.resize(static_cast<std::size_t>(n_));
    s.outcomes.resize(static_cast<std::size_t>(n_));
    std::size_t basis_index = 0;
    for (int q = 0; q < n_; ++q) {
        const auto digit = rng.below(3);
        s.bases[static_cast<std::size_t>(q)] = static_cast<Pauli>(1 + digit);
        basis_index = basis_index * 3 + digit;
    }
    const double u = rng.uniform();
    const auto first = cdf_.begin() + static_cast<std::ptrdiff_t>(basis_index * dim_);
    const auto it = std::upper_bound(first, first + static_cast<std::ptrdiff_t>(dim_), u);
    const auto outcome = std::min<std::size_t>(static_cast<std::size_t>(it - first), dim_ - 1);
    for (int q = 0; q < n_; ++q) s.outcomes[static_cast<std::size_t>(q)] = (outcome >> (n_ - 1 - q)) & 1;
    return s;
}

Snapshot collect_snapshot(const DensityOperator& rho, Rng& rng) {
    const auto dev = rho.deviation();
    if (dev.trace > 1e-10 || dev.hermitian > 1e-10 || dev.min_eigenvalue < -DensityOperator::kPsdTol)
        throw std::invalid_argument("snapshot requires a valid density operator");
    return ShadowSampler(rho.matrix()).sample(rng);
}

double shadow_single_estimate(const Snapshot& s, const PauliString& p) {
    if (static_cast<int>(s.bases.size()) != p.num_qubits()) throw std::invalid_argument("snapshot and observable disagree on n");
    double v = 1.0;
    for (int q = 0; q < p.num_qubits(); ++q) {
        const Pauli l = p[q];
        if (l == Pauli::I) continue;
        if (s.bases[static_cast<std::size_t>(q)] != l) return 0.0;
        v *= s.outcomes[static_cast<std::size_t>(q)] ? -3.0 : 3.0;
    }
    return v;
}

FeatureVector estimate_features(std::span<const DensityOperator> states, const ObservableSet& obs,
                                const ShadowPlan& plan, Rng& rng) {
    require_states(states, obs);
    if (plan.groups < 1 || plan.total_snapshots < plan.groups) throw std::invalid_argument("invalid shadow plan");
    if (plan.locality < obs.locality()) throw std::invalid_argument("shadow plan locality is below the observable locality");
    const std::size_t n_obs = obs.size();
    const long long per_group = plan.per_group();
    const auto groups = static_cast<std::size_t>(plan.groups);

    // (qubit, letter) pairs per observable
    std::vector<std::vector<std::pair<int, Pauli>>> supports(n_obs);
    for (std::size_t o = 0; o < n_obs; ++o)
        for (int q : obs[o].support()) supports[o].emplace_back(q, obs[o][q]);

    FeatureVector out(static_cast<Eigen::Index>(states.size() * n_obs));
    std::vector<double> sums(n_obs * groups);
    std::vector<double> means(groups);
    for (std::size_t r = 0; r < states.size(); ++r) {
        const ShadowSampler sampler(states[r].matrix());
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t g = 0; g < groups; ++g) {
            for (long long m = 0; m < per_group; ++m) {
                const Snapshot s = sampler.sample(rng);
                for (std::size_t o = 0; o < n_obs; ++o) {
                    double v = 1.0;
                    for (const auto& [q, l] : supports[o]) {
                        if (s.bases[static_cast<std::size_t>(q)] != l) {
                            v = 0.0;
                            break;
                        }
                        v *= s.outcomes[static_cast<std::size_t>(q)] ? -3.0 : 3.0;
                    }
                    sums[o * groups + g] += v;
                }
            }
        }
        for (std::size_t o = 0; o < n_obs; ++o) {
            for (std::size_t g = 0; g < groups; ++g) means[g] = sums[o * groups + g] / static_cast<double>(per_group);
            out(static_cast<Eigen::Index>(r * n_obs + o)) = median_of(means);
        }
    }
    return out;
}

InjectivityReport injectivity_audit(const Eigen::MatrixXd& features, double tol) {
    if (features.rows() < 2) throw std::invalid_argument("injectivity audit needs at least two feature vectors");
    InjectivityReport rep;
    rep.min_pairwise_distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < features.rows(); ++j) {
            const double d = (features.row(i) - features.row(j)).norm();
            rep.min_pairwise_distance = std::min(rep.min_pairwise_distance, d);
            if (d < tol) {
                ++rep.collisions;
                if (rep.colliding_pairs.size() < 16)
                    rep.colliding_pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
    return rep;
}

namespace {

Eigen::VectorXd featurize_one(const Window& window, const std::vector<SubReservoir>& subs, const JlProjector& projector,
                              const ObservableSet& obs, const MeasurementConfig& meas, std::uint64_t window_id) {
    const Eigen::MatrixXd z = project_window(window, projector);
    const std::size_t n_obs = obs.size();
    Eigen::VectorXd row(static_cast<Eigen::Index>(subs.size() * n_obs));
    for (std::size_t r = 0; r < subs.size(); ++r) {
        const DensityOperator rho = DensityOperator::trusted(subs[r].embed_projected(z));
        FeatureVector f;
        if (meas.backend == Backend::Exact) {
            f = exact_features(std::span<const DensityOperator>(&rho, 1), obs);
        } else {
            Rng rng(derive_seed(meas.seed, stream::kShadows, window_id * subs.size() + r));
            f = estimate_features(std::span<const DensityOperator>(&rho, 1), obs, meas.plan, rng);
        }
        row.segment(static_cast<Eigen::Index>(r * n_obs), static_cast<Eigen::Index>(n_obs)) = f;
    }
    return row;
}

std::vector<SubReservoir> build_subs(const ReservoirConfig& config, const JlProjector& projector,
                                     const ObservableSet& obs) {
    if (projector.n() != config.n || obs.num_qubits() != config.n)
        throw std::invalid_argument("projector, reservoir and observable set disagree on n");
    std::vector<SubReservoir> subs;
    for (const auto& p : config.subs) subs.emplace_back(p, config.topology);
    return subs;
}

}  // namespace

Eigen::MatrixXd featurize(const std::vector<Window>& windows, const ReservoirConfig& config,
                          const JlProjector& projector, const ObservableSet& obs, const MeasurementConfig& meas,
                          std::uint64_t first_window_id) {
    const auto subs = build_subs(config, projector, obs);
    const auto rows = static_cast<Eigen::Index>(windows.size());
    Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(subs.size() * obs.size()));
    bool failed = false;
    std::string message;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < rows; ++i) {
        try {
            out.row(i) = featurize_one(windows[static_cast<std::size_t>(i)], subs, projector, obs, meas,
                                       first_window_id + static_cast<std::uint64_t>(i))
                             .transpose();
        } catch (const std::exception& e) {
#pragma omp critical
            {
                failed = true;
                message = e.what();
            }
        }
    }
    if (failed) throw std::invalid_argument(message);
    return out;
}

Eigen::MatrixXd featurize_serial(const std::vector<Window>& windows, const ReservoirConfig& config,
                                 const JlProjector& projector, const ObservableSet& obs,
                                 const MeasurementConfig& meas, std::uint64_t first_window_id) {
    const auto subs = build_subs(config, projector, obs);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(subs.size() * obs.size()));
    for (std::size_t i = 0; i < windows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) =
            featurize_one(windows[i], subs, projector, obs, meas, first_window_id + i).transpose();
    return out;
}

}  // namespace qrk
