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
#include <vector>

#include <Eigen/Dense>

namespace qrk {

/// Gaussian Johnson-Lindenstrauss projection R^d -> R^n with entries N(0, 1/n).
class JlProjector {
public:
    /// Draws the n x d matrix from the projection stream of `seed`.
    static JlProjector make(int n, int d, std::uint64_t seed);
    /// Wraps an explicit matrix (tests, audits). The seed is recorded as 0.
    static JlProjector from_matrix(Eigen::MatrixXd matrix);

    int n() const { return static_cast<int>(matrix_.rows()); }
    int d() const { return static_cast<int>(matrix_.cols()); }
    std::uint64_t seed() const { return seed_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    Eigen::VectorXd project(std::span<const double> x) const;
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;

private:
    JlProjector(Eigen::MatrixXd m, std::uint64_t seed) : matrix_(std::move(m)), seed_(seed) {}

    Eigen::MatrixXd matrix_;
    std::uint64_t seed_ = 0;
};

/// Default constant in n = ceil(C eps^-2 ln(wN / delta)).
inline constexpr double kJlConstant = 4.0;

/// Qubit count for which the projection is an eps-embedding of w*N points
/// with probability 1 - delta.
int required_qubits(double eps, double delta, long long w, long long num_windows, double constant = kJlConstant);

struct DistortionReport {
    double max_over = 1.0;   ///< largest ratio |Pu - Pv|^2 / |u - v|^2
    double max_under = 1.0;  ///< smallest such ratio
    bool pass = true;
};

/// Exhaustive pairwise distortion check; identical pairs are skipped.
DistortionReport check_distortion(const JlProjector& p, const std::vector<Eigen::VectorXd>& points, double eps);

}  // namespace qrk
