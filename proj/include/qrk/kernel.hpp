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
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qrk {

/// Unit-variance Matern profile parameters: smoothness nu and lengthscale xi.
struct MaternParams {
    double nu = 1.5;
    double xi = 1.0;

    static MaternParams make(double nu, double xi);
};

/// phi(s) = 2^{1-nu}/Gamma(nu) (sqrt(2 nu) s/xi)^nu K_nu(sqrt(2 nu) s/xi), phi(0) = 1.
/// Half-integer orders use the closed form.
double matern_profile(const MaternParams& p, double s);
/// Always evaluates through the general Bessel path.
double matern_profile_general(const MaternParams& p, double s);
/// exp(-z) times a polynomial in z; half-integer nu only.
double matern_profile_closed_form(const MaternParams& p, double s);

/// phi(|a - b|)
double kernel_eval(const MaternParams& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Euclidean distances between the rows of `a` and the rows of `b`.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// Distances among the rows of `a` (symmetric, zero diagonal).
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a);
/// phi applied entrywise.
Eigen::MatrixXd apply_profile(const MaternParams& p, const Eigen::MatrixXd& distances);

/// Gram matrix over the rows of `features`, assembled in parallel by row.
Eigen::MatrixXd gram(const MaternParams& p, const Eigen::MatrixXd& features);
/// Single-threaded reference of `gram`; results are bit-identical.
Eigen::MatrixXd gram_serial(const MaternParams& p, const Eigen::MatrixXd& features);
/// K_ij = phi(|a_i - b_j|)
Eigen::MatrixXd cross_gram(const MaternParams& p, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// How the ridge parameter enters the linear system.
enum class RidgeConvention {
    SampleScaled,  ///< (K + N lambda I) alpha = y
    Plain,         ///< (K + lambda I) alpha = y
};

std::string to_string(RidgeConvention c);
/// Accepts "sample_scaled" and "plain".
RidgeConvention parse_ridge_convention(const std::string& s);

struct KrrModel {
    MaternParams matern;
    double lambda_reg = 0.0;
    RidgeConvention convention = RidgeConvention::SampleScaled;
    Eigen::MatrixXd support;  ///< N x D training features
    Eigen::VectorXd alpha;
    Eigen::VectorXd y_train;
};

/// Solves (K + ridge I) alpha = y. Cholesky when ridge > 0, pivoted LDL^T
/// otherwise or when Cholesky breaks down, then iterative refinement.
/// Throws NumericalRankError when the system is numerically singular or the
/// residual exceeds 1e-8 |y|.
Eigen::VectorXd krr_solve(const Eigen::MatrixXd& gram_matrix, const Eigen::VectorXd& y, double ridge);

KrrModel krr_fit(const MaternParams& p, double lambda_reg, const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                 RidgeConvention convention = RidgeConvention::SampleScaled);
/// Same as krr_fit with a precomputed Gram matrix of `features`.
KrrModel krr_fit_with_gram(const MaternParams& p, double lambda_reg, const Eigen::MatrixXd& features,
                           const Eigen::MatrixXd& gram_matrix, const Eigen::VectorXd& y,
                           RidgeConvention convention = RidgeConvention::SampleScaled);

/// y_j = sum_i alpha_i phi(|support_i - x_j|)
Eigen::VectorXd krr_predict(const KrrModel& model, const Eigen::MatrixXd& features_new);

/// sqrt(alpha^T K alpha)
double rkhs_norm(const KrrModel& model);

double mean_squared_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct TunerConfig {
    std::vector<double> nu_grid{0.5, 1.5, 2.5, 5.0};
    double xi_lo = 1e-3;
    double xi_hi = 1e3;
    double val_ratio = 0.2;
    double lambda_reg = 1e-6;
    int xi_maxiter = 80;
    std::uint64_t split_seed = 0;
    RidgeConvention convention = RidgeConvention::SampleScaled;

    void validate() const;
};

struct TuneTrial {
    double nu = 0.0;
    double xi = 0.0;
    double val_mse = 0.0;
};

struct TuneResult {
    MaternParams best;
    double val_mse = 0.0;
    std::vector<TuneTrial> trials;  ///< every evaluation, in order
};

/// Shuffled train/validation split, then for each nu a bounded search over
/// log10(xi): a coarse scan followed by golden-section refinement, at most
/// xi_maxiter evaluations per nu. Ties go to smaller nu, then smaller xi.
TuneResult tune(const TunerConfig& cfg, const Eigen::MatrixXd& features, const Eigen::VectorXd& y);

/// Indices of the deterministic validation split (first) and training split (second).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_split(std::size_t n, double val_ratio,
                                                                               std::uint64_t seed);

}  // namespace qrk
