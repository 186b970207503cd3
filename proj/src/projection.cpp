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

#include "qrk/projection.hpp"

#include <cmath>
#include <stdexcept>

#include "qrk/rng.hpp"

namespace qrk {

JlProjector JlProjector::make(int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("projection dimensions must be positive");
    Rng rng(derive_seed(seed, stream::kProjection));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::MatrixXd m(n, d);
    // row-major draw order so that the matrix does not depend on storage order
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
    return JlProjector(std::move(m), seed);
}

JlProjector JlProjector::from_matrix(Eigen::MatrixXd matrix) {
    if (matrix.rows() < 1 || matrix.cols() < 1) throw std::invalid_argument("projection dimensions must be positive");
    return JlProjector(std::move(matrix), 0);
}

Eigen::VectorXd JlProjector::project(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != matrix_.cols()) throw std::invalid_argument("input length does not match projector");
    return matrix_ * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

Eigen::VectorXd JlProjector::project(const Eigen::VectorXd& x) const {
    return project(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

int required_qubits(double eps, double delta, long long w, long long num_windows, double constant) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (w < 1 || num_windows < 1) throw std::invalid_argument("w and N must be positive");
    if (!(constant > 0.0)) throw std::invalid_argument("constant must be positive");
    const double points = static_cast<double>(w) * static_cast<double>(num_windows);
    return static_cast<int>(std::ceil(constant / (eps * eps) * std::log(points / delta)));
}

DistortionReport check_distortion(const JlProjector& p, const std::vector<Eigen::VectorXd>& points, double eps) {
    if (points.size() < 2) throw std::invalid_argument("distortion check needs at least two points");
    std::vector<Eigen::VectorXd> images;
    images.reserve(points.size());
    for (const auto& x : points) images.push_back(p.project(x));

    DistortionReport r;
    bool any = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double orig = (points[i] - points[j]).squaredNorm();
            if (orig == 0.0) continue;
            const double ratio = (images[i] - images[j]).squaredNorm() / orig;
            if (!any) {
                r.max_over = r.max_under = ratio;
                any = true;
            } else {
                r.max_over = std::max(r.max_over, ratio);
                r.max_under = std::min(r.max_under, ratio);
            }
        }
    }
    r.pass = r.max_under >= 1.0 - eps && r.max_over <= 1.0 + eps;
    return r;
}

}  // namespace qrk
