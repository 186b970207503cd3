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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qrk {

struct VarmaSpec {
    int d = 3;
    int p = 3;
    int q = 3;
    double gamma = 0.7;   ///< stability budget, sum of AR spectral norms
    double eta = 0.5;     ///< first MA amplitude
    double rho_ma = 0.5;  ///< MA amplitude decay
    double sigma = 1.0;   ///< innovation standard deviation
    std::size_t burn_in = 1000;
    std::size_t length = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Coefficients of a stable VARMA(p, q) model.
struct VarmaModel {
    VarmaSpec spec;
    std::vector<Eigen::MatrixXd> phi;    ///< Phi_1..Phi_p
    std::vector<Eigen::MatrixXd> theta;  ///< Theta_0 = I, Theta_1..Theta_q
    std::vector<double> ar_weights;      ///< a_i, summing to gamma
};

/// Random stable coefficients from the VARMA stream of spec.seed.
VarmaModel make_varma(const VarmaSpec& spec);

/// length x d series X_t = tanh(Z_t), burn-in discarded, zero initial state.
Eigen::MatrixXd simulate(const VarmaModel& model);

/// Spectral radius of the dp x dp VAR companion matrix.
double companion_spectral_radius(const VarmaModel& model);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

enum class FunctionalKind { Forecast, ExpFading, Volterra };

std::string to_string(FunctionalKind k);
/// Accepts "forecast", "exp_fading", "volterra".
FunctionalKind parse_functional_kind(const std::string& s);

struct FunctionalSpec {
    FunctionalKind kind = FunctionalKind::Forecast;
    Eigen::VectorXd u;
    Eigen::VectorXd v;  ///< empty unless kind == Volterra
    double alpha = 0.9;
    std::uint64_t seed = 0;
};

/// u = g/|g| with g ~ N(0, I_d); for Volterra v is drawn next, orthogonalized
/// against u and normalized. u depends only on (d, seed), not on the kind.
FunctionalSpec make_functional(FunctionalKind kind, int d, double alpha, std::uint64_t seed);

/// Label of the window ending at row t of `series` (rows are time, oldest first).
double label(const Eigen::MatrixXd& series, std::size_t t, const FunctionalSpec& spec, std::size_t w);

/// A priori bound on |label| for inputs in (-1, 1)^d.
double label_bound(const FunctionalSpec& spec, std::size_t w, int d);

struct WindowDataset {
    std::vector<Eigen::MatrixXd> windows;  ///< each w x d, newest row last
    Eigen::VectorXd labels;
    std::vector<std::size_t> ends;  ///< end row of each window, chronological
    std::size_t w = 0;
    std::size_t s = 0;
    std::size_t g = 0;
    std::uint64_t source_hash = 0;

    std::size_t size() const { return windows.size(); }
    /// First row of window i.
    std::size_t start(std::size_t i) const { return ends[i] + 1 - w; }
};

/// Row count a strided extraction needs: origin + N s + w, plus one future
/// row for the forecast functional.
std::size_t required_length(std::size_t w, std::size_t s, std::size_t n, bool needs_future, std::size_t origin = 0);

/// N windows of length w with end rows origin + (i + 1) s + w - 1.
/// Throws DataError naming the required length when the series is too short.
WindowDataset make_windows(const Eigen::MatrixXd& series, const FunctionalSpec& spec, std::size_t w, std::size_t s,
                           std::size_t n, std::size_t origin = 0);

/// FNV-1a over the series values.
std::uint64_t series_hash(const Eigen::MatrixXd& series);

}  // namespace qrk
