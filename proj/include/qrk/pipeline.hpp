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
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qrk/bounds.hpp"
#include "qrk/kernel.hpp"
#include "qrk/measure.hpp"
#include "qrk/reservoir.hpp"
#include "qrk/synthdata.hpp"

namespace qrk {

struct DataSection {
    VarmaSpec varma;  ///< length and seed are filled in from the run
    double alpha = 0.9;
    std::vector<FunctionalKind> tasks{FunctionalKind::Forecast, FunctionalKind::ExpFading, FunctionalKind::Volterra};
    std::size_t w = 25;
    std::size_t s = 100;
    std::size_t n_train = 1600;
    std::size_t n_test = 200;
};

struct ReservoirSection {
    int n = 5;
    int r = 3;
    double lambda_lo = kDefaultLambdaLo;
    double lambda_hi = kDefaultLambdaHi;
    std::string topology = "ring";                ///< "ring" or "edges"
    std::vector<std::pair<int, int>> edges;       ///< used when topology == "edges"
};

struct MeasurementSection {
    Backend backend = Backend::Exact;
    long long shots = 1000;
    int groups = 10;
    int locality = 2;
};

struct KernelSection {
    bool tune = true;
    TunerConfig tuner;
    std::size_t tune_max_n = 1600;  ///< tuning uses the first min(N_train, tune_max_n) windows
    double nu = 1.5;                ///< used when tune == false
    double xi = 1.0;
    // tuner.convention also governs every readout fit
};

struct ReadoutSection {
    double lambda_reg = 1e-6;                 ///< sample-size sweep and bound report
    std::vector<double> sweep_grid;           ///< regularization sweep, ascending
    std::size_t sweep_reg_n = 200;            ///< training windows in the regularization sweep
    std::vector<std::size_t> n_grid{100, 200, 400, 800, 1600};
};

struct BoundSection {
    double delta = 0.05;
    std::optional<double> beta_g;  ///< explicit beta_IO(g); otherwise geometric if both constants are given
    std::optional<double> beta0;
    std::optional<double> beta1;
    std::optional<double> lambda_norm;  ///< RKHS budget; otherwise the fitted model's norm
};

/// Full experiment configuration. JSON round-trips; unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;
    DataSection data;
    ReservoirSection reservoir;
    MeasurementSection measurement;
    KernelSection kernel;
    ReadoutSection readout;
    BoundSection bound;
    int workers = 0;  ///< 0 keeps the OpenMP default
    std::string output_dir = "out";

    RunConfig();
    /// Throws ConfigError on unknown keys, wrong types or invalid values.
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
};

/// 16 log-spaced values in [1e-12, 1e2].
std::vector<double> default_sweep_grid();

/// Row count of the generated series.
std::size_t series_length(const RunConfig& cfg);
/// Origin passed to make_windows for the test windows: one full stride after the training range.
std::size_t test_origin(const RunConfig& cfg);

struct SplitData {
    std::vector<Window> windows;
    std::vector<std::size_t> ends;
    std::vector<Eigen::VectorXd> labels;  ///< one vector per task, in config order
};

struct GeneratedData {
    Eigen::MatrixXd series;
    SplitData train;
    SplitData test;
    std::vector<FunctionalSpec> functionals;
    std::uint64_t series_hash = 0;
};

GeneratedData generate_data(const RunConfig& cfg);
/// Rebuilds windows from a series and window end rows; labels are supplied.
SplitData windows_from_series(const Eigen::MatrixXd& series, const std::vector<std::size_t>& ends, std::size_t w);

ReservoirConfig make_reservoir(const RunConfig& cfg);
JlProjector make_projector(const RunConfig& cfg);
ObservableSet make_observables(const RunConfig& cfg);
MeasurementConfig make_measurement(const RunConfig& cfg);

/// Cache key over the series, the embedding configuration, backend, M and seed.
std::uint64_t feature_cache_key(const RunConfig& cfg, std::uint64_t series_hash, const std::string& split);

struct RegSweepRow {
    double lambda_reg = 0.0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    double rkhs_norm = 0.0;
    bool rank_deficient = false;  ///< solve failed; metrics are NaN
};

/// One KRR fit per grid value on the same features.
/// Grid values whose system is numerically singular are flagged, not thrown.
std::vector<RegSweepRow> sweep_regularization(const MaternParams& p, const std::vector<double>& grid,
                                              const Eigen::MatrixXd& f_train, const Eigen::VectorXd& y_train,
                                              const Eigen::MatrixXd& f_test, const Eigen::VectorXd& y_test,
                                              RidgeConvention convention = RidgeConvention::SampleScaled);

struct SizeSweepRow {
    std::size_t n = 0;
    double train_mse = 0.0;
    double test_mse = 0.0;
};

/// Fits on chronological prefixes of the training set; evaluates on the full test set.
std::vector<SizeSweepRow> sweep_sample_size(const MaternParams& p, double lambda_reg,
                                            const std::vector<std::size_t>& n_grid, const Eigen::MatrixXd& f_train,
                                            const Eigen::VectorXd& y_train, const Eigen::MatrixXd& f_test,
                                            const Eigen::VectorXd& y_test,
                                            RidgeConvention convention = RidgeConvention::SampleScaled);

/// Least-squares fit test_mse ~ floor + c / sqrt(N).
struct RootNFit {
    double c = 0.0;
    double floor = 0.0;
    double r_squared = 0.0;
};
RootNFit fit_root_n(const std::vector<SizeSweepRow>& rows);

/// Slope of log(test_mse - floor) against log N over rows with test_mse > floor.
double log_log_slope(const std::vector<SizeSweepRow>& rows, double floor);

/// Command entry points. Each reads and writes files under cfg.output_dir
/// and merges its results into manifest.json.
void cmd_generate(const RunConfig& cfg);
void cmd_embed(const RunConfig& cfg);
void cmd_tune(const RunConfig& cfg);
void cmd_sweep_reg(const RunConfig& cfg);
void cmd_sweep_n(const RunConfig& cfg);
void cmd_bound(const RunConfig& cfg);
void cmd_all(const RunConfig& cfg);

/// Software version echoed into the manifest.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace qrk
