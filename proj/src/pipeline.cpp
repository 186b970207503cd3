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

#include "qrk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>

#include "qrk/errors.hpp"
#include "qrk/hash.hpp"
#include "qrk/io.hpp"

namespace qrk {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- config parsing -------------------------------------------------------

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("wrong type for '" + where + "." + key + "'");
    }
}

void read_opt(const json& j, const char* key, std::optional<double>& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    if (!j.at(key).is_number()) throw ConfigError("wrong type for '" + where + "." + key + "'");
    out = j.at(key).get<double>();
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string backend_name(Backend b) { return b == Backend::Exact ? "exact" : "shadows"; }

Backend parse_backend(const std::string& s) {
    if (s == "exact") return Backend::Exact;
    if (s == "shadows") return Backend::Shadows;
    throw ConfigError("unknown backend '" + s + "' (expected exact or shadows)");
}

// ---- manifest -------------------------------------------------------------

fs::path out_path(const RunConfig& cfg, const std::string& name) { return fs::path(cfg.output_dir) / name; }

json load_manifest(const RunConfig& cfg) {
    const fs::path p = out_path(cfg, "manifest.json");
    if (!fs::exists(p)) return json::object();
    try {
        return json::parse(io::read_text(p));
    } catch (const json::exception& e) {
        throw DataError("manifest.json is not valid JSON: " + std::string(e.what()));
    }
}

void save_manifest(const RunConfig& cfg, const json& m) { io::write_text(out_path(cfg, "manifest.json"), m.dump(2) + "\n"); }

std::uint64_t json_hash(const json& j) { return Fnv1a().str(j.dump()).digest(); }

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Hash of everything that determines the generated dataset.
std::uint64_t data_key(const RunConfig& cfg) {
    const json c = cfg.to_json();
    return json_hash(json{{"seed", c["seed"]}, {"data", c["data"]}});
}

const char* kNote = "manifest: manifest.json";

void record_timing(json& m, const std::string& cmd, std::chrono::steady_clock::time_point t0) {
    m["timings_seconds"][cmd] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Manifest of an existing dataset generated from the same data configuration.
json require_dataset(const RunConfig& cfg) {
    json m = load_manifest(cfg);
    if (!m.contains("data_key")) throw DataError("no dataset in " + cfg.output_dir + "; run generate first");
    if (m["data_key"].get<std::string>() != hex(data_key(cfg)))
        throw DataError("dataset in " + cfg.output_dir + " was generated from a different configuration; rerun generate");
    m["config"] = cfg.to_json();
    return m;
}

struct LoadedSplit {
    SplitData data;
    Eigen::MatrixXd features;
};

struct Loaded {
    Eigen::MatrixXd series;
    LoadedSplit train, test;
};

SplitData load_split(const RunConfig& cfg, const Eigen::MatrixXd& series, const std::string& split) {
    const io::Table t = io::read_csv(out_path(cfg, "windows_" + split + ".csv"));
    const std::size_t end_col = t.column("end");
    std::vector<std::size_t> ends;
    for (const auto& row : t.rows) ends.push_back(static_cast<std::size_t>(row[end_col]));
    SplitData d = windows_from_series(series, ends, cfg.data.w);
    for (FunctionalKind k : cfg.data.tasks) {
        const std::size_t c = t.column("y_" + to_string(k));
        Eigen::VectorXd y(static_cast<Eigen::Index>(t.rows.size()));
        for (std::size_t i = 0; i < t.rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = t.rows[i][c];
        d.labels.push_back(y);
    }
    return d;
}

Eigen::MatrixXd load_series(const RunConfig& cfg) {
    const io::Table t = io::read_csv(out_path(cfg, "series.csv"));
    if (t.columns.size() != static_cast<std::size_t>(cfg.data.varma.d) + 1)
        throw DataError("series.csv has " + std::to_string(t.columns.size()) + " columns, expected t plus d");
    Eigen::MatrixXd s(static_cast<Eigen::Index>(t.rows.size()), cfg.data.varma.d);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (int c = 0; c < cfg.data.varma.d; ++c)
            s(static_cast<Eigen::Index>(i), c) = t.rows[i][static_cast<std::size_t>(c) + 1];
    return s;
}

Loaded load_all(const RunConfig& cfg, bool with_features) {
    Loaded l;
    l.series = load_series(cfg);
    l.train.data = load_split(cfg, l.series, "train");
    l.test.data = load_split(cfg, l.series, "test");
    if (with_features) {
        const std::uint64_t h = series_hash(l.series);
        for (auto* sp : {&l.train, &l.test}) {
            const std::string name = sp == &l.train ? "train" : "test";
            const auto st = io::read_feature_cache(out_path(cfg, "features_" + name + ".bin"),
                                                   feature_cache_key(cfg, h, name), sp->features);
            if (st != io::CacheStatus::Hit)
                throw DataError("features_" + name + ".bin is missing or stale; run embed first");
            if (static_cast<std::size_t>(sp->features.rows()) != sp->data.windows.size())
                throw DataError("features_" + name + ".bin does not match the window count");
        }
    }
    return l;
}

std::string tuner_key(const RunConfig& cfg) {
    const json c = cfg.to_json();
    return hex(json_hash(json{{"seed", c["seed"]}, {"data", c["data"]}, {"reservoir", c["reservoir"]},
                              {"measurement", c["measurement"]}, {"kernel", c["kernel"]}}));
}

/// Selection recorded by tune, a fixed kernel, or a fresh tuning run.
MaternParams resolve_kernel(const RunConfig& cfg, json& manifest, const Loaded& l, std::size_t task);

std::vector<TuneTrial> run_tuning(const RunConfig& cfg, json& manifest, const Loaded& l, std::size_t task) {
    const FunctionalKind k = cfg.data.tasks[task];
    const auto n = static_cast<Eigen::Index>(std::min(cfg.kernel.tune_max_n, l.train.data.windows.size()));
    TunerConfig tc = cfg.kernel.tuner;
    tc.split_seed = cfg.seed;
    const TuneResult r = tune(tc, l.train.features.topRows(n), l.train.data.labels[task].head(n));
    manifest["tuned"][to_string(k)] = {{"nu", r.best.nu},       {"xi", r.best.xi},
                                       {"val_mse", r.val_mse}, {"n_used", n},
                                       {"trials", r.trials.size()}, {"key", tuner_key(cfg)}};
    return r.trials;
}

MaternParams resolve_kernel(const RunConfig& cfg, json& manifest, const Loaded& l, std::size_t task) {
    if (!cfg.kernel.tune) return MaternParams::make(cfg.kernel.nu, cfg.kernel.xi);
    const std::string name = to_string(cfg.data.tasks[task]);
    const bool have = manifest.contains("tuned") && manifest["tuned"].contains(name) &&
                      manifest["tuned"][name]["key"].get<std::string>() == tuner_key(cfg);
    if (!have) run_tuning(cfg, manifest, l, task);
    const json& t = manifest["tuned"][name];
    return MaternParams{t["nu"].get<double>(), t["xi"].get<double>()};
}

double variance(const Eigen::VectorXd& y) {
    return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size());
}

}  // namespace

// ---- RunConfig ------------------------------------------------------------

RunConfig::RunConfig() { readout.sweep_grid = default_sweep_grid(); }

std::vector<double> default_sweep_grid() {
    std::vector<double> g;
    for (int i = 0; i < 16; ++i) g.push_back(std::pow(10.0, -12.0 + 14.0 * i / 15.0));
    return g;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    reject_unknown(j, "config", {"seed", "data", "reservoir", "measurement", "kernel", "readout", "bound", "workers",
                                 "output_dir"});
    read(j, "seed", c.seed, "config");
    read(j, "workers", c.workers, "config");
    read(j, "output_dir", c.output_dir, "config");
    if (j.contains("data")) {
        const json& d = j["data"];
        reject_unknown(d, "data", {"d", "p", "q", "gamma", "eta", "rho_ma", "sigma", "burn_in", "alpha", "tasks", "w",
                                   "s", "n_train", "n_test"});
        VarmaSpec& v = c.data.varma;
        read(d, "d", v.d, "data");
        read(d, "p", v.p, "data");
        read(d, "q", v.q, "data");
        read(d, "gamma", v.gamma, "data");
        read(d, "eta", v.eta, "data");
        read(d, "rho_ma", v.rho_ma, "data");
        read(d, "sigma", v.sigma, "data");
        read(d, "burn_in", v.burn_in, "data");
        read(d, "alpha", c.data.alpha, "data");
        read(d, "w", c.data.w, "data");
        read(d, "s", c.data.s, "data");
        read(d, "n_train", c.data.n_train, "data");
        read(d, "n_test", c.data.n_test, "data");
        if (d.contains("tasks")) {
            std::vector<std::string> names;
            read(d, "tasks", names, "data");
            c.data.tasks.clear();
            for (const auto& n : names) c.data.tasks.push_back(parse_functional_kind(n));
        }
    }
    if (j.contains("reservoir")) {
        const json& r = j["reservoir"];
        reject_unknown(r, "reservoir", {"n", "R", "lambda_lo", "lambda_hi", "topology", "edges"});
        read(r, "n", c.reservoir.n, "reservoir");
        read(r, "R", c.reservoir.r, "reservoir");
        read(r, "lambda_lo", c.reservoir.lambda_lo, "reservoir");
        read(r, "lambda_hi", c.reservoir.lambda_hi, "reservoir");
        read(r, "topology", c.reservoir.topology, "reservoir");
        read(r, "edges", c.reservoir.edges, "reservoir");
    }
    if (j.contains("measurement")) {
        const json& m = j["measurement"];
        reject_unknown(m, "measurement", {"backend", "shots", "groups", "locality"});
        std::string b = backend_name(c.measurement.backend);
        read(m, "backend", b, "measurement");
        c.measurement.backend = parse_backend(b);
        read(m, "shots", c.measurement.shots, "measurement");
        read(m, "groups", c.measurement.groups, "measurement");
        read(m, "locality", c.measurement.locality, "measurement");
    }
    if (j.contains("kernel")) {
        const json& k = j["kernel"];
        reject_unknown(k, "kernel", {"tune", "nu_grid", "xi_lo", "xi_hi", "val_ratio", "lambda_reg", "xi_maxiter",
                                     "tune_max_n", "nu", "xi", "ridge_convention"});
        read(k, "tune", c.kernel.tune, "kernel");
        read(k, "nu_grid", c.kernel.tuner.nu_grid, "kernel");
        read(k, "xi_lo", c.kernel.tuner.xi_lo, "kernel");
        read(k, "xi_hi", c.kernel.tuner.xi_hi, "kernel");
        read(k, "val_ratio", c.kernel.tuner.val_ratio, "kernel");
        read(k, "lambda_reg", c.kernel.tuner.lambda_reg, "kernel");
        read(k, "xi_maxiter", c.kernel.tuner.xi_maxiter, "kernel");
        read(k, "tune_max_n", c.kernel.tune_max_n, "kernel");
        read(k, "nu", c.kernel.nu, "kernel");
        read(k, "xi", c.kernel.xi, "kernel");
        if (k.contains("ridge_convention")) {
            std::string rc;
            read(k, "ridge_convention", rc, "kernel");
            try {
                c.kernel.tuner.convention = parse_ridge_convention(rc);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (j.contains("readout")) {
        const json& r = j["readout"];
        reject_unknown(r, "readout", {"lambda_reg", "sweep_grid", "sweep_reg_n", "n_grid"});
        read(r, "lambda_reg", c.readout.lambda_reg, "readout");
        read(r, "sweep_grid", c.readout.sweep_grid, "readout");
        read(r, "sweep_reg_n", c.readout.sweep_reg_n, "readout");
        read(r, "n_grid", c.readout.n_grid, "readout");
    }
    if (j.contains("bound")) {
        const json& b = j["bound"];
        reject_unknown(b, "bound", {"delta", "beta_g", "beta0", "beta1", "lambda_norm"});
        read(b, "delta", c.bound.delta, "bound");
        read_opt(b, "beta_g", c.bound.beta_g, "bound");
        read_opt(b, "beta0", c.bound.beta0, "bound");
        read_opt(b, "beta1", c.bound.beta1, "bound");
        read_opt(b, "lambda_norm", c.bound.lambda_norm, "bound");
    }
    c.validate();
    return c;
}

json RunConfig::to_json() const {
    std::vector<std::string> tasks;
    for (FunctionalKind k : data.tasks) tasks.push_back(to_string(k));
    const VarmaSpec& v = data.varma;
    return json{
        {"seed", seed},
        {"workers", workers},
        {"output_dir", output_dir},
        {"data",
         {{"d", v.d}, {"p", v.p}, {"q", v.q}, {"gamma", v.gamma}, {"eta", v.eta}, {"rho_ma", v.rho_ma},
          {"sigma", v.sigma}, {"burn_in", v.burn_in}, {"alpha", data.alpha}, {"tasks", tasks}, {"w", data.w},
          {"s", data.s}, {"n_train", data.n_train}, {"n_test", data.n_test}}},
        {"reservoir",
         {{"n", reservoir.n}, {"R", reservoir.r}, {"lambda_lo", reservoir.lambda_lo},
          {"lambda_hi", reservoir.lambda_hi}, {"topology", reservoir.topology}, {"edges", reservoir.edges}}},
        {"measurement",
         {{"backend", backend_name(measurement.backend)}, {"shots", measurement.shots},
          {"groups", measurement.groups}, {"locality", measurement.locality}}},
        {"kernel",
         {{"tune", kernel.tune}, {"nu_grid", kernel.tuner.nu_grid}, {"xi_lo", kernel.tuner.xi_lo},
          {"xi_hi", kernel.tuner.xi_hi}, {"val_ratio", kernel.tuner.val_ratio},
          {"lambda_reg", kernel.tuner.lambda_reg}, {"xi_maxiter", kernel.tuner.xi_maxiter},
          {"tune_max_n", kernel.tune_max_n}, {"nu", kernel.nu}, {"xi", kernel.xi},
          {"ridge_convention", to_string(kernel.tuner.convention)}}},
        {"readout",
         {{"lambda_reg", readout.lambda_reg}, {"sweep_grid", readout.sweep_grid},
          {"sweep_reg_n", readout.sweep_reg_n}, {"n_grid", readout.n_grid}}},
        {"bound",
         {{"delta", bound.delta}, {"beta_g", opt_json(bound.beta_g)}, {"beta0", opt_json(bound.beta0)},
          {"beta1", opt_json(bound.beta1)}, {"lambda_norm", opt_json(bound.lambda_norm)}}},
    };
}

void RunConfig::validate() const {
    try {
        data.varma.validate();
        if (!(data.alpha > 0.0 && data.alpha < 1.0)) throw ConfigError("data.alpha must lie in (0, 1)");
        if (data.tasks.empty()) throw ConfigError("data.tasks is empty");
        if (data.w < 1 || data.s < data.w) throw ConfigError("need w >= 1 and s >= w");
        if (data.n_train < 5 || data.n_test < 1) throw ConfigError("need n_train >= 5 and n_test >= 1");
        if (reservoir.n < 1 || reservoir.n > 10) throw ConfigError("reservoir.n must lie in [1, 10]");
        if (reservoir.r < 1) throw ConfigError("reservoir.R must be positive");
        if (!(0.0 < reservoir.lambda_lo && reservoir.lambda_lo < reservoir.lambda_hi && reservoir.lambda_hi < 1.0))
            throw ConfigError("need 0 < lambda_lo < lambda_hi < 1");
        if (reservoir.topology != "ring" && reservoir.topology != "edges")
            throw ConfigError("reservoir.topology must be ring or edges");
        if (reservoir.topology == "edges") Topology::from_edges(reservoir.n, reservoir.edges);
        if (measurement.locality < 1 || measurement.locality > reservoir.n)
            throw ConfigError("measurement.locality must lie in [1, n]");
        ShadowPlan::make(measurement.shots, measurement.groups, measurement.locality);
        kernel.tuner.validate();
        if (!kernel.tune) MaternParams::make(kernel.nu, kernel.xi);
        if (!(readout.lambda_reg >= 0.0)) throw ConfigError("readout.lambda_reg must be nonnegative");
        if (readout.sweep_grid.empty()) throw ConfigError("readout.sweep_grid is empty");
        for (double l : readout.sweep_grid)
            if (!(l >= 0.0)) throw ConfigError("readout.sweep_grid values must be nonnegative");
        if (readout.sweep_reg_n < 1) throw ConfigError("readout.sweep_reg_n must be positive");
        for (std::size_t n : readout.n_grid)
            if (n < 1 || n > data.n_train) throw ConfigError("readout.n_grid values must lie in [1, n_train]");
        if (!(bound.delta > 0.0 && bound.delta < 1.0)) throw ConfigError("bound.delta must lie in (0, 1)");
        if (workers < 0) throw ConfigError("workers must be nonnegative");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

// ---- data -----------------------------------------------------------------

std::size_t test_origin(const RunConfig& cfg) { return (cfg.data.n_train + 1) * cfg.data.s; }

std::size_t series_length(const RunConfig& cfg) {
    return required_length(cfg.data.w, cfg.data.s, cfg.data.n_test, true, test_origin(cfg));
}

SplitData windows_from_series(const Eigen::MatrixXd& series, const std::vector<std::size_t>& ends, std::size_t w) {
    SplitData d;
    for (std::size_t e : ends) {
        if (e + 1 < w || e >= static_cast<std::size_t>(series.rows()))
            throw DataError("window end " + std::to_string(e) + " lies outside the series");
        d.windows.push_back(series.middleRows(static_cast<Eigen::Index>(e + 1 - w), static_cast<Eigen::Index>(w)));
        d.ends.push_back(e);
    }
    return d;
}

GeneratedData generate_data(const RunConfig& cfg) {
    cfg.validate();
    VarmaSpec spec = cfg.data.varma;
    spec.seed = cfg.seed;
    spec.length = series_length(cfg);
    GeneratedData g;
    g.series = simulate(make_varma(spec));
    g.series_hash = series_hash(g.series);
    const std::size_t w = cfg.data.w, s = cfg.data.s;
    for (FunctionalKind k : cfg.data.tasks) {
        g.functionals.push_back(make_functional(k, spec.d, cfg.data.alpha, cfg.seed));
        const WindowDataset tr = make_windows(g.series, g.functionals.back(), w, s, cfg.data.n_train, 0);
        const WindowDataset te = make_windows(g.series, g.functionals.back(), w, s, cfg.data.n_test, test_origin(cfg));
        if (g.train.windows.empty()) {
            g.train.windows = tr.windows;
            g.train.ends = tr.ends;
            g.test.windows = te.windows;
            g.test.ends = te.ends;
        }
        g.train.labels.push_back(tr.labels);
        g.test.labels.push_back(te.labels);
    }
    const std::size_t last_train_row = g.train.ends.back() + 1;  // forecast reads one row ahead
    const std::size_t first_test_row = g.test.ends.front() + 1 - w;
    if (last_train_row >= first_test_row) throw std::logic_error("train and test windows overlap");
    return g;
}

ReservoirConfig make_reservoir(const RunConfig& cfg) {
    const Topology topo = cfg.reservoir.topology == "ring" ? Topology::ring(cfg.reservoir.n)
                                                           : Topology::from_edges(cfg.reservoir.n, cfg.reservoir.edges);
    return ReservoirConfig::make(cfg.reservoir.n, cfg.reservoir.r, topo, cfg.seed, cfg.reservoir.lambda_lo,
                                 cfg.reservoir.lambda_hi);
}

JlProjector make_projector(const RunConfig& cfg) { return JlProjector::make(cfg.reservoir.n, cfg.data.varma.d, cfg.seed); }

ObservableSet make_observables(const RunConfig& cfg) {
    return ObservableSet::all_local(cfg.reservoir.n, cfg.measurement.locality);
}

MeasurementConfig make_measurement(const RunConfig& cfg) {
    MeasurementConfig m;
    m.backend = cfg.measurement.backend;
    m.plan = ShadowPlan::make(cfg.measurement.shots, cfg.measurement.groups, cfg.measurement.locality);
    m.seed = cfg.seed;
    return m;
}

std::uint64_t feature_cache_key(const RunConfig& cfg, std::uint64_t hash, const std::string& split) {
    const json c = cfg.to_json();
    json key{{"seed", c["seed"]}, {"data", c["data"]}, {"reservoir", c["reservoir"]}, {"split", split}};
    key["measurement"] = c["measurement"];
    if (cfg.measurement.backend == Backend::Exact) {
        key["measurement"].erase("shots");
        key["measurement"].erase("groups");
    }
    return Fnv1a().value(hash).str(key.dump()).digest();
}

// ---- experiments ----------------------------------------------------------

std::vector<RegSweepRow> sweep_regularization(const MaternParams& p, const std::vector<double>& grid,
                                              const Eigen::MatrixXd& f_train, const Eigen::VectorXd& y_train,
                                              const Eigen::MatrixXd& f_test, const Eigen::VectorXd& y_test,
                                              RidgeConvention convention) {
    const Eigen::MatrixXd k = gram(p, f_train);
    const Eigen::MatrixXd k_test = cross_gram(p, f_test, f_train);
    const double n = convention == RidgeConvention::SampleScaled ? static_cast<double>(f_train.rows()) : 1.0;
    std::vector<RegSweepRow> rows;
    for (double lam : grid) {
        RegSweepRow r;
        r.lambda_reg = lam;
        Eigen::VectorXd alpha;
        try {
            alpha = krr_solve(k, y_train, n * lam);
        } catch (const NumericalRankError&) {
            r.rank_deficient = true;
            r.train_mse = r.test_mse = r.rkhs_norm = std::nan("");
            rows.push_back(r);
            continue;
        }
        r.train_mse = mean_squared_error(k * alpha, y_train);
        r.test_mse = mean_squared_error(k_test * alpha, y_test);
        r.rkhs_norm = std::sqrt(std::max(0.0, alpha.dot(k * alpha)));
        rows.push_back(r);
    }
    return rows;
}

std::vector<SizeSweepRow> sweep_sample_size(const MaternParams& p, double lambda_reg,
                                            const std::vector<std::size_t>& n_grid, const Eigen::MatrixXd& f_train,
                                            const Eigen::VectorXd& y_train, const Eigen::MatrixXd& f_test,
                                            const Eigen::VectorXd& y_test, RidgeConvention convention) {
    if (n_grid.empty()) return {};
    const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
    if (n_max > static_cast<std::size_t>(f_train.rows())) throw std::invalid_argument("n_grid exceeds the training set");
    const auto nm = static_cast<Eigen::Index>(n_max);
    const Eigen::MatrixXd k = gram(p, f_train.topRows(nm));
    const Eigen::MatrixXd k_test = cross_gram(p, f_test, f_train.topRows(nm));
    std::vector<SizeSweepRow> rows;
    for (std::size_t n : n_grid) {
        const auto ni = static_cast<Eigen::Index>(n);
        const Eigen::MatrixXd kn = k.topLeftCorner(ni, ni);
        const Eigen::VectorXd yn = y_train.head(ni);
        const double scale = convention == RidgeConvention::SampleScaled ? static_cast<double>(n) : 1.0;
        const Eigen::VectorXd alpha = krr_solve(kn, yn, scale * lambda_reg);
        rows.push_back({n, mean_squared_error(kn * alpha, yn), mean_squared_error(k_test.leftCols(ni) * alpha, y_test)});
    }
    return rows;
}

RootNFit fit_root_n(const std::vector<SizeSweepRow>& rows) {
    if (rows.size() < 2) throw std::invalid_argument("the 1/sqrt(N) fit needs at least two points");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 2);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        a(static_cast<Eigen::Index>(i), 0) = 1.0;
        a(static_cast<Eigen::Index>(i), 1) = 1.0 / std::sqrt(static_cast<double>(rows[i].n));
        b(static_cast<Eigen::Index>(i)) = rows[i].test_mse;
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    const double ss_res = (a * coef - b).squaredNorm();
    const double ss_tot = (b.array() - b.mean()).square().sum();
    return {coef(1), coef(0), ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

double log_log_slope(const std::vector<SizeSweepRow>& rows, double floor) {
    std::vector<double> xs, ys;
    for (const auto& r : rows)
        if (r.test_mse > floor) {
            xs.push_back(std::log(static_cast<double>(r.n)));
            ys.push_back(std::log(r.test_mse - floor));
        }
    if (xs.size() < 2) return std::nan("");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- commands -------------------------------------------------------------

void cmd_generate(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const GeneratedData g = generate_data(cfg);

    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index t = 0; t < g.series.rows(); ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (Eigen::Index c = 0; c < g.series.cols(); ++c) row.push_back(io::fmt(g.series(t, c)));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> header{"t"};
    for (int c = 0; c < cfg.data.varma.d; ++c) header.push_back("x" + std::to_string(c));
    io::write_csv(out_path(cfg, "series.csv"), header, rows, kNote);

    json upsilon = json::object();
    for (std::size_t k = 0; k < cfg.data.tasks.size(); ++k)
        upsilon[to_string(cfg.data.tasks[k])] =
            std::max(g.train.labels[k].cwiseAbs().maxCoeff(), g.test.labels[k].cwiseAbs().maxCoeff());

    for (const auto* split : {&g.train, &g.test}) {
        const bool is_train = split == &g.train;
        const std::size_t id0 = is_train ? 0 : cfg.data.n_train;
        std::vector<std::string> h{"window_id", "start", "end"};
        for (FunctionalKind k : cfg.data.tasks) h.push_back("y_" + to_string(k));
        std::vector<std::vector<std::string>> r;
        for (std::size_t i = 0; i < split->windows.size(); ++i) {
            std::vector<std::string> row{std::to_string(id0 + i), std::to_string(split->ends[i] + 1 - cfg.data.w),
                                         std::to_string(split->ends[i])};
            for (const auto& y : split->labels) row.push_back(io::fmt(y(static_cast<Eigen::Index>(i))));
            r.push_back(std::move(row));
        }
        io::write_csv(out_path(cfg, is_train ? "windows_train.csv" : "windows_test.csv"), h, r, kNote);
    }

    json m = json::object();
    m["version"] = kVersion;
    m["config"] = cfg.to_json();
    m["data_key"] = hex(data_key(cfg));
    m["series_hash"] = hex(g.series_hash);
    m["series_length"] = g.series.rows();
    m["gap"] = cfg.data.s - cfg.data.w;
    m["upsilon_y"] = upsilon;
    json seeds{{"master", cfg.seed}};
    seeds["varma"] = derive_seed(cfg.seed, stream::kVarma);
    seeds["innovations"] = derive_seed(cfg.seed, stream::kInnovations);
    seeds["functional"] = derive_seed(cfg.seed, stream::kFunctional);
    seeds["projection"] = derive_seed(cfg.seed, stream::kProjection);
    seeds["split"] = derive_seed(cfg.seed, stream::kSplit);
    m["seeds"] = seeds;
    json funcs = json::object();
    for (const auto& f : g.functionals) {
        json fj{{"alpha", f.alpha}, {"u", std::vector<double>(f.u.data(), f.u.data() + f.u.size())}};
        if (f.v.size()) fj["v"] = std::vector<double>(f.v.data(), f.v.data() + f.v.size());
        funcs[to_string(f.kind)] = fj;
    }
    m["functionals"] = funcs;
    record_timing(m, "generate", t0);
    save_manifest(cfg, m);
    std::cout << "generate: " << g.series.rows() << " rows, " << g.train.windows.size() << " train and "
              << g.test.windows.size() << " test windows (s=" << cfg.data.s << ", g=" << cfg.data.s - cfg.data.w
              << ") in " << cfg.output_dir << "\n";
}

void cmd_embed(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    json m = require_dataset(cfg);
    Loaded l = load_all(cfg, false);
    const std::uint64_t h = series_hash(l.series);
    if (hex(h) != m["series_hash"].get<std::string>()) throw DataError("series.csv does not match the manifest hash");
    const ReservoirConfig rc = make_reservoir(cfg);
    const JlProjector proj = make_projector(cfg);
    const ObservableSet obs = make_observables(cfg);
    const MeasurementConfig meas = make_measurement(cfg);
    int hits = 0;
    for (auto* sp : {&l.train, &l.test}) {
        const bool is_train = sp == &l.train;
        const std::string name = is_train ? "train" : "test";
        const fs::path path = out_path(cfg, "features_" + name + ".bin");
        const std::uint64_t key = feature_cache_key(cfg, h, name);
        const io::CacheStatus st = io::read_feature_cache(path, key, sp->features);
        if (st == io::CacheStatus::Hit && static_cast<std::size_t>(sp->features.rows()) == sp->data.windows.size()) {
            ++hits;
            std::cout << "embed: features_" << name << " cache hit\n";
        } else {
            const std::uint64_t id0 = is_train ? 0 : cfg.data.n_train;
            sp->features = featurize(sp->data.windows, rc, proj, obs, meas, id0);
            io::write_feature_cache(path, {key, sp->features});
            std::cout << "embed: features_" << name << " computed (" << sp->features.rows() << " x "
                      << sp->features.cols() << ", " << backend_name(cfg.measurement.backend) << ")\n";
        }
        m["cache_keys"]["features_" + name] = hex(key);
    }
    std::cout << "embed: " << hits * 50 << "% cache hits\n";
    const InjectivityReport inj = injectivity_audit(l.train.features);
    m["injectivity"] = {{"min_pairwise_distance", inj.min_pairwise_distance}, {"collisions", inj.collisions}};
    m["cache_hit_fraction"] = hits / 2.0;
    m["reservoir_lambdas"] = json::array();
    for (const auto& s : rc.subs) m["reservoir_lambdas"].push_back(s.lambda);
    m["lambda_star"] = rc.lambda_star();
    m["num_observables"] = obs.size();
    m["projector"] = {{"seed", proj.seed()}, {"n", proj.n()}, {"d", proj.d()}};
    json subs = json::array();
    for (const auto& s : rc.subs) subs.push_back(s.seed);
    m["reservoir"] = {{"master_seed", rc.master_seed}, {"n", rc.n},           {"R", rc.num_subs()},
                      {"topology", rc.topology.name}, {"lambda_lo", rc.lambda_lo}, {"lambda_hi", rc.lambda_hi},
                      {"sub_seeds", subs}};
    m["ridge_convention"] = to_string(cfg.kernel.tuner.convention);
    record_timing(m, "embed", t0);
    save_manifest(cfg, m);
}

void cmd_tune(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    json m = require_dataset(cfg);
    const Loaded l = load_all(cfg, true);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < cfg.data.tasks.size(); ++k) {
        const std::string name = to_string(cfg.data.tasks[k]);
        if (!cfg.kernel.tune) {
            std::cout << "tune: kernel.tune is false; using fixed nu=" << cfg.kernel.nu << " xi=" << cfg.kernel.xi << "\n";
            break;
        }
        for (const TuneTrial& t : run_tuning(cfg, m, l, k))
            rows.push_back({name, io::fmt(t.nu), io::fmt(t.xi), io::fmt(t.val_mse)});
        const json& sel = m["tuned"][name];
        std::cout << "tune: " << name << " nu=" << sel["nu"].get<double>() << " xi=" << sel["xi"].get<double>()
                  << " val_mse=" << sel["val_mse"].get<double>() << "\n";
    }
    io::write_csv(out_path(cfg, "trials.csv"), {"task", "nu", "xi", "val_mse"}, rows, kNote);
    record_timing(m, "tune", t0);
    save_manifest(cfg, m);
}

void cmd_sweep_reg(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    json m = require_dataset(cfg);
    const Loaded l = load_all(cfg, true);
    const auto n = static_cast<Eigen::Index>(std::min(cfg.readout.sweep_reg_n, l.train.data.windows.size()));
    std::vector<double> grid = cfg.readout.sweep_grid;
    std::sort(grid.begin(), grid.end());
    std::vector<std::vector<std::string>> rows, preds;
    std::string failures;
    for (std::size_t k = 0; k < cfg.data.tasks.size(); ++k) {
        const std::string name = to_string(cfg.data.tasks[k]);
        const MaternParams p = resolve_kernel(cfg, m, l, k);
        const Eigen::MatrixXd f_tr = l.train.features.topRows(n);
        const Eigen::VectorXd y_tr = l.train.data.labels[k].head(n);
        const auto sweep = sweep_regularization(p, grid, f_tr, y_tr, l.test.features, l.test.data.labels[k],
                                                cfg.kernel.tuner.convention);
        const double var_y = variance(y_tr);
        for (const auto& r : sweep) {
            rows.push_back({name, io::fmt(r.lambda_reg), std::to_string(n), io::fmt(r.train_mse), io::fmt(r.test_mse),
                            io::fmt(r.rkhs_norm), io::fmt(var_y), r.rank_deficient ? "rank_deficient" : "ok"});
            if (r.rank_deficient) failures += " " + name + "@" + io::fmt(r.lambda_reg);
        }
        std::cout << "sweep-reg: " << name << " nu=" << p.nu << " xi=" << p.xi << " train_mse " << sweep.front().train_mse
                  << " at lambda_reg " << grid.front() << ", " << sweep.back().train_mse << " at " << grid.back() << "\n";
        if (sweep.front().rank_deficient) continue;
        const KrrModel model = krr_fit(p, grid.front(), f_tr, y_tr, cfg.kernel.tuner.convention);
        const Eigen::VectorXd p_tr = krr_predict(model, f_tr);
        const Eigen::VectorXd p_te = krr_predict(model, l.test.features);
        for (Eigen::Index i = 0; i < n; ++i)
            preds.push_back({name, "train", std::to_string(i), std::to_string(l.train.data.ends[static_cast<std::size_t>(i)]),
                             io::fmt(y_tr(i)), io::fmt(p_tr(i))});
        for (Eigen::Index i = 0; i < p_te.size(); ++i)
            preds.push_back({name, "test", std::to_string(cfg.data.n_train + static_cast<std::size_t>(i)),
                             std::to_string(l.test.data.ends[static_cast<std::size_t>(i)]),
                             io::fmt(l.test.data.labels[k](i)), io::fmt(p_te(i))});
    }
    io::write_csv(out_path(cfg, "sweep_reg.csv"),
                  {"task", "lambda_reg", "n_train", "train_mse", "test_mse", "rkhs_norm", "var_y", "status"}, rows, kNote);
    io::write_csv(out_path(cfg, "predictions.csv"), {"task", "split", "window_id", "end", "y_true", "y_pred"}, preds,
                  kNote + std::string("; lambda_reg=") + io::fmt(grid.front()));
    record_timing(m, "sweep_reg", t0);
    save_manifest(cfg, m);
    if (!failures.empty())
        throw NumericalRankError("kernel system numerically singular at" + failures + " (rows marked in sweep_reg.csv)");
}

void cmd_sweep_n(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    json m = require_dataset(cfg);
    const Loaded l = load_all(cfg, true);
    std::vector<std::size_t> grid = cfg.readout.n_grid;
    std::sort(grid.begin(), grid.end());
    std::vector<std::vector<std::string>> rows, fits;
    for (std::size_t k = 0; k < cfg.data.tasks.size(); ++k) {
        const std::string name = to_string(cfg.data.tasks[k]);
        const MaternParams p = resolve_kernel(cfg, m, l, k);
        const auto sweep = sweep_sample_size(p, cfg.readout.lambda_reg, grid, l.train.features, l.train.data.labels[k],
                                             l.test.features, l.test.data.labels[k], cfg.kernel.tuner.convention);
        for (const auto& r : sweep)
            rows.push_back({name, std::to_string(r.n), io::fmt(r.train_mse), io::fmt(r.test_mse)});
        if (sweep.size() >= 2) {
            const RootNFit f = fit_root_n(sweep);
            fits.push_back({name, io::fmt(f.c), io::fmt(f.floor), io::fmt(f.r_squared),
                            io::fmt(log_log_slope(sweep, std::max(0.0, f.floor)))});
        }
        std::cout << "sweep-n: " << name << " test_mse " << sweep.front().test_mse << " at N=" << sweep.front().n
                  << ", " << sweep.back().test_mse << " at N=" << sweep.back().n << "\n";
    }
    io::write_csv(out_path(cfg, "sweep_n.csv"), {"task", "N", "train_mse", "test_mse"}, rows,
                  kNote + std::string("; lambda_reg=") + io::fmt(cfg.readout.lambda_reg));
    io::write_csv(out_path(cfg, "sweep_n_fit.csv"), {"task", "c", "floor", "r_squared", "log_log_slope"}, fits, kNote);
    record_timing(m, "sweep_n", t0);
    save_manifest(cfg, m);
}

void cmd_bound(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    json m = require_dataset(cfg);
    const Loaded l = load_all(cfg, true);
    const ReservoirConfig rc = make_reservoir(cfg);
    const long long g = static_cast<long long>(cfg.data.s - cfg.data.w);
    double beta_g = 0.0;
    if (cfg.bound.beta_g) {
        beta_g = *cfg.bound.beta_g;
    } else if (cfg.bound.beta0 && cfg.bound.beta1) {
        beta_g = beta_from_geometric(*cfg.bound.beta0, *cfg.bound.beta1, static_cast<double>(g));
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < cfg.data.tasks.size(); ++k) {
        const std::string name = to_string(cfg.data.tasks[k]);
        const MaternParams p = resolve_kernel(cfg, m, l, k);
        const Eigen::VectorXd& y = l.train.data.labels[k];
        const KrrModel model = krr_fit(p, cfg.readout.lambda_reg, l.train.features, y, cfg.kernel.tuner.convention);
        const double train_mse = mean_squared_error(krr_predict(model, l.train.features), y);
        json mj{{"task", name},
                {"nu", p.nu},
                {"xi", p.xi},
                {"lambda_reg", model.lambda_reg},
                {"ridge_convention", to_string(model.convention)},
                {"support_features", m["cache_keys"]["features_train"]},
                {"alpha", std::vector<double>(model.alpha.data(), model.alpha.data() + model.alpha.size())}};
        io::write_text(out_path(cfg, "model_" + name + ".json"), mj.dump() + "\n");
        const double test_mse = mean_squared_error(krr_predict(model, l.test.features), l.test.data.labels[k]);
        BoundInputs in;
        in.n = static_cast<long long>(l.train.data.windows.size());
        in.w = static_cast<long long>(cfg.data.w);
        in.g = g;
        in.lambda_norm = cfg.bound.lambda_norm ? *cfg.bound.lambda_norm : rkhs_norm(model);
        in.upsilon = m["upsilon_y"][name].get<double>();
        in.nu = p.nu;
        in.xi = p.xi;
        in.r = rc.num_subs();
        in.n_obs = static_cast<long long>(make_observables(cfg).size());
        in.lambda_star = rc.lambda_star();
        in.delta = cfg.bound.delta;
        in.beta_g = beta_g;
        BoundReport rep;
        std::string status = "ok";
        if (!(p.nu > 1.0)) {
            status = "not_applicable_nu_le_1";
            const double nan = std::nan("");
            rep = {nan, nan, nan, nan, in.delta - 2.0 * (static_cast<double>(in.n) - 2.0) * beta_g, false};
        } else {
            rep = bound(in);
            if (rep.vacuous) status = "vacuous";
        }
        const double gap = std::abs(test_mse - train_mse);
        rows.push_back({name, std::to_string(in.n), std::to_string(in.w), std::to_string(in.g), io::fmt(in.lambda_norm),
                        io::fmt(in.upsilon), io::fmt(in.nu), io::fmt(in.xi), std::to_string(in.r),
                        std::to_string(in.n_obs), io::fmt(in.lambda_star), io::fmt(in.delta), io::fmt(in.beta_g),
                        io::fmt(rep.rademacher_term), io::fmt(rep.mixing_penalty), io::fmt(rep.truncation_term),
                        io::fmt(rep.total), io::fmt(rep.delta_prime), rep.vacuous ? "true" : "false",
                        io::fmt(train_mse), io::fmt(test_mse), io::fmt(gap),
                        status == "ok" ? (rep.total >= gap ? "true" : "false") : "", status});
        std::cout << "bound: " << name << " total " << rep.total << " vs observed gap " << gap << " (" << status << ")\n";
    }
    io::write_csv(out_path(cfg, "bound.csv"),
                  {"task", "N", "w", "g", "Lambda", "Upsilon_Y", "nu", "xi", "R", "n_obs", "lambda_star", "delta",
                   "beta_g", "rademacher_term", "mixing_penalty", "truncation_term", "total", "delta_prime", "vacuous",
                   "train_mse", "test_mse", "observed_gap", "bound_dominates", "status"},
                  rows, kNote);
    record_timing(m, "bound", t0);
    save_manifest(cfg, m);
}

void cmd_all(const RunConfig& cfg) {
    cmd_generate(cfg);
    cmd_embed(cfg);
    cmd_tune(cfg);
    cmd_sweep_reg(cfg);
    cmd_sweep_n(cfg);
    cmd_bound(cfg);
}

}  // namespace qrk
