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

// qrkernel: data generation, embedding, tuning, sweeps and bound reports.

#include <omp.h>

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrk/errors.hpp"
#include "qrk/io.hpp"
#include "qrk/pipeline.hpp"

namespace {

qrk::RunConfig resolve(const std::string& config_path, std::optional<std::uint64_t> seed,
                       const std::string& backend, std::optional<int> workers, const std::string& out) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
        try {
            j = nlohmann::json::parse(qrk::io::read_text(config_path));
        } catch (const nlohmann::json::exception& e) {
            throw qrk::ConfigError("cannot parse " + config_path + ": " + e.what());
        } catch (const qrk::DataError& e) {
            throw qrk::ConfigError(e.what());
        }
    }
    if (seed) j["seed"] = *seed;
    if (!backend.empty()) j["measurement"]["backend"] = backend;
    if (workers) j["workers"] = *workers;
    if (!out.empty()) j["output_dir"] = out;
    return qrk::RunConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum reservoir kernel experiments"};
    app.require_subcommand(1, 1);

    std::string config_path, backend, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed");
    app.add_option("--backend", backend, "measurement backend")->check(CLI::IsMember({"exact", "shadows"}));
    app.add_option("--workers", workers, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", out, "output directory");

    using Cmd = void (*)(const qrk::RunConfig&);
    const std::map<std::string, std::pair<Cmd, std::string>> commands{
        {"generate", {qrk::cmd_generate, "simulate the series and write train/test windows"}},
        {"embed", {qrk::cmd_embed, "compute or reuse cached reservoir features"}},
        {"tune", {qrk::cmd_tune, "select Matern hyperparameters per task"}},
        {"sweep-reg", {qrk::cmd_sweep_reg, "train/test error across the regularization grid"}},
        {"sweep-n", {qrk::cmd_sweep_n, "train/test error across training-set sizes"}},
        {"bound", {qrk::cmd_bound, "generalization bound terms next to the observed gap"}},
        {"all", {qrk::cmd_all, "run every step in order"}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second)->fallthrough();
    bool print_config = false;
    app.add_subcommand("config", "print the resolved configuration as JSON")
        ->fallthrough()
        ->callback([&] { print_config = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const qrk::RunConfig cfg = resolve(config_path, seed, backend, workers, out);
        if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
        if (print_config) {
            std::cout << cfg.to_json().dump(2) << "\n";
            return 0;
        }
        const std::string name = app.get_subcommands().front()->get_name();
        commands.at(name).first(cfg);
        return 0;
    } catch (const qrk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qrk::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const qrk::NumericalRankError& e) {
        std::cerr << "numerical rank error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
