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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "qrk/errors.hpp"
#include "qrk/synthdata.hpp"

using namespace qrk;

namespace {

VarmaSpec spec_with(std::uint64_t seed, std::size_t length = 500) {
    VarmaSpec s;
    s.seed = seed;
    s.length = length;
    return s;
}

double autocorr(const Eigen::VectorXd& x, Eigen::Index lag) {
    const Eigen::VectorXd c = x.array() - x.mean();
    const Eigen::Index n = c.size();
    return c.head(n - lag).dot(c.tail(n - lag)) / c.squaredNorm();
}

}  // namespace

TEST_CASE("VARMA coefficients") {
    SUBCASE("single AR term") {
        VarmaSpec s = spec_with(3);
        s.p = 1;
        const VarmaModel m = make_varma(s);
        CHECK(std::abs(spectral_norm(m.phi[0]) - s.gamma) < 1e-12);
    }
    SUBCASE("budget and MA amplitudes") {
        for (std::uint64_t seed : {0u, 1u, 42u, 1234u}) {
            const VarmaModel m = make_varma(spec_with(seed));
            REQUIRE(m.phi.size() == 3);
            double total = 0.0, wsum = 0.0;
            for (const auto& p : m.phi) total += spectral_norm(p);
            for (double a : m.ar_weights) wsum += a;
            CHECK(std::abs(total - 0.7) < 1e-10);
            CHECK(std::abs(wsum - 0.7) < 1e-12);
            REQUIRE(m.theta.size() == 4);
            CHECK(m.theta[0] == Eigen::MatrixXd::Identity(3, 3));
            for (int j = 1; j <= 3; ++j) CHECK(std::abs(spectral_norm(m.theta[static_cast<std::size_t>(j)]) - 0.5 * std::pow(0.5, j - 1)) < 1e-10);
            CHECK(companion_spectral_radius(m) < 1.0);
        }
    }
    SUBCASE("pure VAR") {
        VarmaSpec s = spec_with(5);
        s.q = 0;
        const VarmaModel m = make_varma(s);
        CHECK(m.theta.size() == 1);
    }
    SUBCASE("reproducible") {
        const VarmaModel a = make_varma(spec_with(8)), b = make_varma(spec_with(8)), c = make_varma(spec_with(9));
        CHECK(a.phi[1] == b.phi[1]);
        CHECK(a.phi[1] != c.phi[1]);
    }
    SUBCASE("validation") {
        VarmaSpec s = spec_with(1);
        s.gamma = 1.0;
        CHECK_THROWS_AS(make_varma(s), std::invalid_argument);
        s = spec_with(1);
        s.rho_ma = 0.0;
        CHECK_THROWS_AS(make_varma(s), std::invalid_argument);
        s = spec_with(1);
        s.sigma = -1.0;
        CHECK_THROWS_AS(make_varma(s), std::invalid_argument);
        s = spec_with(1);
        s.d = 0;
        CHECK_THROWS_AS(make_varma(s), std::invalid_argument);
    }
}

TEST_CASE("simulation") {
    SUBCASE("no innovations") {
        VarmaSpec s = spec_with(2, 100);
        s.sigma = 0.0;
        const Eigen::MatrixXd x = simulate(make_varma(s));
        CHECK(x == Eigen::MatrixXd::Zero(100, 3));
    }
    SUBCASE("range, shape and determinism") {
        const VarmaModel m = make_varma(spec_with(11, 3000));
        const Eigen::MatrixXd x = simulate(m);
        CHECK(x.rows() == 3000);
        CHECK(x.cols() == 3);
        CHECK(x.cwiseAbs().maxCoeff() < 1.0);
        CHECK(simulate(m) == x);
        CHECK(series_hash(x) == series_hash(simulate(m)));
        CHECK(series_hash(x) != series_hash(simulate(make_varma(spec_with(12, 3000)))));
    }
    SUBCASE("short-range dependence") {
        const VarmaModel m = make_varma(spec_with(0, 20000));
        const Eigen::MatrixXd x = simulate(m);
        const FunctionalSpec f = make_functional(FunctionalKind::Forecast, 3, 0.9, 0);
        const Eigen::VectorXd z = (x.array().atanh().matrix() * f.u);
        CHECK(autocorr(z, 1) > 0.0);
        CHECK(std::abs(autocorr(z, 50)) <= 0.1);
    }
}

TEST_CASE("functionals") {
    const FunctionalSpec f1 = make_functional(FunctionalKind::Forecast, 3, 0.9, 4);
    const FunctionalSpec f3 = make_functional(FunctionalKind::Volterra, 3, 0.9, 4);
    CHECK(std::abs(f1.u.norm() - 1.0) < 1e-12);
    CHECK(f1.v.size() == 0);
    CHECK(f3.u == f1.u);
    CHECK(std::abs(f3.v.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f3.u.dot(f3.v)) < 1e-12);
    CHECK_THROWS_AS(make_functional(FunctionalKind::Volterra, 1, 0.9, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_functional(FunctionalKind::ExpFading, 3, 1.0, 4), std::invalid_argument);
    CHECK(parse_functional_kind("exp_fading") == FunctionalKind::ExpFading);
    CHECK(to_string(FunctionalKind::Volterra) == "volterra");
    CHECK_THROWS_AS(parse_functional_kind("f4"), ConfigError);

    SUBCASE("constant series") {
        const FunctionalSpec f2 = make_functional(FunctionalKind::ExpFading, 3, 0.9, 4);
        const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(30, 3, 0.4);
        const double want = f2.u.sum() * 0.4 * (1 - std::pow(0.9, 25)) / 0.1;
        CHECK(label(x, 29, f2, 25) == doctest::Approx(want).epsilon(1e-13));
        CHECK(std::abs(label(x, 29, f2, 25)) <= label_bound(f2, 25, 3));
    }
    SUBCASE("quadratic term vanishes orthogonal to v") {
        const FunctionalSpec f2 = make_functional(FunctionalKind::ExpFading, 3, 0.9, 4);
        Eigen::MatrixXd x(10, 3);
        for (int t = 0; t < 10; ++t) x.row(t) = (0.1 * (t - 4)) * f3.u.transpose();
        CHECK(label(x, 9, f3, 6) == doctest::Approx(label(x, 9, f2, 6)).epsilon(1e-14));
    }
    SUBCASE("factored Volterra matches the double sum") {
        Eigen::MatrixXd x(7, 3);
        for (int i = 0; i < 21; ++i) x.data()[i] = std::sin(1.3 * i + 0.2);
        const std::size_t w = 5, t = 6;
        double lin = 0, quad = 0;
        for (std::size_t k = 0; k < w; ++k) {
            lin += std::pow(0.9, k) * f3.u.dot(x.row(static_cast<Eigen::Index>(t - k)).transpose());
            for (std::size_t l = 0; l < w; ++l)
                quad += std::pow(0.9, k + l) * f3.v.dot(x.row(static_cast<Eigen::Index>(t - k)).transpose()) *
                        f3.v.dot(x.row(static_cast<Eigen::Index>(t - l)).transpose());
        }
        CHECK(std::abs(label(x, t, f3, w) - (lin + 0.5 * quad)) < 1e-12);
    }
    SUBCASE("forecast and history requirements") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 3);
        x.row(9) << 0.1, 0.2, 0.3;
        CHECK(label(x, 8, f1, 4) == doctest::Approx(f1.u.dot(x.row(9).transpose())));
        CHECK_THROWS_AS(label(x, 9, f1, 4), DataError);
        CHECK_THROWS_AS(label(x, 2, f1, 4), DataError);
    }
}

TEST_CASE("strided windows") {
    Eigen::MatrixXd idx(8, 1);
    for (int i = 0; i < 8; ++i) idx(i, 0) = i;
    FunctionalSpec f;
    f.kind = FunctionalKind::ExpFading;
    f.u = Eigen::VectorXd::Ones(1);
    f.alpha = 0.5;
    const WindowDataset ds = make_windows(idx, f, 2, 3, 2);
    CHECK(ds.ends == std::vector<std::size_t>{4, 7});
    CHECK(ds.g == 1);
    CHECK(ds.windows[0](0, 0) == 3.0);
    CHECK(ds.windows[0](1, 0) == 4.0);
    CHECK(ds.start(1) == 6);
    CHECK(ds.labels(1) == 7.0 + 0.5 * 6.0);
    CHECK(ds.size() == 2);

    SUBCASE("brute-force enumeration") {
        for (std::size_t w = 1; w <= 4; ++w)
            for (std::size_t s = w; s <= w + 3; ++s)
                for (std::size_t origin : {0u, 5u}) {
                    const std::size_t n = 3;
                    Eigen::MatrixXd series(static_cast<Eigen::Index>(required_length(w, s, n, false, origin)), 1);
                    for (Eigen::Index i = 0; i < series.rows(); ++i) series(i, 0) = static_cast<double>(i);
                    const WindowDataset d = make_windows(series, f, w, s, n, origin);
                    for (std::size_t i = 0; i < n; ++i) {
                        if (i > 0) CHECK(d.ends[i] - d.ends[i - 1] == s);
                        for (std::size_t k = 0; k < w; ++k) CHECK(d.windows[i](static_cast<Eigen::Index>(k), 0) == static_cast<double>(d.start(i) + k));
                        if (i > 0) CHECK(d.start(i) > d.ends[i - 1]);
                    }
                    CHECK(d.ends.back() + 1 == static_cast<std::size_t>(series.rows()));
                }
    }
    SUBCASE("errors") {
        try {
            make_windows(idx, f, 2, 3, 3);
            FAIL("expected a DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("need T >= 11") != std::string::npos);
        }
        FunctionalSpec fc = f;
        fc.kind = FunctionalKind::Forecast;
        CHECK_THROWS_AS(make_windows(idx, fc, 2, 3, 2), DataError);
        CHECK(required_length(2, 3, 2, true) == 9);
        CHECK_THROWS_AS(make_windows(idx, f, 3, 2, 1), std::invalid_argument);
    }
    SUBCASE("default geometry") {
        const Eigen::MatrixXd x = simulate(make_varma(spec_with(0, required_length(25, 100, 10, true))));
        const WindowDataset d = make_windows(x, make_functional(FunctionalKind::Forecast, 3, 0.9, 0), 25, 100, 10);
        CHECK(d.g == 75);
        CHECK(d.size() == 10);
    }
}
