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
#include <numbers>
#include <set>

#include "qrk/reservoir.hpp"
#include "qrk/rng.hpp"

using namespace qrk;
using std::numbers::pi;

namespace {

DensityOperator random_state(int n, Rng& rng) {
    const Eigen::Index d = Eigen::Index{1} << n;
    CMatrix g(d, d);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = Complex(rng.normal(), rng.normal());
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    return DensityOperator::from_matrix(rho);
}

SubReservoirParams zero_params(const Topology& t, double lambda) {
    SubReservoirParams p;
    p.theta_x.assign(static_cast<std::size_t>(t.n), 0.0);
    p.theta_z.assign(static_cast<std::size_t>(t.n), 0.0);
    p.theta_zz.assign(t.edges.size(), 0.0);
    p.lambda = lambda;
    return p;
}

// Entangler assembled gate by gate: every Rzz first, then every Rz, then every Rx.
CMatrix reference_entangler(const SubReservoirParams& p, const Topology& t) {
    const Eigen::Index d = Eigen::Index{1} << t.n;
    CMatrix w = CMatrix::Identity(d, d);
    for (std::size_t e = 0; e < t.edges.size(); ++e)
        w = embed_gate(gate_rzz(p.theta_zz[e]), t.edges[e].first, t.edges[e].second, t.n) * w;
    for (int j = 0; j < t.n; ++j) w = embed_gate(gate_rz(p.theta_z[static_cast<std::size_t>(j)]), j, t.n) * w;
    for (int j = 0; j < t.n; ++j) w = embed_gate(gate_rx(p.theta_x[static_cast<std::size_t>(j)]), j, t.n) * w;
    return w;
}

CMatrix reference_injection(const SubReservoirParams& p, const Topology& t, const Eigen::VectorXd& z) {
    const Eigen::Index d = Eigen::Index{1} << t.n;
    CMatrix ry = CMatrix::Identity(d, d);
    for (int j = 0; j < t.n; ++j) ry = embed_gate(gate_ry(pi * std::tanh(z(j))), j, t.n) * ry;
    return reference_entangler(p, t) * ry;
}

Window random_window(std::size_t w, int d, Rng& rng) {
    Window win(static_cast<Eigen::Index>(w), d);
    for (Eigen::Index i = 0; i < win.size(); ++i) win.data()[i] = rng.uniform_open(-1.0, 1.0);
    return win;
}

}  // namespace

TEST_CASE("topology") {
    const Topology r = Topology::ring(5);
    CHECK(r.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
    CHECK(Topology::ring(2).edges.size() == 1);
    CHECK(Topology::ring(1).edges.empty());
    CHECK_THROWS_AS(Topology::from_edges(3, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Topology::from_edges(3, {{0, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(Topology::from_edges(3, {{0, 1}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Topology::from_edges(3, {{2, 1}}), std::invalid_argument);
}

TEST_CASE("parameters are reproducible and in range") {
    const Topology t = Topology::ring(5);
    const auto a = SubReservoirParams::sample(99, t, 0.7, 0.95);
    const auto b = SubReservoirParams::sample(99, t, 0.7, 0.95);
    CHECK(a.theta_x == b.theta_x);
    CHECK(a.theta_zz == b.theta_zz);
    CHECK(a.lambda == b.lambda);
    CHECK(a.theta_zz.size() == t.edges.size());
    for (const auto* v : {&a.theta_x, &a.theta_z, &a.theta_zz})
        for (double x : *v) CHECK((x > -pi && x < pi));
    CHECK((a.lambda > 0.7 && a.lambda < 0.95));
    const ReservoirConfig cfg = ReservoirConfig::make(5, 3, t, 4);
    CHECK(cfg.num_subs() == 3);
    CHECK(cfg.subs[0].theta_x != cfg.subs[1].theta_x);
    double ls = 0;
    for (const auto& s : cfg.subs) ls = std::max(ls, s.lambda);
    CHECK(cfg.lambda_star() == ls);
}

TEST_CASE("entangler order and unitarity") {
    const Topology t = Topology::ring(3);
    CHECK(build_entangler(zero_params(t, 0.5), t).isApprox(CMatrix::Identity(8, 8)));
    const Topology single = Topology::from_edges(1, {});
    SubReservoirParams p = zero_params(single, 0.5);
    p.theta_z[0] = pi;
    const CMatrix w1 = build_entangler(p, single);
    CHECK((w1 - CMatrix(gate_rz(pi))).cwiseAbs().maxCoeff() < 1e-14);
    const auto q = SubReservoirParams::sample(5, t, 0.7, 0.95);
    const CMatrix w = build_entangler(q, t);
    CHECK((w.adjoint() * w - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((w - reference_entangler(q, t)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("injection unitary") {
    const Topology t = Topology::ring(4);
    const SubReservoirParams z0 = zero_params(t, 0.5);
    const std::vector<double> zeros(4, 0.0);
    CHECK(injection_unitary(z0, t, zeros).isApprox(CMatrix::Identity(16, 16)));
    CHECK(encoding_angle(0.0) == 0.0);
    CHECK(encoding_angle(50.0) <= pi);
    CHECK(encoding_angle(-50.0) >= -pi);
    CHECK(encoding_angle(0.3) < encoding_angle(0.4));

    const Topology one = Topology::from_edges(1, {});
    const std::vector<double> half{0.5};
    const DensityOperator out = apply_unitary(DensityOperator::basis_state(1, 0), injection_unitary(zero_params(one, 0.5), one, half));
    CHECK(expectation(out, PauliString::parse("Z")) == doctest::Approx(std::cos(pi * std::tanh(0.5))).epsilon(1e-14));

    Rng rng(17);
    const auto p = SubReservoirParams::sample(3, t, 0.7, 0.95);
    Eigen::VectorXd z(4);
    for (int i = 0; i < 4; ++i) z(i) = rng.normal();
    const CMatrix v = injection_unitary(p, t, {z.data(), 4});
    CHECK((v - reference_injection(p, t, z)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(is_unitary(v));
    CHECK_THROWS_AS(injection_unitary(p, t, std::vector<double>(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(injection_unitary(p, t, std::vector<double>{0, 0, NAN, 0}), std::invalid_argument);
}

TEST_CASE("reset channel") {
    const DensityOperator plus = DensityOperator::plus_state(3);
    CHECK((reset_channel(plus, 0.3).matrix() - plus.matrix()).cwiseAbs().maxCoeff() < 1e-15);
    const DensityOperator out = reset_channel(DensityOperator::basis_state(1, 0), 0.5);
    CMatrix expect(2, 2);
    expect << 0.75, 0.25, 0.25, 0.25;
    CHECK((out.matrix() - expect).cwiseAbs().maxCoeff() < 1e-15);
    Rng rng(1);
    const auto a = random_state(3, rng), b = random_state(3, rng);
    for (double l : {0.1, 0.5, 0.9})
        CHECK(std::abs(hs_distance(reset_channel(a, l), reset_channel(b, l)) - l * hs_distance(a, b)) < 1e-12);
    CHECK(std::abs(reset_channel(a, 0.4).matrix().trace() - 1.0) < 1e-15);
    CHECK_THROWS_AS(reset_channel(a, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(reset_channel(a, 1.0), std::invalid_argument);
}

TEST_CASE("swap dilation reproduces the reset channel") {
    Rng rng(2024);
    for (int n = 1; n <= 3; ++n)
        for (double l : {0.1, 0.3, 0.5, 0.9}) {
            const auto rho = random_state(n, rng);
            const double err = (dilation_reset_channel(rho, l).matrix() - reset_channel(rho, l).matrix()).cwiseAbs().maxCoeff();
            CHECK(err < 1e-10);
        }
    const auto rho = random_state(2, rng);
    CHECK((dilation_reset_channel(rho, 1.0 - 1e-12).matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-6);
    for (double l : {0.1, 0.42, 0.9}) CHECK(std::abs(dilation_coin_one_probability(l) - (1.0 - l)) < 1e-12);
}

TEST_CASE("step contracts exactly and preserves trace") {
    Rng rng(5);
    const Topology t = Topology::ring(4);
    const auto p = SubReservoirParams::sample(8, t, 0.7, 0.95);
    const JlProjector proj = JlProjector::make(4, 3, 1);
    for (int rep = 0; rep < 5; ++rep) {
        const auto a = random_state(4, rng), b = random_state(4, rng);
        const std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
        const auto sa = step(a, x, p, t, proj), sb = step(b, x, p, t, proj);
        CHECK(std::abs(hs_distance(sa, sb) - p.lambda * hs_distance(a, b)) < 1e-10);
        CHECK(std::abs(sa.matrix().trace() - 1.0) < 1e-12);
        CHECK(sa.satisfies_invariants());
        CHECK(step(a, x, p, t, proj).matrix() == sa.matrix());
    }
}

TEST_CASE("window embedding: fixed point, closed form, washout, fading memory") {
    const Topology t = Topology::ring(3);
    const JlProjector proj = JlProjector::make(3, 2, 9);

    SUBCASE("fixed point") {
        const Window zero = Window::Zero(1, 2);
        const auto out = embed_window(zero, zero_params(t, 0.6), t, proj);
        CHECK((out.matrix() - DensityOperator::plus_state(3).matrix()).cwiseAbs().maxCoeff() < 1e-15);
        CHECK_THROWS_AS(embed_window(Window(0, 2), zero_params(t, 0.6), t, proj), std::invalid_argument);
    }

    SUBCASE("three-step closed form") {
        Rng rng(12);
        const auto p = SubReservoirParams::sample(1, t, 0.7, 0.95);
        const Window win = random_window(3, 2, rng);
        const auto init = random_state(3, rng);
        std::vector<CMatrix> v;
        for (int k = 0; k < 3; ++k) v.push_back(reference_injection(p, t, proj.matrix() * win.row(k).transpose()));
        const double l = p.lambda;
        const CMatrix plus = DensityOperator::plus_state(3).matrix();
        auto j = [&](int k, const CMatrix& m) { return (v[static_cast<std::size_t>(k)] * m * v[static_cast<std::size_t>(k)].adjoint()).eval(); };
        const CMatrix expect = l * l * l * j(2, j(1, j(0, init.matrix()))) +
                               (1 - l) * (plus + l * j(2, plus) + l * l * j(2, j(1, plus)));
        const auto got = embed_window_from(init, win, p, t, proj);
        CHECK((got.matrix() - expect).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("washout from different initial states") {
        Rng rng(4);
        const Topology t5 = Topology::ring(5);
        const JlProjector p5 = JlProjector::make(5, 3, 4);
        auto p = SubReservoirParams::sample(2, t5, 0.7, 0.95);
        p.lambda = 0.9;
        const Window win = random_window(25, 3, rng);
        const double d = hs_distance(embed_window(win, p, t5, p5), embed_window_from(DensityOperator::maximally_mixed(5), win, p, t5, p5));
        CHECK(d <= std::pow(0.9, 25) * std::sqrt(2.0));
        CHECK(d <= 0.101);
    }

    SUBCASE("fading memory in trace norm") {
        Rng rng(6);
        const auto p = SubReservoirParams::sample(6, t, 0.7, 0.95);
        for (int k = 1; k <= 6; ++k) {
            Window a = random_window(8, 2, rng);
            Window b = random_window(8, 2, rng);
            b.bottomRows(k) = a.bottomRows(k);
            const double d = trace_distance(embed_window(a, p, t, proj), embed_window(b, p, t, proj));
            CHECK(d <= 2.0 * std::pow(p.lambda, k) + 1e-9);
        }
    }
}

TEST_CASE("multiplexed embedding") {
    Rng rng(31);
    const Topology t = Topology::ring(5);
    const JlProjector proj = JlProjector::make(5, 3, 31);
    const Window win = random_window(6, 3, rng);
    const ReservoirConfig one = ReservoirConfig::make(5, 1, t, 77);
    const auto single = embed_multiplexed(win, one, proj);
    REQUIRE(single.size() == 1);
    CHECK(single[0].matrix() == embed_window(win, one.subs[0], t, proj).matrix());

    const ReservoirConfig cfg = ReservoirConfig::make(5, 3, t, 77);
    const auto outs = embed_multiplexed(win, cfg, proj);
    REQUIRE(outs.size() == 3);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) CHECK(hs_distance(outs[static_cast<std::size_t>(i)], outs[static_cast<std::size_t>(j)]) > 1e-6);

    ReservoirConfig swapped = cfg;
    std::swap(swapped.subs[0], swapped.subs[2]);
    const auto outs2 = embed_multiplexed(win, swapped, proj);
    CHECK(outs2[0].matrix() == outs[2].matrix());
    CHECK(outs2[2].matrix() == outs[0].matrix());

    const SubReservoir fast(cfg.subs[1], t);
    CHECK((fast.embed_projected(project_window(win, proj)) - outs[1].matrix()).cwiseAbs().maxCoeff() < 1e-14);
    // determinism
    CHECK(embed_multiplexed(win, cfg, proj)[1].matrix() == outs[1].matrix());
}
