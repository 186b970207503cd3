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

#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qrk/special.hpp"

using namespace qrk;
using Hp = boost::multiprecision::cpp_bin_float_50;

namespace {

double oracle_k(double nu, double x) {
    return static_cast<double>(boost::math::cyl_bessel_k(Hp(nu), Hp(x)));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("half-integer identities") {
    CHECK(bessel_k(0.5, 1.0) == doctest::Approx(0.4610685044478946).epsilon(1e-14));
    const double k32 = std::sqrt(std::numbers::pi / 4.0) * std::exp(-2.0) * 1.5;
    CHECK(rel(bessel_k(1.5, 2.0), k32) < 1e-14);
    CHECK(rel(bessel_k_general(1.5, 2.0), k32) < 1e-12);
    CHECK(is_half_integer(0.5));
    CHECK(is_half_integer(-2.5));
    CHECK_FALSE(is_half_integer(2.0));
    CHECK_FALSE(is_half_integer(0.51));
    CHECK_THROWS_AS(bessel_k_half_integer(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("symmetry and domain") {
    for (double nu : {0.3, 1.5, 2.0, 4.7})
        for (double x : {0.01, 1.0, 7.5}) CHECK(bessel_k(-nu, x) == bessel_k(nu, x));
    CHECK_THROWS_AS(bessel_k(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(bessel_k(1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(bessel_k(1.0, NAN), std::invalid_argument);
}

TEST_CASE("general path against a 50-digit oracle") {
    double worst = 0.0;
    for (double nu : {0.0, 0.25, 0.5, 1.0, 1.3, 2.0, 2.5, 3.7, 5.0, 7.25, 10.0})
        for (double x : {1e-6, 1e-3, 0.1, 0.5, 1.0, 1.99, 2.0, 2.01, 5.0, 20.0, 100.0, 500.0}) {
            const double want = oracle_k(nu, x);
            if (!(want < 1e300 && want > 1e-300)) continue;
            worst = std::max(worst, rel(bessel_k_general(nu, x), want));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("half-integer path against the oracle") {
    double worst = 0.0;
    for (double nu : {0.5, 1.5, 2.5, 3.5, 6.5})
        for (double x : {1e-4, 0.2, 1.0, 3.0, 30.0, 300.0}) worst = std::max(worst, rel(bessel_k_half_integer(nu, x), oracle_k(nu, x)));
    CHECK(worst < 1e-12);
}

TEST_CASE("recurrence in the order") {
    // K_{nu+1} = K_{nu-1} + 2 nu / x K_nu
    for (double nu : {1.2, 3.0, 4.4})
        for (double x : {0.3, 2.5, 9.0}) {
            const double lhs = bessel_k(nu + 1, x);
            const double rhs = bessel_k(nu - 1, x) + 2 * nu / x * bessel_k(nu, x);
            CHECK(rel(lhs, rhs) < 1e-12);
        }
}
