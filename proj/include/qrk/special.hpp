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

namespace qrk {

/// Modified Bessel function of the second kind K_nu(x), x > 0. Uses the
/// closed form for half-integer orders and the general path otherwise.
/// K_{-nu} = K_nu.
double bessel_k(double nu, double x);

/// Temme series for x < 2, Steed's continued fraction for x >= 2, then
/// upward recurrence in the order. Valid for any real order.
double bessel_k_general(double nu, double x);

/// Finite-sum closed form for nu = m + 1/2. Throws if nu is not a half-integer.
double bessel_k_half_integer(double nu, double x);

/// True when |nu| is within 1e-12 of m + 1/2.
bool is_half_integer(double nu);

}  // namespace qrk
