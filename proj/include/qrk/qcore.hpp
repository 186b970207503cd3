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

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qrk {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Qubit j of an n-qubit register is bit (n - 1 - j) of a basis index, i.e.
// qubit 0 is the leftmost tensor factor.

/// Exact state of an n-qubit register as a 2^n x 2^n density matrix.
class DensityOperator {
public:
    struct Deviation {
        double hermitian = 0.0;  ///< max |rho - rho^dagger|
        double trace = 0.0;      ///< |Tr rho - 1|
        double min_eigenvalue = 0.0;
    };

    static constexpr double kHermitianTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kPsdTol = 1e-10;

    /// Validates all invariants; throws std::invalid_argument on violation.
    static DensityOperator from_matrix(CMatrix data);
    /// Skips validation. For outputs of maps already known to be CPTP.
    static DensityOperator trusted(CMatrix data);

    static DensityOperator plus_state(int n);
    static DensityOperator maximally_mixed(int n);
    static DensityOperator basis_state(int n, std::uint64_t index);
    static DensityOperator pure(const CVector& psi);

    int num_qubits() const { return n_; }
    Eigen::Index dim() const { return data_.rows(); }
    const CMatrix& matrix() const { return data_; }

    Deviation deviation() const;
    bool satisfies_invariants() const;

private:
    DensityOperator(int n, CMatrix data) : n_(n), data_(std::move(data)) {}

    int n_ = 0;
    CMatrix data_;
};

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli p);

/// Tensor product of single-qubit Paulis.
class PauliString {
public:
    explicit PauliString(std::vector<Pauli> letters);
    /// Parses e.g. "XIZ"; qubit 0 first.
    static PauliString parse(std::string_view text);

    int num_qubits() const { return static_cast<int>(letters_.size()); }
    const std::vector<Pauli>& letters() const { return letters_; }
    Pauli operator[](int qubit) const { return letters_[static_cast<std::size_t>(qubit)]; }
    int weight() const { return weight_; }
    /// Qubits carrying a non-identity letter, ascending.
    std::vector<int> support() const;

    // Bit masks over basis indices. P|j> = phase(j) |j ^ x_mask>.
    std::uint64_t x_mask() const { return x_mask_; }
    std::uint64_t z_mask() const { return z_mask_; }
    int y_count() const { return y_count_; }

    std::string to_string() const;

    bool operator==(const PauliString&) const = default;

private:
    std::vector<Pauli> letters_;
    int weight_ = 0;
    std::uint64_t x_mask_ = 0;
    std::uint64_t z_mask_ = 0;
    int y_count_ = 0;
};

/// All non-identity Pauli strings of weight <= k on n qubits in canonical
/// order: ascending weight, then lexicographic support, then X < Y < Z.
class ObservableSet {
public:
    static ObservableSet all_local(int n, int k);

    int num_qubits() const { return n_; }
    int locality() const { return k_; }
    std::size_t size() const { return strings_.size(); }
    const std::vector<PauliString>& strings() const { return strings_; }
    const PauliString& operator[](std::size_t i) const { return strings_[i]; }

private:
    int n_ = 0;
    int k_ = 0;
    std::vector<PauliString> strings_;
};

/// Closed-form |O| for the locality-2 set: 3n + 9n(n-1)/2.
std::size_t two_local_count(int n);

// Gates use the exp(-i a P / 2) convention.
Eigen::Matrix2cd gate_rx(double angle);
Eigen::Matrix2cd gate_ry(double angle);
Eigen::Matrix2cd gate_rz(double angle);
Eigen::Matrix2cd gate_h();
/// exp(-i a Z(x)Z / 2) on two qubits (first qubit = most significant).
Eigen::Matrix4cd gate_rzz(double angle);

CMatrix kron(const CMatrix& a, const CMatrix& b);
/// Lifts a single-qubit gate on `qubit` to the full n-qubit space.
CMatrix embed_gate(const Eigen::Matrix2cd& gate, int qubit, int n);
/// Lifts a two-qubit gate acting on (q0, q1) (q0 = first factor) to n qubits.
CMatrix embed_gate(const Eigen::Matrix4cd& gate, int q0, int q1, int n);
/// Dense matrix of a Pauli string.
CMatrix pauli_matrix(const PauliString& p);

bool is_unitary(const CMatrix& u, double tol = 1e-10);

/// U rho U^dagger. Throws on dimension mismatch or non-unitary U.
DensityOperator apply_unitary(const DensityOperator& rho, const CMatrix& u);
/// U rho U^dagger without the unitarity check.
CMatrix conjugate(const CMatrix& rho, const CMatrix& u);

/// Re Tr(P rho). The imaginary part must vanish to 1e-10 (throws otherwise);
/// the returned value is not clamped.
double expectation(const DensityOperator& rho, const PauliString& p);
double expectation(const CMatrix& rho, const PauliString& p);

/// Hilbert-Schmidt (Schatten-2) distance.
double hs_distance(const DensityOperator& a, const DensityOperator& b);
/// Full Schatten-1 norm of (a - b); ranges over [0, 2].
double trace_distance(const DensityOperator& a, const DensityOperator& b);

/// Traces out the trailing (n_total - n_keep) qubits.
CMatrix partial_trace_trailing(const CMatrix& m, int n_keep, int n_total);

}  // namespace qrk
