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

#include "qrk/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qrk {
namespace {

int qubits_for_dim(Eigen::Index dim) {
    if (dim < 1 || (dim & (dim - 1)) != 0) throw std::invalid_argument("matrix dimension is not a power of two");
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

void require_finite(double angle) {
    if (!std::isfinite(angle)) throw std::invalid_argument("gate angle must be finite");
}

void require_same_shape(const DensityOperator& a, const DensityOperator& b) {
    if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("density operators act on different qubit counts");
}

}  // namespace

DensityOperator DensityOperator::from_matrix(CMatrix data) {
    if (data.rows() != data.cols()) throw std::invalid_argument("density matrix must be square");
    const int n = qubits_for_dim(data.rows());
    DensityOperator rho(n, std::move(data));
    const auto dev = rho.deviation();
    if (dev.hermitian > kHermitianTol) throw std::invalid_argument("density matrix is not Hermitian");
    if (dev.trace > kTraceTol) throw std::invalid_argument("density matrix does not have unit trace");
    if (dev.min_eigenvalue < -kPsdTol) throw std::invalid_argument("density matrix is not positive semidefinite");
    return rho;
}

DensityOperator DensityOperator::trusted(CMatrix data) {
    const int n = qubits_for_dim(data.rows());
    return DensityOperator(n, std::move(data));
}

DensityOperator DensityOperator::plus_state(int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    return DensityOperator(n, CMatrix::Constant(dim, dim, Complex(1.0 / static_cast<double>(dim), 0.0)));
}

DensityOperator DensityOperator::maximally_mixed(int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMatrix m = CMatrix::Identity(dim, dim) / static_cast<double>(dim);
    return DensityOperator(n, std::move(m));
}

DensityOperator DensityOperator::basis_state(int n, std::uint64_t index) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    if (static_cast<Eigen::Index>(index) >= dim) throw std::invalid_argument("basis index out of range");
    CMatrix m = CMatrix::Zero(dim, dim);
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return DensityOperator(n, std::move(m));
}

DensityOperator DensityOperator::pure(const CVector& psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("state vector must be nonzero");
    const CVector v = psi / norm;
    return DensityOperator(qubits_for_dim(v.size()), v * v.adjoint());
}

DensityOperator::Deviation DensityOperator::deviation() const {
    Deviation d;
    d.hermitian = (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
    d.trace = std::abs(data_.trace() - Complex(1.0, 0.0));
    const CMatrix herm = 0.5 * (data_ + data_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

bool DensityOperator::satisfies_invariants() const {
    const auto d = deviation();
    return d.hermitian <= kHermitianTol && d.trace <= kTraceTol && d.min_eigenvalue >= -kPsdTol;
}

char to_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

PauliString::PauliString(std::vector<Pauli> letters) : letters_(std::move(letters)) {
    const int n = num_qubits();
    if (n < 1 || n > 62) throw std::invalid_argument("Pauli string must act on 1..62 qubits");
    for (int j = 0; j < n; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << (n - 1 - j);
        switch (letters_[static_cast<std::size_t>(j)]) {
            case Pauli::I: break;
            case Pauli::X: x_mask_ |= bit; ++weight_; break;
            case Pauli::Y: x_mask_ |= bit; z_mask_ |= bit; ++y_count_; ++weight_; break;
            case Pauli::Z: z_mask_ |= bit; ++weight_; break;
        }
    }
}

PauliString PauliString::parse(std::string_view text) {
    std::vector<Pauli> letters;
    letters.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case 'I': letters.push_back(Pauli::I); break;
            case 'X': letters.push_back(Pauli::X); break;
            case 'Y': letters.push_back(Pauli::Y); break;
            case 'Z': letters.push_back(Pauli::Z); break;
            default: throw std::invalid_argument("invalid Pauli letter in '" + std::string(text) + "'");
        }
    }
    return PauliString(std::move(letters));
}

std::vector<int> PauliString::support() const {
    std::vector<int> s;
    for (int j = 0; j < num_qubits(); ++j)
        if (letters_[static_cast<std::size_t>(j)] != Pauli::I) s.push_back(j);
    return s;
}

std::string PauliString::to_string() const {
    std::string s;
    s.reserve(letters_.size());
    for (Pauli p : letters_) s.push_back(to_char(p));
    return s;
}

ObservableSet ObservableSet::all_local(int n, int k) {
    if (n < 1 || k < 1) throw std::invalid_argument("observable set requires n >= 1 and k >= 1");
    ObservableSet set;
    set.n_ = n;
    set.k_ = k;
    for (int weight = 1; weight <= std::min(k, n); ++weight) {
        // supports in lexicographic order
        std::vector<int> idx(static_cast<std::size_t>(weight));
        for (int i = 0; i < weight; ++i) idx[static_cast<std::size_t>(i)] = i;
        while (true) {
            // letters in lexicographic X < Y < Z order, first support qubit most significant
            std::vector<int> digits(static_cast<std::size_t>(weight), 0);
            while (true) {
                std::vector<Pauli> letters(static_cast<std::size_t>(n), Pauli::I);
                for (int i = 0; i < weight; ++i)
                    letters[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] =
                        static_cast<Pauli>(1 + digits[static_cast<std::size_t>(i)]);
                set.strings_.emplace_back(std::move(letters));
                int pos = weight - 1;
                while (pos >= 0 && digits[static_cast<std::size_t>(pos)] == 2) digits[static_cast<std::size_t>(pos--)] = 0;
                if (pos < 0) break;
                ++digits[static_cast<std::size_t>(pos)];
            }
            int pos = weight - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - weight + pos) --pos;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
            for (int i = pos + 1; i < weight; ++i)
                idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
        }
    }
    return set;
}

std::size_t two_local_count(int n) {
    const auto m = static_cast<std::size_t>(n);
    return 3 * m + 9 * m * (m - 1) / 2;
}

Eigen::Matrix2cd gate_rx(double angle) {
    require_finite(angle);
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    Eigen::Matrix2cd g;
    g << Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0);
    return g;
}

Eigen::Matrix2cd gate_ry(double angle) {
    require_finite(angle);
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    Eigen::Matrix2cd g;
    g << c, -s, s, c;
    return g;
}

Eigen::Matrix2cd gate_rz(double angle) {
    require_finite(angle);
    Eigen::Matrix2cd g = Eigen::Matrix2cd::Zero();
    g(0, 0) = std::polar(1.0, -angle / 2);
    g(1, 1) = std::polar(1.0, angle / 2);
    return g;
}

Eigen::Matrix2cd gate_h() {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd g;
    g << r, r, r, -r;
    return g;
}

Eigen::Matrix4cd gate_rzz(double angle) {
    require_finite(angle);
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    const Complex minus = std::polar(1.0, -angle / 2), plus = std::polar(1.0, angle / 2);
    g(0, 0) = minus;
    g(1, 1) = plus;
    g(2, 2) = plus;
    g(3, 3) = minus;
    return g;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix embed_gate(const Eigen::Matrix2cd& gate, int qubit, int n) {
    if (qubit < 0 || qubit >= n) throw std::invalid_argument("qubit index out of range");
    const Eigen::Index dim = Eigen::Index{1} << n;
    const int shift = n - 1 - qubit;
    CMatrix out = CMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const int b = static_cast<int>((col >> shift) & 1);
        const Eigen::Index base = col & ~(Eigen::Index{1} << shift);
        for (int r = 0; r < 2; ++r) out(base | (Eigen::Index{r} << shift), col) = gate(r, b);
    }
    return out;
}

CMatrix embed_gate(const Eigen::Matrix4cd& gate, int q0, int q1, int n) {
    if (q0 < 0 || q0 >= n || q1 < 0 || q1 >= n || q0 == q1)
        throw std::invalid_argument("two-qubit gate needs distinct in-range qubits");
    const Eigen::Index dim = Eigen::Index{1} << n;
    const int s0 = n - 1 - q0, s1 = n - 1 - q1;
    const Eigen::Index clear = ~((Eigen::Index{1} << s0) | (Eigen::Index{1} << s1));
    CMatrix out = CMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const int b = static_cast<int>(((col >> s0) & 1) << 1 | ((col >> s1) & 1));
        const Eigen::Index base = col & clear;
        for (int r = 0; r < 4; ++r) {
            const Eigen::Index row = base | (Eigen::Index{(r >> 1) & 1} << s0) | (Eigen::Index{r & 1} << s1);
            out(row, col) = gate(r, b);
        }
    }
    return out;
}

CMatrix pauli_matrix(const PauliString& p) {
    static const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
    static const Eigen::Matrix2cd X = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    static const Eigen::Matrix2cd Y = (Eigen::Matrix2cd() << 0, Complex(0, -1), Complex(0, 1), 0).finished();
    static const Eigen::Matrix2cd Z = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    CMatrix out = CMatrix::Identity(1, 1);
    for (Pauli l : p.letters()) {
        const Eigen::Matrix2cd& f = l == Pauli::I ? I : l == Pauli::X ? X : l == Pauli::Y ? Y : Z;
        out = kron(out, f);
    }
    return out;
}

bool is_unitary(const CMatrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return ((u.adjoint() * u) - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

CMatrix conjugate(const CMatrix& rho, const CMatrix& u) {
    CMatrix tmp = u * rho;
    return tmp * u.adjoint();
}

DensityOperator apply_unitary(const DensityOperator& rho, const CMatrix& u) {
    if (u.rows() != rho.dim() || u.cols() != rho.dim()) throw std::invalid_argument("unitary dimension does not match state");
    if (!is_unitary(u)) throw std::invalid_argument("operator is not unitary within 1e-10");
    return DensityOperator::trusted(conjugate(rho.matrix(), u));
}

double expectation(const CMatrix& rho, const PauliString& p) {
    const Eigen::Index dim = rho.rows();
    if (dim != (Eigen::Index{1} << p.num_qubits())) throw std::invalid_argument("Pauli string does not match state size");
    // Tr(P rho) = sum_i P_{i, i^x} rho_{i^x, i}
    static const Complex kYPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};  // (-i)^k
    const auto x = static_cast<Eigen::Index>(p.x_mask());
    const std::uint64_t z = p.z_mask();
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Complex v = rho(i ^ x, i);
        if (std::popcount(static_cast<std::uint64_t>(i) & z) & 1) acc -= v;
        else acc += v;
    }
    acc *= kYPhase[p.y_count() & 3];
    if (std::abs(acc.imag()) > 1e-10) throw std::runtime_error("Pauli expectation has a non-negligible imaginary part");
    return acc.real();
}

double expectation(const DensityOperator& rho, const PauliString& p) { return expectation(rho.matrix(), p); }

double hs_distance(const DensityOperator& a, const DensityOperator& b) {
    require_same_shape(a, b);
    return (a.matrix() - b.matrix()).norm();
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    require_same_shape(a, b);
    const CMatrix diff = a.matrix() - b.matrix();
    const CMatrix herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

CMatrix partial_trace_trailing(const CMatrix& m, int n_keep, int n_total) {
    if (n_keep < 0 || n_keep > n_total || m.rows() != (Eigen::Index{1} << n_total) || m.cols() != m.rows())
        throw std::invalid_argument("partial trace dimensions are inconsistent");
    const Eigen::Index keep = Eigen::Index{1} << n_keep;
    const Eigen::Index rest = Eigen::Index{1} << (n_total - n_keep);
    CMatrix out = CMatrix::Zero(keep, keep);
    for (Eigen::Index a = 0; a < keep; ++a)
        for (Eigen::Index b = 0; b < keep; ++b) {
            Complex s(0.0, 0.0);
            for (Eigen::Index r = 0; r < rest; ++r) s += m(a * rest + r, b * rest + r);
            out(a, b) = s;
        }
    return out;
}

}  // namespace qrk
