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

#include "qrk/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "qrk/errors.hpp"
#include "qrk/rng.hpp"
#include "qrk/special.hpp"

namespace qrk {
namespace {

void require_s(double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("Matern profile requires s >= 0");
}

double scaled_argument(const MaternParams& p, double s) { return std::sqrt(2.0 * p.nu) * s / p.xi; }

void require_same_width(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("feature lengths differ");
}

double ridge_for(double lambda_reg, RidgeConvention c, Eigen::Index n) {
    return c == RidgeConvention::SampleScaled ? static_cast<double>(n) * lambda_reg : lambda_reg;
}

}  // namespace

std::string to_string(RidgeConvention c) { return c == RidgeConvention::SampleScaled ? "sample_scaled" : "plain"; }

RidgeConvention parse_ridge_convention(const std::string& s) {
    if (s == "sample_scaled") return RidgeConvention::SampleScaled;
    if (s == "plain") return RidgeConvention::Plain;
    throw std::invalid_argument("unknown ridge convention '" + s + "' (expected sample_scaled or plain)");
}

MaternParams MaternParams::make(double nu, double xi) {
    if (!(std::isfinite(nu) && nu > 0.0)) throw std::invalid_argument("Matern smoothness nu must be finite and positive");
    if (!(std::isfinite(xi) && xi > 0.0)) throw std::invalid_argument("Matern lengthscale xi must be finite and positive");
    return MaternParams{nu, xi};
}

double matern_profile_closed_form(const MaternParams& p, double s) {
    require_s(s);
    if (!is_half_integer(p.nu)) throw std::invalid_argument("closed form requires a half-integer nu");
    if (s == 0.0) return 1.0;
    const int m = static_cast<int>(std::round(p.nu - 0.5));
    const double z = scaled_argument(p, s);
    double coef = 1.0;
    double poly = 0.0, power = 1.0;
    for (int j = m; j >= 0; --j) {
        poly += coef * power;
        power *= 2.0 * z;
        coef *= static_cast<double>(j) / (static_cast<double>(m + j) * static_cast<double>(m - j + 1));
    }
    return std::exp(-z) * poly;
}

double matern_profile_general(const MaternParams& p, double s) {
    require_s(s);
    if (s == 0.0) return 1.0;
    const double z = scaled_argument(p, s);
    const double k = bessel_k_general(p.nu, z);
    if (k == 0.0) return 0.0;
    return std::exp((1.0 - p.nu) * std::log(2.0) - std::lgamma(p.nu) + p.nu * std::log(z)) * k;
}

double matern_profile(const MaternParams& p, double s) {
    require_s(s);
    if (s == 0.0) return 1.0;
    return is_half_integer(p.nu) ? matern_profile_closed_form(p, s) : matern_profile_general(p, s);
}

double kernel_eval(const MaternParams& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw std::invalid_argument("feature lengths differ");
    return matern_profile(p, (a - b).norm());
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    require_same_width(a, b);
    Eigen::MatrixXd d(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
    return d;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = (a.row(i) - a.row(j)).norm();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) d(i, j) = d(j, i);
    return d;
}

Eigen::MatrixXd apply_profile(const MaternParams& p, const Eigen::MatrixXd& distances) {
    Eigen::MatrixXd k(distances.rows(), distances.cols());
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < distances.cols(); ++j)
        for (Eigen::Index i = 0; i < distances.rows(); ++i) k(i, j) = matern_profile(p, distances(i, j));
    return k;
}

Eigen::MatrixXd gram(const MaternParams& p, const Eigen::MatrixXd& features) {
    const Eigen::Index n = features.rows();
    if (n < 1) throw std::invalid_argument("Gram matrix needs at least one feature vector");
    Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) k(i, j) = matern_profile(p, (features.row(i) - features.row(j)).norm());
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i);
    return k;
}

Eigen::MatrixXd gram_serial(const MaternParams& p, const Eigen::MatrixXd& features) {
    const Eigen::Index n = features.rows();
    if (n < 1) throw std::invalid_argument("Gram matrix needs at least one feature vector");
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            k(i, j) = matern_profile(p, (features.row(i) - features.row(j)).norm());
            k(j, i) = k(i, j);
        }
    }
    return k;
}

Eigen::MatrixXd cross_gram(const MaternParams& p, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return apply_profile(p, pairwise_distances(a, b));
}

Eigen::VectorXd krr_solve(const Eigen::MatrixXd& gram_matrix, const Eigen::VectorXd& y, double ridge) {
    const Eigen::Index n = gram_matrix.rows();
    if (gram_matrix.cols() != n || y.size() != n) throw std::invalid_argument("Gram matrix and labels disagree in size");
    if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be nonnegative");
    const Eigen::MatrixXd a = gram_matrix + ridge * Eigen::MatrixXd::Identity(n, n);
    const double y_norm = y.norm();

    Eigen::VectorXd alpha;
    auto refine = [&](const auto& solver) {
        alpha = solver.solve(y);
        for (int it = 0; it < 3; ++it) {
            const Eigen::VectorXd r = y - a * alpha;
            if (r.norm() <= 1e-14 * y_norm) break;
            alpha += solver.solve(r);
        }
    };

    Eigen::LLT<Eigen::MatrixXd> llt;
    if (ridge > 0.0) llt.compute(a);
    if (ridge > 0.0 && llt.info() == Eigen::Success) {
        refine(llt);
    } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        const Eigen::VectorXd dabs = ldlt.vectorD().cwiseAbs();
        const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * dabs.maxCoeff();
        if (ldlt.info() != Eigen::Success || dabs.minCoeff() <= tiny)
            throw NumericalRankError("kernel system is numerically singular; raise lambda_reg");
        refine(ldlt);
    }
    if (!alpha.allFinite() || (y - a * alpha).norm() > 1e-8 * y_norm)
        throw NumericalRankError("kernel system residual exceeds 1e-8 |y|; raise lambda_reg");
    return alpha;
}

KrrModel krr_fit_with_gram(const MaternParams& p, double lambda_reg, const Eigen::MatrixXd& features,
                           const Eigen::MatrixXd& gram_matrix, const Eigen::VectorXd& y, RidgeConvention convention) {
    if (features.rows() < 1) throw std::invalid_argument("KRR needs at least one sample");
    if (features.rows() != y.size()) throw std::invalid_argument("feature and label counts differ");
    if (!(lambda_reg >= 0.0)) throw std::invalid_argument("lambda_reg must be nonnegative");
    KrrModel m;
    m.matern = p;
    m.lambda_reg = lambda_reg;
    m.convention = convention;
    m.support = features;
    m.y_train = y;
    m.alpha = krr_solve(gram_matrix, y, ridge_for(lambda_reg, convention, features.rows()));
    return m;
}

KrrModel krr_fit(const MaternParams& p, double lambda_reg, const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                 RidgeConvention convention) {
    if (features.rows() < 1) throw std::invalid_argument("KRR needs at least one sample");
    return krr_fit_with_gram(p, lambda_reg, features, gram(p, features), y, convention);
}

Eigen::VectorXd krr_predict(const KrrModel& model, const Eigen::MatrixXd& features_new) {
    if (features_new.cols() != model.support.cols()) throw std::invalid_argument("feature length does not match the model");
    return cross_gram(model.matern, features_new, model.support) * model.alpha;
}

double rkhs_norm(const KrrModel& model) {
    const double q = model.alpha.dot(gram(model.matern, model.support) * model.alpha);
    return std::sqrt(std::max(0.0, q));
}

double mean_squared_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() == 0) throw std::invalid_argument("MSE needs equal, nonempty vectors");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

void TunerConfig::validate() const {
    if (nu_grid.empty()) throw std::invalid_argument("nu grid is empty");
    for (double nu : nu_grid)
        if (!(nu > 0.0 && std::isfinite(nu))) throw std::invalid_argument("nu grid values must be positive");
    if (!(xi_lo > 0.0 && xi_lo < xi_hi && std::isfinite(xi_hi))) throw std::invalid_argument("xi bounds must satisfy 0 < lo < hi");
    if (!(val_ratio > 0.0 && val_ratio < 1.0)) throw std::invalid_argument("val_ratio must lie in (0, 1)");
    if (!(lambda_reg >= 0.0)) throw std::invalid_argument("tuning lambda_reg must be nonnegative");
    if (xi_maxiter < 3) throw std::invalid_argument("xi_maxiter must be at least 3");
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> validation_split(std::size_t n, double val_ratio,
                                                                               std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(seed, stream::kSplit));
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    auto n_val = static_cast<std::size_t>(std::llround(val_ratio * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> tr(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    return {val, tr};
}

TuneResult tune(const TunerConfig& cfg, const Eigen::MatrixXd& features, const Eigen::VectorXd& y) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(features.rows());
    if (n < 5) throw std::invalid_argument("tuning needs at least 5 samples");
    if (static_cast<std::size_t>(y.size()) != n) throw std::invalid_argument("feature and label counts differ");

    const auto [val, tr] = validation_split(n, cfg.val_ratio, cfg.split_seed);
    Eigen::MatrixXd f_tr(static_cast<Eigen::Index>(tr.size()), features.cols());
    Eigen::MatrixXd f_val(static_cast<Eigen::Index>(val.size()), features.cols());
    Eigen::VectorXd y_tr(static_cast<Eigen::Index>(tr.size())), y_val(static_cast<Eigen::Index>(val.size()));
    for (std::size_t i = 0; i < tr.size(); ++i) {
        f_tr.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(tr[i]));
        y_tr(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(tr[i]));
    }
    for (std::size_t i = 0; i < val.size(); ++i) {
        f_val.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(val[i]));
        y_val(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(val[i]));
    }
    const Eigen::MatrixXd d_tr = pairwise_distances(f_tr);
    const Eigen::MatrixXd d_val = pairwise_distances(f_val, f_tr);
    const double ridge = ridge_for(cfg.lambda_reg, cfg.convention, static_cast<Eigen::Index>(tr.size()));

    TuneResult result;
    auto evaluate = [&](double nu, double log_xi) {
        const MaternParams p{nu, std::pow(10.0, log_xi)};
        double mse = std::numeric_limits<double>::infinity();
        try {
            const Eigen::VectorXd alpha = krr_solve(apply_profile(p, d_tr), y_tr, ridge);
            mse = mean_squared_error(apply_profile(p, d_val) * alpha, y_val);
            if (!std::isfinite(mse)) mse = std::numeric_limits<double>::infinity();
        } catch (const NumericalRankError&) {
        }
        result.trials.push_back({p.nu, p.xi, mse});
        return mse;
    };

    const double lo = std::log10(cfg.xi_lo), hi = std::log10(cfg.xi_hi);
    const int scan = std::min(13, cfg.xi_maxiter);
    for (double nu : cfg.nu_grid) {
        int evals = 0;
        std::vector<double> xs(static_cast<std::size_t>(scan)), fs(static_cast<std::size_t>(scan));
        for (int i = 0; i < scan; ++i) {
            xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (scan - 1);
            fs[static_cast<std::size_t>(i)] = evaluate(nu, xs[static_cast<std::size_t>(i)]);
            ++evals;
        }
        const auto best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
        double a = xs[best > 0 ? best - 1 : 0];
        double b = xs[std::min(best + 1, xs.size() - 1)];
        // golden-section refinement inside the bracketing cells
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - invphi * (b - a), d = a + invphi * (b - a);
        double fc = 0.0, fd = 0.0;
        if (evals + 2 <= cfg.xi_maxiter) {
            fc = evaluate(nu, c);
            fd = evaluate(nu, d);
            evals += 2;
            while (evals < cfg.xi_maxiter && (b - a) > 1e-4) {
                if (fc <= fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - invphi * (b - a);
                    fc = evaluate(nu, c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + invphi * (b - a);
                    fd = evaluate(nu, d);
                }
                ++evals;
            }
        }
    }

    const auto best = std::min_element(result.trials.begin(), result.trials.end(), [](const TuneTrial& l, const TuneTrial& r) {
        return std::tie(l.val_mse, l.nu, l.xi) < std::tie(r.val_mse, r.nu, r.xi);
    });
    result.best = MaternParams{best->nu, best->xi};
    result.val_mse = best->val_mse;
    return result;
}

}  // namespace qrk
