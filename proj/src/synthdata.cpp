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

#include "qrk/synthdata.hpp"

#include <cmath>
#include <stdexcept>

#include "qrk/errors.hpp"
#include "qrk/hash.hpp"
#include "qrk/rng.hpp"

namespace qrk {
namespace {

Eigen::MatrixXd gaussian_matrix(int d, Rng& rng) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    return m;
}

Eigen::VectorXd gaussian_unit(int d, Rng& rng) {
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    return g / g.norm();
}

}  // namespace

void VarmaSpec::validate() const {
    if (d < 1) throw std::invalid_argument("VARMA dimension d must be positive");
    if (p < 1) throw std::invalid_argument("VARMA order p must be positive");
    if (q < 0) throw std::invalid_argument("VARMA order q must be nonnegative");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("stability budget gamma must lie in (0, 1)");
    if (!(eta > 0.0 && std::isfinite(eta))) throw std::invalid_argument("MA amplitude eta must be positive");
    if (!(rho_ma > 0.0 && rho_ma < 1.0)) throw std::invalid_argument("MA decay rho_ma must lie in (0, 1)");
    if (!(sigma >= 0.0 && std::isfinite(sigma))) throw std::invalid_argument("innovation sigma must be nonnegative");
}

double spectral_norm(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

VarmaModel make_varma(const VarmaSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, stream::kVarma));
    VarmaModel m;
    m.spec = spec;
    std::vector<Eigen::MatrixXd> dirs;
    for (int i = 0; i < spec.p; ++i) {
        Eigen::MatrixXd raw = gaussian_matrix(spec.d, rng);
        dirs.push_back(raw / spectral_norm(raw));
    }
    std::vector<double> w(static_cast<std::size_t>(spec.p));
    double total = 0.0;
    for (double& wi : w) {
        wi = rng.uniform_open(0.0, 1.0);
        total += wi;
    }
    for (int i = 0; i < spec.p; ++i) {
        const double a = spec.gamma * w[static_cast<std::size_t>(i)] / total;
        m.ar_weights.push_back(a);
        m.phi.push_back(a * dirs[static_cast<std::size_t>(i)]);
    }
    m.theta.push_back(Eigen::MatrixXd::Identity(spec.d, spec.d));
    double b = spec.eta;
    for (int j = 1; j <= spec.q; ++j) {
        Eigen::MatrixXd raw = gaussian_matrix(spec.d, rng);
        m.theta.push_back(b * raw / spectral_norm(raw));
        b *= spec.rho_ma;
    }
    return m;
}

Eigen::MatrixXd simulate(const VarmaModel& model) {
    const VarmaSpec& sp = model.spec;
    sp.validate();
    const std::size_t total = sp.burn_in + sp.length;
    const auto p = static_cast<std::size_t>(sp.p), q = static_cast<std::size_t>(sp.q);
    Rng rng(derive_seed(sp.seed, stream::kInnovations));

    // ring buffers of past states and innovations, newest at index 0
    std::vector<Eigen::VectorXd> z_hist(p, Eigen::VectorXd::Zero(sp.d));
    std::vector<Eigen::VectorXd> e_hist(q + 1, Eigen::VectorXd::Zero(sp.d));
    Eigen::MatrixXd out(static_cast<Eigen::Index>(sp.length), sp.d);
    for (std::size_t t = 0; t < total; ++t) {
        for (std::size_t j = q; j > 0; --j) e_hist[j] = e_hist[j - 1];
        for (int c = 0; c < sp.d; ++c) e_hist[0](c) = sp.sigma * rng.normal();
        Eigen::VectorXd z = Eigen::VectorXd::Zero(sp.d);
        for (std::size_t i = 0; i < p; ++i) z += model.phi[i] * z_hist[i];
        for (std::size_t j = 0; j <= q; ++j) z += model.theta[j] * e_hist[j];
        for (std::size_t i = p - 1; i > 0; --i) z_hist[i] = z_hist[i - 1];
        z_hist[0] = z;
        if (t >= sp.burn_in) out.row(static_cast<Eigen::Index>(t - sp.burn_in)) = z.array().tanh().matrix().transpose();
    }
    return out;
}

double companion_spectral_radius(const VarmaModel& model) {
    const int d = model.spec.d, p = model.spec.p;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d * p, d * p);
    for (int i = 0; i < p; ++i) c.block(0, i * d, d, d) = model.phi[static_cast<std::size_t>(i)];
    if (p > 1) c.block(d, 0, d * (p - 1), d * (p - 1)).setIdentity();
    Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::string to_string(FunctionalKind k) {
    switch (k) {
        case FunctionalKind::Forecast: return "forecast";
        case FunctionalKind::ExpFading: return "exp_fading";
        case FunctionalKind::Volterra: return "volterra";
    }
    return "unknown";
}

FunctionalKind parse_functional_kind(const std::string& s) {
    if (s == "forecast") return FunctionalKind::Forecast;
    if (s == "exp_fading") return FunctionalKind::ExpFading;
    if (s == "volterra") return FunctionalKind::Volterra;
    throw ConfigError("unknown functional '" + s + "' (expected forecast, exp_fading or volterra)");
}

FunctionalSpec make_functional(FunctionalKind kind, int d, double alpha, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("functional dimension must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("decay alpha must lie in (0, 1)");
    Rng rng(derive_seed(seed, stream::kFunctional));
    FunctionalSpec f;
    f.kind = kind;
    f.alpha = alpha;
    f.seed = seed;
    f.u = gaussian_unit(d, rng);
    if (kind == FunctionalKind::Volterra) {
        if (d < 2) throw std::invalid_argument("the Volterra functional needs d >= 2");
        Eigen::VectorXd v = gaussian_unit(d, rng);
        v -= v.dot(f.u) * f.u;
        f.v = v / v.norm();
    }
    return f;
}

double label(const Eigen::MatrixXd& series, std::size_t t, const FunctionalSpec& spec, std::size_t w) {
    const auto rows = static_cast<std::size_t>(series.rows());
    if (w == 0) throw std::invalid_argument("window length must be positive");
    if (series.cols() != spec.u.size()) throw std::invalid_argument("series width does not match the functional");
    if (t + 1 < w || t >= rows) throw DataError("label needs " + std::to_string(w) + " history rows ending at row " + std::to_string(t));
    if (spec.kind == FunctionalKind::Forecast) {
        if (t + 1 >= rows) throw DataError("forecast label at row " + std::to_string(t) + " needs one future row");
        return spec.u.dot(series.row(static_cast<Eigen::Index>(t + 1)).transpose());
    }
    double lin = 0.0, quad = 0.0, ak = 1.0;
    for (std::size_t k = 0; k < w; ++k) {
        const auto x = series.row(static_cast<Eigen::Index>(t - k)).transpose();
        lin += ak * spec.u.dot(x);
        if (spec.kind == FunctionalKind::Volterra) quad += ak * spec.v.dot(x);
        ak *= spec.alpha;
    }
    return spec.kind == FunctionalKind::Volterra ? lin + 0.5 * quad * quad : lin;
}

double label_bound(const FunctionalSpec& spec, std::size_t w, int d) {
    const double r = std::sqrt(static_cast<double>(d));
    if (spec.kind == FunctionalKind::Forecast) return r;
    const double geo = (1.0 - std::pow(spec.alpha, static_cast<double>(w))) / (1.0 - spec.alpha);
    return spec.kind == FunctionalKind::Volterra ? r * geo + 0.5 * r * r * geo * geo : r * geo;
}

std::size_t required_length(std::size_t w, std::size_t s, std::size_t n, bool needs_future, std::size_t origin) {
    return origin + n * s + w + (needs_future ? 1 : 0);
}

WindowDataset make_windows(const Eigen::MatrixXd& series, const FunctionalSpec& spec, std::size_t w, std::size_t s,
                           std::size_t n, std::size_t origin) {
    if (w == 0) throw std::invalid_argument("window length must be positive");
    if (s < w) throw std::invalid_argument("stride must be at least the window length (gap >= 0)");
    const bool future = spec.kind == FunctionalKind::Forecast;
    const std::size_t need = required_length(w, s, n, future, origin);
    if (static_cast<std::size_t>(series.rows()) < need)
        throw DataError("series too short: " + std::to_string(n) + " windows with w=" + std::to_string(w) +
                        ", s=" + std::to_string(s) + " need T >= " + std::to_string(need) + ", got " +
                        std::to_string(series.rows()));
    WindowDataset ds;
    ds.w = w;
    ds.s = s;
    ds.g = s - w;
    ds.source_hash = series_hash(series);
    ds.labels.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t end = origin + (i + 1) * s + w - 1;
        ds.ends.push_back(end);
        ds.windows.push_back(series.middleRows(static_cast<Eigen::Index>(end + 1 - w), static_cast<Eigen::Index>(w)));
        ds.labels(static_cast<Eigen::Index>(i)) = label(series, end, spec, w);
    }
    return ds;
}

std::uint64_t series_hash(const Eigen::MatrixXd& series) {
    Fnv1a h;
    h.value(series.rows()).value(series.cols());
    return h.doubles({series.data(), static_cast<std::size_t>(series.size())}).digest();
}

}  // namespace qrk
