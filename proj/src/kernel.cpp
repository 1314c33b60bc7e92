#include "grpx/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "grpx/errors.hpp"

namespace grpx {

namespace {

constexpr double kDomainSlack = 1e-12;

std::string fmtd(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::brownian: return "brownian";
        case KernelFamily::fbm: return "fbm";
        case KernelFamily::ou: return "ou";
        case KernelFamily::bridge: return "bridge";
    }
    return "?";
}

KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "brownian" || s == "bm") return KernelFamily::brownian;
    if (s == "fbm") return KernelFamily::fbm;
    if (s == "ou") return KernelFamily::ou;
    if (s == "bridge") return KernelFamily::bridge;
    throw ConfigError("gp-kernels", "unknown kernel family '" + s + "'");
}

CovarianceKernel::CovarianceKernel(KernelFamily f, double horizon, double hurst, double pin)
    : family_(f), horizon_(horizon), hurst_(hurst), pin_(pin) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("gp-kernels", "horizon must be positive, got " + fmtd(horizon));
}

CovarianceKernel CovarianceKernel::brownian(double horizon) {
    return CovarianceKernel(KernelFamily::brownian, horizon, 0.5, 0.0);
}

CovarianceKernel CovarianceKernel::fbm(double hurst, double horizon) {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw DomainError("gp-kernels", "Hurst index must lie in (0,1), got " + fmtd(hurst));
    return CovarianceKernel(KernelFamily::fbm, horizon, hurst, 0.0);
}

CovarianceKernel CovarianceKernel::ou(double horizon) {
    return CovarianceKernel(KernelFamily::ou, horizon, 0.5, 0.0);
}

CovarianceKernel CovarianceKernel::bridge(double pin, double horizon) {
    // pin == horizon is allowed on purpose: it is the degenerate example the checks must reject.
    if (!(pin >= horizon))
        throw DomainError("gp-kernels", "bridge pin T' must be >= horizon, got " + fmtd(pin));
    return CovarianceKernel(KernelFamily::bridge, horizon, 0.5, pin);
}

void CovarianceKernel::check_point(double s) const {
    if (!(s >= -kDomainSlack && s <= horizon_ * (1.0 + kDomainSlack) + kDomainSlack))
        throw DomainError("gp-kernels", "time " + fmtd(s) + " outside [0, " + fmtd(horizon_) + "]");
}

double CovarianceKernel::eval(double s, double t) const {
    s = std::max(s, 0.0);
    t = std::max(t, 0.0);
    const double lo = std::min(s, t), hi = std::max(s, t);
    switch (family_) {
        case KernelFamily::brownian: return lo;
        case KernelFamily::fbm: {
            const double h2 = 2.0 * hurst_;
            return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(hi - lo, h2));
        }
        case KernelFamily::ou: return 2.0 * std::exp(-hi) * std::sinh(lo);
        case KernelFamily::bridge: return lo * (pin_ - hi);
    }
    return 0.0;
}

double CovarianceKernel::operator()(double s, double t) const {
    check_point(s);
    check_point(t);
    return eval(s, t);
}

double CovarianceKernel::rect(double s, double t, double u, double v) const {
    check_point(s);
    check_point(t);
    check_point(u);
    check_point(v);
    return eval(t, v) - eval(t, u) - eval(s, v) + eval(s, u);
}

PartialValue CovarianceKernel::partial_a(double a, double b, DerivativeMode mode) const {
    check_point(a);
    check_point(b);
    if (a == b) throw DomainError("gp-kernels", "partial_a is taken off the diagonal");
    if (mode == DerivativeMode::finite_difference) {
        const double h = 1e-5 * horizon_;
        // stay inside the half-plane containing (a,b) so the kink on the diagonal is not crossed
        const double lo = std::max(a - h, 0.0);
        const double hi = a + h;
        return {(eval(hi, b) - eval(lo, b)) / (hi - lo), true};
    }
    double v = 0.0;
    switch (family_) {
        case KernelFamily::brownian: v = a < b ? 1.0 : 0.0; break;
        case KernelFamily::fbm: {
            const double h = hurst_;
            if (a <= 0.0 && h < 0.5)
                throw DomainError("gp-kernels", "fbm partial_a blows up at a = 0");
            const double sgn = a < b ? 1.0 : -1.0;
            v = h * std::pow(a, 2 * h - 1) + sgn * h * std::pow(std::abs(b - a), 2 * h - 1);
            break;
        }
        case KernelFamily::ou:
            v = a < b ? 2.0 * std::exp(-b) * std::cosh(a) : -2.0 * std::exp(-a) * std::sinh(b);
            break;
        case KernelFamily::bridge: v = a < b ? pin_ - b : -b; break;
    }
    return {v, false};
}

PartialValue CovarianceKernel::mixed_partial(double a, double b, DerivativeMode mode) const {
    check_point(a);
    check_point(b);
    if (a == b) throw DomainError("gp-kernels", "mixed partial is taken off the diagonal");
    if (mode == DerivativeMode::finite_difference) {
        const double h = std::min(1e-5 * horizon_, 0.25 * std::abs(b - a));
        const double v = (eval(a + h, b + h) - eval(a + h, b - h) - eval(a - h, b + h) +
                          eval(a - h, b - h)) /
                         (4.0 * h * h);
        return {v, true};
    }
    const double lo = std::min(a, b), hi = std::max(a, b);
    double v = 0.0;
    switch (family_) {
        case KernelFamily::brownian: v = 0.0; break;
        case KernelFamily::fbm: {
            const double h = hurst_;
            v = h * (2 * h - 1) * std::pow(hi - lo, 2 * h - 2);
            break;
        }
        case KernelFamily::ou: v = -2.0 * std::exp(-hi) * std::cosh(lo); break;
        case KernelFamily::bridge: v = -1.0; break;
    }
    return {v, false};
}

double CovarianceKernel::rho() const {
    if (family_ == KernelFamily::fbm && hurst_ < 0.5) return 1.0 / (2.0 * hurst_);
    return 1.0;
}

Eigen::MatrixXd CovarianceKernel::point_gram(const std::vector<double>& pts) const {
    const auto n = static_cast<Eigen::Index>(pts.size());
    for (double p : pts) check_point(p);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) g(i, j) = g(j, i) = eval(pts[i], pts[j]);
    return g;
}

std::string CovarianceKernel::describe() const {
    std::string s = to_string(family_);
    if (family_ == KernelFamily::fbm) s += "(H=" + fmtd(hurst_) + ")";
    if (family_ == KernelFamily::bridge) s += "(T'=" + fmtd(pin_) + ")";
    return s + " on [0," + fmtd(horizon_) + "]";
}

nlohmann::json CovarianceKernel::to_json() const {
    nlohmann::json j{{"family", to_string(family_)}, {"horizon", horizon_}};
    if (family_ == KernelFamily::fbm) j["H"] = hurst_;
    if (family_ == KernelFamily::bridge) j["pin"] = pin_;
    return j;
}

CovarianceKernel CovarianceKernel::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw ConfigError("gp-kernels", "kernel needs a string 'family'");
    const auto fam = kernel_family_from_string(j["family"].get<std::string>());
    const double horizon = j.value("horizon", 1.0);
    switch (fam) {
        case KernelFamily::brownian: return brownian(horizon);
        case KernelFamily::fbm:
            if (!j.contains("H")) throw ConfigError("gp-kernels", "fbm kernel needs 'H'");
            return fbm(j["H"].get<double>(), horizon);
        case KernelFamily::ou: return ou(horizon);
        case KernelFamily::bridge: return bridge(j.value("pin", 2.0 * horizon), horizon);
    }
    throw ConfigError("gp-kernels", "unreachable");
}

GaussianSampler::GaussianSampler(const CovarianceKernel& k, std::vector<double> grid)
    : grid_(std::move(grid)) {
    if (grid_.empty()) throw DomainError("gp-kernels", "empty sampling grid");
    if (grid_.size() > max_grid)
        throw DomainError("gp-kernels", "grid has " + std::to_string(grid_.size()) +
                                            " points, cap is " + std::to_string(max_grid));
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw DomainError("gp-kernels", "sampling grid must be strictly increasing");
    offset_ = grid_.front() == 0.0 ? 1 : 0;
    std::vector<double> free(grid_.begin() + static_cast<std::ptrdiff_t>(offset_), grid_.end());
    if (free.empty()) return;
    Eigen::MatrixXd g = k.point_gram(free);
    const double tr = g.trace();
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    for (double scale : {1e-14, 1e-12, 1e-10}) {
        if (llt.info() == Eigen::Success) break;
        jitter_ = scale * tr;
        llt.compute(g + jitter_ * Eigen::MatrixXd::Identity(g.rows(), g.cols()));
    }
    if (llt.info() != Eigen::Success)
        throw FactorizationError("gp-kernels",
                                 "point Gram not PSD after jitter 1e-10*trace for " + k.describe());
    chol_ = llt.matrixL();
}

Eigen::MatrixXd GaussianSampler::sample(std::uint64_t seed, int dim) const {
    if (dim < 1) throw DomainError("gp-kernels", "path dimension must be >= 1");
    const auto n = static_cast<Eigen::Index>(grid_.size());
    const Eigen::Index m = n - static_cast<Eigen::Index>(offset_);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, dim);
    if (m == 0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd z(m, dim);
    for (int c = 0; c < dim; ++c)
        for (Eigen::Index i = 0; i < m; ++i) z(i, c) = nd(rng);
    out.bottomRows(m) = chol_.triangularView<Eigen::Lower>() * z;
    return out;
}

PathEnsemble sample_paths(const CovarianceKernel& k, const std::vector<double>& grid, int n_paths,
                          std::uint64_t seed, int dim) {
    if (n_paths < 1) throw DomainError("gp-kernels", "need at least one path");
    GaussianSampler sampler(k, grid);
    PathEnsemble e;
    e.grid = grid;
    e.dim = dim;
    e.paths.reserve(static_cast<std::size_t>(n_paths));
    for (int i = 0; i < n_paths; ++i)
        e.paths.push_back(sampler.sample(seed + static_cast<std::uint64_t>(i), dim));
    return e;
}

}  // namespace grpx
