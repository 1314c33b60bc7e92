#include "grpx/young.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grpx/conditional.hpp"
#include "grpx/errors.hpp"
#include "grpx/parallel.hpp"

namespace grpx {

namespace {

constexpr double kRelTol = 1e-9;

bool at_least(double a, double b) {
    return a >= b - kRelTol * std::max({1e-300, std::abs(a), std::abs(b)});
}

void check_compatible(double gamma, const CovarianceKernel& k) {
    const double rho = k.rho();
    if (!(gamma + 1.0 / rho > 1.0))
        throw IncompatibleError("young-integration",
                                "gamma + 1/rho = " + std::to_string(gamma + 1.0 / rho) +
                                    " <= 1 for " + k.describe());
}

void check_domain(const HolderFunction& f, double S, const CovarianceKernel& k) {
    if (!(S > 0.0) || S > k.horizon() * (1.0 + 1e-12))
        throw DomainError("young-integration", "need 0 < S <= T");
    if (f.grid().start() > 0.0 || f.grid().end() < S * (1.0 - 1e-12))
        throw DomainError("young-integration", "function samples do not cover [0,S]");
}

// coefficients of the point values in sum_i f(t_i) X_{t_i,t_{i+1}}
std::vector<double> point_weights(const HolderFunction& f, const Partition& d) {
    const int n = d.cells();
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double fi = f(d[i]);
        w[static_cast<std::size_t>(i)] -= fi;
        w[static_cast<std::size_t>(i) + 1] += fi;
    }
    return w;
}

}  // namespace

HolderFunction::HolderFunction(Partition grid, std::vector<double> values, double gamma)
    : grid_(std::move(grid)), v_(std::move(values)), gamma_(gamma) {
    if (v_.size() != grid_.points().size())
        throw DomainError("young-integration", "one value per grid point required");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw DomainError("young-integration", "Holder exponent must lie in (0,1]");
    const auto& x = grid_.points();
    for (std::size_t i = 0; i < v_.size(); ++i) {
        if (!std::isfinite(v_[i])) throw DomainError("young-integration", "non-finite sample");
        sup_ = std::max(sup_, std::abs(v_[i]));
        for (std::size_t j = i + 1; j < v_.size(); ++j)
            holder_ = std::max(holder_, std::abs(v_[j] - v_[i]) / std::pow(x[j] - x[i], gamma_));
    }
}

HolderFunction HolderFunction::sample(const std::function<double(double)>& f, const Partition& grid,
                                      double gamma) {
    std::vector<double> v;
    v.reserve(grid.points().size());
    for (double x : grid.points()) v.push_back(f(x));
    return HolderFunction(grid, std::move(v), gamma);
}

double HolderFunction::operator()(double t) const {
    const auto& x = grid_.points();
    const double eps = 1e-12 * std::max(1.0, std::abs(x.back()));
    if (t < x.front() - eps || t > x.back() + eps)
        throw DomainError("young-integration", "evaluation outside the sampled range");
    if (t <= x.front()) return v_.front();
    if (t >= x.back()) return v_.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double a = x[j - 1], b = x[j];
    const double lam = (t - a) / (b - a);
    return (1.0 - lam) * v_[j - 1] + lam * v_[j];
}

double HolderFunction::inf_abs(double s, double t) const {
    if (s > t) std::swap(s, t);
    std::vector<double> vals{(*this)(s), (*this)(t)};
    for (std::size_t i = 0; i < v_.size(); ++i) {
        const double x = grid_.points()[i];
        if (x > s && x < t) vals.push_back(v_[i]);
    }
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    if (*lo <= 0.0 && *hi >= 0.0) return 0.0;
    return *lo > 0.0 ? *lo : -*hi;
}

HolderFunction HolderFunction::restricted(double S) const {
    std::vector<double> pts, vals;
    for (std::size_t i = 0; i < v_.size(); ++i) {
        const double x = grid_.points()[i];
        if (x < S) {
            pts.push_back(x);
            vals.push_back(v_[i]);
        }
    }
    pts.push_back(S);
    vals.push_back((*this)(S));
    return HolderFunction(Partition(pts), vals, gamma_);
}

double HolderFunction::l2_norm() const {
    double acc = 0.0;
    for (int i = 0; i < grid_.cells(); ++i) {
        const double a = v_[static_cast<std::size_t>(i)], b = v_[static_cast<std::size_t>(i) + 1];
        acc += (grid_[i + 1] - grid_[i]) * (a * a + a * b + b * b) / 3.0;
    }
    return std::sqrt(acc);
}

HolderFunction HolderFunction::operator+(const HolderFunction& o) const {
    if (o.grid_.points() != grid_.points())
        throw DomainError("young-integration", "sum needs a common grid");
    std::vector<double> v(v_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v_[i];
    return HolderFunction(grid_, v, std::min(gamma_, o.gamma_));
}

HolderFunction HolderFunction::scaled(double a) const {
    std::vector<double> v(v_);
    for (double& x : v) x *= a;
    return HolderFunction(grid_, v, gamma_);
}

HolderFunction random_holder_function(double gamma, double S, int cells, std::uint64_t seed) {
    const auto k = CovarianceKernel::fbm(std::min(gamma, 0.999), S);
    const Partition grid = Partition::uniform(0.0, S, cells);
    GaussianSampler sampler(k, grid.points());
    const Eigen::MatrixXd x = sampler.sample(seed);
    std::vector<double> v(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) v[static_cast<std::size_t>(i)] = x(i, 0);
    return HolderFunction(grid, v, gamma);
}

double riemann_sum(const HolderFunction& f, const HolderFunction& g, const CovarianceKernel& k,
                   const Partition& d) {
    const std::vector<double> wf = point_weights(f, d);
    const std::vector<double> wg = &f == &g ? wf : point_weights(g, d);
    const auto& x = d.points();
    const std::size_t n = x.size();
    double acc = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double row = wf[p] * wg[p] * k(x[p], x[p]);
        for (std::size_t q = p + 1; q < n; ++q) row += (wf[p] * wg[q] + wf[q] * wg[p]) * k(x[p], x[q]);
        acc += row;
    }
    return acc;
}

double riemann_sum(const HolderFunction& f, const CovarianceKernel& k, const Partition& d) {
    return riemann_sum(f, f, k, d);
}

YoungIntegral young_2d(const HolderFunction& f, const HolderFunction& g, const CovarianceKernel& k,
                       double S, int depth) {
    check_compatible(std::min(f.gamma(), g.gamma()), k);
    check_domain(f, S, k);
    check_domain(g, S, k);
    if (depth < 1 || depth > 12) throw DomainError("young-integration", "depth must lie in [1,12]");
    YoungIntegral r;
    r.depth = depth;
    r.raw = riemann_sum(f, g, k, Partition::dyadic(0.0, S, depth));
    r.previous = riemann_sum(f, g, k, Partition::dyadic(0.0, S, depth - 1));
    r.value = 2.0 * r.raw - r.previous;
    r.error = std::abs(r.raw - r.previous);
    return r;
}

YoungIntegral young_2d(const HolderFunction& f, const CovarianceKernel& k, double S, int depth) {
    return young_2d(f, f, k, S, depth);
}

ComparisonResult comparison_lower_bound(const HolderFunction& f, const CovarianceKernel& k,
                                        double s, double t, int depth) {
    const double T = k.horizon();
    if (!(0.0 <= s && s < t && t <= T)) throw DomainError("young-integration", "need 0 <= s < t <= T");
    const YoungIntegral y = young_2d(f, k, T, depth);
    ComparisonResult r;
    r.young = y.value;
    const Partition d = Partition::dyadic(0.0, T, depth).refined({s, t});
    r.lhs = riemann_sum(f, k, d);
    r.inf_abs = f.inf_abs(s, t);
    r.cond_var = conditional_variance(k, s, t, dyadic_context(s, t, T, depth));
    r.rhs = r.inf_abs * r.inf_abs * r.cond_var;
    r.holds = at_least(r.lhs, r.rhs);
    return r;
}

std::string to_string(InterpolationBranch b) { return b == InterpolationBranch::l2 ? "L2" : "Inf"; }

InterpolationResult interpolation_check(const HolderFunction& f_in, const CovarianceKernel& k,
                                        double S, int depth) {
    check_compatible(f_in.gamma(), k);
    check_domain(f_in, S, k);
    if (depth < 1 || depth > 12) throw DomainError("young-integration", "depth must lie in [1,12]");
    const HolderFunction f = f_in.restricted(S);
    InterpolationResult r;
    if (S < k.horizon()) r.note = "S < T: construction run on [0,S] with context inside [0,S]";
    r.sup_norm = f.sup_norm();
    r.holder_norm = f.holder_norm();
    const double M = r.sup_norm;

    const auto& x = f.grid().points();
    const auto& v = f.values();
    std::size_t imax = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    const double sgn = v[imax] < 0 ? -1.0 : 1.0;
    auto sv = [&](std::size_t i) { return sgn * v[i]; };
    const double half = 0.5 * M;

    bool all_above = true;
    for (std::size_t i = 0; i < v.size(); ++i) all_above = all_above && sv(i) >= half;
    if (M > 0.0 && !all_above) {
        // last point at or below half-max before the argmax; otherwise the first one after it
        std::ptrdiff_t j = -1;
        for (std::size_t i = 0; i < imax; ++i)
            if (sv(i) <= half) j = static_cast<std::ptrdiff_t>(i);
        if (j >= 0) {
            const std::size_t a = static_cast<std::size_t>(j);
            const double lam = (half - sv(a)) / (sv(a + 1) - sv(a));
            r.s = x[a] + lam * (x[a + 1] - x[a]);
            r.t = x[imax];
        } else {
            std::size_t b = imax + 1;
            while (sv(b) > half) ++b;
            const double lam = (sv(b - 1) - half) / (sv(b - 1) - sv(b));
            r.s = x[imax];
            r.t = x[b - 1] + lam * (x[b] - x[b - 1]);
        }
        r.has_interval = r.t > r.s;
    }
    r.min_length = r.holder_norm > 0 ? std::pow(M / (2.0 * r.holder_norm), 1.0 / f.gamma()) : S;

    Partition d = Partition::dyadic(0.0, S, depth);
    if (r.has_interval) d = d.refined({r.s, r.t});
    r.integral = riemann_sum(f, k, d);

    const double second = k(S, S);
    r.l2_lhs = M;
    r.l2_rhs = 2.0 / std::sqrt(second) * std::sqrt(std::max(r.integral, 0.0));
    r.l2_holds = at_least(r.l2_rhs, r.l2_lhs);

    if (r.has_interval) {
        r.length_ok = at_least(r.t - r.s, r.min_length);
        const double cv = conditional_variance(k, r.s, r.t, dyadic_context(r.s, r.t, S, depth));
        r.inf_lhs = 0.25 * M * M * cv;
        r.inf_rhs = r.integral;
        r.inf_holds = at_least(r.inf_rhs, r.inf_lhs);
        r.branch = InterpolationBranch::inf;
        r.lhs = r.inf_lhs;
        r.rhs = r.inf_rhs;
    } else {
        r.branch = InterpolationBranch::l2;
        r.lhs = r.l2_lhs;
        r.rhs = r.l2_rhs;
    }
    r.holds = r.l2_holds || r.inf_holds;
    return r;
}

double interpolation_corollary_bound(double integral, double holder_norm, double gamma,
                                     double alpha, double c, double second_moment) {
    if (!(c > 0) || !(alpha > 0) || !(second_moment > 0))
        throw DomainError("young-integration", "need c > 0, alpha > 0, E[Z_S^2] > 0");
    const double I = std::max(integral, 0.0);
    const double e = gamma / (2 * gamma + alpha);
    const double first = 2.0 / std::sqrt(second_moment) * std::sqrt(I);
    const double second = 2.0 * std::pow(c, -e) * std::pow(I, e) *
                          std::pow(holder_norm, alpha / (2 * gamma + alpha));
    return std::max(first, second);
}

double interpolation_corollary_bound_printed(double integral, double holder_norm, double gamma,
                                             double alpha, double c, double second_moment) {
    if (!(c > 0) || !(alpha > 0) || !(second_moment > 0))
        throw DomainError("young-integration", "need c > 0, alpha > 0, E[Z_S^2] > 0");
    const double I = std::max(integral, 0.0);
    const double first = 2.0 / std::sqrt(second_moment) * std::sqrt(I);
    const double second = 2.0 / std::sqrt(c) * std::pow(I, gamma / (2 * gamma + alpha)) *
                          std::pow(holder_norm, alpha / (2 * gamma + alpha));
    return std::max(first, second);
}

double bm_interpolation_bound(const HolderFunction& f, double T) {
    const HolderFunction g = f.restricted(T);
    const double l2 = g.l2_norm(), gam = g.gamma();
    return 2.0 * std::max(l2 / std::sqrt(T), std::pow(l2, 2 * gam / (2 * gam + 1)) *
                                                 std::pow(g.holder_norm(), 1.0 / (2 * gam + 1)));
}

double young_constant(double gamma, double rho) {
    const double theta = gamma + 1.0 / rho;
    if (!(theta > 1.0)) throw IncompatibleError("young-integration", "gamma + 1/rho <= 1");
    const double z = 1.0 + std::riemann_zeta(theta);
    return z * z;
}

YoungBound young_bound(const HolderFunction& f, const CovarianceKernel& k, double S,
                       const VariationSearch& search, int depth) {
    const double rho = k.rho();
    YoungBound b;
    b.K = young_constant(f.gamma(), rho);
    const YoungIntegral y = young_2d(f, k, S, depth);
    b.lhs = std::abs(y.value);
    b.v_rho = std::pow(rho_variation_estimate(k, rho, search, 0.0, S).value, 1.0 / rho);
    const HolderFunction g = f.restricted(S);
    const double scale = g.holder_norm() + std::abs(g(0.0));
    b.rhs = b.K * scale * scale * b.v_rho;
    b.holds = b.lhs <= b.rhs;
    return b;
}

std::vector<InterpolationRow> interpolation_trials(const CovarianceKernel& k, int trials,
                                                   double gamma, double S, int depth,
                                                   std::uint64_t seed) {
    if (trials < 1) throw DomainError("young-integration", "need at least one trial");
    std::vector<InterpolationRow> rows(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int i) {
        const auto f = random_holder_function(gamma, S, 1 << depth, seed + static_cast<std::uint64_t>(i));
        const auto r = interpolation_check(f, k, S, depth);
        auto& row = rows[static_cast<std::size_t>(i)];
        row.trial = i;
        row.branch = r.branch;
        row.lhs = r.lhs;
        row.rhs = r.rhs;
        row.margin = r.rhs - r.lhs;
        row.holds = r.holds;
    });
    return rows;
}

}  // namespace grpx
