#include "grpx/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grpx/errors.hpp"
#include "grpx/gram.hpp"

namespace grpx {

namespace {

void check_rho(double rho) {
    if (!(rho >= 1.0 && rho < 2.0))
        throw DomainError("partition", "rho must lie in [1, 2)");
}

void check_interval(const CovarianceKernel& k, double s, double t) {
    if (!(s >= 0.0 && t > s && t <= k.horizon() * (1 + 1e-12)))
        throw DomainError("partition", "interval must satisfy 0 <= s < t <= T");
}

struct LocalSearch {
    const CovarianceKernel& k;
    double rho;
    std::vector<double> p;

    double term(double a, double b, double c, double d) const {
        return std::pow(std::abs(k.rect(a, b, c, d)), rho);
    }

    // sum over cells j of the partition, skipping cells in [skip_lo, skip_hi]
    double row(double a, double b, int skip_lo, int skip_hi) const {
        double acc = 0.0;
        for (int j = 0; j + 1 < static_cast<int>(p.size()); ++j) {
            if (j >= skip_lo && j <= skip_hi) continue;
            acc += term(a, b, p[static_cast<std::size_t>(j)], p[static_cast<std::size_t>(j) + 1]);
        }
        return acc;
    }

    double insert_gain(int c) const {
        const double a = p[static_cast<std::size_t>(c)], b = p[static_cast<std::size_t>(c) + 1];
        const double m = 0.5 * (a + b);
        const double before = term(a, b, a, b) + 2.0 * row(a, b, c, c);
        const double after = term(a, m, a, m) + term(m, b, m, b) + 2.0 * term(a, m, m, b) +
                             2.0 * (row(a, m, c, c) + row(m, b, c, c));
        return after - before;
    }

    // drop interior point i, merging cells i-1 and i
    double delete_gain(int i) const {
        const double a = p[static_cast<std::size_t>(i) - 1], m = p[static_cast<std::size_t>(i)],
                     b = p[static_cast<std::size_t>(i) + 1];
        const double before = term(a, m, a, m) + term(m, b, m, b) + 2.0 * term(a, m, m, b) +
                              2.0 * (row(a, m, i - 1, i) + row(m, b, i - 1, i));
        const double after = term(a, b, a, b) + 2.0 * row(a, b, i - 1, i);
        return after - before;
    }
};

double quadtree(const CovarianceKernel& k, double rho, double a, double b, double c, double d,
                int depth) {
    const double here = std::pow(std::abs(k.rect(a, b, c, d)), rho);
    if (depth == 0) return here;
    const double m1 = 0.5 * (a + b), m2 = 0.5 * (c + d);
    const double split = quadtree(k, rho, a, m1, c, m2, depth - 1) +
                         quadtree(k, rho, a, m1, m2, d, depth - 1) +
                         quadtree(k, rho, m1, b, c, m2, depth - 1) +
                         quadtree(k, rho, m1, b, m2, d, depth - 1);
    return std::max(here, split);
}

}  // namespace

double grid_variation_sum(const CovarianceKernel& k, double rho, const Partition& d1,
                          const Partition& d2) {
    check_rho(rho);
    const Eigen::MatrixXd q = cross_increment_gram(k, d1, d2);
    return q.array().abs().pow(rho).sum();
}

VariationEstimate rho_variation_estimate(const CovarianceKernel& k, double rho,
                                         const VariationSearch& search, double s, double t) {
    check_rho(rho);
    check_interval(k, s, t);
    if (search.max_depth < 0 || search.max_depth > 10)
        throw DomainError("partition", "dyadic search depth must lie in [0, 10]");

    // one point Gram at the finest depth; coarser grids are strided sub-blocks of it
    const Partition finest = Partition::dyadic(s, t, search.max_depth);
    const Eigen::MatrixXd g = k.point_gram(finest.points());
    VariationEstimate est;
    est.value = -1.0;
    for (int depth = 0; depth <= search.max_depth; ++depth) {
        const int stride = 1 << (search.max_depth - depth);
        const int n = 1 << depth;
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int i0 = i * stride, i1 = i0 + stride, j0 = j * stride, j1 = j0 + stride;
                sum += std::pow(std::abs(g(i1, j1) - g(i1, j0) - g(i0, j1) + g(i0, j0)), rho);
            }
        est.per_depth.push_back(sum);
        if (sum > est.value) {
            est.value = sum;
            est.best_depth = depth;
        }
    }
    est.best = Partition::dyadic(s, t, est.best_depth);

    if (search.local_moves > 0) {
        LocalSearch ls{k, rho, est.best.points()};
        for (int move = 0; move < search.local_moves; ++move) {
            double best_gain = 0.0;
            int best_idx = -1;
            bool insert = true;
            const int cells = static_cast<int>(ls.p.size()) - 1;
            for (int c = 0; c < cells; ++c) {
                const double g_ins = ls.insert_gain(c);
                if (g_ins > best_gain) {
                    best_gain = g_ins;
                    best_idx = c;
                    insert = true;
                }
            }
            for (int i = 1; i < cells; ++i) {
                const double g_del = ls.delete_gain(i);
                if (g_del > best_gain) {
                    best_gain = g_del;
                    best_idx = i;
                    insert = false;
                }
            }
            if (best_idx < 0 || best_gain <= 1e-14 * std::max(est.value, 1e-300)) break;
            auto pos = ls.p.begin() + best_idx;
            if (insert)
                ls.p.insert(pos + 1, 0.5 * (*pos + *(pos + 1)));
            else
                ls.p.erase(pos);
            est.value += best_gain;
        }
        est.best = Partition(ls.p);
        // recompute rather than trust the accumulated gains
        est.value = std::max(grid_variation_sum(k, rho, est.best, est.best),
                             est.per_depth[static_cast<std::size_t>(est.best_depth)]);
    }
    return est;
}

VariationEstimate rho_variation_estimate(const CovarianceKernel& k, double rho,
                                         const VariationSearch& search) {
    return rho_variation_estimate(k, rho, search, 0.0, k.horizon());
}

VariationEstimate controlled_variation_estimate(const CovarianceKernel& k, double rho,
                                                const VariationSearch& search, double s,
                                                double t) {
    VariationEstimate est = rho_variation_estimate(k, rho, search, s, t);
    const int qdepth = std::min(search.max_depth, 8);
    const double q = quadtree(k, rho, s, t, s, t, qdepth);
    if (q > est.value) est.value = q;
    return est;
}

HolderControlReport holder_controlled_check(const CovarianceKernel& k, double rho,
                                            const std::vector<std::pair<double, double>>& intervals,
                                            const VariationSearch& search) {
    if (intervals.empty()) throw DomainError("partition", "no intervals to check");
    HolderControlReport rep;
    bool finite = true;
    for (auto [s, t] : intervals) {
        const auto est = controlled_variation_estimate(k, rho, search, s, t);
        HolderControlRow r;
        r.s = s;
        r.t = t;
        r.v_rho = std::pow(est.value, 1.0 / rho);
        r.ratio = r.v_rho / std::pow(t - s, 1.0 / rho);
        finite = finite && std::isfinite(r.ratio);
        rep.c_hat = std::max(rep.c_hat, r.ratio);
        rep.rows.push_back(r);
    }
    // least squares slope of log ratio against log length
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rep.rows) {
        if (!(r.ratio > 0)) continue;
        const double x = std::log(r.t - r.s), y = std::log(r.ratio);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    rep.log_slope = (n >= 2 && den > 1e-12) ? (n * sxy - sx * sy) / den : 0.0;
    rep.pass = finite && rep.c_hat > 0 && rep.log_slope >= -0.1;
    return rep;
}

TimeChange::TimeChange(const CovarianceKernel& k, double rho, const Partition& grid,
                       const VariationSearch& search)
    : t_(grid.points()) {
    if (grid.start() != 0.0) throw DomainError("partition", "time change grid must start at 0");
    const double total =
        controlled_variation_estimate(k, rho, search, 0.0, grid.end()).value;
    if (!(total > 0)) throw DomainError("partition", "kernel has zero variation on [0,T]^2");
    sigma_.assign(t_.size(), 0.0);
    for (std::size_t i = 1; i < t_.size(); ++i) {
        const double v = controlled_variation_estimate(k, rho, search, 0.0, t_[i]).value;
        // estimates are lower bounds; a running max restores monotonicity
        sigma_[i] = std::max(sigma_[i - 1], grid.end() * v / total);
    }
    sigma_.back() = grid.end();
}

double TimeChange::operator()(double t) const {
    if (t <= t_.front()) return sigma_.front();
    if (t >= t_.back()) return sigma_.back();
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const auto i = static_cast<std::size_t>(it - t_.begin());
    const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
    return sigma_[i - 1] + w * (sigma_[i] - sigma_[i - 1]);
}

double TimeChange::inverse(double u) const {
    if (u <= sigma_.front()) return t_.front();
    if (u >= sigma_.back()) return t_.back();
    auto it = std::upper_bound(sigma_.begin(), sigma_.end(), u);
    const auto i = static_cast<std::size_t>(it - sigma_.begin());
    const double ds = sigma_[i] - sigma_[i - 1];
    const double w = ds > 0 ? (u - sigma_[i - 1]) / ds : 0.0;
    return t_[i - 1] + w * (t_[i] - t_[i - 1]);
}

}  // namespace grpx
