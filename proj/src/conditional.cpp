#include "grpx/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "grpx/errors.hpp"
#include "grpx/gram.hpp"
#include "grpx/parallel.hpp"

namespace grpx {

namespace {

constexpr double kNonNegTol = 1e-10;  // times the trace

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& q, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = q(rows[i], cols[j]);
    return out;
}

// Schur block of `target` given `cond`, both index lists into q.
Eigen::MatrixXd conditional_block(const Eigen::MatrixXd& q, const std::vector<int>& cond,
                                  const std::vector<int>& target) {
    Eigen::MatrixXd qtt = submatrix(q, target, target);
    if (cond.empty()) return qtt;
    const Eigen::MatrixXd qcc = submatrix(q, cond, cond);
    Eigen::LLT<Eigen::MatrixXd> llt(qcc);
    if (llt.info() != Eigen::Success)
        throw FactorizationError("conditional-gaussian", "conditioning Gram is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        if (!(l(i, i) * l(i, i) > 1e-13 * qcc(i, i)))
            throw FactorizationError("conditional-gaussian",
                                     "conditioning Gram is numerically singular");
    const Eigen::MatrixXd b = llt.matrixL().solve(submatrix(q, cond, target));
    Eigen::MatrixXd s = qtt - b.transpose() * b;
    return 0.5 * (s + s.transpose());
}

struct Layout {
    Partition p;
    std::vector<int> context;
    std::vector<int> target;
};

// Every cell of the merged partition is either a context cell, a target cell inside
// [s,t], or a gap that is simply left out.
Layout layout(double s, double t, const OutsideContext& ctx, const std::vector<double>& cuts) {
    if (!(t > s)) throw DomainError("conditional-gaussian", "need s < t");
    for (double x : ctx.left)
        if (x > s) throw DomainError("conditional-gaussian", "left context must lie in [0,s]");
    for (double x : ctx.right)
        if (x < t) throw DomainError("conditional-gaussian", "right context must lie in [t,S]");
    std::vector<double> pts = ctx.left;
    pts.insert(pts.end(), {s, t});
    pts.insert(pts.end(), cuts.begin(), cuts.end());
    pts.insert(pts.end(), ctx.right.begin(), ctx.right.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    Layout out{Partition(pts), {}, {}};
    const double l0 = ctx.left.size() >= 2 ? ctx.left.front() : 0.0;
    const double l1 = ctx.left.size() >= 2 ? ctx.left.back() : -1.0;
    const double r0 = ctx.right.size() >= 2 ? ctx.right.front() : 0.0;
    const double r1 = ctx.right.size() >= 2 ? ctx.right.back() : -1.0;
    for (int c = 0; c < out.p.cells(); ++c) {
        const double a = out.p[c], b = out.p[c + 1];
        if (a >= s && b <= t)
            out.target.push_back(c);
        else if ((a >= l0 && b <= l1) || (a >= r0 && b <= r1))
            out.context.push_back(c);
    }
    return out;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

Partition random_partition(std::mt19937_64& rng, double S, int max_points) {
    std::uniform_int_distribution<int> ni(0, std::max(0, max_points - 2));
    std::uniform_real_distribution<double> u(0.0, S);
    const int m = ni(rng);
    std::vector<double> pts{0.0, S};
    for (int i = 0; i < m; ++i) pts.push_back(u(rng));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return Partition(pts);
}

}  // namespace

SchurResult schur_complement(const Eigen::MatrixXd& q, const std::vector<int>& conditioned_on) {
    const int n = static_cast<int>(q.rows());
    if (q.rows() != q.cols()) throw DomainError("conditional-gaussian", "matrix must be square");
    std::vector<bool> in(static_cast<std::size_t>(n), false);
    for (int i : conditioned_on) {
        if (i < 0 || i >= n) throw DomainError("conditional-gaussian", "index out of range");
        if (in[static_cast<std::size_t>(i)])
            throw DomainError("conditional-gaussian", "repeated index");
        in[static_cast<std::size_t>(i)] = true;
    }
    if (conditioned_on.empty() || static_cast<int>(conditioned_on.size()) >= n)
        throw DomainError("conditional-gaussian", "index set must be a proper nonempty subset");
    SchurResult r;
    r.conditioned_on = conditioned_on;
    for (int i = 0; i < n; ++i)
        if (!in[static_cast<std::size_t>(i)]) r.remaining.push_back(i);
    r.S = conditional_block(q, r.conditioned_on, r.remaining);
    r.row_sums = r.S.rowwise().sum();
    return r;
}

std::size_t OutsideContext::cells() const {
    return (left.size() >= 2 ? left.size() - 1 : 0) + (right.size() >= 2 ? right.size() - 1 : 0);
}

OutsideContext dyadic_context(double s, double t, double S, int depth) {
    if (!(0.0 <= s && s < t && t <= S)) throw DomainError("conditional-gaussian", "need 0 <= s < t <= S");
    if (depth < 0 || depth > 14) throw DomainError("conditional-gaussian", "depth must lie in [0,14]");
    const int n = 1 << depth;
    OutsideContext ctx;
    for (int i = 0; i <= n; ++i) {
        const double x = S * i / n;
        if (x < s) ctx.left.push_back(x);
        if (x > t) ctx.right.push_back(x);
    }
    if (s > 0) ctx.left.push_back(s);
    if (t < S) ctx.right.insert(ctx.right.begin(), t);
    return ctx;
}

OutsideContext graded_context(double s, double t, double S, int cells_per_octave) {
    if (!(0.0 <= s && s < t && t <= S)) throw DomainError("conditional-gaussian", "need 0 <= s < t <= S");
    if (cells_per_octave < 1) throw DomainError("conditional-gaussian", "cells_per_octave >= 1");
    const double len = t - s;
    const int m = cells_per_octave;
    // offsets in units of len: j/m on [0,1], then spacing 2^a/m on [2^a, 2^{a+1}]
    auto offsets = [&](double reach) {
        std::vector<double> x;
        for (int j = 1; j <= m && j < m * reach; ++j) x.push_back(static_cast<double>(j) / m);
        for (double base = 1.0; base < reach; base *= 2.0)
            for (int j = 1; j <= m; ++j) {
                const double v = base * (1.0 + static_cast<double>(j) / m);
                if (v < reach) x.push_back(v);
            }
        return x;
    };
    OutsideContext ctx;
    if (s > 0) {
        const double reach = s / len;
        auto x = offsets(reach);
        ctx.left.push_back(0.0);
        for (auto it = x.rbegin(); it != x.rend(); ++it) {
            const double p = s - len * *it;
            if (p > 0.0 && p < s) ctx.left.push_back(p);
        }
        ctx.left.push_back(s);
    }
    if (t < S) {
        const double reach = (S - t) / len;
        auto x = offsets(reach);
        ctx.right.push_back(t);
        for (double o : x) {
            const double p = t + len * o;
            if (p > t && p < S) ctx.right.push_back(p);
        }
        ctx.right.push_back(S);
    }
    auto dedupe = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return b - a < 1e-15; }),
                v.end());
    };
    dedupe(ctx.left);
    dedupe(ctx.right);
    return ctx;
}

double conditional_variance(const CovarianceKernel& k, double s, double t,
                            const OutsideContext& ctx) {
    const Layout lay = layout(s, t, ctx, {});
    const Eigen::MatrixXd q = increment_gram(k, lay.p);
    return conditional_block(q, lay.context, lay.target).sum();
}

double conditional_covariance(const CovarianceKernel& k, double s, double t, double u, double v,
                              const OutsideContext& ctx) {
    if (!(s <= u && u < v && v <= t))
        throw DomainError("conditional-gaussian", "need s <= u < v <= t");
    const Layout lay = layout(s, t, ctx, {u, v});
    const Eigen::MatrixXd q = increment_gram(k, lay.p);
    const Eigen::MatrixXd blk = conditional_block(q, lay.context, lay.target);
    double acc = 0.0;
    for (std::size_t i = 0; i < lay.target.size(); ++i) {
        const int c = lay.target[i];
        if (lay.p[c] >= u && lay.p[c + 1] <= v) acc += blk.row(static_cast<Eigen::Index>(i)).sum();
    }
    return acc;
}

NonDeterminismIndex non_determinism_index(const CovarianceKernel& k, int trials, int depth,
                                          std::uint64_t seed) {
    if (trials < 10) throw DomainError("conditional-gaussian", "need at least 10 trials");
    if (depth < 0 || depth > 8) throw DomainError("conditional-gaussian", "depth must lie in [0,8]");
    const double T = k.horizon();
    NonDeterminismIndex out;
    out.samples.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        const double len = log_uniform(rng, T * std::ldexp(1.0, -9), T * std::ldexp(1.0, -3));
        std::uniform_real_distribution<double> u(0.0, T - len);
        const double s = u(rng);
        const double t = s + len;
        auto& smp = out.samples[static_cast<std::size_t>(i)];
        smp.s = s;
        smp.t = t;
        try {
            smp.variance = conditional_variance(k, s, t, graded_context(s, t, T, 1 << depth));
        } catch (const FactorizationError&) {
            smp.variance = 0.0;
        }
    });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool degenerate = false;
    for (const auto& smp : out.samples) {
        if (!(smp.variance > 0)) {
            degenerate = true;
            continue;
        }
        const double x = std::log(smp.t - smp.s), y = std::log(smp.variance);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double n = static_cast<double>(trials);
    if (degenerate) {
        out.alpha_hat = std::numeric_limits<double>::infinity();
        out.c_hat = 0.0;
        return out;
    }
    out.alpha_hat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.c_hat = std::numeric_limits<double>::infinity();
    for (const auto& smp : out.samples)
        out.c_hat = std::min(out.c_hat, smp.variance / std::pow(smp.t - smp.s, out.alpha_hat));
    return out;
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::non_determinism: return "NonDeterminism";
        case Condition::nonneg_cond_cov: return "NonNegCondCov";
        case Condition::diag_dominance: return "DiagDominance";
        case Condition::non_degeneracy: return "NonDegeneracy";
    }
    return "?";
}

nlohmann::json ConditionReport::to_json() const {
    nlohmann::json stats = nlohmann::json::object();
    for (const auto& [key, v] : statistics) {
        if (std::isfinite(v))
            stats[key] = v;
        else
            stats[key] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    }
    return {{"condition", to_string(condition)},
            {"pass", pass},
            {"witness", witness},
            {"statistics", stats}};
}

GramSource kernel_gram_source(const CovarianceKernel& k) {
    return [k](const Partition& p) { return increment_gram(k, p); };
}

ConditionReport check_non_determinism(const CovarianceKernel& k, int trials, int depth,
                                      std::uint64_t seed) {
    ConditionReport rep;
    rep.condition = Condition::non_determinism;
    const auto idx = non_determinism_index(k, trials, depth, seed);
    const double bound = 2.0 / k.rho();
    rep.statistics = {{"alpha_hat", idx.alpha_hat}, {"c_hat", idx.c_hat},
                      {"two_over_rho", bound}, {"trials", trials}};
    rep.pass = idx.c_hat > 0 && idx.alpha_hat < bound;
    if (!rep.pass) {
        const NonDeterminismSample* worst = &idx.samples.front();
        for (const auto& smp : idx.samples)
            if (smp.variance < worst->variance) worst = &smp;
        rep.witness = {{"interval", {worst->s, worst->t}}, {"variance", worst->variance}};
    }
    return rep;
}

ConditionReport check_nonneg_cond_cov(const GramSource& gram, double horizon, int trials,
                                      int depth, std::uint64_t seed) {
    if (trials < 1) throw DomainError("conditional-gaussian", "need at least one trial");
    struct Trial {
        double value = 0, tol = 0, s = 0, t = 0, u = 0, v = 0;
        std::vector<double> pts;
    };
    std::vector<Trial> res(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double S = horizon * (0.5 + 0.5 * u01(rng));
        double a = S * u01(rng), b = S * u01(rng);
        if (a > b) std::swap(a, b);
        double c = a + (b - a) * u01(rng), d = a + (b - a) * u01(rng);
        if (c > d) std::swap(c, d);
        auto& tr = res[static_cast<std::size_t>(i)];
        tr.s = a, tr.t = b, tr.u = c, tr.v = d;
        if (!(b > a) || !(d > c)) return;
        const OutsideContext ctx = dyadic_context(a, b, S, depth);
        const Layout lay = layout(a, b, ctx, {c, d});
        const Eigen::MatrixXd q = gram(lay.p);
        const Eigen::MatrixXd blk = conditional_block(q, lay.context, lay.target);
        double acc = 0.0;
        for (std::size_t j = 0; j < lay.target.size(); ++j) {
            const int cell = lay.target[j];
            if (lay.p[cell] >= c && lay.p[cell + 1] <= d)
                acc += blk.row(static_cast<Eigen::Index>(j)).sum();
        }
        tr.value = acc;
        tr.tol = kNonNegTol * q.trace();
        tr.pts = lay.p.points();
    });
    ConditionReport rep;
    rep.condition = Condition::nonneg_cond_cov;
    rep.pass = true;
    double worst = std::numeric_limits<double>::infinity();
    const Trial* bad = nullptr;
    int violations = 0;
    for (const auto& tr : res) {
        if (tr.pts.empty()) continue;
        if (tr.value < -tr.tol) {
            ++violations;
            if (!bad || tr.value < bad->value) bad = &tr;
        }
        worst = std::min(worst, tr.value);
    }
    rep.pass = violations == 0;
    rep.statistics = {{"trials", trials}, {"violations", violations}, {"min_cov", worst}};
    if (bad)
        rep.witness = {{"partition", bad->pts}, {"interval", {bad->s, bad->t}},
                       {"subinterval", {bad->u, bad->v}}, {"value", bad->value}};
    return rep;
}

ConditionReport check_nonneg_cond_cov(const CovarianceKernel& k, int trials, int depth,
                                      std::uint64_t seed) {
    return check_nonneg_cond_cov(kernel_gram_source(k), k.horizon(), trials, depth, seed);
}

ConditionReport check_diag_dominance(const CovarianceKernel& k, int trials, int max_n,
                                     std::uint64_t seed) {
    if (max_n < 2) throw DomainError("conditional-gaussian", "max_n must be >= 2");
    const double T = k.horizon();
    // uniform partitions first: they are where positive correlation shows up most
    std::vector<Partition> parts;
    for (int n = 1; n < max_n; ++n) parts.push_back(Partition::uniform(0.0, T, n));
    for (int i = 0; i < trials; ++i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double S = T * (0.05 + 0.95 * u(rng));
        parts.push_back(random_partition(rng, S, max_n));
    }
    struct Res {
        double margin = 0, row_sum = 0, tol = 0;
        int row = -1;
        bool negative = false;
    };
    std::vector<Res> res(parts.size());
    parallel_for(static_cast<int>(parts.size()), [&](int i) {
        const Eigen::MatrixXd q = increment_gram(k, parts[static_cast<std::size_t>(i)]);
        Res& r = res[static_cast<std::size_t>(i)];
        r.tol = kNonNegTol * q.trace();
        r.margin = std::numeric_limits<double>::infinity();
        r.row_sum = std::numeric_limits<double>::infinity();
        r.negative = true;
        for (Eigen::Index a = 0; a < q.rows(); ++a) {
            double off = 0.0;
            for (Eigen::Index b = 0; b < q.cols(); ++b)
                if (a != b) {
                    off += std::abs(q(a, b));
                    if (q(a, b) > r.tol) r.negative = false;
                }
            const double m = q(a, a) - off;
            if (m < r.margin) {
                r.margin = m;
                r.row = static_cast<int>(a);
            }
            r.row_sum = std::min(r.row_sum, q.row(a).sum());
        }
    });
    ConditionReport rep;
    rep.condition = Condition::diag_dominance;
    int violations = 0, negative = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::size_t bad = parts.size();
    for (std::size_t i = 0; i < res.size(); ++i) {
        const Res& r = res[i];
        bool ok = r.margin >= -r.tol;
        if (r.negative) {
            ++negative;
            ok = ok && r.row_sum >= -r.tol;  // E[X_{0,S} X_{s,t}] >= 0
        }
        if (!ok) {
            ++violations;
            if (bad == parts.size() || r.margin < res[bad].margin) bad = i;
        }
        worst = std::min(worst, r.margin);
    }
    rep.pass = violations == 0;
    rep.statistics = {{"partitions", static_cast<double>(parts.size())},
                      {"violations", violations},
                      {"min_margin", worst},
                      {"negatively_correlated", negative}};
    if (bad != parts.size())
        rep.witness = {{"partition", parts[bad].points()}, {"row", res[bad].row},
                       {"margin", res[bad].margin}};
    return rep;
}

ConditionReport check_non_degeneracy(const CovarianceKernel& k, int trials, int max_n,
                                     std::uint64_t seed) {
    if (max_n < 2) throw DomainError("conditional-gaussian", "max_n must be >= 2");
    const double T = k.horizon();
    std::vector<Partition> parts;
    for (int n = 1; n < max_n; ++n) parts.push_back(Partition::uniform(0.0, T, n));
    for (int i = 0; i < trials; ++i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        parts.push_back(random_partition(rng, T, max_n));
    }
    std::vector<double> ratio(parts.size());
    std::vector<double> lmin(parts.size());
    parallel_for(static_cast<int>(parts.size()), [&](int i) {
        const Eigen::MatrixXd q = increment_gram(k, parts[static_cast<std::size_t>(i)]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
        lmin[static_cast<std::size_t>(i)] = es.eigenvalues()(0);
        const double tr = q.trace();
        ratio[static_cast<std::size_t>(i)] = tr > 0 ? es.eigenvalues()(0) / tr : 0.0;
    });
    ConditionReport rep;
    rep.condition = Condition::non_degeneracy;
    int violations = 0;
    std::size_t bad = parts.size();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!(ratio[i] > 1e-12 && lmin[i] > 0)) {
            ++violations;
            if (bad == parts.size() || ratio[i] < ratio[bad]) bad = i;
        }
        worst = std::min(worst, ratio[i]);
    }
    rep.pass = violations == 0;
    rep.statistics = {{"partitions", static_cast<double>(parts.size())},
                      {"violations", violations},
                      {"min_eig_over_trace", worst}};
    if (bad != parts.size())
        rep.witness = {{"partition", parts[bad].points()}, {"min_eigenvalue", lmin[bad]}};
    return rep;
}

SignCheck check_sign_conditions(const CovarianceKernel& k, int trials, std::uint64_t seed) {
    SignCheck sc;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, k.horizon());
    double worst = std::numeric_limits<double>::infinity();
    while (sc.trials < trials) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        if (!(a > 0) || !(b > a)) continue;
        ++sc.trials;
        const double m = k.mixed_partial(a, b).value;
        const double p = k.partial_a(a, b).value;
        if (!(m < 0)) ++sc.mixed_violations;
        if (!(p > 0)) ++sc.partial_violations;
        const double w = std::min(-m, p);
        if (w < worst) {
            worst = w;
            sc.worst_a = a;
            sc.worst_b = b;
        }
    }
    return sc;
}

namespace {

// Minimise x^T S x over x >= b by accelerated projected gradient, then polish on the
// detected active set.
Eigen::VectorXd bound_qp(const Eigen::MatrixXd& s, double b) {
    const Eigen::Index m = s.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const double lip = 2.0 * es.eigenvalues().maxCoeff();
    auto proj = [&](Eigen::VectorXd v) { return v.cwiseMax(b); };
    Eigen::VectorXd x = Eigen::VectorXd::Constant(m, b), y = x, prev = x;
    double tk = 1.0;
    for (int it = 0; it < 200000; ++it) {
        const Eigen::VectorXd xn = proj(y - (2.0 / lip) * (s * y));
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        y = xn + ((tk - 1.0) / tn) * (xn - x);
        prev = x;
        x = xn;
        tk = tn;
        if ((x - prev).norm() <= 1e-15 * std::max(1.0, x.norm())) break;
    }
    // active set polish: free coordinates solve the stationarity equations exactly
    std::vector<int> fr, ac;
    for (Eigen::Index i = 0; i < m; ++i) (x(i) > b + 1e-9 * std::max(1.0, b) ? fr : ac).push_back(static_cast<int>(i));
    if (!fr.empty()) {
        Eigen::MatrixXd sff(fr.size(), fr.size());
        Eigen::VectorXd rhs(fr.size());
        for (std::size_t i = 0; i < fr.size(); ++i) {
            double acc = 0.0;
            for (int j : ac) acc += s(fr[i], j) * b;
            rhs(static_cast<Eigen::Index>(i)) = -acc;
            for (std::size_t j = 0; j < fr.size(); ++j) sff(i, j) = s(fr[i], fr[j]);
        }
        const Eigen::VectorXd xf = sff.llt().solve(rhs);
        Eigen::VectorXd cand = x;
        for (std::size_t i = 0; i < fr.size(); ++i) cand(fr[i]) = xf(static_cast<Eigen::Index>(i));
        if ((cand.array() >= b - 1e-12).all() && cand.dot(s * cand) <= x.dot(s * x)) x = cand.cwiseMax(b);
    }
    return x;
}

}  // namespace

QpResult qp_lower_bound(const Eigen::MatrixXd& q, int k, double b) {
    const int n = static_cast<int>(q.rows());
    if (q.rows() != q.cols()) throw DomainError("conditional-gaussian", "Q must be square");
    if (k < 1 || k >= n) throw DomainError("conditional-gaussian", "need 1 <= k < n");
    if (!(b > 0)) throw DomainError("conditional-gaussian", "b must be positive");
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
        throw DomainError("conditional-gaussian", "Q must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (llt.info() != Eigen::Success)
        throw DomainError("conditional-gaussian", "Q must be positive definite");

    std::vector<int> first(static_cast<std::size_t>(k));
    std::iota(first.begin(), first.end(), 0);
    const SchurResult sr = schur_complement(q, first);
    QpResult r;
    r.S = sr.S;
    const int m = n - k;
    r.feasible = sr.row_sums.minCoeff() >= -kNonNegTol * q.trace();

    Eigen::VectorXd x2;
    if (r.feasible) {
        x2 = Eigen::VectorXd::Constant(m, b);
        r.value = b * b * sr.S.sum();
    } else {
        x2 = bound_qp(sr.S, b);
        r.value = x2.dot(sr.S * x2);
    }
    const Eigen::MatrixXd q11 = q.topLeftCorner(k, k);
    const Eigen::MatrixXd q12 = q.topRightCorner(k, m);
    r.minimizer.resize(n);
    r.minimizer.head(k) = -q11.llt().solve(q12 * x2);
    r.minimizer.tail(m) = x2;
    r.dual = Eigen::VectorXd::Zero(n);
    r.dual.tail(m) = 2.0 * sr.S * x2;
    return r;
}

std::vector<int> block_rotation(int n, int l, int m) {
    if (!(0 <= l && l < m && m <= n)) throw DomainError("conditional-gaussian", "need 0 <= l < m <= n");
    std::vector<int> perm;
    for (int i = 0; i < n; ++i)
        if (i < l || i >= m) perm.push_back(i);
    for (int i = l; i < m; ++i) perm.push_back(i);
    return perm;
}

Eigen::MatrixXd permute_symmetric(const Eigen::MatrixXd& q, const std::vector<int>& perm) {
    if (static_cast<Eigen::Index>(perm.size()) != q.rows())
        throw DomainError("conditional-gaussian", "permutation size mismatch");
    return submatrix(q, perm, perm);
}

std::vector<NestedStage> nested_partitions(const CovarianceKernel& k, double s, double t,
                                           double S, int levels) {
    if (!(0 <= s && s < t && t <= S && S <= k.horizon()))
        throw DomainError("conditional-gaussian", "need 0 <= s < t <= S <= T");
    std::vector<NestedStage> out;
    for (int m = 1; m <= levels; ++m) {
        Partition p = Partition::dyadic(0.0, S, m).refined({s, t});
        std::vector<int> cond, target;
        for (int c = 0; c < p.cells(); ++c) (p[c] >= s && p[c + 1] <= t ? target : cond).push_back(c);
        const Eigen::MatrixXd q = increment_gram(k, p);
        const Eigen::MatrixXd blk = conditional_block(q, cond, target);
        out.push_back({p, blk.rowwise().sum().minCoeff()});
    }
    return out;
}

}  // namespace grpx
