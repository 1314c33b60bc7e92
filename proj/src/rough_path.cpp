#include "grpx/rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grpx/errors.hpp"

namespace grpx {

namespace {

// indices 0 = i_0 < ... < i_m = n with about max_points entries
std::vector<int> sub_indices(int n, int max_points) {
    const int stride = std::max(1, (n + max_points - 2) / std::max(1, max_points - 1));
    std::vector<int> idx;
    for (int i = 0; i < n; i += stride) idx.push_back(i);
    idx.push_back(n);
    return idx;
}

double holder_seminorm(const Eigen::VectorXd& v, const std::vector<double>& t,
                       const std::vector<int>& idx, double gamma) {
    double m = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const int i = idx[a], j = idx[b];
            m = std::max(m, std::abs(v(j) - v(i)) / std::pow(t[static_cast<std::size_t>(j)] -
                                                                 t[static_cast<std::size_t>(i)], gamma));
        }
    return m;
}

double interp(const std::vector<double>& t, const Eigen::VectorXd& v, double s) {
    if (s <= t.front()) return v(0);
    if (s >= t.back()) return v(static_cast<Eigen::Index>(t.size()) - 1);
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const auto j = static_cast<std::size_t>(it - t.begin());
    const double lam = (s - t[j - 1]) / (t[j] - t[j - 1]);
    return (1 - lam) * v(static_cast<Eigen::Index>(j) - 1) + lam * v(static_cast<Eigen::Index>(j));
}

std::vector<Eigen::VectorXd> directions(int d, int min_count) {
    std::vector<Eigen::VectorXd> out;
    if (d == 1) {
        out.push_back(Eigen::VectorXd::Ones(1));
        return out;
    }
    const int m = std::max(64, min_count);
    const double pi = std::acos(-1.0);
    if (d == 2) {
        // phi and -phi give the same oscillation, so the half circle suffices
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd v(2);
            v << std::cos(pi * i / m), std::sin(pi * i / m);
            out.push_back(v);
        }
        return out;
    }
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
        const double z = (i + 0.5) / m;
        const double r = std::sqrt(1.0 - z * z);
        Eigen::VectorXd v(3);
        v << r * std::cos(golden * i), r * std::sin(golden * i), z;
        out.push_back(v);
    }
    return out;
}

// sum_j (y^j_a x^j + sum_w y^{j;w}_a x^{wj}) for the increment x = x_{a,b}
double local_integral(const ControlledPath& y, const TensorElement& x, int a) {
    double acc = 0.0;
    for (int j = 0; j < y.driver_dim; ++j) {
        const auto c = static_cast<std::size_t>(j);
        acc += y.value[c](a) * x[Word{j}];
        for (const auto& [w, path] : y.coeff[c]) acc += path(a) * x[concat(w, Word{j})];
    }
    return acc;
}

void check_integrand(const RoughPathLift& lift, const ControlledPath& y) {
    y.validate();
    if (y.components() != lift.dim() || y.driver_dim != lift.dim())
        throw DomainError("rough-path-core", "integrand needs one component per driver coordinate");
    if (y.N > lift.depth())
        throw DomainError("rough-path-core", "lift level is below the controlled path's order");
    if (y.grid.points() != lift.grid().points())
        throw DomainError("rough-path-core", "controlled path and lift use different grids");
}

}  // namespace

RoughPathLift::RoughPathLift(Partition grid, Eigen::MatrixXd samples, int N, double gamma)
    : grid_(std::move(grid)), x_(std::move(samples)), n_(N), gamma_(gamma) {
    if (x_.rows() != static_cast<Eigen::Index>(grid_.points().size()))
        throw DomainError("rough-path-core", "one sample row per grid point required");
    if (N < 1 || N > TensorElement::max_level)
        throw DomainError("rough-path-core", "truncation level must lie in [1,3]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("rough-path-core", "gamma must lie in (0,1]");
    seg_.reserve(static_cast<std::size_t>(grid_.cells()));
    for (int i = 0; i < grid_.cells(); ++i) {
        const Eigen::VectorXd dx = (x_.row(i + 1) - x_.row(i)).transpose();
        seg_.push_back(TensorElement::exp(dx, N));
    }
}

RoughPathLift RoughPathLift::with_gamma(double gamma) const {
    RoughPathLift r = *this;
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("rough-path-core", "gamma must lie in (0,1]");
    r.gamma_ = gamma;
    return r;
}

TensorElement RoughPathLift::increment(int i, int j) const {
    if (i < 0 || j > grid_.cells() || i > j) throw DomainError("rough-path-core", "bad increment indices");
    TensorElement e = TensorElement::identity(dim(), n_);
    for (int k = i; k < j; ++k) e = e * seg_[static_cast<std::size_t>(k)];
    return e;
}

RoughPathLift RoughPathLift::coarsened(int stride) const {
    const Partition g = grid_.coarsened(stride);
    std::vector<int> idx;
    for (double t : g.points()) idx.push_back(grid_.index_of(t));
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(idx.size()), x_.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) xs.row(static_cast<Eigen::Index>(i)) = x_.row(idx[i]);
    RoughPathLift r(g, xs, n_, gamma_);
    // a coarse cell carries the composed signature of the fine cells, not a straight segment
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) r.seg_[i] = increment(idx[i], idx[i + 1]);
    r.straight_ = straight_ && stride == 1;
    return r;
}

RoughPathLift RoughPathLift::slice(int i, int j) const {
    if (i < 0 || j > grid_.cells() || j <= i) throw DomainError("rough-path-core", "bad slice indices");
    const auto& t = grid_.points();
    std::vector<double> pts(t.begin() + i, t.begin() + j + 1);
    RoughPathLift r(Partition(pts), x_.middleRows(i, j - i + 1), n_, gamma_);
    for (int k = i; k < j; ++k) r.seg_[static_cast<std::size_t>(k - i)] = seg_[static_cast<std::size_t>(k)];
    r.straight_ = straight_;
    return r;
}

nlohmann::json RoughPathLift::to_json() const {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : seg_) segs.push_back(s.to_json());
    return {{"grid", grid_.points()}, {"depth", n_}, {"dim", dim()}, {"gamma", gamma_},
            {"increments", segs}};
}

RoughPathLift signature(const Partition& grid, const Eigen::MatrixXd& samples, int N, double gamma) {
    return RoughPathLift(grid, samples, N, gamma);
}

LiftExponents lift_exponents(const CovarianceKernel& k) {
    const double rho = k.rho();
    if (!(rho >= 1.0 && rho < 2.0)) throw DomainError("rough-path-core", "need rho in [1,2)");
    LiftExponents e;
    e.p = 2.0 * rho + std::min(0.1, 0.5 * (4.0 - 2.0 * rho));
    e.N = static_cast<int>(std::floor(e.p));
    e.gamma = 1.0 / e.p;
    return e;
}

GaussianLift lift_gaussian(const CovarianceKernel& k, const Partition& grid, std::uint64_t seed, int dim) {
    const LiftExponents e = lift_exponents(k);
    GaussianSampler sampler(k, grid.points());
    RoughPathLift lift(grid, sampler.sample(seed, dim), e.N, e.gamma);
    GaussianLift g{lift, e, 0, 0, 0};
    g.inhomogeneous = holder_norms(lift).inhomogeneous;
    if (grid.cells() >= 2) {
        g.inhomogeneous_coarse = holder_norms(lift.coarsened(2)).inhomogeneous;
        g.refinement_change = g.inhomogeneous > 0
                                  ? std::abs(g.inhomogeneous - g.inhomogeneous_coarse) / g.inhomogeneous
                                  : 0.0;
    }
    return g;
}

HolderNorms holder_norms(const RoughPathLift& lift, int max_points) {
    const int N = lift.depth();
    const double gamma = lift.gamma();
    const auto& t = lift.grid().points();
    const std::vector<int> idx = sub_indices(lift.grid().cells(), max_points);
    HolderNorms h;
    h.per_level.assign(static_cast<std::size_t>(N), 0.0);
    for (std::size_t a = 0; a < idx.size(); ++a) {
        TensorElement x = TensorElement::identity(lift.dim(), N);
        int at = idx[a];
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            for (; at < idx[b]; ++at) x = x * lift.segment(at);
            const double len = t[static_cast<std::size_t>(idx[b])] - t[static_cast<std::size_t>(idx[a])];
            double hom = 0.0;
            for (int k = 1; k <= N; ++k) {
                const double nk = x.level_norm(k);
                hom = std::max(hom, std::pow(nk, 1.0 / k));
                auto& pl = h.per_level[static_cast<std::size_t>(k - 1)];
                pl = std::max(pl, nk / std::pow(len, k * gamma));
            }
            h.homogeneous = std::max(h.homogeneous, hom / std::pow(len, gamma));
        }
    }
    for (double v : h.per_level) h.inhomogeneous += v;
    return h;
}

RoughnessModulus roughness_modulus(const Partition& grid, const Eigen::MatrixXd& samples, double theta,
                                   int min_directions) {
    if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("rough-path-core", "theta must lie in (0,1]");
    const int d = static_cast<int>(samples.cols());
    if (d < 1 || d > 3) throw DomainError("rough-path-core", "roughness modulus supports d <= 3");
    if (samples.rows() != static_cast<Eigen::Index>(grid.points().size()))
        throw DomainError("rough-path-core", "one sample row per grid point required");
    const auto& t = grid.points();
    const double T0 = grid.start(), T = grid.end() - grid.start();
    RoughnessModulus out;
    out.levels = std::max(1, static_cast<int>(std::floor(std::log2(static_cast<double>(grid.cells())) + 1e-9)));
    const auto dirs = directions(d, min_directions);
    out.directions = static_cast<int>(dirs.size());
    out.mesh_upper_bound = d > 1;
    out.d_theta = std::numeric_limits<double>::infinity();
    for (const auto& phi : dirs) {
        const Eigen::VectorXd p = samples * phi;
        for (int n = 1; n <= out.levels; ++n) {
            const int windows = 1 << n;
            const double w = T / windows;
            std::size_t next = 0;
            for (int k = 0; k < windows; ++k) {
                const double a = T0 + k * w, b = T0 + (k + 1) * w;
                double lo = interp(t, p, a), hi = lo;
                const double pb = interp(t, p, b);
                lo = std::min(lo, pb);
                hi = std::max(hi, pb);
                while (next < t.size() && t[next] <= a) ++next;
                for (std::size_t i = next; i < t.size() && t[i] < b; ++i) {
                    lo = std::min(lo, p(static_cast<Eigen::Index>(i)));
                    hi = std::max(hi, p(static_cast<Eigen::Index>(i)));
                }
                const double ratio = (hi - lo) / std::pow(w, theta);
                if (ratio < out.d_theta) {
                    out.d_theta = ratio;
                    out.worst_level = n;
                }
            }
        }
    }
    out.l_lower = out.d_theta / (2.0 * std::pow(8.0, theta));
    return out;
}

const Eigen::VectorXd& ControlledPath::path(int c, const Word& w) const {
    const auto cc = static_cast<std::size_t>(c);
    if (w.empty()) return value[cc];
    const auto it = coeff[cc].find(w);
    if (it == coeff[cc].end()) throw DomainError("rough-path-core", "no coefficient for word " + word_string(w));
    return it->second;
}

void ControlledPath::validate() const {
    const auto n = static_cast<Eigen::Index>(grid.points().size());
    if (coeff.size() != value.size() || (!drift.empty() && drift.size() != value.size()))
        throw DomainError("rough-path-core", "controlled path components disagree");
    for (std::size_t c = 0; c < value.size(); ++c) {
        if (value[c].size() != n) throw DomainError("rough-path-core", "value length mismatch");
        if (!drift.empty() && drift[c].size() != 0 && drift[c].size() != n)
            throw DomainError("rough-path-core", "drift length mismatch");
        for (const auto& [w, p] : coeff[c]) {
            if (w.empty() || static_cast<int>(w.size()) > N - 1)
                throw DomainError("rough-path-core", "word " + word_string(w) + " outside W_{N-1}");
            for (int l : w)
                if (l < 0 || l >= driver_dim) throw DomainError("rough-path-core", "letter outside the alphabet");
            if (p.size() != n) throw DomainError("rough-path-core", "coefficient length mismatch");
        }
    }
}

ControlledPath ControlledPath::linear_image(const Eigen::MatrixXd& U) const {
    if (U.cols() != components()) throw DomainError("rough-path-core", "projection width must match components");
    ControlledPath y;
    y.grid = grid;
    y.driver_dim = driver_dim;
    y.N = N;
    const auto n = static_cast<Eigen::Index>(grid.points().size());
    const bool has_drift = !drift.empty();
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n), dr = Eigen::VectorXd::Zero(has_drift ? n : 0);
        std::map<Word, Eigen::VectorXd> m;
        for (int c = 0; c < components(); ++c) {
            const auto cc = static_cast<std::size_t>(c);
            v += U(i, c) * value[cc];
            for (const auto& [w, p] : coeff[cc]) {
                auto it = m.find(w);
                if (it == m.end()) it = m.emplace(w, Eigen::VectorXd::Zero(n)).first;
                it->second += U(i, c) * p;
            }
            if (has_drift && drift[cc].size() == n) dr += U(i, c) * drift[cc];
        }
        y.value.push_back(v);
        y.coeff.push_back(m);
        if (has_drift) y.drift.push_back(dr);
    }
    return y;
}

ControlledPath ControlledPath::constant(const Partition& grid, int driver_dim, int N,
                                        const std::vector<double>& c) {
    ControlledPath y;
    y.grid = grid;
    y.driver_dim = driver_dim;
    y.N = N;
    const auto n = static_cast<Eigen::Index>(grid.points().size());
    for (double v : c) {
        y.value.push_back(Eigen::VectorXd::Constant(n, v));
        std::map<Word, Eigen::VectorXd> m;
        for (const Word& w : words_up_to(driver_dim, N - 1)) m[w] = Eigen::VectorXd::Zero(n);
        y.coeff.push_back(m);
    }
    return y;
}

ControlledPath ControlledPath::identity(const RoughPathLift& lift) {
    const int d = lift.dim(), N = lift.depth();
    std::vector<double> zeros(static_cast<std::size_t>(d), 0.0);
    ControlledPath y = constant(lift.grid(), d, N, zeros);
    for (int c = 0; c < d; ++c) {
        y.value[static_cast<std::size_t>(c)] = lift.samples().col(c);
        if (N >= 2) y.coeff[static_cast<std::size_t>(c)][Word{c}].setOnes();
    }
    return y;
}

ControlledRemainder controlled_remainders(const RoughPathLift& lift, const ControlledPath& y, int max_points) {
    y.validate();
    if (y.grid.points() != lift.grid().points())
        throw DomainError("rough-path-core", "controlled path and lift use different grids");
    const int N = y.N;
    const double gamma = lift.gamma();
    const auto& t = lift.grid().points();
    const std::vector<int> idx = sub_indices(lift.grid().cells(), max_points);
    ControlledRemainder out;
    for (int c = 0; c < y.components(); ++c) {
        std::vector<Word> ws{Word{}};
        for (const auto& [w, p] : y.coeff[static_cast<std::size_t>(c)]) ws.push_back(w);
        for (const Word& w : ws) {
            const Eigen::VectorXd& yw = y.path(c, w);
            const int room = N - 1 - static_cast<int>(w.size());
            const auto prefixes = words_up_to(y.driver_dim, room);
            const bool drift = w.empty() && !y.drift.empty() && y.drift[static_cast<std::size_t>(c)].size() > 0;
            double worst = 0.0;
            for (std::size_t a = 0; a < idx.size(); ++a) {
                TensorElement x = TensorElement::identity(lift.dim(), lift.depth());
                int at = idx[a];
                const int i = idx[a];
                for (std::size_t b = a + 1; b < idx.size(); ++b) {
                    for (; at < idx[b]; ++at) x = x * lift.segment(at);
                    const int j = idx[b];
                    double r = yw(j) - yw(i);
                    for (const Word& u : prefixes) r -= y.path(c, concat(u, w))(i) * x[u];
                    if (drift) r -= y.drift[static_cast<std::size_t>(c)](i) * (t[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(i)]);
                    const double len = t[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(i)];
                    worst = std::max(worst, std::abs(r) / std::pow(len, (N - static_cast<int>(w.size())) * gamma));
                }
            }
            out.per_word[std::to_string(c + 1) + ":" + word_string(w)] = worst;
            out.c_y = std::max(out.c_y, worst);
        }
    }
    return out;
}

double controlled_norm(const ControlledPath& y, double gamma) {
    y.validate();
    const auto& t = y.grid.points();
    const std::vector<int> idx = sub_indices(y.grid.cells(), 513);
    double s = 0.0;
    for (int c = 0; c < y.components(); ++c) {
        const auto cc = static_cast<std::size_t>(c);
        s += holder_seminorm(y.value[cc], t, idx, gamma);
        for (const auto& [w, p] : y.coeff[cc]) s += holder_seminorm(p, t, idx, gamma);
        if (!y.drift.empty() && y.drift[cc].size() > 0) s += holder_seminorm(y.drift[cc], t, idx, gamma);
    }
    return s;
}

ControlledIntegral controlled_integral(const RoughPathLift& lift, const ControlledPath& y, int max_points) {
    check_integrand(lift, y);
    const int n = lift.grid().cells();
    ControlledIntegral out;
    out.I = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) out.I(i + 1) = out.I(i) + local_integral(y, lift.segment(i), i);

    const double nx = holder_norms(lift).inhomogeneous;
    const double yn = controlled_norm(y, lift.gamma());
    const double expo = (lift.depth() + 1) * lift.gamma();
    const auto& t = lift.grid().points();
    const std::vector<int> idx = sub_indices(n, max_points);
    double worst = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        TensorElement x = TensorElement::identity(lift.dim(), lift.depth());
        int at = idx[a];
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            for (; at < idx[b]; ++at) x = x * lift.segment(at);
            const int i = idx[a], j = idx[b];
            const double r = out.I(j) - out.I(i) - local_integral(y, x, i);
            const double len = t[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(i)];
            const double scale = nx * yn * std::pow(len, expo);
            if (scale > 0) worst = std::max(worst, std::abs(r) / scale);
            else if (std::abs(r) > 1e-14) worst = std::numeric_limits<double>::infinity();
        }
    }
    out.remainder_ratio = worst;
    out.remainder_ok = worst <= 1.0;
    return out;
}

double controlled_integral_total(const RoughPathLift& lift, const ControlledPath& y, int stride) {
    check_integrand(lift, y);
    if (stride < 1) throw DomainError("rough-path-core", "stride must be >= 1");
    const int n = lift.grid().cells();
    double acc = 0.0;
    for (int i = 0; i < n; i += stride) {
        const int j = std::min(n, i + stride);
        acc += local_integral(y, lift.increment(i, j), i);
    }
    return acc;
}

bool NorrisSample::holds(double r, double q, double M) const {
    if (lhs == 0.0) return true;
    return lhs <= M * std::pow(R, q) * std::pow(z_sup, r);
}

NorrisSample norris_bound_check(const RoughPathLift& lift, const ControlledPath& y, const HolderFunction& b,
                                double theta) {
    const double gamma = lift.gamma();
    if (!(2.0 * gamma > theta))
        throw IncompatibleError("rough-path-core", "Norris bound needs 2 gamma > theta");
    const ControlledIntegral ci = controlled_integral(lift, y);
    const auto& t = lift.grid().points();
    NorrisSample s;
    double drift = 0.0, prev_b = b(t.front());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double bk = b(t[k]);
        if (k > 0) drift += 0.5 * (prev_b + bk) * (t[k] - t[k - 1]);
        prev_b = bk;
        s.z_sup = std::max(s.z_sup, std::abs(ci.I(static_cast<Eigen::Index>(k)) + drift));
        s.b_sup = std::max(s.b_sup, std::abs(bk));
        double yk = 0.0;
        for (int c = 0; c < y.components(); ++c) {
            const double v = y.value[static_cast<std::size_t>(c)](static_cast<Eigen::Index>(k));
            yk += v * v;
        }
        s.y_sup = std::max(s.y_sup, std::sqrt(yk));
    }
    s.lhs = s.y_sup + s.b_sup;
    s.l_lower = roughness_modulus(lift.grid(), lift.samples(), theta).l_lower;
    s.n_x = holder_norms(lift).inhomogeneous;
    s.y_norm = controlled_norm(y, gamma);
    s.b_norm = b.sup_norm() + b.holder_norm();
    s.R = 1.0 + (s.l_lower > 0 ? 1.0 / s.l_lower : std::numeric_limits<double>::infinity()) + s.n_x +
          s.y_norm + s.b_norm;
    return s;
}

NorrisEnvelope fit_norris_envelope(const std::vector<NorrisSample>& training, double safety) {
    std::vector<const NorrisSample*> use;
    for (const auto& s : training)
        if (s.lhs > 0.0) {
            if (!(s.z_sup > 0.0) || !std::isfinite(s.R))
                throw DomainError("rough-path-core", "training sample with z = 0 or R = inf cannot be enveloped");
            use.push_back(&s);
        }
    NorrisEnvelope best;
    best.training = static_cast<int>(training.size());
    if (use.empty()) {
        best.r = 1.0;
        best.M = 1.0;
        return best;
    }
    best.log_spread = std::numeric_limits<double>::infinity();
    for (int ri = 1; ri <= 50; ++ri) {
        const double r = 0.02 * ri;
        for (int qi = 0; qi <= 24; ++qi) {
            const double q = 0.25 * qi;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto* s : use) {
                const double lr = std::log(s->lhs) - q * std::log(s->R) - r * std::log(s->z_sup);
                lo = std::min(lo, lr);
                hi = std::max(hi, lr);
            }
            if (hi - lo < best.log_spread - 1e-12) {
                best.log_spread = hi - lo;
                best.r = r;
                best.q = q;
                best.M = safety * std::exp(hi);
            }
        }
    }
    return best;
}

int envelope_violations(const NorrisEnvelope& env, const std::vector<NorrisSample>& samples) {
    int v = 0;
    for (const auto& s : samples) v += !s.holds(env.r, env.q, env.M);
    return v;
}

}  // namespace grpx
