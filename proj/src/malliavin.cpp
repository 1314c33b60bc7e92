#include "grpx/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "grpx/errors.hpp"
#include "grpx/gram.hpp"
#include "grpx/parallel.hpp"

namespace grpx {

namespace {

constexpr const char* kModule = "malliavin-analysis";

int resolve_index(const FlowTrajectory& traj, int t_index) {
    const int last = traj.grid.cells();
    if (t_index < 0) return last;
    if (t_index > last) throw DomainError(kModule, "t index beyond the trajectory");
    return t_index;
}

Eigen::VectorXd read_vector(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError(kModule, key + " must be an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(kModule, key + " must be an array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

}  // namespace

Eigen::MatrixXd malliavin_integrand(const FlowTrajectory& traj, const VectorFields& f, int i, int t_index) {
    if (!traj.has_jacobian()) throw DomainError(kModule, "trajectory was solved without the Jacobian");
    if (i < 0 || i >= f.d()) throw DomainError(kModule, "no driving field with that index");
    const int n = resolve_index(traj, t_index);
    const CompiledField v(f.v[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd& Jt = traj.J[static_cast<std::size_t>(n)];
    Eigen::MatrixXd F(n + 1, f.e);
    for (int p = 0; p <= n; ++p) {
        const auto pp = static_cast<std::size_t>(p);
        F.row(p) = (Jt * (traj.K[pp] * v(traj.Y[pp]))).transpose();
    }
    return F;
}

MalliavinMatrix malliavin_matrix(const FlowTrajectory& traj, const VectorFields& f, const CovarianceKernel& k,
                                 int t_index) {
    if (!(traj.gamma + 1.0 / k.rho() > 1.0))
        throw IncompatibleError(kModule, "gamma + 1/rho <= 1, the Young pairing does not exist");
    const int n = resolve_index(traj, t_index);
    MalliavinMatrix out;
    out.t = traj.grid[n];
    out.C = Eigen::MatrixXd::Zero(f.e, f.e);
    if (n > 0) {
        const auto& pts = traj.grid.points();
        const Eigen::MatrixXd Q = increment_gram(k, Partition(std::vector<double>(pts.begin(), pts.begin() + n + 1)));
        for (int i = 0; i < f.d(); ++i) {
            // left-point values on the n cells
            const Eigen::MatrixXd F = malliavin_integrand(traj, f, i, n).topRows(n);
            out.C += F.transpose() * Q * F;
        }
        out.C = 0.5 * (out.C + out.C.transpose());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.C);
    out.spectrum = es.eigenvalues();
    out.spectrum_clipped = out.spectrum.cwiseMax(0.0);
    out.min_direction = es.eigenvectors().col(0);
    out.psd_ok = out.spectrum(0) >= -1e-9 * std::max(out.C.trace(), 0.0);
    return out;
}

ZProcess z_process(const FlowTrajectory& traj, const PolyVectorField& W) {
    if (!traj.has_jacobian()) throw DomainError(kModule, "trajectory was solved without the Jacobian");
    if (W.dim() != traj.dim()) throw DomainError(kModule, "W has the wrong dimension");
    const CompiledField w(W);
    ZProcess z;
    z.grid = traj.grid;
    for (std::size_t p = 0; p < traj.Y.size(); ++p) z.Z.push_back(traj.K[p] * w(traj.Y[p]));
    return z;
}

Eigen::VectorXd directional_derivative(const FlowTrajectory& traj, const VectorFields& f, const Eigen::MatrixXd& h,
                                       int t_index) {
    if (h.rows() != static_cast<Eigen::Index>(traj.Y.size()) || h.cols() != f.d())
        throw DomainError(kModule, "h needs one row per grid point and one column per driving field");
    const int n = resolve_index(traj, t_index);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(f.e);
    for (int i = 0; i < f.d(); ++i) {
        const Eigen::MatrixXd F = malliavin_integrand(traj, f, i, n);
        for (int p = 0; p < n; ++p) out += 0.5 * (F.row(p) + F.row(p + 1)).transpose() * (h(p + 1, i) - h(p, i));
    }
    return out;
}

void EnsembleConfig::validate() const {
    fields.validate();
    if (y0.size() != fields.e) throw ConfigError(kModule, "y0 must have e entries");
    if (!(t > 0.0 && t <= kernel.horizon())) throw ConfigError(kModule, "t must lie in (0, horizon]");
    if (!(max_substep > 0.0)) throw ConfigError(kModule, "max_substep must be positive");
    if (n_paths < 1) throw ConfigError(kModule, "n_paths must be >= 1");
    if (grid_size < 1 || grid_size + 1 > static_cast<int>(GaussianSampler::max_grid))
        throw ConfigError(kModule, "grid_size must lie in [1, 4095]");
}

EnsembleConfig EnsembleConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError(kModule, "ensemble config must be an object");
    for (const char* key : {"kernel", "fields", "y0"})
        if (!j.contains(key)) throw ConfigError(kModule, std::string("ensemble config needs \"") + key + "\"");
    EnsembleConfig c;
    c.kernel = CovarianceKernel::from_json(j["kernel"]);
    c.fields = VectorFields::from_json(j["fields"]);
    c.y0 = read_vector(j["y0"], "y0");
    c.t = j.value("t", 1.0);
    c.n_paths = j.value("n_paths", 100);
    c.grid_size = j.value("grid_size", 256);
    c.base_seed = j.value("base_seed", std::uint64_t{1});
    c.max_substep = j.value("max_substep", c.max_substep);
    c.validate();
    return c;
}

nlohmann::json EnsembleConfig::to_json() const {
    return {{"kernel", kernel.to_json()},
            {"fields", fields.to_json()},
            {"y0", std::vector<double>(y0.data(), y0.data() + y0.size())},
            {"t", t},
            {"n_paths", n_paths},
            {"grid_size", grid_size},
            {"base_seed", base_seed},
            {"max_substep", max_substep}};
}

PowerEnvelope fit_chain_envelope(const std::vector<ChainSample>& training, double safety) {
    std::vector<const ChainSample*> use;
    for (const auto& s : training)
        if (s.z_sup > 0.0) {
            if (!(s.quadratic > 0.0)) throw DomainError(kModule, "z > 0 with a zero quadratic form cannot be enveloped");
            use.push_back(&s);
        }
    PowerEnvelope best;
    if (use.empty()) {
        best.mu = 1.0;
        best.M = 1.0;
        return best;
    }
    best.log_spread = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 50; ++k) {
        const double mu = 0.02 * k;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto* s : use) {
            const double l = std::log(s->z_sup) - mu * std::log(s->quadratic);
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
        if (hi - lo < best.log_spread - 1e-12) {
            best.log_spread = hi - lo;
            best.mu = mu;
            best.M = safety * std::exp(hi);
        }
    }
    return best;
}

int chain_violations(const PowerEnvelope& env, const std::vector<ChainSample>& samples) {
    int v = 0;
    for (const auto& s : samples)
        if (s.z_sup > 0.0 && !(s.z_sup <= env.M * std::pow(s.quadratic, env.mu))) ++v;
    return v;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo) || n < 2) throw DomainError(kModule, "log grid needs 0 < lo < hi and n >= 2");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

EigenTail eigenvalue_tail(const EnsembleConfig& cfg, const std::vector<double>& eps) {
    cfg.validate();
    const LiftExponents ex = lift_exponents(cfg.kernel);
    const Partition grid = Partition::uniform(0.0, cfg.t, cfg.grid_size);
    const GaussianSampler sampler(cfg.kernel, grid.points());
    const VectorFields& f = cfg.fields;

    struct PathResult {
        double lambda = 0;
        bool psd = true;
        std::vector<ChainSample> chain;
    };
    std::vector<PathResult> res(static_cast<std::size_t>(cfg.n_paths));
    parallel_for(cfg.n_paths, [&](int p) {
        const RoughPathLift lift(grid, sampler.sample(cfg.base_seed + static_cast<std::uint64_t>(p), f.d()), ex.N,
                                 ex.gamma);
        SolverOptions o;
        o.max_substep = cfg.max_substep;
        const FlowTrajectory tr = solve_rde(lift, f, cfg.y0, o);
        const MalliavinMatrix m = malliavin_matrix(tr, f, cfg.kernel);
        auto& r = res[static_cast<std::size_t>(p)];
        r.lambda = m.min_eigenvalue();
        r.psd = m.psd_ok;
        for (int i = 0; i < f.d(); ++i) {
            const ZProcess z = z_process(tr, f.v[static_cast<std::size_t>(i)]);
            ChainSample s;
            s.path = p;
            s.field = "V" + std::to_string(i + 1);
            for (const auto& zk : z.Z) s.z_sup = std::max(s.z_sup, std::abs(m.min_direction.dot(zk)));
            s.quadratic = r.lambda;
            r.chain.push_back(s);
        }
    });

    EigenTail out;
    out.eps = eps;
    for (const auto& r : res) {
        out.min_eigs.push_back(r.lambda);
        out.psd_failures += !r.psd;
        out.chain.insert(out.chain.end(), r.chain.begin(), r.chain.end());
    }
    std::vector<double> lx, ly;
    for (double e : eps) {
        const auto below = std::count_if(out.min_eigs.begin(), out.min_eigs.end(), [&](double l) { return l < e; });
        const double p = static_cast<double>(below) / cfg.n_paths;
        out.prob.push_back(p);
        if (p > 0.0 && p < 1.0) {
            lx.push_back(std::log(e));
            ly.push_back(std::log(p));
        }
    }
    out.fit_points = static_cast<int>(lx.size());
    if (lx.size() >= 2) {
        const double m = static_cast<double>(lx.size());
        const double sx = std::accumulate(lx.begin(), lx.end(), 0.0), sy = std::accumulate(ly.begin(), ly.end(), 0.0);
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double den = m * sxx - sx * sx;
        out.exponent = den > 0 ? (m * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
    } else {
        // P jumps from 0 to a positive value with nothing in between: faster than any power
        bool zero_seen = false, jump = false;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            if (out.prob[i] == 0.0) zero_seen = true;
            else if (zero_seen) jump = true;
        }
        out.exponent = jump ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::vector<Eigen::VectorXd> ensemble_endpoints(const EnsembleConfig& cfg) {
    cfg.validate();
    const LiftExponents ex = lift_exponents(cfg.kernel);
    const Partition grid = Partition::uniform(0.0, cfg.t, cfg.grid_size);
    const GaussianSampler sampler(cfg.kernel, grid.points());
    std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(cfg.n_paths));
    SolverOptions o;
    o.with_jacobian = false;
    o.max_substep = cfg.max_substep;
    parallel_for(cfg.n_paths, [&](int p) {
        const RoughPathLift lift(grid, sampler.sample(cfg.base_seed + static_cast<std::uint64_t>(p), cfg.fields.d()),
                                 ex.N, ex.gamma);
        out[static_cast<std::size_t>(p)] = solve_rde(lift, cfg.fields, cfg.y0, o).Y.back();
    });
    return out;
}

DensityEstimate kde(const std::vector<double>& samples, const DensityOptions& opts) {
    if (samples.size() < 2) throw DomainError(kModule, "density estimate needs at least two samples");
    if (opts.points < 5) throw DomainError(kModule, "density grid needs at least five points");
    DensityEstimate d;
    const double n = static_cast<double>(samples.size());
    d.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0;
    for (double x : samples) ss += (x - d.mean) * (x - d.mean);
    d.sd = std::sqrt(ss / (n - 1));
    if (!(d.sd > 1e-12 * (1.0 + std::abs(d.mean)))) {
        d.point_mass = true;
        return d;
    }
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * (n - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < sorted.size() ? sorted[i] * (1 - frac) + sorted[i + 1] * frac : sorted.back();
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double spread = iqr > 0 ? std::min(d.sd, iqr / 1.34) : d.sd;
    const double silverman = 0.9 * spread * std::pow(n, -0.2) * opts.bandwidth_scale;
    for (double s : {0.5, 1.0, 2.0}) d.bandwidth.push_back(s * silverman);
    const double lo = sorted.front() - 3 * d.bandwidth.back(), hi = sorted.back() + 3 * d.bandwidth.back();
    const int m = opts.points;
    for (int i = 0; i < m; ++i) d.x.push_back(lo + (hi - lo) * i / (m - 1));
    const double norm = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
    for (double h : d.bandwidth) {
        std::vector<double> f(static_cast<std::size_t>(m), 0.0);
        parallel_for(m, [&](int i) {
            // only samples within 8 bandwidths contribute
            const double x = d.x[static_cast<std::size_t>(i)];
            auto a = std::lower_bound(sorted.begin(), sorted.end(), x - 8 * h);
            auto b = std::upper_bound(sorted.begin(), sorted.end(), x + 8 * h);
            double acc = 0;
            for (auto it = a; it != b; ++it) {
                const double u = (x - *it) / h;
                acc += std::exp(-0.5 * u * u);
            }
            f[static_cast<std::size_t>(i)] = acc * norm / (n * h);
        });
        d.density.push_back(std::move(f));
    }
    const double dx = d.x[1] - d.x[0];
    auto second = [&](const std::vector<double>& f) {
        std::vector<double> s;
        for (std::size_t i = 1; i + 1 < f.size(); ++i) s.push_back((f[i + 1] - 2 * f[i] + f[i - 1]) / (dx * dx));
        return s;
    };
    const auto base = second(d.density[1]);
    double base_sup = 0;
    for (double v : base) base_sup = std::max(base_sup, std::abs(v));
    auto change = [&](std::size_t k) {
        const auto other = second(d.density[k]);
        double diff = 0;
        for (std::size_t i = 0; i < base.size(); ++i) diff = std::max(diff, std::abs(other[i] - base[i]));
        return base_sup > 0 ? diff / base_sup : 0.0;
    };
    d.change_narrow = change(0);
    d.change_wide = change(2);
    d.second_derivative_change = std::max(d.change_narrow, d.change_wide);
    const auto& f = d.density[1];
    const double peak = *std::max_element(f.begin(), f.end());
    for (std::size_t i = 1; i + 1 < f.size(); ++i)
        if (f[i] > f[i - 1] && f[i] >= f[i + 1] && f[i] > 0.01 * peak) ++d.modes;
    return d;
}

DensityEstimate density_estimate(const EnsembleConfig& cfg, const DensityOptions& opts) {
    if (opts.component < 0 || opts.component >= cfg.fields.e)
        throw DomainError(kModule, "density component outside the state");
    std::vector<double> x;
    for (const auto& y : ensemble_endpoints(cfg)) x.push_back(y(opts.component));
    return kde(x, opts);
}

}  // namespace grpx
