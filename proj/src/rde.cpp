#include "grpx/rde.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "grpx/errors.hpp"
#include "grpx/parallel.hpp"

namespace grpx {

namespace {

constexpr const char* kModule = "rde-flow";

}  // namespace

std::string BracketNode::label() const {
    std::string s = "V" + std::to_string(word.back());
    for (auto it = word.rbegin() + 1; it != word.rend(); ++it) s = "[V" + std::to_string(*it) + "," + s + "]";
    return s;
}

BracketTree bracket_tree(const VectorFields& f, int max_level) {
    f.validate();
    if (max_level < 1) throw DomainError(kModule, "max_level must be >= 1");
    BracketTree t;
    std::vector<BracketNode> first;
    for (int i = 0; i < f.d(); ++i)
        if (!f.v[static_cast<std::size_t>(i)].is_zero())
            first.push_back({{i + 1}, f.v[static_cast<std::size_t>(i)]});
    t.levels.push_back(first);
    for (int n = 1; n < max_level; ++n) {
        std::vector<BracketNode> next;
        for (int i = 0; i <= f.d(); ++i) {
            const PolyVectorField& vi = i == 0 ? f.drift : f.v[static_cast<std::size_t>(i - 1)];
            if (vi.is_zero()) continue;
            for (const auto& w : t.levels.back()) {
                PolyVectorField b = lie_bracket(vi, w.field);
                if (b.is_zero()) continue;
                std::vector<int> word{i};
                word.insert(word.end(), w.word.begin(), w.word.end());
                next.push_back({word, std::move(b)});
            }
        }
        t.levels.push_back(std::move(next));
    }
    return t;
}

int span_rank(const std::vector<Eigen::VectorXd>& vectors, int e) {
    if (vectors.empty()) return 0;
    Eigen::MatrixXd m(e, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t k = 0; k < vectors.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = vectors[k];
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
    if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > 1e-8 * sv(0);
    return r;
}

HormanderResult hormander_rank(const VectorFields& f, const Eigen::VectorXd& y0, int max_level) {
    if (y0.size() != f.e) throw DomainError(kModule, "y0 has the wrong dimension");
    const BracketTree tree = bracket_tree(f, max_level);
    HormanderResult out;
    std::vector<Eigen::VectorXd> vs;
    for (std::size_t n = 0; n < tree.levels.size(); ++n) {
        for (const auto& node : tree.levels[n]) vs.push_back(node.field(y0));
        const int r = span_rank(vs, f.e);
        out.rank_per_level.push_back(r);
        if (r == f.e && out.level_attained == 0) out.level_attained = static_cast<int>(n) + 1;
    }
    out.rank = out.rank_per_level.back();
    out.pass = out.level_attained > 0;
    return out;
}

VectorFields augmented_fields(const VectorFields& f) {
    f.validate();
    const int e = f.e, m = e + 2 * e * e;
    std::vector<int> embed(static_cast<std::size_t>(e));
    for (int i = 0; i < e; ++i) embed[static_cast<std::size_t>(i)] = i;
    auto jv = [&](int a, int b) { return Polynomial::variable(m, e + a + b * e); };
    auto kv = [&](int a, int b) { return Polynomial::variable(m, e + e * e + a + b * e); };
    auto lift = [&](const PolyVectorField& v) {
        std::vector<Polynomial> c(static_cast<std::size_t>(m), Polynomial(m));
        std::vector<std::vector<Polynomial>> dv(static_cast<std::size_t>(e));
        for (int a = 0; a < e; ++a) {
            c[static_cast<std::size_t>(a)] = v[a].relabeled(m, embed);
            for (int k = 0; k < e; ++k) dv[static_cast<std::size_t>(a)].push_back(v[a].derivative(k).relabeled(m, embed));
        }
        auto dvp = [&](int a, int k) -> const Polynomial& {
            return dv[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
        };
        for (int a = 0; a < e; ++a)
            for (int b = 0; b < e; ++b) {
                Polynomial pj(m), pk(m);
                for (int c2 = 0; c2 < e; ++c2) {
                    pj = pj + dvp(a, c2) * jv(c2, b);
                    pk = pk - kv(a, c2) * dvp(c2, b);
                }
                c[static_cast<std::size_t>(e + a + b * e)] = pj;
                c[static_cast<std::size_t>(e + e * e + a + b * e)] = pk;
            }
        return PolyVectorField(std::move(c));
    };
    VectorFields g;
    g.e = m;
    g.drift = lift(f.drift);
    for (const auto& v : f.v) g.v.push_back(lift(v));
    return g;
}

EulerScheme::EulerScheme(const VectorFields& f, int N) : e_(f.e), n_(N) {
    f.validate();
    if (N < 1 || N > TensorElement::max_level) throw DomainError(kModule, "Euler order must lie in [1,3]");
    // D_{(j,w)} = (V_j . grad) D_w, built from the right
    std::vector<std::pair<Word, PolyVectorField>> level;
    for (int j = 0; j < f.d(); ++j) level.push_back({Word{j}, f.v[static_cast<std::size_t>(j)]});
    for (int n = 1; n <= N; ++n) {
        for (auto& [w, v] : level) {
            words_.push_back(w);
            sym_.push_back(v);
        }
        if (n == N) break;
        std::vector<std::pair<Word, PolyVectorField>> next;
        for (int j = 0; j < f.d(); ++j)
            for (const auto& [w, v] : level) next.push_back({concat(Word{j}, w), v.along(f.v[static_cast<std::size_t>(j)])});
        level = std::move(next);
    }
    std::vector<Word> kept_words;
    std::vector<PolyVectorField> kept;
    for (std::size_t k = 0; k < sym_.size(); ++k)
        if (!sym_[k].is_zero()) {
            kept_words.push_back(words_[k]);
            kept.push_back(sym_[k]);
        }
    words_ = std::move(kept_words);
    sym_ = std::move(kept);
    for (const auto& s : sym_) {
        fields_.emplace_back(s);
        exact_ = exact_ && s.degree() == 0;
    }
    exact_ = exact_ && f.drift.degree() == 0;
    drift_ = CompiledField(f.drift);
    has_drift_ = !f.drift.is_zero();
}

void EulerScheme::step(Eigen::VectorXd& y, const TensorElement& x, double dt) const {
    Eigen::VectorXd inc = Eigen::VectorXd::Zero(e_), tmp;
    for (std::size_t k = 0; k < words_.size(); ++k) {
        const double c = x[words_[k]];
        if (c == 0.0) continue;
        fields_[k].eval(y, tmp);
        inc += c * tmp;
    }
    if (has_drift_ && dt != 0.0) {
        drift_.eval(y, tmp);
        inc += dt * tmp;
    }
    y += inc;
}

FlowTrajectory solve_rde(const RoughPathLift& lift, const VectorFields& f, const Eigen::VectorXd& y0,
                         const SolverOptions& opts) {
    f.validate();
    if (lift.depth() < 2) throw DomainError(kModule, "lift level N must be >= 2");
    if (lift.dim() != f.d())
        throw DomainError(kModule, "driver has " + std::to_string(lift.dim()) + " components but there are " +
                                       std::to_string(f.d()) + " driving fields");
    if (y0.size() != f.e) throw DomainError(kModule, "y0 has the wrong dimension");
    const int e = f.e, N = lift.depth();
    const VectorFields sys = opts.with_jacobian ? augmented_fields(f) : f;
    // On straight cells time is one more coordinate of a piecewise-linear path, so the
    // drift enters through its own letter and the mixed time-space terms are exact too.
    const bool straight = lift.straight_cells();
    VectorFields space_time;
    if (straight) {
        space_time.e = sys.e;
        space_time.drift = PolyVectorField::zero(sys.e);
        space_time.v.push_back(sys.drift);
        space_time.v.insert(space_time.v.end(), sys.v.begin(), sys.v.end());
    }
    const int order = straight ? std::clamp(std::max(N, opts.straight_order), 1, TensorElement::max_level) : N;
    const EulerScheme scheme(straight ? space_time : sys, order);

    Eigen::VectorXd m = Eigen::VectorXd::Zero(sys.e);
    m.head(e) = y0;
    if (opts.with_jacobian) {
        for (int a = 0; a < e; ++a) {
            m(e + a + a * e) = 1.0;
            m(e + e * e + a + a * e) = 1.0;
        }
    }

    FlowTrajectory tr;
    tr.grid = lift.grid();
    tr.N = N;
    tr.gamma = lift.gamma();
    const auto& t = lift.grid().points();
    auto record = [&] {
        tr.Y.push_back(m.head(e));
        if (opts.with_jacobian) {
            Eigen::MatrixXd J = Eigen::Map<const Eigen::MatrixXd>(m.data() + e, e, e);
            Eigen::MatrixXd K = Eigen::Map<const Eigen::MatrixXd>(m.data() + e + e * e, e, e);
            tr.max_jk_deviation =
                std::max(tr.max_jk_deviation, (J * K - Eigen::MatrixXd::Identity(e, e)).cwiseAbs().maxCoeff());
            tr.J.push_back(std::move(J));
            tr.K.push_back(std::move(K));
        }
    };
    auto guard = [&](double at) {
        const double norm = m.head(e).norm();
        if (!m.allFinite() || norm > opts.blowup_bound) {
            std::ostringstream os;
            os.precision(6);
            os << "solution left the ball |Y| <= " << opts.blowup_bound << " at t = " << at << " (|Y| = " << norm
               << ")";
            throw BlowUpError(kModule, os.str());
        }
    };
    record();
    for (int i = 0; i < lift.grid().cells(); ++i) {
        const double dt = t[static_cast<std::size_t>(i + 1)] - t[static_cast<std::size_t>(i)];
        if (lift.straight_cells()) {
            const Eigen::VectorXd dx = (lift.samples().row(i + 1) - lift.samples().row(i)).transpose();
            const double sup = dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0;
            const int pieces = scheme.exact() ? 1
                                              : std::clamp(static_cast<int>(std::ceil(sup / opts.max_substep)), 1,
                                                           std::max(1, opts.max_substeps));
            Eigen::VectorXd dtx(dx.size() + 1);
            dtx << dt, dx;
            const TensorElement piece = TensorElement::exp(dtx / pieces, order);
            for (int p = 0; p < pieces; ++p) {
                scheme.step(m, piece, 0.0);
                guard(t[static_cast<std::size_t>(i)] + dt * (p + 1) / pieces);
            }
            tr.substeps += pieces;
        } else {
            scheme.step(m, lift.segment(i), dt);
            guard(t[static_cast<std::size_t>(i + 1)]);
            tr.substeps += 1;
        }
        record();
    }
    return tr;
}

ControlledPath controlled_view(const FlowTrajectory& traj, const RoughPathLift& lift, const VectorFields& f) {
    if (traj.grid.points() != lift.grid().points())
        throw DomainError(kModule, "trajectory and lift use different grids");
    const int e = f.e, N = lift.depth();
    std::vector<double> zeros(static_cast<std::size_t>(e), 0.0);
    ControlledPath y = ControlledPath::constant(lift.grid(), f.d(), N, zeros);
    const auto n = static_cast<Eigen::Index>(traj.Y.size());
    y.drift.assign(static_cast<std::size_t>(e), Eigen::VectorXd::Zero(n));
    const EulerScheme coeffs(f, std::max(1, N - 1));
    const CompiledField drift(f.drift);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::VectorXd& Yk = traj.Y[static_cast<std::size_t>(k)];
        const Eigen::VectorXd v0 = drift(Yk);
        for (int c = 0; c < e; ++c) {
            y.value[static_cast<std::size_t>(c)](k) = Yk(c);
            y.drift[static_cast<std::size_t>(c)](k) = v0(c);
        }
        if (N < 2) continue;
        for (std::size_t w = 0; w < coeffs.words().size(); ++w) {
            const Eigen::VectorXd v = coeffs.coefficient_at(w, Yk);
            for (int c = 0; c < e; ++c) y.coeff[static_cast<std::size_t>(c)][coeffs.words()[w]](k) = v(c);
        }
    }
    return y;
}

VectorFields default_norris_fields() {
    return VectorFields::from_json({{"e", 2},
                                    {"V0", {"-0.5*y1", "0.2 - 0.5*y2"}},
                                    {"V1", {"1", "0.3*y1"}},
                                    {"V2", {"0.2*y2", "1"}}});
}

std::vector<NorrisSample> norris_trials(const NorrisTrialConfig& cfg, int trials, std::uint64_t first_trial) {
    if (trials < 1) throw DomainError(kModule, "trials must be >= 1");
    const VectorFields f = cfg.fields.e == 0 ? default_norris_fields() : cfg.fields;
    f.validate();
    const LiftExponents ex = lift_exponents(cfg.kernel);
    const Partition grid = Partition::uniform(0.0, cfg.kernel.horizon(), cfg.cells);
    const GaussianSampler sampler(cfg.kernel, grid.points());
    std::vector<NorrisSample> out(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int k) {
        const std::uint64_t id = cfg.seed + first_trial + static_cast<std::uint64_t>(k);
        std::mt19937_64 rng(id);
        std::normal_distribution<double> nd(0.0, 1.0);
        std::uniform_real_distribution<double> ud(-3.0, 0.0);
        const RoughPathLift lift(grid, sampler.sample(id, f.d()), ex.N, ex.gamma);
        SolverOptions opts;
        opts.with_jacobian = false;
        const FlowTrajectory tr = solve_rde(lift, f, Eigen::VectorXd::Zero(f.e), opts);
        Eigen::MatrixXd U(f.d(), f.e);
        for (Eigen::Index i = 0; i < U.size(); ++i) U(i) = nd(rng);
        const double kappa = std::pow(10.0, ud(rng));
        const double kappa0 = std::pow(10.0, ud(rng));
        Eigen::VectorXd u0(f.e);
        for (int c = 0; c < f.e; ++c) u0(c) = nd(rng);
        ControlledPath y = controlled_view(tr, lift, f).linear_image(kappa * U);
        const CompiledField v0(f.drift);
        std::vector<double> bv;
        for (const auto& Yk : tr.Y) bv.push_back(kappa0 * u0.dot(v0(Yk)));
        const HolderFunction b(grid, bv, ex.gamma);
        out[static_cast<std::size_t>(k)] = norris_bound_check(lift, y, b, cfg.theta);
    });
    return out;
}

}  // namespace grpx
