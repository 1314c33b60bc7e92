// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grpx/cli.hpp"
#include "grpx/conditional.hpp"
#include "grpx/malliavin.hpp"
#include "grpx/rde.hpp"
#include "grpx/rough_path.hpp"
#include "grpx/young.hpp"

using namespace grpx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const double kPi = std::acos(-1.0);

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string sci(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// ---- oracles ----

// min x^T Q x over {x_j >= b, j >= k} by projected gradient, step 1/L.
Eigen::VectorXd projected_gradient(const Eigen::MatrixXd& q, int k, double b) {
    const int n = static_cast<int>(q.rows());
    const double step = 1.0 / (2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff());
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, std::max(b, 1.0));
    for (int it = 0; it < 5'000'000; ++it) {
        Eigen::VectorXd nx = x - step * 2.0 * (q * x);
        for (int j = k; j < n; ++j) nx(j) = std::max(nx(j), b);
        const double change = (nx - x).cwiseAbs().maxCoeff();
        x = nx;
        if (change < 1e-16 * (1.0 + x.cwiseAbs().maxCoeff())) break;
    }
    return x;
}

// scaling and squaring with a long Taylor series
Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    int s = 0;
    double n = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (n > 0.5) {
        n /= 2;
        ++s;
    }
    const Eigen::MatrixXd b = a / std::pow(2.0, s);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols()), sum = term;
    for (int k = 1; k < 30; ++k) {
        term = term * b / k;
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// E[X_t^2] written out per family
double variance_at(const CovarianceKernel& k, double t) {
    switch (k.family()) {
        case KernelFamily::brownian: return t;
        case KernelFamily::fbm: return std::pow(t, 2 * k.hurst());
        case KernelFamily::ou: return 1 - std::exp(-2 * t);
        case KernelFamily::bridge: return t * (k.pin() - t);
    }
    return 0;
}

// composite Simpson on 2^16 cells
double simpson(const std::function<double(double)>& g, double a, double b) {
    const int n = 1 << 16;
    const double h = (b - a) / n;
    double s = g(a) + g(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
    return s * h / 3.0;
}

VectorFields linear_system(const Eigen::MatrixXd& A) {
    const int e = static_cast<int>(A.rows());
    VectorFields f;
    f.e = e;
    f.drift = PolyVectorField::zero(e);
    PolyVectorField v(e);
    for (int j = 0; j < e; ++j)
        for (int c = 0; c < e; ++c) v[j] = v[j] + Polynomial::variable(e, c).scaled(A(j, c));
    f.v.push_back(v);
    return f;
}

// ---- criteria ----

Verdict bm_collapse() {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> nd;
    const auto bm = CovarianceKernel::brownian();
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        // random trigonometric polynomial of degree 3
        std::vector<double> a(7);
        for (auto& x : a) x = nd(rng);
        auto g = [a](double t) {
            double v = a[0];
            for (int m = 1; m <= 3; ++m) v += a[2 * m - 1] * std::sin(m * kPi * t) + a[2 * m] * std::cos(m * kPi * t);
            return v;
        };
        // the depth-10 grid holds every point the quadrature evaluates
        const auto f = HolderFunction::sample(g, Partition::uniform(0.0, 1.0, 1 << 10), 1.0);
        const double exact = simpson([&](double t) { return g(t) * g(t); }, 0.0, 1.0);
        const double y = young_2d(f, bm, 1.0, 10).value;
        worst = std::max(worst, std::abs(y - exact) / std::abs(exact));
    }
    return {worst < 1e-5, "50 smooth f at depth 10, max rel err " + sci(worst) + " (tol 1e-05)"};
}

Verdict bm_conditional_variance() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto bm = CovarianceKernel::brownian();
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        double s = u(rng), t = u(rng);
        if (s > t) std::swap(s, t);
        if (t - s < 1e-6) continue;
        const double v = conditional_variance(bm, s, t, dyadic_context(s, t, 1.0, 8));
        worst = std::max(worst, std::abs(v - (t - s)));
    }
    return {worst < 1e-8, "100 (s,t), dyadic depth 8, max |Var - (t-s)| " + sci(worst) + " (tol 1e-08)"};
}

Verdict qp_bound() {
    std::mt19937_64 rng(303);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> dim(2, 8);
    std::uniform_real_distribution<double> ub(0.2, 2.0);
    int feasible = 0, drawn = 0, flag_mismatch = 0;
    double worst = 0;
    while (feasible < 500 && drawn < 20000) {
        ++drawn;
        const int n = dim(rng);
        const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
        const double b = ub(rng);
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
        const Eigen::MatrixXd q = a * a.transpose() / n + 0.3 * Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd x = projected_gradient(q, k, b);
        bool all_active = true;
        for (int j = k; j < n; ++j) all_active = all_active && x(j) - b < 1e-9;
        const auto r = qp_lower_bound(q, k, b);
        if (r.feasible != all_active) ++flag_mismatch;
        if (!all_active) continue;
        ++feasible;
        const double primal = x.dot(q * x);
        worst = std::max(worst, std::abs(r.value - primal) / std::abs(primal));
    }
    Eigen::MatrixXd q2(2, 2);
    q2 << 2, -1, -1, 2;
    const double small = qp_lower_bound(q2, 1, 1.0).value;
    const bool ok = feasible == 500 && worst < 1e-8 && flag_mismatch == 0 && std::abs(small - 1.5) < 1e-12;
    return {ok, std::to_string(feasible) + " feasible instances (of " + std::to_string(drawn) + " drawn), max rel err " +
                    sci(worst) + " (tol 1e-08), feasibility flag mismatches " + std::to_string(flag_mismatch) +
                    ", [[2,-1],[-1,2]] -> " + cli::format_double(small)};
}

Verdict sign_conditions() {
    int violations = 0;
    for (const auto& k : {CovarianceKernel::ou(), CovarianceKernel::bridge(2.0)}) {
        const auto s = check_sign_conditions(k, 1000, 404);
        violations += s.mixed_violations + s.partial_violations;
    }
    std::string dd;
    bool dd_ok = true;
    for (double h : {0.2, 0.25, 0.4}) {
        const auto r = check_diag_dominance(CovarianceKernel::fbm(h), 200, 12, 405);
        dd_ok = dd_ok && r.pass;
        dd += " H=" + sci(h) + (r.pass ? " pass" : " FAIL");
    }
    return {violations == 0 && dd_ok,
            "OU and bridge: " + std::to_string(violations) + " sign violations in 2x1000 points; diagonal dominance" + dd};
}

Verdict non_determinism() {
    struct Case {
        CovarianceKernel k;
        double target;
        const char* name;
    };
    const std::vector<Case> cases = {{CovarianceKernel::brownian(), 1.0, "BM"},
                                     {CovarianceKernel::ou(), 1.0, "OU"},
                                     {CovarianceKernel::bridge(2.0), 1.0, "bridge"},
                                     {CovarianceKernel::fbm(0.3), 0.6, "fBm0.3"},
                                     {CovarianceKernel::fbm(0.4), 0.8, "fBm0.4"}};
    bool ok = true;
    std::string d;
    for (const auto& c : cases) {
        const double a = non_determinism_index(c.k, 200, 3, 505).alpha_hat;
        ok = ok && std::abs(a - c.target) <= 0.05;
        d += std::string(" ") + c.name + "=" + sci(a) + "/" + sci(c.target);
    }
    return {ok, "alpha_hat/target (tol 0.05, 200 samples):" + d};
}

Verdict interpolation() {
    const std::vector<CovarianceKernel> ks = {CovarianceKernel::brownian(), CovarianceKernel::fbm(0.3),
                                              CovarianceKernel::fbm(0.35), CovarianceKernel::fbm(0.45),
                                              CovarianceKernel::ou(),     CovarianceKernel::bridge(2.0)};
    int violations = 0, total = 0;
    for (std::size_t i = 0; i < ks.size(); ++i)
        for (const auto& r : interpolation_trials(ks[i], 500, 0.45, 1.0, 8, 6000 + 1000 * i)) {
            ++total;
            violations += r.holds ? 0 : 1;
        }
    // BM: 2 max(|f|_L2, |f|_L2^{2g/(2g+1)} |f|_g^{1/(2g+1)}) on [0,1]
    double worst_const = 0;
    int sup_violations = 0;
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        const auto f = random_holder_function(0.45, 1.0, 256, 6000 + seed);
        const double l2 = f.l2_norm(), F = f.holder_norm(), g = f.gamma();
        const double itl = 2.0 * std::max(l2, std::pow(l2, 2 * g / (2 * g + 1)) * std::pow(F, 1 / (2 * g + 1)));
        worst_const = std::max(worst_const, std::abs(bm_interpolation_bound(f, 1.0) - itl) / itl);
        worst_const = std::max(worst_const, std::abs(interpolation_corollary_bound(l2 * l2, F, g, 1.0, 1.0, 1.0) - itl) / itl);
        sup_violations += f.sup_norm() <= itl ? 0 : 1;
    }
    return {violations == 0 && worst_const < 1e-12 && sup_violations == 0,
            std::to_string(violations) + " violations in " + std::to_string(total) +
                " (f, kernel) trials; BM constants max rel dev " + sci(worst_const) + ", sup-norm violations " +
                std::to_string(sup_violations)};
}

Verdict chen() {
    std::mt19937_64 rng(707);
    std::normal_distribution<double> nd;
    const int d = 3, n = 64;
    Eigen::MatrixXd x(n + 1, d);
    x.row(0).setZero();
    for (int i = 1; i <= n; ++i)
        for (int c = 0; c < d; ++c) x(i, c) = x(i - 1, c) + nd(rng) / 8.0;
    const auto lift = signature(Partition::uniform(0, 1, n), x, 3);
    double chen_err = 0;
    for (int m = 1; m < n; m += 7)
        chen_err = std::max(chen_err, (lift.increment(0, m) * lift.increment(m, n)).max_abs_diff(lift.increment(0, n)));

    // x_t = v t on [0,T] in 5 pieces: level n is v^{(x)n} T^n / n!
    const double T = 1.3;
    Eigen::VectorXd v(d);
    v << 0.7, -1.1, 0.4;
    Eigen::MatrixXd line(6, d);
    for (int i = 0; i <= 5; ++i) line.row(i) = v.transpose() * (T * i / 5.0);
    const auto sl = signature(Partition::uniform(0, T, 5), line, 3).signature();
    double lin_err = 0;
    double fact = 1;
    for (int lev = 1; lev <= 3; ++lev) {
        fact *= lev;
        for (const auto& w : words_of_length(d, lev)) {
            double p = std::pow(T, lev) / fact;
            for (int c : w) p *= v(c);
            lin_err = std::max(lin_err, std::abs(sl[w] - p));
        }
    }

    const int m = 1 << 12;
    Eigen::MatrixXd par(m + 1, 2);
    for (int i = 0; i <= m; ++i) {
        const double t = static_cast<double>(i) / m;
        par.row(i) << t, t * t;
    }
    const auto sp = signature(Partition::uniform(0, 1, m), par, 2).signature();
    const double area = 0.5 * (sp[Word{0, 1}] - sp[Word{1, 0}]);
    const bool ok = chen_err < 1e-12 && lin_err < 1e-12 && std::abs(area - 1.0 / 6.0) < 1e-6;
    return {ok, "Chen max err " + sci(chen_err) + ", linear-path levels max err " + sci(lin_err) +
                    " (tol 1e-12), area of (t,t^2) - 1/6 = " + sci(area - 1.0 / 6.0) + " (tol 1e-06)"};
}

Verdict rde_linear() {
    std::mt19937_64 rng(808);
    std::normal_distribution<double> nd;
    double worst = 0, worst_jk = 0;
    int paths = 0;
    for (const auto& k : {CovarianceKernel::brownian(), CovarianceKernel::fbm(0.4)}) {
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::MatrixXd A(2, 2);
            A << nd(rng), nd(rng), nd(rng), nd(rng);
            const auto g = lift_gaussian(k, Partition::uniform(0, 1, 1024), 8000 + static_cast<std::uint64_t>(trial), 1);
            Eigen::VectorXd y0(2);
            y0 << 1.0, -0.5;
            const auto tr = solve_rde(g.lift, linear_system(A), y0);
            for (std::size_t i = 0; i < tr.Y.size(); i += 8) {
                const Eigen::MatrixXd E = expm(A * g.lift.samples()(static_cast<Eigen::Index>(i), 0));
                worst = std::max(worst, (tr.Y[i] - E * y0).cwiseAbs().maxCoeff());
            }
            worst_jk = std::max(worst_jk, tr.max_jk_deviation);
            ++paths;
        }
    }
    return {worst < 1e-4 && worst_jk < 1e-6, std::to_string(paths) + " paths (BM, fBm H=0.4) at mesh 2^-10, max |Y - exp(A X) y0| " +
                                                 sci(worst) + " (tol 1e-04), max |J Jinv - I| " + sci(worst_jk) +
                                                 " (tol 1e-06)"};
}

Verdict malliavin() {
    const double sigma = 1.7, t = 0.8;
    const auto f = VectorFields::from_json({{"e", 1}, {"V1", {"1.7"}}});
    double worst = 0;
    for (const auto& k : {CovarianceKernel::brownian(), CovarianceKernel::fbm(0.4), CovarianceKernel::ou(),
                          CovarianceKernel::bridge(2.0)}) {
        const auto ex = lift_exponents(k);
        const Partition grid = Partition::uniform(0, t, 64);
        const GaussianSampler s(k, grid.points());
        const auto tr = solve_rde(RoughPathLift(grid, s.sample(3, 1), ex.N, ex.gamma), f, Eigen::VectorXd::Zero(1));
        const double c = malliavin_matrix(tr, f, k).C(0, 0), want = sigma * sigma * variance_at(k, t);
        worst = std::max(worst, std::abs(c - want) / want);
    }
    std::string d = "collapse max rel err " + sci(worst) + " (tol 1e-04)";
    bool ok = worst < 1e-4;
    for (const auto& [k, name] : {std::pair{CovarianceKernel::brownian(), "BM"}, std::pair{CovarianceKernel::fbm(0.4), "fBm H=0.4"}}) {
        EnsembleConfig hyp;
        hyp.kernel = k;
        hyp.fields = VectorFields::from_json({{"e", 2}, {"V1", {"1", "0"}}, {"V0", {"0", "y1"}}});
        hyp.y0 = Eigen::VectorXd::Zero(2);
        hyp.n_paths = 100;
        hyp.grid_size = 64;
        hyp.base_seed = 909;
        const auto th = eigenvalue_tail(hyp, log_grid(1e-4, 1.0, 12));
        int positive = 0;
        for (double l : th.min_eigs) positive += l > 0.0 ? 1 : 0;
        bool monotone = th.prob.back() > th.prob.front();
        for (std::size_t i = 1; i < th.prob.size(); ++i) monotone = monotone && th.prob[i] >= th.prob[i - 1];
        ok = ok && positive >= 99 && monotone;
        d += std::string("; Hormander example, ") + name + ": " + std::to_string(positive) + "/100 positive, tail " +
             (monotone ? "decreasing" : "NOT decreasing") + " as eps -> 0";
    }
    return {ok, d};
}

Verdict roughness() {
    std::vector<double> line;
    for (int m = 3; m <= 10; ++m) {
        const int n = 1 << m;
        Eigen::MatrixXd x(n + 1, 1);
        for (int i = 0; i <= n; ++i) x(i, 0) = 2.0 * i / n;
        line.push_back(roughness_modulus(Partition::uniform(0, 1, n), x, 0.5).d_theta);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < line.size(); ++i) monotone = monotone && line[i] < line[i - 1];

    const auto k = CovarianceKernel::fbm(0.35);
    const Partition grid = Partition::uniform(0, 1, 256);
    const GaussianSampler sampler(k, grid.points());
    std::vector<double> l;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) l.push_back(roughness_modulus(grid, sampler.sample(seed, 2), 0.4).l_lower);
    const double lo = *std::min_element(l.begin(), l.end());
    const double hi = *std::max_element(l.begin(), l.end());
    // empirical P(L < x) on a grid of x from 0 to past the largest sample
    bool cdf_ok = true;
    double prev = -1;
    for (int i = 0; i <= 40; ++i) {
        const double x = 1.1 * hi * i / 40.0;
        const double p = static_cast<double>(std::count_if(l.begin(), l.end(), [&](double v) { return v < x; })) / l.size();
        cdf_ok = cdf_ok && p >= prev;
        prev = p;
        if (i == 0) cdf_ok = cdf_ok && p == 0.0;
    }
    cdf_ok = cdf_ok && prev == 1.0;
    const bool ok = monotone && line.back() < 0.1 && lo > 0 && cdf_ok;
    return {ok, "line theta=0.5: " + sci(line.front()) + " -> " + sci(line.back()) + (monotone ? " monotone" : " NOT monotone") +
                    "; fBm H=0.35 theta=0.4 min lower bound over 100 seeds " + sci(lo) + "; P(L < x) " +
                    (cdf_ok ? "shrinks to 0 as x -> 0" : "NOT monotone")};
}

Verdict norris() {
    NorrisTrialConfig cfg;
    cfg.seed = 1111;
    const auto train = norris_trials(cfg, 200, 0);
    const auto held = norris_trials(cfg, 200, 200);
    const auto env = fit_norris_envelope(train);
    const int v = envelope_violations(env, held);
    return {v == 0, "fit r=" + sci(env.r) + " q=" + sci(env.q) + " M=" + sci(env.M) + " on 200 trials, " +
                        std::to_string(v) + " violations on 200 held-out"};
}

Verdict determinism(const fs::path& work) {
    const json fbm = {{"family", "fbm"}, {"H", 0.4}};
    const json hyp = {{"e", 2}, {"V0", {"0", "y1"}}, {"V1", {"1", "0.1*y2"}}};
    const std::vector<std::pair<std::string, json>> runs = {
        {"check", {{"kernel", fbm}, {"fields", hyp}, {"y0", {0.0, 0.0}}, {"check", {{"trials", 20}}}}},
        {"variation", {{"kernel", fbm}, {"variation", {{"rho", 1.25}, {"max_depth", 6}}}}},
        {"qp", {{"qp", {{"Q", {{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}}}, {"k", 1}, {"b", 0.5}}}}},
        {"young", {{"kernel", fbm}, {"young", {{"trials", 20}, {"depth", 8}}}}},
        {"rde", {{"kernel", fbm}, {"fields", hyp}, {"y0", {0.1, 0.2}}, {"rde", {{"cells", 128}}}}},
        {"malliavin", {{"kernel", fbm}, {"fields", hyp}, {"y0", {0.0, 0.0}}, {"malliavin", {{"n_paths", 10}, {"grid_size", 32}}}}},
        {"roughness",
         {{"kernel", {{"family", "fbm"}, {"H", 0.35}}},
          {"roughness", {{"trials", 10}, {"cells", 128}, {"norris", {{"train", 6}, {"held_out", 6}, {"cells", 128}}}}}}},
        {"density",
         {{"kernel", {{"family", "brownian"}}},
          {"fields", {{"e", 1}, {"V0", {"-0.5*y1"}}, {"V1", {"1 + 0.2*y1"}}}},
          {"y0", {0.5}},
          {"density", {{"n_paths", 400}, {"grid_size", 16}, {"max_substep", 0.01}}}}}};
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    int identical = 0, files = 0;
    std::string bad;
    for (const auto& [cmd, cfg] : runs) {
        const fs::path cpath = work / (cmd + ".json");
        fs::create_directories(work);
        std::ofstream(cpath) << cfg.dump(2);
        std::string outs[2];
        int codes[2];
        for (int r = 0; r < 2; ++r) {
            const fs::path dir = work / (cmd + "_run" + std::to_string(r));
            fs::remove_all(dir);
            std::ostringstream out, err;
            codes[r] = cli::run({cmd, "--config", cpath.string(), "--out", dir.string(), "--seed", "77"}, out, err);
            outs[r] = out.str() + err.str();
        }
        bool same = codes[0] == codes[1] && codes[0] != cli::exit_error && outs[0] == outs[1];
        const fs::path d0 = work / (cmd + "_run0"), d1 = work / (cmd + "_run1");
        int n = 0;
        if (fs::exists(d0))
            for (const auto& ent : fs::directory_iterator(d0)) {
                ++n;
                const fs::path other = d1 / ent.path().filename();
                same = same && fs::exists(other) && slurp(ent.path()) == slurp(other);
            }
        same = same && n > 0;
        files += n;
        identical += same ? 1 : 0;
        if (!same) bad += " " + cmd;
    }
    return {identical == static_cast<int>(runs.size()),
            std::to_string(identical) + "/" + std::to_string(runs.size()) + " commands byte-identical over two runs (" +
                std::to_string(files) + " files per run)" + (bad.empty() ? "" : ", differing:" + bad)};
}

}  // namespace

int main() {
    const fs::path work = fs::path(GRPX_ACCEPTANCE_WORK_DIR) / "acceptance_work";
    struct Criterion {
        int id;
        const char* name;
        double limit_s;  // 0 = no runtime bound
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> crit = {
        {1, "BM collapse identity", 30, bm_collapse},
        {2, "BM conditional variance", 0, bm_conditional_variance},
        {3, "QP lower bound", 0, qp_bound},
        {4, "sign conditions and diagonal dominance", 0, sign_conditions},
        {5, "non-determinism index", 120, non_determinism},
        {6, "interpolation inequality", 0, interpolation},
        {7, "signature and Chen identity", 0, chen},
        {8, "RDE linear-field oracle", 0, rde_linear},
        {9, "Malliavin collapse and Hormander example", 0, malliavin},
        {10, "roughness modulus", 0, roughness},
        {11, "Norris envelope", 0, norris},
        {12, "CLI determinism", 0, [&] { return determinism(work); }},
    };
    int failed = 0;
    for (const auto& c : crit) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string time = sci(dt) + " s";
        if (c.limit_s > 0) {
            time += " (limit " + sci(c.limit_s) + " s)";
            v.pass = v.pass && dt < c.limit_s;
        }
        std::printf("%s %2d %s: %s; %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), time.c_str());
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(crit.size()) - failed, crit.size());
    return failed == 0 ? 0 : 1;
}
