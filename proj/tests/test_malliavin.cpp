#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "grpx/errors.hpp"
#include "grpx/malliavin.hpp"
#include "grpx/young.hpp"

using namespace grpx;

namespace {

double variance_at(const CovarianceKernel& k, double t) {
    switch (k.family()) {
    case KernelFamily::brownian:
        return t;
    case KernelFamily::fbm:
        return std::pow(t, 2 * k.hurst());
    case KernelFamily::ou:
        return 1 - std::exp(-2 * t);
    case KernelFamily::bridge:
        return t * (k.pin() - t);
    }
    return 0;
}

VectorFields fields(const nlohmann::json& j) { return VectorFields::from_json(j); }

FlowTrajectory solve(const CovarianceKernel& k, const VectorFields& f, const Eigen::VectorXd& y0, double t, int n,
                     std::uint64_t seed) {
    const auto ex = lift_exponents(k);
    const Partition grid = Partition::uniform(0, t, n);
    GaussianSampler s(k, grid.points());
    return solve_rde(RoughPathLift(grid, s.sample(seed, f.d()), ex.N, ex.gamma), f, y0);
}

}  // namespace

TEST_CASE("collapse to the variance for constant fields") {
    const double sigma = 1.7, t = 0.8;
    const auto f = fields({{"e", 1}, {"V1", {"1.7"}}});
    for (const auto& k : {CovarianceKernel::brownian(), CovarianceKernel::fbm(0.4), CovarianceKernel::ou(),
                          CovarianceKernel::bridge(2.0)}) {
        const auto tr = solve(k, f, Eigen::VectorXd::Zero(1), t, 64, 3);
        const auto m = malliavin_matrix(tr, f, k);
        CHECK(m.t == doctest::Approx(t));
        CHECK(m.C(0, 0) == doctest::Approx(sigma * sigma * variance_at(k, t)).epsilon(1e-4));
    }
    const auto zero = fields({{"e", 2}, {"V1", {"0", "0"}}});
    const auto m0 = malliavin_matrix(solve(CovarianceKernel::brownian(), zero, Eigen::VectorXd::Ones(2), 1, 32, 1), zero,
                                     CovarianceKernel::brownian());
    CHECK(m0.C.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m0.min_eigenvalue() == 0.0);

    const auto rough = CovarianceKernel::fbm(0.3);
    CHECK_THROWS_AS(malliavin_matrix(solve(rough, f, Eigen::VectorXd::Zero(1), 1, 32, 1), f, rough), IncompatibleError);
}

TEST_CASE("elliptic system: positive spectrum, PSD and quadratic-form consistency") {
    const auto f = fields({{"e", 2}, {"V0", {"-0.5*y1", "-0.5*y2"}}, {"V1", {"1", "0.2*y2"}}, {"V2", {"0.1*y1", "1"}}});
    const auto k = CovarianceKernel::brownian();
    double lo = 1e300;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto tr = solve(k, f, Eigen::VectorXd::Zero(2), 1, 32, seed);
        const auto m = malliavin_matrix(tr, f, k);
        CHECK(m.psd_ok);
        CHECK((m.C - m.C.transpose()).cwiseAbs().maxCoeff() == 0.0);
        lo = std::min(lo, m.min_eigenvalue());
    }
    CHECK(lo > 0.0);

    const auto tr = solve(k, f, Eigen::VectorXd::Zero(2), 1, 256, 7);
    const auto m = malliavin_matrix(tr, f, k);
    Eigen::Vector2d v(0.6, -0.8);
    double q = 0;
    for (int i = 0; i < 2; ++i) {
        const Eigen::MatrixXd F = malliavin_integrand(tr, f, i);
        std::vector<double> g;
        for (Eigen::Index p = 0; p < F.rows(); ++p) g.push_back(F.row(p).dot(v));
        q += young_2d(HolderFunction(tr.grid, g, tr.gamma), k, 1.0, 10).raw;
    }
    CHECK(q == doctest::Approx(v.dot(m.C * v)).epsilon(2e-2));
}

TEST_CASE("Z processes") {
    const auto k = CovarianceKernel::brownian();
    const auto zero = fields({{"e", 2}, {"V1", {"0", "0"}}});
    const auto W = PolyVectorField::parse({"1", "-2"}, 2);
    const auto z0 = z_process(solve(k, zero, Eigen::VectorXd::Ones(2), 1, 32, 1), W);
    for (const auto& z : z0.Z) CHECK(z == W(Eigen::VectorXd::Ones(2)));

    // linear V = A y with d = 1: K_t V(Y_t) = exp(-A X) A exp(A X) y0 = A y0
    const auto f = fields({{"e", 2}, {"V1", {"0.3*y1 - y2", "0.5*y1 + 0.2*y2"}}});
    Eigen::Vector2d y0(1.0, 0.5);
    const auto tr = solve(k, f, y0, 1, 512, 5);
    const auto z = z_process(tr, f.v[0]);
    CHECK(z.Z.front() == f.v[0](y0));
    Eigen::Matrix2d A;
    A << 0.3, -1.0, 0.5, 0.2;
    for (const auto& zk : z.Z) CHECK((zk - A * y0).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("directional derivative") {
    const auto k = CovarianceKernel::brownian();
    const int n = 256;
    const Partition grid = Partition::uniform(0, 1, n);
    GaussianSampler s(k, grid.points());
    const auto ex = lift_exponents(k);
    const Eigen::MatrixXd x = s.sample(11, 2);

    Eigen::MatrixXd h(n + 1, 2), h2(n + 1, 2);
    for (int i = 0; i <= n; ++i) {
        const double t = grid[i];
        h(i, 0) = std::sin(3.1 * t);
        h(i, 1) = t * t - 0.5 * t;
        h2(i, 0) = std::cos(t) - 1;
        h2(i, 1) = 0.3 * t;
    }

    const auto c = fields({{"e", 1}, {"V1", {"0.8"}}, {"V2", {"-0.3"}}});
    const auto trc = solve_rde(RoughPathLift(grid, x, ex.N, ex.gamma), c, Eigen::VectorXd::Zero(1));
    CHECK(directional_derivative(trc, c, Eigen::MatrixXd::Zero(n + 1, 2)).norm() == 0.0);
    CHECK(directional_derivative(trc, c, h)(0) == doctest::Approx(0.8 * h(n, 0) - 0.3 * h(n, 1)).epsilon(1e-12));

    const auto f = fields({{"e", 2}, {"V0", {"-y2", "0.5*y1"}}, {"V1", {"1 + 0.2*y2^2", "0.3*y1"}}, {"V2", {"0.1*y1*y2", "1 - 0.1*y1"}}});
    const Eigen::Vector2d y0(0.2, -0.1);
    const auto tr = solve_rde(RoughPathLift(grid, x, ex.N, ex.gamma), f, y0);
    const Eigen::VectorXd d = directional_derivative(tr, f, h);
    const double eps = 1e-5;
    const auto up = solve_rde(RoughPathLift(grid, x + eps * h, ex.N, ex.gamma), f, y0).Y.back();
    const auto dn = solve_rde(RoughPathLift(grid, x - eps * h, ex.N, ex.gamma), f, y0).Y.back();
    const Eigen::VectorXd fd = (up - dn) / (2 * eps);
    INFO("D_h = ", d.transpose(), " fd = ", fd.transpose());
    CHECK((d - fd).cwiseAbs().maxCoeff() < 1e-3);

    const Eigen::VectorXd sum = directional_derivative(tr, f, h + 2.0 * h2);
    const Eigen::VectorXd parts = d + 2.0 * directional_derivative(tr, f, h2);
    CHECK((sum - parts).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ensemble config json") {
    const auto j = nlohmann::json::parse(R"({"kernel":{"family":"fbm","H":0.4},
        "fields":{"e":2,"V1":["1","0"],"V0":["0","y1"]},"y0":[0,0],"t":1,"n_paths":10,"grid_size":64,"base_seed":3})");
    const auto c = EnsembleConfig::from_json(j);
    CHECK(c.n_paths == 10);
    CHECK(c.kernel.hurst() == doctest::Approx(0.4));
    CHECK(EnsembleConfig::from_json(c.to_json()).to_json() == c.to_json());
    auto bad = j;
    bad["y0"] = {0};
    CHECK_THROWS_AS(EnsembleConfig::from_json(bad), ConfigError);
    bad = j;
    bad["t"] = 2.0;
    CHECK_THROWS_AS(EnsembleConfig::from_json(bad), ConfigError);
}

TEST_CASE("eigenvalue tails") {
    EnsembleConfig zero;
    zero.fields = fields({{"e", 2}, {"V1", {"0", "0"}}});
    zero.y0 = Eigen::VectorXd::Zero(2);
    zero.n_paths = 5;
    zero.grid_size = 16;
    auto tz = eigenvalue_tail(zero, {1e-6, 1e-3, 1.0});
    for (double p : tz.prob) CHECK(p == 1.0);
    for (double l : tz.min_eigs) CHECK(l == 0.0);

    EnsembleConfig one;
    one.fields = fields({{"e", 1}, {"V1", {"1"}}});
    one.y0 = Eigen::VectorXd::Zero(1);
    one.n_paths = 20;
    one.grid_size = 32;
    auto t1 = eigenvalue_tail(one, log_grid(1e-3, 0.99, 6));
    for (double p : t1.prob) CHECK(p == 0.0);
    for (double l : t1.min_eigs) CHECK(l == doctest::Approx(1.0).epsilon(1e-12));

    EnsembleConfig hyp;
    hyp.kernel = CovarianceKernel::fbm(0.4);
    hyp.fields = fields({{"e", 2}, {"V1", {"1", "0"}}, {"V0", {"0", "y1"}}});
    hyp.y0 = Eigen::VectorXd::Zero(2);
    hyp.n_paths = 100;
    hyp.grid_size = 64;
    const auto eps = log_grid(1e-4, 1.0, 12);
    const auto th = eigenvalue_tail(hyp, eps);
    int positive = 0;
    for (double l : th.min_eigs) positive += l > 0.0;
    CHECK(positive >= 99);
    CHECK(th.psd_failures == 0);
    for (std::size_t i = 1; i < th.prob.size(); ++i) CHECK(th.prob[i] >= th.prob[i - 1]);
    CHECK(th.prob.back() > th.prob.front());
    // V_0 is linear and V_1 constant, so J and C_t do not depend on the path: the tail is a step
    for (double l : th.min_eigs) CHECK(l == doctest::Approx(th.min_eigs.front()).epsilon(1e-9));
    CHECK(std::isinf(th.exponent));
    CHECK(th.exponent > 0.0);

    // a nonlinear drift makes C_t random
    EnsembleConfig nl = hyp;
    nl.fields = fields({{"e", 2}, {"V1", {"1", "0"}}, {"V0", {"0", "y1 + y1^3"}}});
    const auto tn = eigenvalue_tail(nl, eps);
    std::vector<double> sorted = tn.min_eigs;
    std::sort(sorted.begin(), sorted.end());
    const auto qe = log_grid(sorted[5], sorted[60], 8);
    const auto tq = eigenvalue_tail(nl, qe);
    for (std::size_t i = 1; i < tq.prob.size(); ++i) CHECK(tq.prob[i] >= tq.prob[i - 1]);
    INFO("exponent ", tq.exponent, " from ", tq.fit_points, " points");
    CHECK(tq.fit_points >= 2);
    CHECK(tq.exponent > 0.0);

    std::vector<ChainSample> train, held;
    for (const auto& s : th.chain) (s.path % 2 ? held : train).push_back(s);
    const auto env = fit_chain_envelope(train);
    CHECK(chain_violations(env, train) == 0);
    CHECK(chain_violations(env, held) == 0);
}

TEST_CASE("density estimates") {
    EnsembleConfig g;
    g.fields = fields({{"e", 1}, {"V1", {"1"}}});
    g.y0 = Eigen::VectorXd::Constant(1, 0.5);
    g.n_paths = 100000;
    g.grid_size = 4;
    const auto d = density_estimate(g);
    REQUIRE_FALSE(d.point_mass);
    double err = 0;
    const double c = 1.0 / std::sqrt(2 * std::acos(-1.0));
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        const double u = d.x[i] - 0.5;
        err = std::max(err, std::abs(d.density[1][i] - c * std::exp(-0.5 * u * u)));
    }
    CHECK(err < 0.02);
    CHECK(d.modes == 1);

    EnsembleConfig z = g;
    z.fields = fields({{"e", 1}, {"V1", {"0"}}});
    z.n_paths = 50;
    CHECK(density_estimate(z).point_mass);

    EnsembleConfig b;
    b.kernel = CovarianceKernel::bridge(2.0);
    b.fields = fields({{"e", 1}, {"V0", {"-0.5*y1"}}, {"V1", {"1 + 0.2*y1"}}});
    b.y0 = Eigen::VectorXd::Zero(1);
    b.n_paths = 20000;
    b.grid_size = 32;
    b.max_substep = 0.01;
    const auto db = density_estimate(b);
    INFO("second derivative change ", db.change_narrow, " / ", db.change_wide);
    CHECK(db.modes == 1);
    CHECK(db.change_wide < 1.0);
    CHECK(d.change_wide < 1.0);
}
