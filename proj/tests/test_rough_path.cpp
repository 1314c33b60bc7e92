#include <doctest.h>

#include <cmath>
#include <random>

#include "grpx/errors.hpp"
#include "grpx/rough_path.hpp"

using namespace grpx;

namespace {

Eigen::MatrixXd random_walk(std::mt19937_64& rng, int n, int d) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n + 1, d);
    for (int i = 1; i <= n; ++i)
        for (int c = 0; c < d; ++c) x(i, c) = x(i - 1, c) + nd(rng) / std::sqrt(n);
    return x;
}

// y^c = g_c(x) with g = (sin x1 + x2^2/2, cos x2 + x1 x2), a controlled path of any order
ControlledPath smooth_of(const RoughPathLift& lift) {
    const auto& x = lift.samples();
    const auto n = x.rows();
    ControlledPath y = ControlledPath::constant(lift.grid(), 2, lift.depth(), {0.0, 0.0});
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = x(i, 0), b = x(i, 1);
        y.value[0](i) = std::sin(a) + 0.5 * b * b;
        y.value[1](i) = std::cos(b) + a * b;
        if (lift.depth() >= 2) {
            y.coeff[0][Word{0}](i) = std::cos(a);
            y.coeff[0][Word{1}](i) = b;
            y.coeff[1][Word{0}](i) = b;
            y.coeff[1][Word{1}](i) = -std::sin(b) + a;
        }
        if (lift.depth() >= 3) {
            y.coeff[0][Word{0, 0}](i) = -std::sin(a);
            y.coeff[0][Word{1, 1}](i) = 1.0;
            y.coeff[1][Word{0, 1}](i) = 1.0;
            y.coeff[1][Word{1, 0}](i) = 1.0;
            y.coeff[1][Word{1, 1}](i) = -std::cos(b);
        }
    }
    return y;
}

}  // namespace

TEST_CASE("words") {
    CHECK(word_string({0, 1, 0}) == "121");
    CHECK(parse_word("21") == Word{1, 0});
    CHECK(words_of_length(2, 3).size() == 8);
    CHECK(words_up_to(3, 2).size() == 12);
    CHECK(word_index({1, 0}, 2) == 2);
}

TEST_CASE("linear path levels are v^n t^n / n!") {
    Eigen::VectorXd v(2);
    v << 0.7, -1.3;
    const int n = 10;
    Eigen::MatrixXd x(n + 1, 2);
    for (int i = 0; i <= n; ++i) x.row(i) = (v * (2.0 * i / n)).transpose();
    auto lift = signature(Partition::uniform(0.0, 2.0, n), x, 3);
    auto s = lift.signature();
    const double t = 2.0;
    for (const Word& w : words_up_to(2, 3)) {
        double expect = 1.0;
        for (int l : w) expect *= v(l) * t;
        const double fact = w.size() == 1 ? 1 : (w.size() == 2 ? 2 : 6);
        CHECK(s[w] == doctest::Approx(expect / fact).epsilon(1e-12));
    }
}

TEST_CASE("Chen identity, group-likeness and inverse") {
    std::mt19937_64 rng(2);
    auto x = random_walk(rng, 64, 3);
    auto lift = signature(Partition::uniform(0, 1, 64), x, 3);
    std::uniform_int_distribution<int> ui(0, 64);
    for (int trial = 0; trial < 50; ++trial) {
        int a = ui(rng), b = ui(rng), c = ui(rng);
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        const auto lhs = lift.increment(a, b) * lift.increment(b, c);
        CHECK(lhs.max_abs_diff(lift.increment(a, c)) < 1e-12);
        const auto e = lift.increment(a, c);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(e[Word{i, j}] + e[Word{j, i}] == doctest::Approx(e[Word{i}] * e[Word{j}]).epsilon(1e-12).scale(1.0));
        CHECK((e * e.inverse()).max_abs_diff(TensorElement::identity(3, 3)) < 1e-12);
    }
    // the coarsened lift carries the same group increments
    auto coarse = lift.coarsened(4);
    CHECK(coarse.signature().max_abs_diff(lift.signature()) < 1e-12);
    auto j = lift.signature().to_json();
    CHECK(j.contains("123"));
    CHECK(TensorElement::from_json(j, 3, 3).max_abs_diff(lift.signature()) == 0.0);
}

TEST_CASE("area of (t, t^2) is 1/6") {
    const int n = 1 << 12;
    Eigen::MatrixXd x(n + 1, 2);
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        x(i, 0) = t;
        x(i, 1) = t * t;
    }
    auto s = signature(Partition::uniform(0, 1, n), x, 2).signature();
    // int t d(t^2) = 2/3, int t^2 dt = 1/3
    CHECK(std::abs(0.5 * (s[Word{0, 1}] - s[Word{1, 0}]) - 1.0 / 6.0) < 1e-6);
}

TEST_CASE("Gaussian lifts") {
    auto bm = CovarianceKernel::brownian();
    auto e = lift_exponents(bm);
    CHECK(e.N == 2);
    CHECK(e.p > 2.0);
    CHECK(lift_exponents(CovarianceKernel::fbm(0.3)).N == 3);

    auto g = lift_gaussian(bm, Partition::uniform(0, 1, 128), 5);
    const auto s = g.lift.increment(10, 90);
    CHECK(s[Word{0, 1}] + s[Word{1, 0}] == doctest::Approx(s[Word{0}] * s[Word{1}]).epsilon(1e-12).scale(1.0));
    CHECK(s[Word{0, 0}] == doctest::Approx(0.5 * s[Word{0}] * s[Word{0}]).epsilon(1e-12).scale(1.0));

    // Levy area of the piecewise-linear BM interpolant on n cells: variance (1 - 1/n)/4
    const int n = 64, trials = 4000;
    double m2 = 0.0;
    GaussianSampler sampler(bm, Partition::uniform(0, 1, n).points());
    for (int i = 0; i < trials; ++i) {
        auto l = signature(Partition::uniform(0, 1, n), sampler.sample(100 + static_cast<std::uint64_t>(i), 2), 2);
        const auto sg = l.signature();
        const double area = 0.5 * (sg[Word{0, 1}] - sg[Word{1, 0}]);
        m2 += area * area;
    }
    m2 /= trials;
    const double expect = (1.0 - 1.0 / n) / 4.0;
    // the fourth moment of the area is below 1, so this is a generous 5 sigma band
    CHECK(std::abs(m2 - expect) < 5.0 / std::sqrt(static_cast<double>(trials)) * 0.25);

    auto f = lift_gaussian(CovarianceKernel::fbm(0.3), Partition::uniform(0, 1, 512), 8);
    CHECK(f.lift.depth() == 3);
    CHECK(std::isfinite(f.inhomogeneous));
    CHECK(f.refinement_change < 0.10);
}

TEST_CASE("Holder norms") {
    auto zero = signature(Partition::uniform(0, 1, 16), Eigen::MatrixXd::Zero(17, 2), 2, 0.4);
    auto hz = holder_norms(zero);
    CHECK(hz.homogeneous == 0.0);
    CHECK(hz.inhomogeneous == 0.0);

    Eigen::MatrixXd line(33, 1);
    for (int i = 0; i <= 32; ++i) line(i, 0) = i / 32.0;
    auto hl = holder_norms(signature(Partition::uniform(0, 1, 32), line, 2, 1.0));
    CHECK(hl.homogeneous == doctest::Approx(1.0).epsilon(1e-12));

    GaussianSampler sampler(CovarianceKernel::brownian(), Partition::uniform(0, 1, 512).points());
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto fine = signature(Partition::uniform(0, 1, 512), sampler.sample(seed, 2), 2, 0.4);
        const double a = holder_norms(fine.coarsened(2)).inhomogeneous;
        const double b = holder_norms(fine).inhomogeneous;
        CHECK(std::isfinite(b));
        CHECK(b >= a);
        CHECK(b < 1.15 * a);
    }
}

TEST_CASE("roughness modulus") {
    // x_t = 2t: ratio on a window of size w is 2 w^{1-theta}
    double prev = 1e300;
    for (int m = 4; m <= 10; ++m) {
        const int n = 1 << m;
        Eigen::MatrixXd x(n + 1, 1);
        for (int i = 0; i <= n; ++i) x(i, 0) = 2.0 * i / n;
        auto r = roughness_modulus(Partition::uniform(0, 1, n), x, 0.5);
        CHECK(r.d_theta < prev);
        CHECK(r.d_theta == doctest::Approx(2.0 * std::pow(1.0 / n, 0.5)));
        prev = r.d_theta;
        auto r1 = roughness_modulus(Partition::uniform(0, 1, n), x, 1.0);
        CHECK(r1.d_theta == doctest::Approx(2.0));
        CHECK(r1.l_lower == doctest::Approx(2.0 / 16.0));
        CHECK_FALSE(r1.mesh_upper_bound);
    }
    // a line in the plane has a flat direction
    Eigen::MatrixXd x2(65, 2);
    for (int i = 0; i <= 64; ++i) x2.row(i) << i / 64.0, i / 64.0;
    auto flat = roughness_modulus(Partition::uniform(0, 1, 64), x2, 1.0, 64);
    CHECK(flat.directions == 64);
    CHECK(flat.d_theta < 1e-12);
    CHECK(flat.mesh_upper_bound);

    auto k = CovarianceKernel::fbm(0.35);
    const auto grid = Partition::uniform(0, 1, 1024);
    GaussianSampler sampler(k, grid.points());
    double lo = 1e300;
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
        lo = std::min(lo, roughness_modulus(grid, sampler.sample(seed, 2), 0.4).d_theta);
    CHECK(lo > 0.0);

    Eigen::MatrixXd x3 = sampler.sample(1, 3);
    auto r3 = roughness_modulus(grid, x3, 0.4, 128);
    CHECK(r3.directions == 128);
    CHECK(r3.d_theta > 0.0);
    CHECK_THROWS_AS(roughness_modulus(grid, Eigen::MatrixXd::Zero(1025, 4), 0.4), DomainError);
}

TEST_CASE("controlled integral") {
    std::mt19937_64 rng(4);
    auto x = random_walk(rng, 256, 2);
    auto lift = signature(Partition::uniform(0, 1, 256), x, 2, 0.45);

    auto c = ControlledPath::constant(lift.grid(), 2, 2, {1.5, -0.5});
    auto ic = controlled_integral(lift, c);
    for (int i = 0; i <= 256; i += 32)
        CHECK(ic.I(i) == doctest::Approx(1.5 * x(i, 0) - 0.5 * x(i, 1)).epsilon(1e-12).scale(1.0));

    // int x dx = |x|^2 / 2 pathwise for the geometric lift
    auto id = controlled_integral(lift, ControlledPath::identity(lift));
    CHECK(id.I(256) == doctest::Approx(0.5 * x.row(256).squaredNorm()).epsilon(1e-12));
    CHECK(controlled_remainders(lift, ControlledPath::identity(lift)).c_y < 1e-12);

    // one-dimensional driver, y = x^1
    auto bm = CovarianceKernel::brownian();
    GaussianSampler s1(bm, Partition::uniform(0, 1, 1024).points());
    auto l1 = signature(Partition::uniform(0, 1, 1024), s1.sample(3, 1), 2, 0.45);
    auto i1 = controlled_integral(l1, ControlledPath::identity(l1));
    CHECK(i1.I(1024) == doctest::Approx(0.5 * std::pow(l1.samples()(1024, 0), 2)).epsilon(1e-12));

    CHECK_THROWS_AS(controlled_integral(l1, c), DomainError);
}

TEST_CASE("controlled integral: remainders and refinement slope") {
    auto bm = CovarianceKernel::brownian();
    const int n = 2048;
    const auto grid = Partition::uniform(0, 1, n);
    GaussianSampler sampler(bm, grid.points());
    const std::vector<int> strides{4, 8, 16, 32, 64};
    std::vector<double> err2(strides.size(), 0.0);
    double gamma = 0.45;
    int ok = 0;
    const int seeds = 20;
    for (int sd = 0; sd < seeds; ++sd) {
        auto lift = signature(grid, sampler.sample(50 + static_cast<std::uint64_t>(sd), 2), 2, gamma);
        auto y = smooth_of(lift);
        const double fine = controlled_integral_total(lift, y, 1);
        for (std::size_t k = 0; k < strides.size(); ++k) {
            const double e = controlled_integral_total(lift, y, strides[k]) - fine;
            err2[k] += e * e;
        }
        if (sd < 4) {
            auto coarse = lift.coarsened(8);
            auto yc = smooth_of(coarse);
            ok += controlled_integral(coarse, yc).remainder_ok;
            CHECK(controlled_remainders(coarse, yc).c_y < 1e3);
        }
    }
    // least squares slope of log rms error against log mesh
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(strides.size());
    for (std::size_t k = 0; k < strides.size(); ++k) {
        const double lx = std::log(strides[k] / static_cast<double>(n));
        const double ly = 0.5 * std::log(err2[k] / seeds);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double theory = 3 * gamma - 1;
    INFO("slope ", slope, " theory ", theory);
    CHECK(slope >= 0.7 * theory);
    CHECK(ok == 4);
}

TEST_CASE("Norris quantities") {
    auto k = CovarianceKernel::fbm(0.35);
    const auto grid = Partition::uniform(0, 1, 256);
    GaussianSampler sampler(k, grid.points());
    auto lift = signature(grid, sampler.sample(1, 2), 2, 0.34);

    auto zero_y = ControlledPath::constant(grid, 2, 2, {0.0, 0.0});
    auto zero_b = HolderFunction::sample([](double) { return 0.0; }, grid, 0.5);
    auto s0 = norris_bound_check(lift, zero_y, zero_b, 0.4);
    CHECK(s0.z_sup == 0.0);
    CHECK(s0.lhs == 0.0);
    CHECK(s0.holds(0.5, 1.0, 1.0));

    auto one_b = HolderFunction::sample([](double) { return 1.0; }, grid, 0.5);
    auto s1 = norris_bound_check(lift, zero_y, one_b, 0.4);
    CHECK(s1.z_sup == doctest::Approx(1.0));
    CHECK(s1.b_sup == doctest::Approx(s1.z_sup / 1.0));
    CHECK(s1.R > 1.0);
    CHECK(std::isfinite(s1.R));

    CHECK_THROWS_AS(norris_bound_check(lift, zero_y, one_b, 0.7), IncompatibleError);
}

TEST_CASE("envelope fitting recovers a planted power law") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto make = [&](int n) {
        std::vector<NorrisSample> out;
        for (int i = 0; i < n; ++i) {
            NorrisSample s;
            s.z_sup = std::exp(-8.0 * u(rng));
            s.R = 1.0 + 10.0 * u(rng);
            s.lhs = 3.0 * s.R * std::sqrt(s.z_sup) * (1.0 + 0.2 * u(rng));
            out.push_back(s);
        }
        return out;
    };
    auto train = make(200), held = make(200);
    auto env = fit_norris_envelope(train);
    CHECK(env.r == doctest::Approx(0.5).epsilon(0.1));
    CHECK(env.q == doctest::Approx(1.0).epsilon(0.3));
    CHECK(envelope_violations(env, train) == 0);
    CHECK(envelope_violations(env, held) == 0);
}
