#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace grpx {

enum class KernelFamily { brownian, fbm, ou, bridge };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

enum class DerivativeMode { analytic, finite_difference };

struct PartialValue {
    double value = 0.0;
    bool finite_difference = false;
};

// Covariance R(s,t) of a centred Gaussian process on [0, T] started at 0.
//
//   brownian  min(s,t)
//   fbm       (s^2H + t^2H - |t-s|^2H) / 2
//   ou        2 e^{-max} sinh(min)       (variance-one stationary OU pinned at 0)
//   bridge    min * (T' - max)           (unnormalised pinned BM, T' >= T)
class CovarianceKernel {
public:
    static CovarianceKernel brownian(double horizon = 1.0);
    static CovarianceKernel fbm(double hurst, double horizon = 1.0);
    static CovarianceKernel ou(double horizon = 1.0);
    static CovarianceKernel bridge(double pin, double horizon = 1.0);

    KernelFamily family() const { return family_; }
    double horizon() const { return horizon_; }
    double hurst() const { return hurst_; }
    double pin() const { return pin_; }

    double operator()(double s, double t) const;

    // R([s,t] x [u,v]) = R(t,v) - R(t,u) - R(s,v) + R(s,u)
    double rect(double s, double t, double u, double v) const;

    // d/da R(a,b) and d^2/dadb R(a,b), off the diagonal a != b
    PartialValue partial_a(double a, double b, DerivativeMode mode = DerivativeMode::analytic) const;
    PartialValue mixed_partial(double a, double b,
                               DerivativeMode mode = DerivativeMode::analytic) const;

    // Smallest rho for which R has finite 2D rho-variation on [0,T]^2.
    double rho() const;

    // Gram of point values [R(t_i, t_j)].
    Eigen::MatrixXd point_gram(const std::vector<double>& pts) const;

    std::string describe() const;
    nlohmann::json to_json() const;
    static CovarianceKernel from_json(const nlohmann::json& j);

private:
    CovarianceKernel(KernelFamily f, double horizon, double hurst, double pin);
    void check_point(double s) const;
    double eval(double s, double t) const;

    KernelFamily family_;
    double horizon_;
    double hurst_ = 0.5;
    double pin_ = 0.0;
};

// Paths sampled on a fixed grid, X at grid[0] = 0 when grid[0] == 0.
struct PathEnsemble {
    std::vector<double> grid;
    int dim = 1;
    std::vector<Eigen::MatrixXd> paths;  // each grid.size() x dim
};

// Cholesky factor of the point Gram, reused across seeds.
class GaussianSampler {
public:
    GaussianSampler(const CovarianceKernel& k, std::vector<double> grid);

    // Rows follow grid(); the dim columns are independent copies.
    Eigen::MatrixXd sample(std::uint64_t seed, int dim = 1) const;

    const std::vector<double>& grid() const { return grid_; }
    double jitter() const { return jitter_; }

    static constexpr std::size_t max_grid = 4096;

private:
    std::vector<double> grid_;
    std::size_t offset_ = 0;  // 1 if grid starts at 0, that row is pinned
    Eigen::MatrixXd chol_;
    double jitter_ = 0.0;
};

// Path i uses seed + i.
PathEnsemble sample_paths(const CovarianceKernel& k, const std::vector<double>& grid, int n_paths,
                          std::uint64_t seed, int dim = 1);

}  // namespace grpx
