#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "grpx/kernel.hpp"
#include "grpx/rde.hpp"

namespace grpx {

struct MalliavinMatrix {
    Eigen::MatrixXd C;
    double t = 0;
    Eigen::VectorXd spectrum;          // raw eigenvalues, ascending
    Eigen::VectorXd spectrum_clipped;  // negatives set to 0
    Eigen::VectorXd min_direction;     // unit eigenvector of the smallest eigenvalue
    bool psd_ok = true;                // raw min eigenvalue >= -1e-9 trace

    double min_eigenvalue() const { return spectrum_clipped(0); }
};

// C_t = sum_i F_i^T Q F_i where row p of F_i is J_t K_{s_p} V_i(Y_{s_p}) and Q is the increment
// Gram of the trajectory grid on [0,t]. t_index < 0 means the last grid point.
MalliavinMatrix malliavin_matrix(const FlowTrajectory& traj, const VectorFields& f, const CovarianceKernel& k,
                                 int t_index = -1);

// Rows p: J_t K_{s_p} V_i(Y_{s_p}) on the grid up to t.
Eigen::MatrixXd malliavin_integrand(const FlowTrajectory& traj, const VectorFields& f, int i, int t_index = -1);

struct ZProcess {
    Partition grid;
    std::vector<Eigen::VectorXd> Z;  // K_t W(Y_t)
};
ZProcess z_process(const FlowTrajectory& traj, const PolyVectorField& W);

// sum_i int_0^t J_t K_s V_i(Y_s) dh^i_s by the trapezoid rule on the trajectory grid.
// h has one row per grid point and one column per driving field.
Eigen::VectorXd directional_derivative(const FlowTrajectory& traj, const VectorFields& f, const Eigen::MatrixXd& h,
                                       int t_index = -1);

// {kernel, fields, y0, t, n_paths, grid_size, base_seed}; path i uses base_seed + i on the uniform
// grid of [0,t] with grid_size cells.
struct EnsembleConfig {
    CovarianceKernel kernel = CovarianceKernel::brownian();
    VectorFields fields;
    Eigen::VectorXd y0;
    double t = 1.0;
    int n_paths = 100;
    int grid_size = 256;
    std::uint64_t base_seed = 1;
    double max_substep = SolverOptions{}.max_substep;  // solver piece size on straight cells

    void validate() const;
    static EnsembleConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct ChainSample {
    int path = 0;
    std::string field;    // W in V_1, by label
    double z_sup = 0;     // sup_{s <= t} |<v, Z^W_s>|
    double quadratic = 0; // v^T C_t v for the minimising unit v
};

struct PowerEnvelope {
    double mu = 0, M = 0, log_spread = 0;
};
// z_sup <= M quadratic^mu. mu runs over 0.02..1 in steps of 0.02; M is safety x training max.
PowerEnvelope fit_chain_envelope(const std::vector<ChainSample>& training, double safety = 2.0);
int chain_violations(const PowerEnvelope& env, const std::vector<ChainSample>& samples);

struct EigenTail {
    std::vector<double> eps;
    std::vector<double> prob;        // empirical P(lambda_min < eps)
    std::vector<double> min_eigs;    // per path
    // slope of log P against log eps over the points with 0 < P < 1; +inf when P steps from 0
    // to a positive value with no such points, NaN when nothing was observed
    double exponent = 0;
    int fit_points = 0;
    int psd_failures = 0;
    std::vector<ChainSample> chain;
};

// Log-spaced eps grid from lo to hi.
std::vector<double> log_grid(double lo, double hi, int n);
EigenTail eigenvalue_tail(const EnsembleConfig& cfg, const std::vector<double>& eps);

struct DensityOptions {
    int component = 0;
    int points = 1001;
    double bandwidth_scale = 1.0;  // times Silverman
};

struct DensityEstimate {
    bool point_mass = false;
    double mean = 0, sd = 0;
    std::vector<double> x;
    std::vector<double> bandwidth;             // scale x {0.5, 1, 2} x Silverman
    std::vector<std::vector<double>> density;  // one per bandwidth, [1] is the baseline
    // |f''_h - f''_base|_inf / |f''_base|_inf for h = 0.5 and 2 times the baseline, and their max.
    // At half the Silverman width the finite-difference f'' carries O(1) sampling noise at any n.
    double change_narrow = 0, change_wide = 0;
    double second_derivative_change = 0;
    int modes = 0;  // local maxima of the baseline above 1% of its peak
};

// Gaussian KDE of Y_t^component over the ensemble.
DensityEstimate density_estimate(const EnsembleConfig& cfg, const DensityOptions& opts = {});
DensityEstimate kde(const std::vector<double>& samples, const DensityOptions& opts = {});

// Y_t for every path of the ensemble (no Jacobian).
std::vector<Eigen::VectorXd> ensemble_endpoints(const EnsembleConfig& cfg);

}  // namespace grpx
