#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "grpx/kernel.hpp"
#include "grpx/partition.hpp"
#include "grpx/tensor.hpp"
#include "grpx/young.hpp"

namespace grpx {

// Step-N signature of the piecewise-linear interpolant of `samples` (rows = grid points).
// Only the cell increments are stored; longer increments are products of them.
class RoughPathLift {
public:
    RoughPathLift(Partition grid, Eigen::MatrixXd samples, int N, double gamma);

    const Partition& grid() const { return grid_; }
    const Eigen::MatrixXd& samples() const { return x_; }
    int dim() const { return static_cast<int>(x_.cols()); }
    int depth() const { return n_; }
    double gamma() const { return gamma_; }
    RoughPathLift with_gamma(double gamma) const;

    const TensorElement& segment(int i) const { return seg_[static_cast<std::size_t>(i)]; }
    TensorElement increment(int i, int j) const;  // x_{t_i,t_j}, i <= j
    TensorElement signature() const { return increment(0, grid_.cells()); }
    // Keeps every stride-th point, composing the cells in between.
    RoughPathLift coarsened(int stride) const;
    // Grid points i..j with their cells.
    RoughPathLift slice(int i, int j) const;
    // True when every cell is exp of its increment (not a coarsened composite).
    bool straight_cells() const { return straight_; }

    nlohmann::json to_json() const;

private:
    Partition grid_;
    Eigen::MatrixXd x_;
    int n_ = 0;
    double gamma_ = 0.0;
    std::vector<TensorElement> seg_;
    bool straight_ = true;
};

RoughPathLift signature(const Partition& grid, const Eigen::MatrixXd& samples, int N,
                        double gamma = 1.0);

struct LiftExponents {
    double p = 0;      // > 2 rho
    int N = 0;         // floor(p)
    double gamma = 0;  // 1/p
};
LiftExponents lift_exponents(const CovarianceKernel& k);

struct GaussianLift {
    RoughPathLift lift;
    LiftExponents exponents;
    double inhomogeneous = 0;         // N_{x,gamma} on the sampled grid
    double inhomogeneous_coarse = 0;  // same path, every other grid point
    double refinement_change = 0;     // relative change between the two
};

// dim independent copies of the process on `grid`, lifted at N = floor(p).
GaussianLift lift_gaussian(const CovarianceKernel& k, const Partition& grid, std::uint64_t seed,
                           int dim = 2);

struct HolderNorms {
    double homogeneous = 0;    // sup max_k |x^k|^{1/k} / |v-u|^gamma
    double inhomogeneous = 0;  // sum_k sup |x^k| / |v-u|^{k gamma}
    std::vector<double> per_level;
};

// Sup over grid pairs. Grids beyond max_points are sampled on a coarsened sub-grid.
HolderNorms holder_norms(const RoughPathLift& lift, int max_points = 1025);

struct RoughnessModulus {
    double d_theta = 0;  // min over directions, levels and windows
    double l_lower = 0;  // d_theta / (2 8^theta), a lower bound on L_theta
    int levels = 0;
    int directions = 0;
    // with d > 1 the inf runs over a finite direction mesh, so d_theta is an upper bound on the true inf
    bool mesh_upper_bound = false;
    int worst_level = 0;
};

RoughnessModulus roughness_modulus(const Partition& grid, const Eigen::MatrixXd& samples,
                                   double theta, int min_directions = 64);

// Components y^c and their coefficient paths y^{c;w} for 1 <= |w| <= N-1, with drift
// y^{c;0}. Coefficient words are prefixed: y^{c;w}_{s,t} = sum_u y^{c;uw}_s x^u_{s,t} + r.
struct ControlledPath {
    Partition grid;
    int driver_dim = 0;
    int N = 0;
    std::vector<Eigen::VectorXd> value;                 // y^c at the grid points
    std::vector<std::map<Word, Eigen::VectorXd>> coeff;  // y^{c;w}
    std::vector<Eigen::VectorXd> drift;                 // y^{c;0}, empty when absent

    int components() const { return static_cast<int>(value.size()); }
    const Eigen::VectorXd& path(int c, const Word& w) const;  // w empty is y^c itself
    void validate() const;

    // Components sum_c U(i,c) y^c, coefficients and drift mapped the same way.
    ControlledPath linear_image(const Eigen::MatrixXd& U) const;

    static ControlledPath constant(const Partition& grid, int driver_dim, int N,
                                   const std::vector<double>& c);
    // y = x itself: y^c = x^c, y^{c;(c)} = 1
    static ControlledPath identity(const RoughPathLift& lift);
};

struct ControlledRemainder {
    double c_y = 0;  // max_w max_{s<t} |r^w_{s,t}| / |t-s|^{(N-|w|) gamma}
    std::map<std::string, double> per_word;
};

ControlledRemainder controlled_remainders(const RoughPathLift& lift, const ControlledPath& y,
                                          int max_points = 257);

// ||y^0||_gamma + sum_w ||y^w||_gamma (empty word included), summed over components
double controlled_norm(const ControlledPath& y, double gamma);

struct ControlledIntegral {
    Eigen::VectorXd I;            // I_{0,t_k} at the grid points
    double remainder_ratio = 0;   // max |r^I| / (N_x ||y|| |t-s|^{(N+1) gamma})
    bool remainder_ok = false;
};

// Compensated Riemann sum sum_j (y^j x^j + sum_w y^{j;w} x^{wj}) cell by cell.
// y must have one component per driver coordinate.
ControlledIntegral controlled_integral(const RoughPathLift& lift, const ControlledPath& y,
                                       int max_points = 257);
// Same sum with cells taken every `stride` grid points; returns I_{0,T}.
double controlled_integral_total(const RoughPathLift& lift, const ControlledPath& y, int stride);

struct NorrisSample {
    double lhs = 0;  // ||y||_inf + ||b||_inf
    double R = 0;    // 1 + L^{-1} + N_x + ||y||_Q + ||b||_gamma
    double z_sup = 0;
    double y_sup = 0, b_sup = 0;
    double l_lower = 0, n_x = 0, y_norm = 0, b_norm = 0;
    bool holds(double r, double q, double M) const;
};

// z_t = sum_i int y^i dx^i + int b ds on the lift grid; throws IncompatibleError unless 2 gamma > theta.
NorrisSample norris_bound_check(const RoughPathLift& lift, const ControlledPath& y,
                                const HolderFunction& b, double theta);

struct NorrisEnvelope {
    double r = 0, q = 0, M = 0;
    double log_spread = 0;  // log(max/min) of lhs / (R^q z^r) on the training set
    int training = 0;
};

// Picks the (r,q) grid point giving the tightest envelope and sets M to
// `safety` times the largest training ratio.
NorrisEnvelope fit_norris_envelope(const std::vector<NorrisSample>& training, double safety = 2.0);
int envelope_violations(const NorrisEnvelope& env, const std::vector<NorrisSample>& samples);

}  // namespace grpx
