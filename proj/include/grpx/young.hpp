#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grpx/kernel.hpp"
#include "grpx/partition.hpp"
#include "grpx/variation.hpp"

namespace grpx {

// Samples of a real function on a partition, read back by linear interpolation.
// For a piecewise-linear function the Holder quotient is maximised at breakpoints,
// so the sample-pair maximum is the exact gamma-Holder seminorm of the interpolant.
class HolderFunction {
public:
    HolderFunction(Partition grid, std::vector<double> values, double gamma);
    static HolderFunction sample(const std::function<double(double)>& f, const Partition& grid,
                                 double gamma);

    double operator()(double t) const;
    const Partition& grid() const { return grid_; }
    const std::vector<double>& values() const { return v_; }
    double gamma() const { return gamma_; }
    double holder_norm() const { return holder_; }
    double sup_norm() const { return sup_; }

    // inf of |f| over [s,t] for the interpolant (0 if f changes sign there)
    double inf_abs(double s, double t) const;
    // the function on [0,S], with S added as a breakpoint
    HolderFunction restricted(double S) const;
    double l2_norm() const;  // exact for the interpolant

    HolderFunction operator+(const HolderFunction& o) const;
    HolderFunction scaled(double a) const;

private:
    Partition grid_;
    std::vector<double> v_;
    double gamma_ = 1.0;
    double holder_ = 0.0;
    double sup_ = 0.0;
};

// A sample path of fBm with Hurst index gamma on a uniform grid of [0,S].
HolderFunction random_holder_function(double gamma, double S, int cells, std::uint64_t seed);

// f(D)^T Q g(D) with left-point values and Q the increment Gram of D.
double riemann_sum(const HolderFunction& f, const HolderFunction& g, const CovarianceKernel& k,
                   const Partition& d);
double riemann_sum(const HolderFunction& f, const CovarianceKernel& k, const Partition& d);

struct YoungIntegral {
    double value = 0;     // 2 I_depth - I_{depth-1}
    double raw = 0;       // I_depth
    double previous = 0;  // I_{depth-1}
    double error = 0;     // |I_depth - I_{depth-1}|
    int depth = 0;
};

// int_{[0,S]^2} f_s g_t dR(s,t) along dyadic grids. Throws IncompatibleError when
// gamma + 1/rho <= 1 (gamma is the smaller of the two exponents).
YoungIntegral young_2d(const HolderFunction& f, const HolderFunction& g, const CovarianceKernel& k,
                       double S, int depth = 10);
YoungIntegral young_2d(const HolderFunction& f, const CovarianceKernel& k, double S,
                       int depth = 10);

struct ComparisonResult {
    double lhs = 0;       // f(D)^T Q f(D) over [0,T]^2, D = dyadic grid cut at s,t
    double rhs = 0;       // (inf_{[s,t]} |f|)^2 Var(X_{s,t} | increments of D outside [s,t])
    double inf_abs = 0;
    double cond_var = 0;
    double young = 0;     // extrapolated integral, for reference
    bool holds = false;
};

// Valid for kernels with non-negative conditional covariance; the caller runs
// that check, it is not repeated here.
ComparisonResult comparison_lower_bound(const HolderFunction& f, const CovarianceKernel& k,
                                        double s, double t, int depth);

enum class InterpolationBranch { l2, inf };
std::string to_string(InterpolationBranch b);

struct InterpolationResult {
    InterpolationBranch branch = InterpolationBranch::l2;  // the one the construction selects
    double lhs = 0, rhs = 0;                                // of the selected branch
    bool holds = false;                                     // at least one branch holds

    double integral = 0;  // Riemann sum on [0,S]^2
    double sup_norm = 0, holder_norm = 0;
    double l2_lhs = 0, l2_rhs = 0;
    bool l2_holds = false;
    bool has_interval = false;
    double s = 0, t = 0;
    double min_length = 0;  // (|f|_inf / 2|f|_gamma)^{1/gamma}
    bool length_ok = false;
    double inf_lhs = 0, inf_rhs = 0;
    bool inf_holds = false;
    std::string note;  // set when S < T
};

// Locates the half-max interval next to the argmax of |f| on [0,S] and evaluates
// both inequalities on the grid dyadic(0,S,depth) cut at its endpoints.
InterpolationResult interpolation_check(const HolderFunction& f, const CovarianceKernel& k,
                                        double S, int depth = 10);

// max(2 E[Z_S^2]^{-1/2} I^{1/2}, A I^{gamma/(2gamma+alpha)} |f|_gamma^{alpha/(2gamma+alpha)})
// with A = 2 c^{-gamma/(2gamma+alpha)}, which is what the inf branch gives for
// Var >= c (t-s)^alpha. The 2/sqrt(c) form agrees at c = 1.
double interpolation_corollary_bound(double integral, double holder_norm, double gamma,
                                     double alpha, double c, double second_moment);
double interpolation_corollary_bound_printed(double integral, double holder_norm, double gamma,
                                             double alpha, double c, double second_moment);

// 2 max(T^{-1/2} |f|_L2, |f|_L2^{2gamma/(2gamma+1)} |f|_gamma^{1/(2gamma+1)}) on [0,T]
double bm_interpolation_bound(const HolderFunction& f, double T);

// (1 + zeta(gamma + 1/rho))^2
double young_constant(double gamma, double rho);

struct YoungBound {
    double lhs = 0;  // |int f f dR|
    double rhs = 0;  // K (|f|_gamma + |f(0)|)^2 V_rho(R;[0,S]^2)
    double K = 0;
    double v_rho = 0;
    bool holds = false;
};

YoungBound young_bound(const HolderFunction& f, const CovarianceKernel& k, double S,
                       const VariationSearch& search, int depth = 10);

struct InterpolationRow {
    int trial = 0;
    InterpolationBranch branch = InterpolationBranch::l2;
    double lhs = 0, rhs = 0, margin = 0;
    bool holds = false;
};

// Random Holder f (fBm paths with Hurst gamma, seed + i for trial i) against k on [0,S].
std::vector<InterpolationRow> interpolation_trials(const CovarianceKernel& k, int trials,
                                                   double gamma, double S, int depth,
                                                   std::uint64_t seed);

}  // namespace grpx
