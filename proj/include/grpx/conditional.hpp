#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "grpx/kernel.hpp"
#include "grpx/partition.hpp"

namespace grpx {

struct SchurResult {
    std::vector<int> conditioned_on;
    std::vector<int> remaining;
    Eigen::MatrixXd S;
    Eigen::VectorXd row_sums;
};

// S = Q_RR - Q_RC Q_CC^{-1} Q_CR with C = conditioned_on and R its complement.
SchurResult schur_complement(const Eigen::MatrixXd& q, const std::vector<int>& conditioned_on);

// Points used as conditioning increments outside [s,t]: consecutive pairs of `left`
// (inside [0,s]) and of `right` (inside [t,S]). Either side may be empty.
struct OutsideContext {
    std::vector<double> left;
    std::vector<double> right;
    std::size_t cells() const;
};

// Uniform grid of 2^depth cells on [0,S], cut at s and t.
OutsideContext dyadic_context(double s, double t, double S, int depth);

// Cells of size (t-s)/m next to the interval, doubling every m cells further out.
// Self-similar in t-s, so the discretisation bias does not depend on the scale.
OutsideContext graded_context(double s, double t, double S, int cells_per_octave);

// Var(X_{s,t} | increments of the context), as a Schur complement.
double conditional_variance(const CovarianceKernel& k, double s, double t,
                            const OutsideContext& ctx);

// Cov(X_{s,t}, X_{u,v} | context) for [u,v] inside [s,t].
double conditional_covariance(const CovarianceKernel& k, double s, double t, double u, double v,
                              const OutsideContext& ctx);

struct NonDeterminismSample {
    double s = 0, t = 0, variance = 0;
};

struct NonDeterminismIndex {
    double alpha_hat = 0;
    double c_hat = 0;  // min of Var / (t-s)^alpha_hat
    std::vector<NonDeterminismSample> samples;
};

// Log-log regression of the conditional variance on random intervals with lengths
// log-uniform in [2^-9 T, 2^-3 T]. depth is log2 of the graded context's cells per octave.
NonDeterminismIndex non_determinism_index(const CovarianceKernel& k, int trials, int depth,
                                          std::uint64_t seed = 1);

enum class Condition { non_determinism, nonneg_cond_cov, diag_dominance, non_degeneracy };
std::string to_string(Condition c);

struct ConditionReport {
    Condition condition = Condition::non_determinism;
    bool pass = false;
    nlohmann::json witness;  // null when pass
    std::map<std::string, double> statistics;
    nlohmann::json to_json() const;
};

// increment Gram for the cells of a partition; replaceable to test the checker itself
using GramSource = std::function<Eigen::MatrixXd(const Partition&)>;
GramSource kernel_gram_source(const CovarianceKernel& k);

ConditionReport check_non_determinism(const CovarianceKernel& k, int trials, int depth,
                                      std::uint64_t seed = 1);
ConditionReport check_nonneg_cond_cov(const CovarianceKernel& k, int trials, int depth,
                                      std::uint64_t seed = 1);
ConditionReport check_nonneg_cond_cov(const GramSource& gram, double horizon, int trials,
                                      int depth, std::uint64_t seed = 1);
ConditionReport check_diag_dominance(const CovarianceKernel& k, int trials, int max_n,
                                     std::uint64_t seed = 1);
ConditionReport check_non_degeneracy(const CovarianceKernel& k, int trials, int max_n,
                                     std::uint64_t seed = 1);

// Pointwise signs of the mixed partial (< 0) and partial_a (> 0) on random 0 < a < b <= T.
struct SignCheck {
    int trials = 0;
    int mixed_violations = 0;
    int partial_violations = 0;
    double worst_a = 0, worst_b = 0;
};
SignCheck check_sign_conditions(const CovarianceKernel& k, int trials, std::uint64_t seed = 1);

struct QpResult {
    double value = 0;
    Eigen::VectorXd dual;  // length n, zero on the k free coordinates
    Eigen::VectorXd minimizer;
    bool feasible = false;  // row sums of S all >= 0, i.e. the closed form is the minimum
    Eigen::MatrixXd S;
};

// min x^T Q x subject to x_j >= b for the last n-k coordinates.
QpResult qp_lower_bound(const Eigen::MatrixXd& q, int k, double b);

// Permutation moving cells [l, m) to the end, the rest keeping their order.
std::vector<int> block_rotation(int n, int l, int m);
Eigen::MatrixXd permute_symmetric(const Eigen::MatrixXd& q, const std::vector<int>& perm);

// Nested partitions D_m of [0,S] containing s and t, mesh S 2^-m, with the smallest
// Schur row sum of the [s,t] block recorded at each stage.
struct NestedStage {
    Partition partition;
    double min_row_sum = 0;
};
std::vector<NestedStage> nested_partitions(const CovarianceKernel& k, double s, double t,
                                           double S, int levels);

}  // namespace grpx
