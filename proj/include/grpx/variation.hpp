#pragma once

#include <utility>
#include <vector>

#include "grpx/kernel.hpp"
#include "grpx/partition.hpp"

namespace grpx {

struct VariationSearch {
    int max_depth = 8;    // dyadic grids D = D' of depth 0..max_depth
    int local_moves = 0;  // greedy insert/delete passes started from the best grid
};

// A sup over a finite family, hence a lower bound on V_rho(R; [s,t]^2)^rho.
struct VariationEstimate {
    double value = 0.0;
    Partition best;
    int best_depth = 0;
    std::vector<double> per_depth;  // grid value at each dyadic depth
    bool lower_bound = true;
};

// sum_{i,j} |R(cell_i x cell_j)|^rho over grid partitions of [s,t]^2.
VariationEstimate rho_variation_estimate(const CovarianceKernel& k, double rho,
                                         const VariationSearch& search, double s, double t);
VariationEstimate rho_variation_estimate(const CovarianceKernel& k, double rho,
                                         const VariationSearch& search);

// Sum over one grid pair, exposed for exhaustive checks.
double grid_variation_sum(const CovarianceKernel& k, double rho, const Partition& d1,
                          const Partition& d2);

// Rectangular (not necessarily grid) partitions: max of the grid search and an
// adaptive quadtree sup, so it dominates the grid value on the same family.
VariationEstimate controlled_variation_estimate(const CovarianceKernel& k, double rho,
                                                const VariationSearch& search, double s, double t);

struct HolderControlRow {
    double s = 0, t = 0;
    double v_rho = 0;  // V_rho(R;[s,t]^2)
    double ratio = 0;  // v_rho / (t-s)^{1/rho}
};

struct HolderControlReport {
    std::vector<HolderControlRow> rows;
    double c_hat = 0;       // max ratio
    double log_slope = 0;   // d log(ratio) / d log(t-s); negative means blow-up at small scales
    bool pass = false;
};

// V_rho(R;[s,t]^2) <= C (t-s)^{1/rho}: estimates C and flags ratios that grow as t-s shrinks.
HolderControlReport holder_controlled_check(const CovarianceKernel& k, double rho,
                                            const std::vector<std::pair<double, double>>& intervals,
                                            const VariationSearch& search);

// sigma(t) = T |R|^rho_{[0,t]^2} / |R|^rho_{[0,T]^2}, tabulated and inverted by interpolation.
class TimeChange {
public:
    TimeChange(const CovarianceKernel& k, double rho, const Partition& grid,
               const VariationSearch& search);
    double operator()(double t) const;
    double inverse(double u) const;
    const std::vector<double>& table() const { return sigma_; }

private:
    std::vector<double> t_;
    std::vector<double> sigma_;
};

}  // namespace grpx
