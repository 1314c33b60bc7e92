#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "grpx/kernel.hpp"
#include "grpx/polynomial.hpp"
#include "grpx/rough_path.hpp"

namespace grpx {

// Index 0 is V_0 in bracket words, i >= 1 is V_i.
struct BracketNode {
    std::vector<int> word;  // (i_1, ..., i_n) for [V_{i_1}, [..., [V_{i_{n-1}}, V_{i_n}]]]
    PolyVectorField field;
    std::string label() const;
};

// levels[0] = {V_1..V_d}, levels[n] = {[V_i, W] : i = 0..d, W in levels[n-1]}, zero fields dropped.
struct BracketTree {
    std::vector<std::vector<BracketNode>> levels;
};
BracketTree bracket_tree(const VectorFields& f, int max_level);

struct HormanderResult {
    int level_attained = 0;  // first level with full rank, 0 if none
    int rank = 0;            // rank of the span of all levels up to max_level
    bool pass = false;
    std::vector<int> rank_per_level;  // cumulative
};

// Rank decisions drop singular values below 1e-8 sigma_max.
int span_rank(const std::vector<Eigen::VectorXd>& vectors, int e);
HormanderResult hormander_rank(const VectorFields& f, const Eigen::VectorXd& y0, int max_level = 4);

// (Y, J, K) system on R^{e + 2e^2}: F_i = (V_i, DV_i J, -K DV_i). J and K are stored
// column-major after Y.
VectorFields augmented_fields(const VectorFields& f);

// Order-N Euler step y + sum_w (V_{w_1}.grad)...(V_{w_{n-1}}.grad)V_{w_n}(y) x^w + V_0(y) dt.
// Words whose coefficient field vanishes identically are dropped.
class EulerScheme {
public:
    EulerScheme(const VectorFields& f, int N);
    int depth() const { return n_; }
    int dim() const { return e_; }
    const std::vector<Word>& words() const { return words_; }
    const PolyVectorField& coefficient(std::size_t k) const { return sym_[k]; }
    Eigen::VectorXd coefficient_at(std::size_t k, const Eigen::VectorXd& y) const { return fields_[k](y); }
    void step(Eigen::VectorXd& y, const TensorElement& x, double dt) const;
    // Constant fields: one step is exact whatever the increment.
    bool exact() const { return exact_; }

private:
    int e_ = 0, n_ = 0;
    std::vector<Word> words_;
    std::vector<PolyVectorField> sym_;
    std::vector<CompiledField> fields_;
    CompiledField drift_;
    bool has_drift_ = false;
    bool exact_ = true;
};

struct SolverOptions {
    bool with_jacobian = true;
    double blowup_bound = 1e6;  // abort once |Y| exceeds this
    // Straight cells are cut into pieces with sup-norm increment at most this.
    double max_substep = 0.001;
    int max_substeps = 512;
    // Euler order used inside straight cells, where the signature is known at every level.
    int straight_order = 3;
};

struct FlowTrajectory {
    Partition grid;
    int N = 0;
    double gamma = 0;
    std::vector<Eigen::VectorXd> Y;
    std::vector<Eigen::MatrixXd> J, K;  // empty without the Jacobian
    double max_jk_deviation = 0;        // max_t |J_t K_t - I|_max
    long substeps = 0;

    bool has_jacobian() const { return !J.empty(); }
    int dim() const { return static_cast<int>(Y.front().size()); }
};

FlowTrajectory solve_rde(const RoughPathLift& lift, const VectorFields& f, const Eigen::VectorXd& y0,
                         const SolverOptions& opts = {});

// Y as a controlled path: y^{c;w} = ((V_{w_1}.grad)...V_{w_n})^c(Y) for 1 <= |w| <= N-1 and
// drift V_0(Y).
ControlledPath controlled_view(const FlowTrajectory& traj, const RoughPathLift& lift, const VectorFields& f);

struct NorrisTrialConfig {
    CovarianceKernel kernel = CovarianceKernel::fbm(0.35);
    VectorFields fields;  // empty e means the default 2x2 system below
    int cells = 256;
    double theta = 0.4;
    std::uint64_t seed = 1;
};

// Built-in e = d = 2 system used when no fields are given.
VectorFields default_norris_fields();

// Trial k draws a driver, solves, and integrates kappa U y against it with drift
// kappa_0 <u_0, V_0(Y)>; kappa, kappa_0 and U are drawn from the trial seed.
std::vector<NorrisSample> norris_trials(const NorrisTrialConfig& cfg, int trials, std::uint64_t first_trial = 0);

}  // namespace grpx
