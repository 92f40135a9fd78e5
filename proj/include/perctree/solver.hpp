#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "perctree/linalg.hpp"
#include "perctree/partition.hpp"
#include "perctree/structure.hpp"

namespace perctree {

struct GuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double fp_tol = 1e-12;   // sup-norm stop for the partition fixed point
    long max_iter = 1000000;
    int grid = 256;          // scan resolution over (0,1)
    double pc_tol = 1e-10;   // bisection tolerance for p_c
};

// Per model j, a probability vector over enumerate_partitions(|B_j|).
struct PartitionDistribution {
    std::vector<std::vector<double>> x;
    double residual = 0.0;
    long iterations = 0;
    bool converged = false;
};

struct ColorKey {
    int model;
    Color color;
    bool operator==(const ColorKey&) const = default;
};

// Reachable nonwhite types of non-root models, in closure discovery order.
struct ColorSpace {
    std::vector<ColorKey> types;
    int size() const { return static_cast<int>(types.size()); }
    int index_of(int model, const Color& c) const;
};

using MomentMatrix = Matrix;

// One child slot's transition law out of a fixed parent type: probabilities
// of each nonwhite child color, plus the leftover white mass.
struct SlotLaw {
    int slot = 0;
    int child_model = 0;
    std::vector<std::pair<Color, double>> colors;
    double white = 0.0;
    double total() const;
};

struct ScanRow {
    double p;
    double rho;
    double det_residual;
};

struct PcResult {
    double pc = 1.0;
    double bracket_lo = 0.0;
    double bracket_hi = 1.0;
    bool no_subcritical_root = false;
    bool empty_color_space = false;
    double det_at_pc = 0.0;
    std::vector<ScanRow> scan;
};

struct GrowthProfile {
    std::vector<std::vector<double>> per_generation;  // [n][type]
    std::vector<double> totals;                       // [n]
};

// The computational core: descendant-partition fixed point, reachable color
// space, first-moment matrix of the reduced branching process, and the p_c
// search via the first p with spectral radius 1.
class Engine {
  public:
    explicit Engine(const TreeStructure& s, SolverOptions opt = {});
    ~Engine();
    Engine(Engine&&) noexcept;
    Engine& operator=(Engine&&) noexcept;

    const TreeStructure& structure() const;
    const SolverOptions& options() const;

    // Supported partitions per model (indices into enumerate_partitions of
    // the model's border size); independent of p in (0,1).
    const std::vector<std::vector<int>>& partition_support() const;

    // Fixed point of the depth-truncation recursion, started from the
    // all-diagonal distribution. per_iteration, when set, sees every iterate
    // including the initial one.
    PartitionDistribution partition_distribution(
        double p, const std::function<void(const PartitionDistribution&)>& per_iteration = {}) const;

    ColorSpace reachable_colors() const;

    // Expected offspring counts m_ab over the color space; dist must be the
    // converged distribution at the same p.
    MomentMatrix moment_matrix(double p, const PartitionDistribution& dist,
                               const ColorSpace& colors) const;

    // Transition laws for one parent type (model, nonwhite color): one law
    // per child slot, each summing to 1 including white.
    std::vector<SlotLaw> slot_laws(double p, const PartitionDistribution& dist, int model,
                                   const Color& parent) const;
    // Same out of the root piece; defines the initial measure.
    std::vector<SlotLaw> root_laws(double p, const PartitionDistribution& dist) const;

    // Expected first-generation nonwhite counts from the root, over colors.
    std::vector<double> initial_measure(double p, const PartitionDistribution& dist,
                                        const ColorSpace& colors) const;

    PcResult critical_probability() const;

    GrowthProfile growth_profile(double p, int generations) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace perctree
