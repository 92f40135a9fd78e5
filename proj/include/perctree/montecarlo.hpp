#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "perctree/structure.hpp"

namespace perctree {

// Finite depth-n instantiation of a structure. Piece instances are spawned
// breadth-first, so the vertex/edge indices of unfold(s, d) are a prefix of
// unfold(s, d+1)'s; Monte Carlo estimates at different depths then share the
// per-edge randomness.
struct UnfoldedGraph {
    struct VertexOrigin {
        int instance;
        int local;
    };
    struct Instance {
        int model;  // -1 for the root
        int generation;
        int parent;
    };
    std::vector<VertexOrigin> vertices;
    std::vector<std::pair<int, int>> edges;
    std::vector<Instance> instances;
    int origin = 0;
    std::vector<int> frontier;  // border + unexpanded attach vertices of leaf pieces
};

UnfoldedGraph unfold(const TreeStructure& s, int depth, long max_vertices = 10000000);

// Counter-based per-edge randomness: the open/closed state of edge e in
// trial t is a pure function of (seed, t, e), so trials parallelize and the
// estimate is identical for every thread count, and states at different p
// are coupled through a shared uniform.
double edge_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t edge);

struct ReachEstimate {
    double p_hat = 0.0;
    double ci_lo = 0.0;  // Wilson 99%
    double ci_hi = 0.0;
    long reached = 0;
    long trials = 0;
};

// Fraction of trials whose open cluster of the origin meets the frontier.
ReachEstimate estimate_reach(const UnfoldedGraph& g, double p, long trials, std::uint64_t seed,
                             int threads = 1);

struct Bracket {
    double p_lo = 0.0;
    double p_hi = 1.0;
    bool inconclusive = false;
    std::string warning;
    double theta_ref = 0.02;
    double theta_hi = 0.5;
    double grid_step = 0.02;
};

// Advisory bracket for p_c from a grid of reach estimates: below p_lo the
// reach is statistically indistinguishable from deep-subcritical decay
// (Wilson upper bound under 0.5*theta_ref); above p_hi it exceeds the
// finite-depth critical survival envelope (Wilson lower bound over theta_hi).
// The interval is widened by one grid step on each side.
Bracket bracket_pc(const TreeStructure& s, int depth, long trials, std::uint64_t seed,
                   double theta_ref = 0.02, double grid_step = 0.02, int threads = 1);

struct WilsonInterval {
    double lo;
    double hi;
};
WilsonInterval wilson99(long successes, long trials);

}  // namespace perctree
