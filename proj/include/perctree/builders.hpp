#pragma once

#include <string>
#include <vector>

#include "perctree/structure.hpp"

namespace perctree {

// Finite factor graph with a base vertex. Vertex-transitivity is assumed
// where the constructions need it, not checked.
struct FiniteGraph {
    std::string name;
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;
    int base = 0;
};

// "k4", "c6", "p3": complete graphs, cycles (n >= 3), paths. Base vertex 0.
FiniteGraph named_graph(const std::string& name);

// Free product of >= 2 factor graphs: one model per factor with a one-vertex
// border; the root carries a copy of every other factor at each of its
// vertices, non-root pieces at every vertex except their border vertex.
TreeStructure free_product(const std::vector<FiniteGraph>& factors);

// Factor graph together with a partition of its vertices into equal-size
// cosets of the amalgamated subgroup; coset vertex lists are positionally
// aligned across the two factors.
struct FactorWithCosets {
    FiniteGraph graph;
    std::vector<std::vector<int>> cosets;
};

// Amalgamated product: pieces alternate between the two factors; coset 0 is
// the border of each model, remaining cosets spawn children of the other
// factor; the root is factor 1 with children at every coset.
TreeStructure amalgam(const FactorWithCosets& factor1, const FactorWithCosets& factor2);

// Cyclic shortcut: Z_{n1} *_{Z_m} Z_{n2} with cycle graphs and residue-class
// cosets; requires m | n1 and m | n2.
TreeStructure cyclic_amalgam(int n1, int n2, int m);

// The amalgam Z4 *_{Z2} Z6 (squares and hexagons).
TreeStructure sl2z();

// HNN extension of the base graph over subgroups H, K (given as coset
// partitions) identified by alpha: position i of every H-coset corresponds to
// position alpha[i] of every K-coset. Pieces are the base graph plus the
// stable-letter edges it owns, with fresh endpoints for the children.
TreeStructure hnn(const FiniteGraph& base, const std::vector<std::vector<int>>& h_cosets,
                  const std::vector<std::vector<int>>& k_cosets, const std::vector<int>& alpha);

// Cayley graph of the free group F_2 with respect to the ball generating set
// S_k (all reduced words of length <= k), k in {1,2,3}. The root piece is the
// ball of radius k-1; every other piece has three children.
TreeStructure free_group_ball(int rank, int k);

// The 3-regular tree plus edges to the grandparent toward a fixed end,
// decomposed into 4-vertex pieces with 2-vertex borders. Pieces along the ray
// to the distinguished end carry their border on a different vertex pair, so
// there are two model classes.
TreeStructure grandparent();

}  // namespace perctree
