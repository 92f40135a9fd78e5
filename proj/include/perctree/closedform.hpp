#pragma once

#include <cstdint>
#include <vector>

#include "perctree/builders.hpp"

namespace perctree {

// Integer-coefficient polynomial in p, low degree first.
struct Poly {
    std::vector<long long> c;
    double eval(double p) const;
    int degree() const { return static_cast<int>(c.size()) - 1; }
};
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, long long k);

// Expected cluster size of the base vertex: chi(p) = sum over edge subsets of
// p^|open| (1-p)^|closed| times the base cluster size, expanded exactly in
// the monomial basis. Guard: <= 16 edges.
Poly chi_polynomial(const FiniteGraph& g);

// Smallest root in (0,1] of sum_j prod_{i != j} chi_i - (n-1) prod chi_i,
// located by sign scan plus bisection to 1e-12; returns 1 when there is no
// root below 1.
double free_product_pc(const std::vector<Poly>& chis);

// The amalgam of the two-ended ladder group with Z4 over Z2; the ladder side
// has infinite pieces, handled by a matrix geometric series.
struct Z2zReport {
    double pc = 0.0;
    double a = 0.0, b = 0.0, c = 0.0;   // connection probabilities at pc
    double abc_residual = 0.0;          // max defect of the three equations
    double det_residual = 0.0;          // det(M - I) at pc
    double series_gap = 0.0;            // closed form vs 200-term partial sum
    long iterations = 0;
};
Z2zReport z2z_amalgam_pc();

// Internals exposed for tests.
struct Z2zState {
    double a, b, c;
    long iterations;
};
Z2zState z2z_connection_probabilities(double p, double tol = 1e-14);
struct Mat2 {
    double m[2][2];
};
Mat2 z2z_ladder_block(double p, const Z2zState& st);       // closed-form geometric series
Mat2 z2z_ladder_block_partial(double p, const Z2zState& st, int terms);
Mat2 z2z_square_block(double p);                           // the Z4 side, from the engine kernels
double z2z_det_minus_identity(double p);

}  // namespace perctree
