#pragma once

#include <cmath>
#include <vector>

namespace perctree {

// Dense square matrix, row-major.
struct Matrix {
    int n = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(int n) : n(n), a(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0) {}
    double& at(int r, int c) { return a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)]; }
};

// Spectral radius of a nonnegative matrix to ~1e-12 relative accuracy.
// Power iteration runs on M + I: the positive diagonal makes the iteration
// aperiodic, so it converges even for cyclic block structures; then
// rho(M) = rho(M + I) - 1.
double spectral_radius(const Matrix& m);

// det(M - I), by LU with partial pivoting.
double det_minus_identity(const Matrix& m);

// Fixed-order compensated accumulation (Neumaier); deterministic and
// accurate enough for 1e-12 normalization checks over ~2^20 terms.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace perctree
