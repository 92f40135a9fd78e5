#include "perctree/linalg.hpp"

#include <cmath>
#include <cstdlib>

namespace perctree {

double spectral_radius(const Matrix& m) {
    const int n = m.n;
    if (n == 0) return 0.0;
    std::vector<double> v(static_cast<size_t>(n), 1.0), w(static_cast<size_t>(n), 0.0);
    double lambda = 1.0;
    const int max_iter = 200000;
    for (int it = 0; it < max_iter; ++it) {
        double norm = 0.0;
        for (int r = 0; r < n; ++r) {
            double s = v[static_cast<size_t>(r)];  // the +I shift
            for (int c = 0; c < n; ++c) s += m.at(r, c) * v[static_cast<size_t>(c)];
            w[static_cast<size_t>(r)] = s;
            norm = std::max(norm, std::abs(s));
        }
        if (norm == 0.0) return 0.0;
        double prev = lambda;
        lambda = norm;  // ||(M+I)v||_inf with ||v||_inf = 1
        for (int r = 0; r < n; ++r) w[static_cast<size_t>(r)] /= norm;
        v.swap(w);
        if (it > 4 && std::abs(lambda - prev) <= 1e-13 * std::max(1.0, lambda))
            break;
    }
    return lambda - 1.0;
}

double det_minus_identity(const Matrix& m) {
    const int n = m.n;
    if (n == 0) return 1.0;
    std::vector<double> a = m.a;
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(i)] -= 1.0;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(col)]) >
                std::abs(a[static_cast<size_t>(piv) * static_cast<size_t>(n) + static_cast<size_t>(col)]))
                piv = r;
        double p = a[static_cast<size_t>(piv) * static_cast<size_t>(n) + static_cast<size_t>(col)];
        if (p == 0.0) return 0.0;
        if (piv != col) {
            for (int c = col; c < n; ++c)
                std::swap(a[static_cast<size_t>(piv) * static_cast<size_t>(n) + static_cast<size_t>(c)],
                          a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)]);
            det = -det;
        }
        det *= p;
        for (int r = col + 1; r < n; ++r) {
            double f = a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(col)] / p;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c)
                a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)] -=
                    f * a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)];
        }
    }
    return det;
}

}  // namespace perctree
