#include "perctree/closedform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "perctree/linalg.hpp"
#include "perctree/partition.hpp"
#include "perctree/solver.hpp"

namespace perctree {

double Poly::eval(double p) const {
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * p + static_cast<double>(c[i]);
    return acc;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly out;
    out.c.assign(std::max(a.c.size(), b.c.size()), 0);
    for (size_t i = 0; i < a.c.size(); ++i) out.c[i] += a.c[i];
    for (size_t i = 0; i < b.c.size(); ++i) out.c[i] += b.c[i];
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    if (a.c.empty() || b.c.empty()) return out;
    out.c.assign(a.c.size() + b.c.size() - 1, 0);
    for (size_t i = 0; i < a.c.size(); ++i)
        for (size_t j = 0; j < b.c.size(); ++j) out.c[i + j] += a.c[i] * b.c[j];
    return out;
}

Poly poly_scale(const Poly& a, long long k) {
    Poly out = a;
    for (auto& x : out.c) x *= k;
    return out;
}

Poly chi_polynomial(const FiniteGraph& g) {
    const int ne = static_cast<int>(g.edges.size());
    if (ne > 16) throw GuardError("chi_polynomial: guard is 16 edges, got " + std::to_string(ne));
    if (g.vertices < 1 || g.base < 0 || g.base >= g.vertices)
        throw std::invalid_argument("chi_polynomial: bad graph");

    // binomials up to 16
    long long binom[17][17] = {};
    for (int n = 0; n <= 16; ++n) {
        binom[n][0] = 1;
        for (int k = 1; k <= n; ++k)
            binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0);
    }

    Poly chi;
    chi.c.assign(static_cast<size_t>(ne) + 1, 0);
    UnionFind uf;
    for (std::uint32_t mask = 0; mask < (1u << ne); ++mask) {
        uf.reset(g.vertices);
        int open = 0;
        for (int e = 0; e < ne; ++e)
            if (mask & (1u << e)) {
                uf.unite(g.edges[static_cast<size_t>(e)].first, g.edges[static_cast<size_t>(e)].second);
                ++open;
            }
        long long cluster = 0;
        for (int v = 0; v < g.vertices; ++v)
            if (uf.same(v, g.base)) ++cluster;
        // cluster * p^open * (1-p)^(ne-open), expanded
        const int closed = ne - open;
        for (int i = 0; i <= closed; ++i) {
            long long term = cluster * binom[closed][i] * ((i % 2) ? -1 : 1);
            chi.c[static_cast<size_t>(open + i)] += term;
        }
    }
    return chi;
}

double free_product_pc(const std::vector<Poly>& chis) {
    if (chis.size() < 2) throw std::invalid_argument("free_product_pc: need >= 2 factors");
    const int n = static_cast<int>(chis.size());
    Poly full{{1}};
    for (const Poly& x : chis) full = poly_mul(full, x);
    Poly sum{{0}};
    for (int j = 0; j < n; ++j) {
        Poly prod{{1}};
        for (int i = 0; i < n; ++i)
            if (i != j) prod = poly_mul(prod, chis[static_cast<size_t>(i)]);
        sum = poly_add(sum, prod);
    }
    Poly q = poly_add(sum, poly_scale(full, -(n - 1)));

    const int grid = 4096;
    double prev_p = 0.0, prev_v = q.eval(0.0);  // equals 1 since chi(0) = 1
    for (int i = 1; i <= grid; ++i) {
        const double p = static_cast<double>(i) / grid;
        const double v = q.eval(p);
        if (v == 0.0) return p;
        if ((prev_v > 0.0) != (v > 0.0)) {
            double lo = prev_p, hi = p, vlo = prev_v;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                const double vm = q.eval(mid);
                if ((vlo > 0.0) != (vm > 0.0))
                    hi = mid;
                else {
                    lo = mid;
                    vlo = vm;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_p = p;
        prev_v = v;
    }
    return 1.0;
}

Z2zState z2z_connection_probabilities(double p, double tol) {
    const double q2 = (1.0 - p) * (1.0 - p);
    auto next_c = [&](double b) {
        const double beta = 1.0 - q2 * (1.0 - b);
        return p * p * beta / (1.0 - p * p * (1.0 - beta));
    };
    Z2zState st{0.0, 0.0, 0.0, 0};
    for (long it = 1; it <= 1000000; ++it) {
        const double a = 2.0 * p - p * p + q2 * (2.0 * st.c - st.c * st.c);
        const double two_pmp = (2.0 * p - p * p);
        const double b = two_pmp * two_pmp * a + (2.0 * p * p - std::pow(p, 4)) * (1.0 - a);
        const double c = next_c(b);
        const double delta = std::max({std::abs(a - st.a), std::abs(b - st.b), std::abs(c - st.c)});
        st.a = a;
        st.b = b;
        st.c = c;
        st.iterations = it;
        if (delta < tol) break;
    }
    return st;
}

namespace {

Mat2 mul(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.m[i][j] = x.m[i][0] * y.m[0][j] + x.m[i][1] * y.m[1][j];
    return r;
}

Mat2 add(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = x.m[i][j] + y.m[i][j];
    return r;
}

Mat2 inv2(const Mat2& x) {
    const double det = x.m[0][0] * x.m[1][1] - x.m[0][1] * x.m[1][0];
    if (det == 0.0) throw std::domain_error("z2z: singular geometric-series matrix");
    Mat2 r;
    r.m[0][0] = x.m[1][1] / det;
    r.m[0][1] = -x.m[0][1] / det;
    r.m[1][0] = -x.m[1][0] / det;
    r.m[1][1] = x.m[0][0] / det;
    return r;
}

Mat2 transfer_matrix(double p) {
    const double q = 1.0 - p;
    Mat2 t;
    t.m[0][0] = p * p + 2.0 * p * q * (2.0 * p - p * p);
    t.m[0][1] = 2.0 * p * q * q * q;
    t.m[1][0] = p * (2.0 * p - p * p);
    t.m[1][1] = p * q * q;
    return t;
}

Mat2 prefix_matrix(double p, double c) {
    const double q2 = (1.0 - p) * (1.0 - p);
    Mat2 x;
    x.m[0][0] = 1.0;
    x.m[0][1] = 0.0;
    x.m[1][0] = 1.0 - (1.0 - c) * q2;
    x.m[1][1] = (1.0 - c) * q2;
    return x;
}

Mat2 mixing_matrix(double v) {  // [[1,0],[v,1-v]]
    Mat2 x;
    x.m[0][0] = 1.0;
    x.m[0][1] = 0.0;
    x.m[1][0] = v;
    x.m[1][1] = 1.0 - v;
    return x;
}

}  // namespace

Mat2 z2z_ladder_block(double p, const Z2zState& st) {
    const Mat2 t = transfer_matrix(p);
    const Mat2 pre = prefix_matrix(p, st.c);
    const Mat2 qb = mixing_matrix(st.b);
    const Mat2 rc = mixing_matrix(st.c);
    const Mat2 qt = mul(qb, t);
    const Mat2 i_minus_qt{{{1.0 - qt.m[0][0], -qt.m[0][1]}, {-qt.m[1][0], 1.0 - qt.m[1][1]}}};
    Mat2 out = mul(mul(mul(pre, t), inv2(i_minus_qt)), rc);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.m[i][j] *= 2.0;
    return out;
}

Mat2 z2z_ladder_block_partial(double p, const Z2zState& st, int terms) {
    const Mat2 t = transfer_matrix(p);
    const Mat2 pre = prefix_matrix(p, st.c);
    const Mat2 qb = mixing_matrix(st.b);
    const Mat2 rc = mixing_matrix(st.c);
    Mat2 sum{{{0.0, 0.0}, {0.0, 0.0}}};
    Mat2 tail = t;  // T (Q T)^{n-1}
    for (int n = 1; n <= terms; ++n) {
        sum = add(sum, tail);
        tail = mul(tail, mul(qb, t));
    }
    Mat2 out = mul(mul(pre, sum), rc);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.m[i][j] *= 2.0;
    return out;
}

Mat2 z2z_square_block(double p) {
    ModelPiece square;
    square.name = "square";
    square.vertices = 4;
    square.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    square.border = {0, 2};
    square.children = {{"ladder", {1, 3}}};

    const Color joined_marked{Partition::single_block(2), 0};
    const Color split_marked{Partition::diagonal(2), 0};
    const Color parents[2] = {joined_marked, split_marked};

    Mat2 out{{{0.0, 0.0}, {0.0, 0.0}}};
    UnionFind uf;
    for (int yi = 0; yi < 2; ++yi) {
        for (std::uint32_t mask = 0; mask < 16; ++mask) {
            const int open = std::popcount(mask);
            const double alpha = std::pow(p, open) * std::pow(1.0 - p, 4 - open);
            Color c = child_color(square, parents[yi], mask, {}, 0, uf);
            if (c.white()) continue;
            if (c.partition.block_count() == 1)
                out.m[yi][0] += alpha;  // both vertices origin-connected
            else
                out.m[yi][1] += alpha;  // exactly one connected (both variants collapse)
        }
    }
    return out;
}

double z2z_det_minus_identity(double p) {
    Z2zState st = z2z_connection_probabilities(p);
    Mat2 lad = z2z_ladder_block(p, st);
    Mat2 sq = z2z_square_block(p);
    Matrix M(4);  // types: [ladder r, ladder b, square r, square b]
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            M.at(i, 2 + j) = lad.m[i][j];
            M.at(2 + i, j) = sq.m[i][j];
        }
    return det_minus_identity(M);
}

Z2zReport z2z_amalgam_pc() {
    const int grid = 1024;
    double prev_p = 0.0, prev_v = 1.0;  // det(0 - I) = +1 for the 4x4
    double pc = 1.0;
    for (int i = 1; i < grid; ++i) {
        const double p = static_cast<double>(i) / grid;
        const double v = z2z_det_minus_identity(p);
        if ((prev_v > 0.0) != (v > 0.0)) {
            double lo = prev_p, hi = p, vlo = prev_v;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                const double vm = z2z_det_minus_identity(mid);
                if ((vlo > 0.0) != (vm > 0.0))
                    hi = mid;
                else {
                    lo = mid;
                    vlo = vm;
                }
            }
            pc = 0.5 * (lo + hi);
            break;
        }
        prev_p = p;
        prev_v = v;
    }

    Z2zReport rep;
    rep.pc = pc;
    Z2zState st = z2z_connection_probabilities(pc);
    rep.a = st.a;
    rep.b = st.b;
    rep.c = st.c;
    rep.iterations = st.iterations;
    const double q2 = (1.0 - pc) * (1.0 - pc);
    const double beta = 1.0 - q2 * (1.0 - st.b);
    const double two_pmp = 2.0 * pc - pc * pc;
    rep.abc_residual = std::max(
        {std::abs(st.a - (two_pmp + q2 * (2.0 * st.c - st.c * st.c))),
         std::abs(st.b - (two_pmp * two_pmp * st.a + (2.0 * pc * pc - std::pow(pc, 4)) * (1.0 - st.a))),
         std::abs(st.c - pc * pc * beta / (1.0 - pc * pc * (1.0 - beta)))});
    rep.det_residual = z2z_det_minus_identity(pc);
    Mat2 closed = z2z_ladder_block(pc, st);
    Mat2 partial = z2z_ladder_block_partial(pc, st, 200);
    double gap = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) gap = std::max(gap, std::abs(closed.m[i][j] - partial.m[i][j]));
    rep.series_gap = gap;
    return rep;
}

}  // namespace perctree
