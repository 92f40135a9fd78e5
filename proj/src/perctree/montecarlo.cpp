#include "perctree/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <set>
#include <stdexcept>
#include <thread>

#include "perctree/solver.hpp"  // GuardError

namespace perctree {

UnfoldedGraph unfold(const TreeStructure& s, int depth, long max_vertices) {
    if (depth < 0) throw std::invalid_argument("unfold: depth must be >= 0");
    auto rep = validate(s);
    if (!rep.ok()) throw std::invalid_argument("unfold: invalid structure\n" + rep.to_string());

    UnfoldedGraph g;
    struct Pending {
        int model;
        int generation;
        int parent;
        std::vector<int> attach_global;
    };
    std::deque<Pending> queue;

    // root instance
    g.instances.push_back({-1, 0, -1});
    for (int v = 0; v < s.root.vertices; ++v) g.vertices.push_back({0, v});
    for (auto [a, b] : s.root.edges) g.edges.push_back({a, b});
    g.origin = s.root.origin;
    if (depth > 0)
        for (const auto& c : s.root.children) {
            std::vector<int> attach;
            for (int v : c.attach) attach.push_back(v);
            queue.push_back({s.model_index(c.model), 1, 0, std::move(attach)});
        }

    while (!queue.empty()) {
        Pending p = std::move(queue.front());
        queue.pop_front();
        const ModelPiece& m = s.model(p.model);
        const int inst = static_cast<int>(g.instances.size());
        g.instances.push_back({p.model, p.generation, p.parent});

        std::vector<int> local_to_global(static_cast<size_t>(m.vertices), -1);
        for (size_t k = 0; k < m.border.size(); ++k)
            local_to_global[static_cast<size_t>(m.border[k])] = p.attach_global[k];
        for (int v = 0; v < m.vertices; ++v)
            if (local_to_global[static_cast<size_t>(v)] < 0) {
                local_to_global[static_cast<size_t>(v)] = static_cast<int>(g.vertices.size());
                g.vertices.push_back({inst, v});
            }
        if (static_cast<long>(g.vertices.size()) > max_vertices)
            throw GuardError("unfold: vertex guard exceeded (" + std::to_string(max_vertices) + ")");
        for (auto [a, b] : m.edges)
            g.edges.push_back({local_to_global[static_cast<size_t>(a)],
                               local_to_global[static_cast<size_t>(b)]});
        if (p.generation < depth)
            for (const auto& c : m.children) {
                std::vector<int> attach;
                for (int v : c.attach) attach.push_back(local_to_global[static_cast<size_t>(v)]);
                queue.push_back({s.model_index(c.model), p.generation + 1, inst, std::move(attach)});
            }
        else {
            std::set<int> fr;
            for (const auto& c : m.children)
                for (int v : c.attach) fr.insert(local_to_global[static_cast<size_t>(v)]);
            for (size_t k = 0; k < m.border.size(); ++k) fr.insert(p.attach_global[k]);
            for (int v : fr) g.frontier.push_back(v);
        }
    }
    if (depth == 0) {
        std::set<int> fr;
        for (const auto& c : s.root.children)
            for (int v : c.attach) fr.insert(v);
        for (int v : fr) g.frontier.push_back(v);
    }
    std::sort(g.frontier.begin(), g.frontier.end());
    g.frontier.erase(std::unique(g.frontier.begin(), g.frontier.end()), g.frontier.end());
    return g;
}

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

}  // namespace

double edge_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t edge) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (trial + 1) + 0xD1B54A32D192ED03ULL * (edge + 1);
    z = mix64(z);
    z = mix64(z ^ 0x2545F4914F6CDD1DULL);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

WilsonInterval wilson99(long successes, long trials) {
    const double z = 2.5758293035489004;  // two-sided 99% normal quantile
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

struct Csr {
    std::vector<int> offset;
    std::vector<int> nbr;
    std::vector<int> edge;
};

Csr build_csr(const UnfoldedGraph& g) {
    Csr c;
    const int n = static_cast<int>(g.vertices.size());
    c.offset.assign(static_cast<size_t>(n) + 1, 0);
    for (auto [a, b] : g.edges) {
        ++c.offset[static_cast<size_t>(a) + 1];
        ++c.offset[static_cast<size_t>(b) + 1];
    }
    for (int v = 0; v < n; ++v) c.offset[static_cast<size_t>(v) + 1] += c.offset[static_cast<size_t>(v)];
    c.nbr.resize(g.edges.size() * 2);
    c.edge.resize(g.edges.size() * 2);
    std::vector<int> fill = c.offset;
    for (size_t e = 0; e < g.edges.size(); ++e) {
        auto [a, b] = g.edges[e];
        c.nbr[static_cast<size_t>(fill[static_cast<size_t>(a)])] = b;
        c.edge[static_cast<size_t>(fill[static_cast<size_t>(a)]++)] = static_cast<int>(e);
        c.nbr[static_cast<size_t>(fill[static_cast<size_t>(b)])] = a;
        c.edge[static_cast<size_t>(fill[static_cast<size_t>(b)]++)] = static_cast<int>(e);
    }
    return c;
}

// Lazy percolation BFS: edge states are evaluated on demand from the counter
// RNG, so a trial only pays for the cluster it explores.
long run_trials(const UnfoldedGraph& g, const Csr& csr, const std::vector<char>& is_frontier,
                double p, long t0, long t1, std::uint64_t seed) {
    const int n = static_cast<int>(g.vertices.size());
    std::vector<int> mark(static_cast<size_t>(n), -1);
    std::vector<int> stack;
    long reached = 0;
    for (long t = t0; t < t1; ++t) {
        const int tm = static_cast<int>(t - t0);
        bool hit = false;
        stack.clear();
        stack.push_back(g.origin);
        mark[static_cast<size_t>(g.origin)] = tm;
        if (is_frontier[static_cast<size_t>(g.origin)]) hit = true;
        while (!stack.empty() && !hit) {
            int v = stack.back();
            stack.pop_back();
            for (int i = csr.offset[static_cast<size_t>(v)]; i < csr.offset[static_cast<size_t>(v) + 1]; ++i) {
                int w = csr.nbr[static_cast<size_t>(i)];
                if (mark[static_cast<size_t>(w)] == tm) continue;
                if (edge_uniform(seed, static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(csr.edge[static_cast<size_t>(i)])) >= p)
                    continue;
                mark[static_cast<size_t>(w)] = tm;
                if (is_frontier[static_cast<size_t>(w)]) {
                    hit = true;
                    break;
                }
                stack.push_back(w);
            }
        }
        if (hit) ++reached;
    }
    return reached;
}

}  // namespace

ReachEstimate estimate_reach(const UnfoldedGraph& g, double p, long trials, std::uint64_t seed,
                             int threads) {
    if (trials < 1) throw std::invalid_argument("estimate_reach: trials must be >= 1");
    Csr csr = build_csr(g);
    std::vector<char> is_frontier(g.vertices.size(), 0);
    for (int v : g.frontier) is_frontier[static_cast<size_t>(v)] = 1;

    long reached = 0;
    if (threads <= 1) {
        reached = run_trials(g, csr, is_frontier, p, 0, trials, seed);
    } else {
        const int nt = std::min<long>(threads, trials);
        std::vector<long> partial(static_cast<size_t>(nt), 0);
        std::vector<std::thread> pool;
        for (int w = 0; w < nt; ++w) {
            long t0 = trials * w / nt, t1 = trials * (w + 1) / nt;
            pool.emplace_back([&, w, t0, t1] {
                partial[static_cast<size_t>(w)] = run_trials(g, csr, is_frontier, p, t0, t1, seed);
            });
        }
        for (auto& th : pool) th.join();
        for (long r : partial) reached += r;  // integer sum: order-independent
    }

    ReachEstimate est;
    est.reached = reached;
    est.trials = trials;
    est.p_hat = static_cast<double>(reached) / static_cast<double>(trials);
    auto ci = wilson99(reached, trials);
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

Bracket bracket_pc(const TreeStructure& s, int depth, long trials, std::uint64_t seed,
                   double theta_ref, double grid_step, int threads) {
    Bracket b;
    b.theta_ref = theta_ref;
    b.grid_step = grid_step;
    UnfoldedGraph g = unfold(s, depth);

    const int steps = static_cast<int>(std::floor(1.0 / grid_step)) - 1;
    double lo_raw = -1.0, hi_raw = -1.0;
    for (int i = 1; i <= steps; ++i) {
        const double p = i * grid_step;
        ReachEstimate est = estimate_reach(g, p, trials, seed, threads);
        if (est.ci_hi < 0.5 * theta_ref) lo_raw = p;
        if (hi_raw < 0.0 && est.ci_lo > b.theta_hi) hi_raw = p;
    }
    if (lo_raw < 0.0) {
        lo_raw = 0.0;
        b.inconclusive = true;
        b.warning = "no scanned p had reach below the subcritical threshold";
    }
    if (hi_raw < 0.0) {
        hi_raw = 1.0;
        b.inconclusive = true;
        if (!b.warning.empty()) b.warning += "; ";
        b.warning += "no scanned p had reach above the supercritical threshold";
    }
    b.p_lo = std::max(0.0, lo_raw - grid_step);
    b.p_hi = std::min(1.0, hi_raw + grid_step);
    if (b.p_lo >= b.p_hi) {
        b.p_lo = std::max(0.0, b.p_hi - 2.0 * grid_step);
        b.inconclusive = true;
        if (!b.warning.empty()) b.warning += "; ";
        b.warning += "thresholds crossed in the wrong order; interval widened";
    }
    return b;
}

}  // namespace perctree
