#include "perctree/builders.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace perctree {

namespace {

bool graph_connected(const FiniteGraph& g) {
    if (g.vertices <= 0) return false;
    std::vector<std::vector<int>> adj(static_cast<size_t>(g.vertices));
    for (auto [a, b] : g.edges) {
        adj[static_cast<size_t>(a)].push_back(b);
        adj[static_cast<size_t>(b)].push_back(a);
    }
    std::vector<char> seen(static_cast<size_t>(g.vertices), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<size_t>(v)])
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    return count == g.vertices;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

FiniteGraph named_graph(const std::string& name) {
    require(name.size() >= 2, "unknown graph name '" + name + "'");
    const char kind = name[0];
    int n = 0;
    try {
        n = std::stoi(name.substr(1));
    } catch (...) {
        throw std::invalid_argument("unknown graph name '" + name + "'");
    }
    FiniteGraph g;
    g.name = name;
    g.vertices = n;
    if (kind == 'k') {
        require(n >= 1, "complete graph needs >= 1 vertex");
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) g.edges.push_back({a, b});
    } else if (kind == 'c') {
        require(n >= 3, "cycle graph needs >= 3 vertices");
        for (int a = 0; a < n; ++a) g.edges.push_back({a, (a + 1) % n});
    } else if (kind == 'p') {
        require(n >= 1, "path graph needs >= 1 vertex");
        for (int a = 0; a + 1 < n; ++a) g.edges.push_back({a, a + 1});
    } else {
        throw std::invalid_argument("unknown graph name '" + name + "' (use kN, cN or pN)");
    }
    return g;
}

TreeStructure free_product(const std::vector<FiniteGraph>& factors) {
    require(factors.size() >= 2, "free product needs at least 2 factors");
    for (const auto& f : factors) {
        require(f.vertices >= 1, "factor '" + f.name + "' is empty");
        require(f.base >= 0 && f.base < f.vertices, "factor '" + f.name + "': base out of range");
        require(graph_connected(f), "factor '" + f.name + "' is disconnected");
    }

    const int n = static_cast<int>(factors.size());
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i)
        names.push_back(factors[static_cast<size_t>(i)].name + "." + std::to_string(i));

    TreeStructure s;
    s.name = "free-product";
    for (int i = 0; i < n; ++i) {
        const FiniteGraph& f = factors[static_cast<size_t>(i)];
        ModelPiece m;
        m.name = names[static_cast<size_t>(i)];
        m.vertices = f.vertices;
        m.edges = f.edges;
        m.border = {f.base};
        for (int v = 0; v < f.vertices; ++v) {
            if (v == f.base) continue;  // the copies at the border vertex belong to ancestors
            for (int j = 0; j < n; ++j)
                if (j != i) m.children.push_back({names[static_cast<size_t>(j)], {v}});
        }
        s.models.push_back(std::move(m));
    }
    const FiniteGraph& f0 = factors[0];
    s.root.name = "root";
    s.root.vertices = f0.vertices;
    s.root.edges = f0.edges;
    s.root.origin = f0.base;
    for (int v = 0; v < f0.vertices; ++v)
        for (int j = 1; j < n; ++j) s.root.children.push_back({names[static_cast<size_t>(j)], {v}});
    return s;
}

namespace {

void check_cosets(const FiniteGraph& g, const std::vector<std::vector<int>>& cosets,
                  size_t coset_size, const std::string& who) {
    require(!cosets.empty(), who + ": needs at least one coset");
    std::set<int> seen;
    for (const auto& c : cosets) {
        require(c.size() == coset_size, who + ": unequal coset sizes");
        for (int v : c) {
            require(v >= 0 && v < g.vertices, who + ": coset vertex out of range");
            require(seen.insert(v).second, who + ": cosets overlap");
        }
    }
    require(static_cast<int>(seen.size()) == g.vertices,
            who + ": cosets do not partition the vertices");
}

}  // namespace

TreeStructure amalgam(const FactorWithCosets& factor1, const FactorWithCosets& factor2) {
    require(!factor1.cosets.empty() && !factor1.cosets[0].empty(),
            "amalgam: factor 1 has no cosets");
    const size_t m = factor1.cosets[0].size();
    check_cosets(factor1.graph, factor1.cosets, m, "factor 1");
    check_cosets(factor2.graph, factor2.cosets, m, "factor 2");
    require(graph_connected(factor1.graph), "factor 1 is disconnected");
    require(graph_connected(factor2.graph), "factor 2 is disconnected");

    std::string n1 = factor1.graph.name, n2 = factor2.graph.name;
    if (n1 == n2) {
        n1 += ".1";
        n2 += ".2";
    }

    TreeStructure s;
    s.name = "amalgam";
    auto make_model = [](const std::string& name, const FactorWithCosets& f,
                         const std::string& other) {
        ModelPiece mp;
        mp.name = name;
        mp.vertices = f.graph.vertices;
        mp.edges = f.graph.edges;
        mp.border = f.cosets[0];
        for (size_t c = 1; c < f.cosets.size(); ++c) mp.children.push_back({other, f.cosets[c]});
        return mp;
    };
    s.models.push_back(make_model(n1, factor1, n2));
    s.models.push_back(make_model(n2, factor2, n1));

    s.root.name = "root";
    s.root.vertices = factor1.graph.vertices;
    s.root.edges = factor1.graph.edges;
    s.root.origin = factor1.cosets[0][0];
    for (const auto& c : factor1.cosets) s.root.children.push_back({n2, c});
    return s;
}

TreeStructure cyclic_amalgam(int n1, int n2, int m) {
    require(m >= 1 && n1 >= 2 && n2 >= 2, "cyclic amalgam needs n1, n2 >= 2 and m >= 1");
    require(n1 % m == 0 && n2 % m == 0, "cyclic amalgam: m must divide both n1 and n2");
    auto cycle = [](int n, const std::string& name) {
        FiniteGraph g;
        g.name = name;
        g.vertices = n;
        if (n == 2) {
            g.edges = {{0, 1}};
        } else {
            for (int a = 0; a < n; ++a) g.edges.push_back({a, (a + 1) % n});
        }
        return g;
    };
    auto residue_cosets = [](int n, int m) {
        const int step = n / m;
        std::vector<std::vector<int>> out;
        for (int j = 0; j < step; ++j) {
            std::vector<int> c;
            for (int i = 0; i < m; ++i) c.push_back(j + i * step);
            out.push_back(std::move(c));
        }
        return out;
    };
    FactorWithCosets f1{cycle(n1, "z" + std::to_string(n1)), residue_cosets(n1, m)};
    FactorWithCosets f2{cycle(n2, "z" + std::to_string(n2)), residue_cosets(n2, m)};
    TreeStructure s = amalgam(f1, f2);
    s.name = "z" + std::to_string(n1) + "-z" + std::to_string(n2) + "-amalgam-z" + std::to_string(m);
    return s;
}

TreeStructure sl2z() {
    FactorWithCosets square{named_graph("c4"), {{0, 2}, {1, 3}}};
    square.graph.name = "square";
    FactorWithCosets hexagon{named_graph("c6"), {{0, 3}, {1, 4}, {2, 5}}};
    hexagon.graph.name = "hexagon";
    TreeStructure s = amalgam(square, hexagon);
    s.name = "sl2z";
    return s;
}

TreeStructure hnn(const FiniteGraph& base, const std::vector<std::vector<int>>& h_cosets,
                  const std::vector<std::vector<int>>& k_cosets, const std::vector<int>& alpha) {
    require(base.vertices >= 1, "hnn: base graph is empty");
    require(graph_connected(base), "hnn: base graph is disconnected");
    require(!h_cosets.empty() && !k_cosets.empty(), "hnn: missing cosets");
    const size_t m = h_cosets[0].size();
    check_cosets(base, h_cosets, m, "H");
    check_cosets(base, k_cosets, m, "K");
    require(alpha.size() == m, "hnn: alpha size must equal the coset size");
    {
        std::set<int> seen(alpha.begin(), alpha.end());
        require(seen.size() == m && *seen.begin() == 0 && *seen.rbegin() == static_cast<int>(m) - 1,
                "hnn: alpha must be a permutation of 0..m-1");
    }
    std::vector<int> inv_alpha(m);
    for (size_t i = 0; i < m; ++i) inv_alpha[static_cast<size_t>(alpha[i])] = static_cast<int>(i);

    const std::string via_h = "via-h", via_k = "via-k";

    // piece = base graph + the stable-letter edge bundles it owns; each bundle
    // has fresh endpoints that form the border of one child copy.
    struct Bundles {
        bool out_from_border_coset;  // via-k pieces do not own the border bundle
        bool in_to_border_coset;     // via-h pieces do not own theirs
    };
    auto make_piece = [&](const std::string& name, bool skip_out0, bool skip_in0) {
        ModelPiece mp;
        mp.name = name;
        mp.edges = base.edges;
        int next = base.vertices;
        for (size_t c = 0; c < k_cosets.size(); ++c) {
            if (skip_out0 && c == 0) continue;
            std::vector<int> fresh;
            for (size_t i = 0; i < m; ++i) {
                fresh.push_back(next);
                mp.edges.push_back({k_cosets[c][i], next});
                ++next;
            }
            ChildSlot slot;
            slot.model = via_h;
            for (size_t j = 0; j < m; ++j)
                slot.attach.push_back(fresh[static_cast<size_t>(alpha[j])]);
            mp.children.push_back(std::move(slot));
        }
        for (size_t c = 0; c < h_cosets.size(); ++c) {
            if (skip_in0 && c == 0) continue;
            std::vector<int> fresh;
            for (size_t i = 0; i < m; ++i) {
                fresh.push_back(next);
                mp.edges.push_back({next, h_cosets[c][i]});
                ++next;
            }
            ChildSlot slot;
            slot.model = via_k;
            for (size_t j = 0; j < m; ++j)
                slot.attach.push_back(fresh[static_cast<size_t>(inv_alpha[j])]);
            mp.children.push_back(std::move(slot));
        }
        mp.vertices = next;
        return mp;
    };

    TreeStructure s;
    s.name = "hnn-" + base.name;
    ModelPiece mh = make_piece(via_h, false, true);  // border is an H-coset; parent owns its in-bundle
    mh.border = h_cosets[0];
    ModelPiece mk = make_piece(via_k, true, false);  // border is a K-coset; parent owns its out-bundle
    mk.border = k_cosets[0];
    s.models.push_back(std::move(mh));
    s.models.push_back(std::move(mk));

    ModelPiece r = make_piece("root", false, false);
    s.root.name = r.name;
    s.root.vertices = r.vertices;
    s.root.edges = r.edges;
    s.root.children = r.children;
    s.root.origin = 0;
    return s;
}

namespace {

// Free-group machinery for the ball generating set. Letters 0=a, 1=a^-1,
// 2=b, 3=b^-1; inverse(l) = l ^ 1.
using Word = std::vector<int>;

Word reduced_concat(const Word& u, const Word& v) {
    Word out = u;
    for (int l : v) {
        if (!out.empty() && out.back() == (l ^ 1))
            out.pop_back();
        else
            out.push_back(l);
    }
    return out;
}

Word inverse_word(const Word& u) {
    Word out;
    for (auto it = u.rbegin(); it != u.rend(); ++it) out.push_back(*it ^ 1);
    return out;
}

int word_distance(const Word& u, const Word& v) {
    return static_cast<int>(reduced_concat(inverse_word(u), v).size());
}

bool word_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

std::vector<Word> reduced_words_upto(int len) {
    std::vector<Word> out{Word{}};
    std::vector<Word> frontier{Word{}};
    for (int l = 1; l <= len; ++l) {
        std::vector<Word> next;
        for (const Word& w : frontier)
            for (int letter = 0; letter < 4; ++letter) {
                if (!w.empty() && w.back() == (letter ^ 1)) continue;
                Word nw = w;
                nw.push_back(letter);
                next.push_back(nw);
            }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    std::sort(out.begin(), out.end(), word_less);
    return out;
}

Word apply_letter_map(const std::array<int, 4>& sigma, const Word& w) {
    Word out;
    for (int l : w) out.push_back(sigma[static_cast<size_t>(l)]);
    return out;
}

// Letter permutations extending to automorphisms of F2 with sigma(a) = x.
std::array<int, 4> sigma_for(int x) {
    switch (x) {
        case 0: return {0, 1, 2, 3};
        case 1: return {1, 0, 2, 3};
        case 2: return {2, 3, 0, 1};
        default: return {3, 2, 0, 1};
    }
}

}  // namespace

TreeStructure free_group_ball(int rank, int k) {
    require(rank == 2, "free_group_ball: only rank 2 is supported");
    require(k >= 1 && k <= 3, "free_group_ball: k must be in 1..3");

    // Generic piece, anchored at the parent: the empty word plays the anchor
    // role and the piece proper consists of the words starting with 'a'.
    std::vector<Word> verts{Word{}};
    for (const Word& w : reduced_words_upto(k))
        if (!w.empty() && w[0] == 0) verts.push_back(w);
    std::sort(verts.begin(), verts.end(), word_less);
    auto vert_index = [&verts](const Word& w) {
        for (size_t i = 0; i < verts.size(); ++i)
            if (verts[i] == w) return static_cast<int>(i);
        throw std::logic_error("free_group_ball: word ran outside the piece");
    };

    std::vector<Word> border_words;
    std::set<size_t> border_set;
    for (size_t i = 0; i < verts.size(); ++i)
        if (static_cast<int>(verts[i].size()) <= k - 1 || verts[i].empty()) {
            border_words.push_back(verts[i]);
            border_set.insert(i);
        }

    ModelPiece piece;
    piece.name = "ball-piece";
    piece.vertices = static_cast<int>(verts.size());
    for (size_t i = 0; i < verts.size(); ++i)
        for (size_t j = i + 1; j < verts.size(); ++j) {
            if (border_set.count(i) && border_set.count(j)) continue;  // parent's edges
            if (word_distance(verts[i], verts[j]) <= k)
                piece.edges.push_back({static_cast<int>(i), static_cast<int>(j)});
        }
    for (const Word& w : border_words) piece.border.push_back(vert_index(w));
    for (int y : {0, 2, 3}) {  // continuations of 'a' (no backtracking)
        const auto sigma = sigma_for(y);
        ChildSlot slot;
        slot.model = piece.name;
        for (const Word& bw : border_words) {
            Word image = reduced_concat(Word{0}, apply_letter_map(sigma, bw));
            slot.attach.push_back(vert_index(image));
        }
        piece.children.push_back(std::move(slot));
    }

    // Root: the ball of radius k-1 with every pair at distance <= k joined.
    std::vector<Word> rverts = reduced_words_upto(k - 1);
    auto rindex = [&rverts](const Word& w) {
        for (size_t i = 0; i < rverts.size(); ++i)
            if (rverts[i] == w) return static_cast<int>(i);
        throw std::logic_error("free_group_ball: word ran outside the root");
    };
    RootPiece root;
    root.name = "root";
    root.vertices = static_cast<int>(rverts.size());
    for (size_t i = 0; i < rverts.size(); ++i)
        for (size_t j = i + 1; j < rverts.size(); ++j)
            if (word_distance(rverts[i], rverts[j]) <= k)
                root.edges.push_back({static_cast<int>(i), static_cast<int>(j)});
    root.origin = rindex(Word{});
    for (int x : {0, 1, 2, 3}) {
        const auto sigma = sigma_for(x);
        ChildSlot slot;
        slot.model = piece.name;
        for (const Word& bw : border_words)
            slot.attach.push_back(rindex(apply_letter_map(sigma, bw)));
        root.children.push_back(std::move(slot));
    }

    TreeStructure s;
    s.name = "fball-2-" + std::to_string(k);
    s.models.push_back(std::move(piece));
    s.root = std::move(root);
    return s;
}

TreeStructure grandparent() {
    // Pieces are {parent, vertex, two children} of the underlying 3-regular
    // tree, owning the two tree edges to the children and the two grandparent
    // edges from the children. Vertices: 0 = top, 1 = mid, 2 = left child,
    // 3 = right child. Pieces on the ray toward the distinguished end hang
    // upside down: their border is {mid, down-ray child} instead of
    // {top, mid}.
    const std::vector<std::pair<int, int>> edges{{1, 2}, {1, 3}, {0, 2}, {0, 3}};

    ModelPiece branch;
    branch.name = "branch";
    branch.vertices = 4;
    branch.edges = edges;
    branch.border = {0, 1};
    branch.children = {{"branch", {1, 2}}, {"branch", {1, 3}}};

    ModelPiece ray;
    ray.name = "ray";
    ray.vertices = 4;
    ray.edges = edges;
    ray.border = {1, 2};
    ray.children = {{"branch", {1, 3}}, {"ray", {0, 1}}};

    TreeStructure s;
    s.name = "grandparent";
    s.models.push_back(std::move(branch));
    s.models.push_back(std::move(ray));
    s.root.name = "root";
    s.root.vertices = 4;
    s.root.edges = edges;
    s.root.origin = 1;
    s.root.children = {{"branch", {1, 2}}, {"branch", {1, 3}}, {"ray", {0, 1}}};
    return s;
}

}  // namespace perctree
