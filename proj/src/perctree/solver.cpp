#include "perctree/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace perctree {

int ColorSpace::index_of(int model, const Color& c) const {
    for (size_t i = 0; i < types.size(); ++i)
        if (types[i].model == model && types[i].color == c) return static_cast<int>(i);
    return -1;
}

double SlotLaw::total() const {
    NeumaierSum s;
    for (const auto& [c, w] : colors) s.add(w);
    s.add(white);
    return s.value();
}

namespace {

constexpr int kMaxPieceEdges = 24;
constexpr long kMaxComboProduct = 1 << 20;

struct SlotT {
    int child_model = -1;
    std::vector<int> attach;
    std::vector<int> supported;  // indices into the child's partition table
    // union pairs (in host vertex ids) per child partition index
    std::vector<std::vector<std::pair<int, int>>> unions;
};

struct PieceTable {
    std::string name;
    int verts = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> border;  // empty for the root
    int origin = -1;          // root only
    std::vector<SlotT> slots;
    const PartitionTable* btab = nullptr;
    int diag = -1;
};

// Union pairs realizing a parent color on the piece border; `virt` is the
// virtual origin node (== verts).
std::vector<std::pair<int, int>> color_unions(const std::vector<int>& border, const Color& y,
                                              int virt) {
    std::vector<std::pair<int, int>> out;
    const Partition& z = y.partition;
    for (int b = 0; b < z.block_count(); ++b) {
        int first = -1;
        for (int i = 0; i < z.size(); ++i) {
            if (z.rgs[static_cast<size_t>(i)] != b) continue;
            if (first < 0)
                first = i;
            else
                out.push_back({border[static_cast<size_t>(first)], border[static_cast<size_t>(i)]});
        }
        if (b == y.marked && first >= 0)
            out.push_back({virt, border[static_cast<size_t>(first)]});
    }
    return out;
}

// Allocation-free partition/color reads; key formats match partition_key and
// color_key.
std::uint64_t read_partition_key(UnionFind& uf, const std::vector<int>& verts) {
    std::uint64_t key = 1;
    int roots[kMaxBorder];
    int nroots = 0;
    for (int v : verts) {
        const int r = uf.find(v);
        int block = -1;
        for (int k = 0; k < nroots; ++k)
            if (roots[k] == r) {
                block = k;
                break;
            }
        if (block < 0) {
            block = nroots;
            roots[nroots++] = r;
        }
        key = (key << 4) | static_cast<unsigned>(block);
    }
    return key;
}

std::uint64_t read_color_key(UnionFind& uf, const std::vector<int>& verts, int origin_node) {
    std::uint64_t key = 1;
    int marked = -1;
    int roots[kMaxBorder];
    int nroots = 0;
    const int orig = uf.find(origin_node);
    for (int v : verts) {
        const int r = uf.find(v);
        int block = -1;
        for (int k = 0; k < nroots; ++k)
            if (roots[k] == r) {
                block = k;
                break;
            }
        if (block < 0) {
            block = nroots;
            roots[nroots++] = r;
            if (r == orig) marked = block;
        }
        key = (key << 4) | static_cast<unsigned>(block);
    }
    return (key << 5) | static_cast<unsigned>(marked + 1);
}

inline bool color_key_white(std::uint64_t key) { return (key & 31u) == 0; }

struct ComboOdometer {
    const PieceTable& pt;
    std::vector<int> pos;
    explicit ComboOdometer(const PieceTable& pt) : pt(pt), pos(pt.slots.size(), 0) {}
    bool next() {
        size_t k = 0;
        while (k < pos.size()) {
            if (++pos[k] < static_cast<int>(pt.slots[k].supported.size())) return true;
            pos[k] = 0;
            ++k;
        }
        return false;
    }
};

struct AlphaTable {
    std::vector<double> powp, powq;
    int ne;
    AlphaTable(int ne, double p) : ne(ne) {
        powp.assign(static_cast<size_t>(ne) + 1, 1.0);
        powq.assign(static_cast<size_t>(ne) + 1, 1.0);
        for (int i = 1; i <= ne; ++i) {
            powp[static_cast<size_t>(i)] = powp[static_cast<size_t>(i - 1)] * p;
            powq[static_cast<size_t>(i)] = powq[static_cast<size_t>(i - 1)] * (1.0 - p);
        }
    }
    double alpha(std::uint32_t mask) const {
        const int open = std::popcount(mask);
        return powp[static_cast<size_t>(open)] * powq[static_cast<size_t>(ne - open)];
    }
};

void apply_mask(UnionFind& uf, const PieceTable& pt, std::uint32_t mask) {
    for (size_t e = 0; e < pt.edges.size(); ++e)
        if (mask & (1u << e)) uf.unite(pt.edges[e].first, pt.edges[e].second);
}

void apply_slot(UnionFind& uf, const SlotT& sl, int supported_pos) {
    for (auto [a, b] :
         sl.unions[static_cast<size_t>(sl.supported[static_cast<size_t>(supported_pos)])])
        uf.unite(a, b);
}

double combo_weight(const PieceTable& pt, const std::vector<std::vector<double>>& x,
                    const std::vector<int>& pos) {
    double w = 1.0;
    for (size_t k = 0; k < pt.slots.size(); ++k) {
        const SlotT& sl = pt.slots[k];
        w *= x[static_cast<size_t>(sl.child_model)]
              [static_cast<size_t>(sl.supported[static_cast<size_t>(pos[k])])];
    }
    return w;
}

}  // namespace

struct Engine::Impl {
    TreeStructure s;
    SolverOptions opt;
    std::map<int, std::unique_ptr<PartitionTable>> tables_by_n;
    std::vector<PieceTable> models;
    PieceTable root;
    std::vector<std::vector<int>> support;

    const PartitionTable& table(int n) {
        auto it = tables_by_n.find(n);
        if (it == tables_by_n.end())
            it = tables_by_n.emplace(n, std::make_unique<PartitionTable>(n)).first;
        return *it->second;
    }

    void build();
    void compute_support();
    void fill_unions(PieceTable& pt);

    std::vector<double> psi(int j, double p, const std::vector<std::vector<double>>& x) const;
    PartitionDistribution fixed_point(
        double p, const std::function<void(const PartitionDistribution&)>& cb) const;

    // Weighted transition laws for several parent colors of one piece at
    // once. For the root pass parents = {} (the virtual origin sits at the
    // root origin).
    std::vector<std::vector<SlotLaw>> laws(const PieceTable& pt, double p,
                                           const std::vector<std::vector<double>>& x,
                                           const std::vector<Color>& parents) const;

    // Structurally possible child colors per slot for one parent color.
    std::vector<std::vector<Color>> structural_colors(const PieceTable& pt,
                                                      const Color* parent) const;

    std::pair<double, double> rho_det(double p, const ColorSpace& colors) const;
    Matrix build_matrix(double p, const std::vector<std::vector<double>>& x,
                        const ColorSpace& colors) const;
};

void Engine::Impl::fill_unions(PieceTable& pt) {
    for (auto& sl : pt.slots) {
        const PartitionTable& ct = table(static_cast<int>(sl.attach.size()));
        sl.unions.resize(static_cast<size_t>(ct.size()));
        for (int zi = 0; zi < ct.size(); ++zi) {
            const Partition& z = ct.at(zi);
            auto& pairs = sl.unions[static_cast<size_t>(zi)];
            for (int b = 0; b < z.block_count(); ++b) {
                int first = -1;
                for (int i = 0; i < z.size(); ++i) {
                    if (z.rgs[static_cast<size_t>(i)] != b) continue;
                    if (first < 0)
                        first = i;
                    else
                        pairs.push_back({sl.attach[static_cast<size_t>(first)],
                                         sl.attach[static_cast<size_t>(i)]});
                }
            }
        }
    }
}

void Engine::Impl::build() {
    auto rep = validate(s);
    if (!rep.ok()) throw std::invalid_argument("invalid structure\n" + rep.to_string());

    auto check_guards = [](const std::string& name, size_t nedges, size_t nborder) {
        if (nedges > kMaxPieceEdges)
            throw GuardError("piece '" + name + "' has " + std::to_string(nedges) +
                             " edges; the 2^|E| enumeration is limited to |E| <= " +
                             std::to_string(kMaxPieceEdges) + " (was enlarge over-applied?)");
        if (nborder > kMaxBorder)
            throw GuardError("piece '" + name + "' has border size " + std::to_string(nborder) +
                             "; limited to " + std::to_string(kMaxBorder));
    };

    models.resize(s.models.size());
    for (size_t j = 0; j < s.models.size(); ++j) {
        const ModelPiece& m = s.models[j];
        check_guards(m.name, m.edges.size(), m.border.size());
        PieceTable& pt = models[j];
        pt.name = m.name;
        pt.verts = m.vertices;
        pt.edges = m.edges;
        pt.border = m.border;
        pt.btab = &table(static_cast<int>(m.border.size()));
        pt.diag = pt.btab->diagonal_index();
        for (const auto& c : m.children) {
            SlotT sl;
            sl.child_model = s.model_index(c.model);
            sl.attach = c.attach;
            pt.slots.push_back(std::move(sl));
        }
        fill_unions(pt);
    }
    check_guards(s.root.name, s.root.edges.size(), 1);
    root.name = s.root.name;
    root.verts = s.root.vertices;
    root.edges = s.root.edges;
    root.origin = s.root.origin;
    for (const auto& c : s.root.children) {
        SlotT sl;
        sl.child_model = s.model_index(c.model);
        sl.attach = c.attach;
        root.slots.push_back(std::move(sl));
    }
    fill_unions(root);

    compute_support();

    auto combo_guard = [](const PieceTable& pt) {
        long prod = 1;
        for (const auto& sl : pt.slots) {
            prod *= static_cast<long>(sl.supported.size());
            if (prod > kMaxComboProduct)
                throw GuardError("piece '" + pt.name +
                                 "' exceeds the supported-partition combination guard (2^20); "
                                 "was enlarge over-applied?");
        }
    };
    for (const auto& pt : models) combo_guard(pt);
    combo_guard(root);
}

void Engine::Impl::compute_support() {
    const size_t nm = models.size();
    support.assign(nm, {});
    std::vector<std::set<int>> cur(nm);
    for (size_t j = 0; j < nm; ++j) cur[j].insert(models[j].diag);

    // least fixed point: grow supported sets until stable
    UnionFind uf_mask, uf;
    bool changed = true;
    int sweeps = 0;
    while (changed) {
        if (++sweeps > 10000) throw GuardError("partition support computation did not stabilize");
        changed = false;
        for (size_t j = 0; j < nm; ++j) {
            PieceTable& pt = models[j];
            long prod = 1;
            for (auto& sl : pt.slots) {
                sl.supported.assign(cur[static_cast<size_t>(sl.child_model)].begin(),
                                    cur[static_cast<size_t>(sl.child_model)].end());
                prod *= static_cast<long>(sl.supported.size());
                if (prod > kMaxComboProduct)
                    throw GuardError("piece '" + pt.name +
                                     "' exceeds the supported-partition combination guard (2^20)");
            }
            std::set<int> next = cur[j];
            const std::uint32_t nmask = 1u << pt.edges.size();
            for (std::uint32_t mask = 0; mask < nmask; ++mask) {
                uf_mask.reset(pt.verts);
                apply_mask(uf_mask, pt, mask);
                ComboOdometer odo(pt);
                do {
                    uf.copy_from(uf_mask);
                    for (size_t k = 0; k < pt.slots.size(); ++k)
                        apply_slot(uf, pt.slots[k], odo.pos[k]);
                    next.insert(pt.btab->index_of_key(read_partition_key(uf, pt.border)));
                } while (odo.next());
            }
            if (next != cur[j]) {
                cur[j] = std::move(next);
                changed = true;
            }
        }
    }
    for (size_t j = 0; j < nm; ++j) support[j].assign(cur[j].begin(), cur[j].end());
    for (size_t j = 0; j < nm; ++j)
        for (auto& sl : models[j].slots)
            sl.supported = support[static_cast<size_t>(sl.child_model)];
    for (auto& sl : root.slots) sl.supported = support[static_cast<size_t>(sl.child_model)];
}

std::vector<double> Engine::Impl::psi(int j, double p,
                                      const std::vector<std::vector<double>>& x) const {
    const PieceTable& pt = models[static_cast<size_t>(j)];
    std::vector<NeumaierSum> acc(static_cast<size_t>(pt.btab->size()));
    UnionFind uf_mask, uf;
    const AlphaTable at(static_cast<int>(pt.edges.size()), p);
    const std::uint32_t nmask = 1u << pt.edges.size();
    for (std::uint32_t mask = 0; mask < nmask; ++mask) {
        const double alpha = at.alpha(mask);
        if (alpha == 0.0) continue;
        uf_mask.reset(pt.verts);
        apply_mask(uf_mask, pt, mask);
        ComboOdometer odo(pt);
        do {
            const double w = alpha * combo_weight(pt, x, odo.pos);
            if (w == 0.0) continue;
            uf.copy_from(uf_mask);
            for (size_t k = 0; k < pt.slots.size(); ++k) apply_slot(uf, pt.slots[k], odo.pos[k]);
            acc[static_cast<size_t>(pt.btab->index_of_key(read_partition_key(uf, pt.border)))].add(w);
        } while (odo.next());
    }
    std::vector<double> out(acc.size());
    for (size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].value();
    return out;
}

PartitionDistribution Engine::Impl::fixed_point(
    double p, const std::function<void(const PartitionDistribution&)>& cb) const {
    PartitionDistribution d;
    d.x.resize(models.size());
    for (size_t j = 0; j < models.size(); ++j) {
        d.x[j].assign(static_cast<size_t>(models[j].btab->size()), 0.0);
        d.x[j][static_cast<size_t>(models[j].diag)] = 1.0;
    }
    if (cb) cb(d);
    for (long it = 1; it <= opt.max_iter; ++it) {
        std::vector<std::vector<double>> next(models.size());
        double res = 0.0;
        for (size_t j = 0; j < models.size(); ++j) {
            next[j] = psi(static_cast<int>(j), p, d.x);
            // the operator preserves total mass; divide out the rounding
            // drift, which otherwise compounds through the slot products
            NeumaierSum tot;
            for (double v : next[j]) tot.add(v);
            const double t = tot.value();
            if (std::abs(t - 1.0) > 1e-9)
                throw std::logic_error("partition recursion lost probability mass");
            for (auto& v : next[j]) v /= t;
            for (size_t i = 0; i < next[j].size(); ++i)
                res = std::max(res, std::abs(next[j][i] - d.x[j][i]));
        }
        d.x = std::move(next);
        d.residual = res;
        d.iterations = it;
        if (cb) cb(d);
        if (res < opt.fp_tol) {
            d.converged = true;
            return d;
        }
    }
    d.converged = false;
    return d;
}

std::vector<std::vector<SlotLaw>> Engine::Impl::laws(const PieceTable& pt, double p,
                                                     const std::vector<std::vector<double>>& x,
                                                     const std::vector<Color>& parents) const {
    const bool is_root = pt.origin >= 0;
    const int ny = is_root ? 1 : static_cast<int>(parents.size());
    const int ns = static_cast<int>(pt.slots.size());
    const int virt = pt.verts;

    std::vector<std::vector<std::pair<int, int>>> parent_unions;
    if (is_root) {
        parent_unions.push_back({{virt, pt.origin}});
    } else {
        for (const Color& y : parents) parent_unions.push_back(color_unions(pt.border, y, virt));
    }

    struct Bin {
        std::unordered_map<std::uint64_t, NeumaierSum> colors;
        NeumaierSum white;
    };
    std::vector<std::vector<Bin>> bins(static_cast<size_t>(ny),
                                       std::vector<Bin>(static_cast<size_t>(ns)));
    UnionFind uf_mask, uf_base, uf;
    const AlphaTable at(static_cast<int>(pt.edges.size()), p);
    const std::uint32_t nmask = 1u << pt.edges.size();
    for (std::uint32_t mask = 0; mask < nmask; ++mask) {
        const double alpha = at.alpha(mask);
        if (alpha == 0.0) continue;
        uf_mask.reset(pt.verts + 1);
        apply_mask(uf_mask, pt, mask);
        ComboOdometer odo(pt);
        do {
            const double w = alpha * combo_weight(pt, x, odo.pos);
            if (w == 0.0) continue;
            for (int v = 0; v < ns; ++v) {
                uf_base.copy_from(uf_mask);
                for (size_t k = 0; k < pt.slots.size(); ++k)
                    if (static_cast<int>(k) != v) apply_slot(uf_base, pt.slots[k], odo.pos[k]);
                for (int yi = 0; yi < ny; ++yi) {
                    uf.copy_from(uf_base);
                    for (auto [a, b] : parent_unions[static_cast<size_t>(yi)]) uf.unite(a, b);
                    const std::uint64_t key =
                        read_color_key(uf, pt.slots[static_cast<size_t>(v)].attach, virt);
                    Bin& bin = bins[static_cast<size_t>(yi)][static_cast<size_t>(v)];
                    if (color_key_white(key))
                        bin.white.add(w);
                    else
                        bin.colors[key].add(w);
                }
            }
        } while (odo.next());
    }

    std::vector<std::vector<SlotLaw>> out(static_cast<size_t>(ny));
    for (int yi = 0; yi < ny; ++yi)
        for (int v = 0; v < ns; ++v) {
            SlotLaw law;
            law.slot = v;
            law.child_model = pt.slots[static_cast<size_t>(v)].child_model;
            Bin& bin = bins[static_cast<size_t>(yi)][static_cast<size_t>(v)];
            law.white = bin.white.value();
            std::vector<std::uint64_t> keys;
            for (const auto& [key, acc] : bin.colors) keys.push_back(key);
            std::sort(keys.begin(), keys.end());
            const int n = static_cast<int>(pt.slots[static_cast<size_t>(v)].attach.size());
            for (std::uint64_t key : keys)
                law.colors.push_back({color_from_key(key, n), bin.colors[key].value()});
            out[static_cast<size_t>(yi)].push_back(std::move(law));
        }
    return out;
}

std::vector<std::vector<Color>> Engine::Impl::structural_colors(const PieceTable& pt,
                                                                const Color* parent) const {
    const bool is_root = pt.origin >= 0;
    const int ns = static_cast<int>(pt.slots.size());
    const int virt = pt.verts;
    std::vector<std::pair<int, int>> parent_unions =
        is_root ? std::vector<std::pair<int, int>>{{virt, pt.origin}}
                : color_unions(pt.border, *parent, virt);

    std::vector<std::set<std::uint64_t>> found(static_cast<size_t>(ns));
    UnionFind uf_mask, uf;
    const std::uint32_t nmask = 1u << pt.edges.size();
    for (std::uint32_t mask = 0; mask < nmask; ++mask) {
        uf_mask.reset(pt.verts + 1);
        apply_mask(uf_mask, pt, mask);
        for (auto [a, b] : parent_unions) uf_mask.unite(a, b);
        ComboOdometer odo(pt);
        do {
            for (int v = 0; v < ns; ++v) {
                uf.copy_from(uf_mask);
                for (size_t k = 0; k < pt.slots.size(); ++k)
                    if (static_cast<int>(k) != v) apply_slot(uf, pt.slots[k], odo.pos[k]);
                const std::uint64_t key =
                    read_color_key(uf, pt.slots[static_cast<size_t>(v)].attach, virt);
                if (!color_key_white(key)) found[static_cast<size_t>(v)].insert(key);
            }
        } while (odo.next());
    }
    std::vector<std::vector<Color>> out(static_cast<size_t>(ns));
    for (int v = 0; v < ns; ++v) {
        const int n = static_cast<int>(pt.slots[static_cast<size_t>(v)].attach.size());
        for (std::uint64_t key : found[static_cast<size_t>(v)])
            out[static_cast<size_t>(v)].push_back(color_from_key(key, n));
    }
    return out;
}

Engine::Engine(const TreeStructure& s, SolverOptions opt) : impl_(std::make_unique<Impl>()) {
    impl_->s = s;
    impl_->opt = opt;
    impl_->build();
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;

const TreeStructure& Engine::structure() const { return impl_->s; }
const SolverOptions& Engine::options() const { return impl_->opt; }
const std::vector<std::vector<int>>& Engine::partition_support() const { return impl_->support; }

PartitionDistribution Engine::partition_distribution(
    double p, const std::function<void(const PartitionDistribution&)>& per_iteration) const {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must be in [0,1]");
    return impl_->fixed_point(p, per_iteration);
}

ColorSpace Engine::reachable_colors() const {
    ColorSpace cs;
    std::set<std::pair<int, std::uint64_t>> seen;
    std::vector<ColorKey> queue;

    auto add = [&](int model, const Color& c) {
        if (seen.insert({model, color_key(c)}).second) {
            cs.types.push_back({model, c});
            queue.push_back({model, c});
        }
    };

    auto root_colors = impl_->structural_colors(impl_->root, nullptr);
    for (size_t v = 0; v < root_colors.size(); ++v)
        for (const Color& c : root_colors[v]) add(impl_->root.slots[v].child_model, c);

    for (size_t qi = 0; qi < queue.size(); ++qi) {
        ColorKey key = queue[qi];
        const PieceTable& pt = impl_->models[static_cast<size_t>(key.model)];
        auto per_slot = impl_->structural_colors(pt, &key.color);
        for (size_t v = 0; v < per_slot.size(); ++v)
            for (const Color& c : per_slot[v]) add(pt.slots[v].child_model, c);
    }
    return cs;
}

Matrix Engine::Impl::build_matrix(double p, const std::vector<std::vector<double>>& x,
                                  const ColorSpace& colors) const {
    const int n = colors.size();
    Matrix M(n);
    std::map<int, std::vector<int>> by_model;
    for (int a = 0; a < n; ++a) by_model[colors.types[static_cast<size_t>(a)].model].push_back(a);
    for (const auto& [j, rows] : by_model) {
        std::vector<Color> parents;
        for (int a : rows) parents.push_back(colors.types[static_cast<size_t>(a)].color);
        auto all = laws(models[static_cast<size_t>(j)], p, x, parents);
        for (size_t yi = 0; yi < rows.size(); ++yi)
            for (const SlotLaw& law : all[yi])
                for (const auto& [c, w] : law.colors) {
                    const int b = colors.index_of(law.child_model, c);
                    if (b < 0)
                        throw std::logic_error("transition produced a color outside the closure");
                    M.at(rows[static_cast<size_t>(yi)], b) += w;
                }
    }
    return M;
}

MomentMatrix Engine::moment_matrix(double p, const PartitionDistribution& dist,
                                   const ColorSpace& colors) const {
    return impl_->build_matrix(p, dist.x, colors);
}

std::vector<SlotLaw> Engine::slot_laws(double p, const PartitionDistribution& dist, int model,
                                       const Color& parent) const {
    auto all = impl_->laws(impl_->models.at(static_cast<size_t>(model)), p, dist.x, {parent});
    return all.at(0);
}

std::vector<SlotLaw> Engine::root_laws(double p, const PartitionDistribution& dist) const {
    auto all = impl_->laws(impl_->root, p, dist.x, {});
    return all.at(0);
}

std::vector<double> Engine::initial_measure(double p, const PartitionDistribution& dist,
                                            const ColorSpace& colors) const {
    std::vector<double> nu(static_cast<size_t>(colors.size()), 0.0);
    for (const SlotLaw& law : root_laws(p, dist))
        for (const auto& [c, w] : law.colors) {
            int b = colors.index_of(law.child_model, c);
            if (b >= 0) nu[static_cast<size_t>(b)] += w;
        }
    return nu;
}

std::pair<double, double> Engine::Impl::rho_det(double p, const ColorSpace& colors) const {
    PartitionDistribution d = fixed_point(p, {});
    if (!d.converged)
        throw ConvergenceError("partition fixed point did not converge within " +
                               std::to_string(opt.max_iter) +
                               " iterations at p = " + std::to_string(p));
    Matrix M = build_matrix(p, d.x, colors);
    return {spectral_radius(M), det_minus_identity(M)};
}

PcResult Engine::critical_probability() const {
    PcResult out;
    ColorSpace colors = reachable_colors();
    if (colors.size() == 0) {
        out.pc = 1.0;
        out.no_subcritical_root = true;
        out.empty_color_space = true;
        out.bracket_lo = out.bracket_hi = 1.0;
        out.det_at_pc = 1.0;
        return out;
    }

    const int grid = impl_->opt.grid;
    int cross = -1;  // first grid index with rho > 1
    for (int i = 1; i < grid; ++i) {
        const double p = static_cast<double>(i) / grid;
        auto [rho, det] = impl_->rho_det(p, colors);
        out.scan.push_back({p, rho, det});
        if (cross < 0 && rho > 1.0) cross = i;
    }

    if (cross < 0) {
        out.pc = 1.0;
        out.no_subcritical_root = true;
        out.bracket_lo = static_cast<double>(grid - 1) / grid;
        out.bracket_hi = 1.0;
        out.det_at_pc = out.scan.empty() ? 1.0 : out.scan.back().det_residual;
        return out;
    }

    double lo = static_cast<double>(cross - 1) / grid;
    double hi = static_cast<double>(cross) / grid;
    while (hi - lo > impl_->opt.pc_tol) {
        const double mid = 0.5 * (lo + hi);
        auto [rho, det] = impl_->rho_det(mid, colors);
        if (rho > 1.0)
            hi = mid;
        else
            lo = mid;
    }
    out.pc = 0.5 * (lo + hi);
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    out.no_subcritical_root = false;
    out.det_at_pc = impl_->rho_det(out.pc, colors).second;
    return out;
}

GrowthProfile Engine::growth_profile(double p, int generations) const {
    GrowthProfile g;
    ColorSpace colors = reachable_colors();
    PartitionDistribution d = partition_distribution(p);
    if (!d.converged) throw ConvergenceError("partition fixed point did not converge");
    MomentMatrix M = moment_matrix(p, d, colors);
    std::vector<double> cur = initial_measure(p, d, colors);
    for (int n = 0; n <= generations; ++n) {
        double tot = 0.0;
        for (double v : cur) tot += v;
        g.per_generation.push_back(cur);
        g.totals.push_back(tot);
        std::vector<double> next(cur.size(), 0.0);
        for (int a = 0; a < M.n; ++a)
            for (int b = 0; b < M.n; ++b)
                next[static_cast<size_t>(b)] += cur[static_cast<size_t>(a)] * M.at(a, b);
        cur = std::move(next);
    }
    return g;
}

}  // namespace perctree
