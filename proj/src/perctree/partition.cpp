#include "perctree/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace perctree {

int Partition::block_count() const {
    std::uint8_t mx = 0;
    for (auto d : rgs) mx = std::max(mx, d);
    return rgs.empty() ? 0 : mx + 1;
}

Partition Partition::diagonal(int n) {
    Partition z;
    z.rgs.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) z.rgs[static_cast<size_t>(i)] = static_cast<std::uint8_t>(i);
    return z;
}

Partition Partition::single_block(int n) {
    Partition z;
    z.rgs.assign(static_cast<size_t>(n), 0);
    return z;
}

bool refines(const Partition& x, const Partition& y) {
    // x refines y iff positions sharing an x-block share a y-block
    const int n = x.size();
    std::vector<int> block_to_y(static_cast<size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        int bx = x.rgs[static_cast<size_t>(i)];
        if (block_to_y[static_cast<size_t>(bx)] < 0)
            block_to_y[static_cast<size_t>(bx)] = y.rgs[static_cast<size_t>(i)];
        else if (block_to_y[static_cast<size_t>(bx)] != y.rgs[static_cast<size_t>(i)])
            return false;
    }
    return true;
}

std::uint64_t partition_key(const Partition& z) {
    std::uint64_t key = 1;  // sentinel so different lengths never collide
    for (auto d : z.rgs) key = (key << 4) | d;
    return key;
}

std::uint64_t color_key(const Color& y) {
    return (partition_key(y.partition) << 5) | static_cast<std::uint64_t>(y.marked + 1);
}

Color color_from_key(std::uint64_t key, int n) {
    Color y;
    y.marked = static_cast<int>(key & 31u) - 1;
    std::uint64_t pk = key >> 5;
    y.partition.rgs.resize(static_cast<size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        y.partition.rgs[static_cast<size_t>(i)] = static_cast<std::uint8_t>(pk & 15u);
        pk >>= 4;
    }
    return y;
}

std::vector<Partition> enumerate_partitions(int n) {
    if (n < 1 || n > kMaxBorder)
        throw std::invalid_argument("enumerate_partitions: n must be in 1.." +
                                    std::to_string(kMaxBorder));
    std::vector<Partition> out;
    std::vector<std::uint8_t> rgs(static_cast<size_t>(n), 0);
    // lexicographic generation: digit at position i runs 0..1+max(prefix)
    std::vector<std::uint8_t> maxp(static_cast<size_t>(n), 0);
    int i = 0;
    while (true) {
        if (i == n) {
            out.push_back(Partition{rgs});
            --i;
            while (i > 0) {
                std::uint8_t limit = static_cast<std::uint8_t>(maxp[static_cast<size_t>(i - 1)] + 1);
                if (rgs[static_cast<size_t>(i)] < limit) break;
                --i;
            }
            if (i <= 0) break;
            ++rgs[static_cast<size_t>(i)];
            maxp[static_cast<size_t>(i)] =
                std::max(maxp[static_cast<size_t>(i - 1)], rgs[static_cast<size_t>(i)]);
            ++i;
            continue;
        }
        rgs[static_cast<size_t>(i)] = 0;
        maxp[static_cast<size_t>(i)] = i == 0 ? 0 : maxp[static_cast<size_t>(i - 1)];
        ++i;
    }
    return out;
}

PartitionTable::PartitionTable(int n) : n_(n), all_(enumerate_partitions(n)) {
    index_.reserve(all_.size() * 2);
    for (size_t i = 0; i < all_.size(); ++i)
        index_[partition_key(all_[i])] = static_cast<int>(i);
    diag_ = index_of(Partition::diagonal(n));
}

int PartitionTable::index_of(const Partition& z) const {
    return index_of_key(partition_key(z));
}

int PartitionTable::index_of_key(std::uint64_t key) const {
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
}

void UnionFind::reset(int n) {
    parent_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) parent_[static_cast<size_t>(i)] = i;
}

int UnionFind::find(int v) {
    while (parent_[static_cast<size_t>(v)] != v) {
        parent_[static_cast<size_t>(v)] = parent_[static_cast<size_t>(parent_[static_cast<size_t>(v)])];
        v = parent_[static_cast<size_t>(v)];
    }
    return v;
}

void UnionFind::unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<size_t>(b)] = a;
}

Partition read_partition(UnionFind& uf, std::span<const int> verts) {
    Partition z;
    z.rgs.resize(verts.size());
    std::vector<int> roots;
    for (size_t i = 0; i < verts.size(); ++i) {
        int r = uf.find(verts[i]);
        int block = -1;
        for (size_t k = 0; k < roots.size(); ++k)
            if (roots[k] == r) {
                block = static_cast<int>(k);
                break;
            }
        if (block < 0) {
            block = static_cast<int>(roots.size());
            roots.push_back(r);
        }
        z.rgs[i] = static_cast<std::uint8_t>(block);
    }
    return z;
}

Color read_color(UnionFind& uf, std::span<const int> verts, int origin_node) {
    Color y;
    y.partition.rgs.resize(verts.size());
    const int orig = uf.find(origin_node);
    std::vector<int> roots;
    for (size_t i = 0; i < verts.size(); ++i) {
        int r = uf.find(verts[i]);
        int block = -1;
        for (size_t k = 0; k < roots.size(); ++k)
            if (roots[k] == r) {
                block = static_cast<int>(k);
                break;
            }
        if (block < 0) {
            block = static_cast<int>(roots.size());
            roots.push_back(r);
            if (r == orig) y.marked = block;
        }
        y.partition.rgs[i] = static_cast<std::uint8_t>(block);
    }
    return y;
}

namespace {

void apply_open_edges(UnionFind& uf, const std::vector<std::pair<int, int>>& edges,
                      std::uint32_t open) {
    for (size_t k = 0; k < edges.size(); ++k)
        if (open & (1u << k)) uf.unite(edges[k].first, edges[k].second);
}

void apply_slot_partition(UnionFind& uf, const ChildSlot& slot, const Partition& z) {
    if (z.size() != static_cast<int>(slot.attach.size()))
        throw std::invalid_argument("child partition size does not match slot border size");
    // unite attach vertices sharing a block: link each position to the first
    // position of its block
    for (int b = 0; b < z.block_count(); ++b) {
        int first = -1;
        for (int i = 0; i < z.size(); ++i) {
            if (z.rgs[static_cast<size_t>(i)] != b) continue;
            if (first < 0)
                first = i;
            else
                uf.unite(slot.attach[static_cast<size_t>(first)], slot.attach[static_cast<size_t>(i)]);
        }
    }
}

}  // namespace

Partition induced_partition(const ModelPiece& piece, std::uint32_t open_edges,
                            std::span<const Partition> child_partitions, UnionFind& uf) {
    if (child_partitions.size() != piece.children.size())
        throw std::invalid_argument("induced_partition: need one partition per child slot");
    uf.reset(piece.vertices);
    apply_open_edges(uf, piece.edges, open_edges);
    for (size_t k = 0; k < piece.children.size(); ++k)
        apply_slot_partition(uf, piece.children[k], child_partitions[k]);
    return read_partition(uf, piece.border);
}

namespace {

Color child_color_impl(int vertices, const std::vector<std::pair<int, int>>& edges,
                       const std::vector<ChildSlot>& slots, std::span<const int> border,
                       const Color* parent_color, int origin_vertex, std::uint32_t open_edges,
                       std::span<const Partition> sibling_partitions, int target, UnionFind& uf) {
    if (target < 0 || target >= static_cast<int>(slots.size()))
        throw std::invalid_argument("child_color: target slot out of range");
    const bool compact = sibling_partitions.size() + 1 == slots.size();
    if (!compact && sibling_partitions.size() != slots.size())
        throw std::invalid_argument("child_color: sibling partition count mismatch");

    const int virt = vertices;  // virtual origin node
    uf.reset(vertices + 1);
    if (parent_color) {
        const Partition& zp = parent_color->partition;
        if (zp.size() != static_cast<int>(border.size()))
            throw std::invalid_argument("child_color: parent color size mismatch");
        for (int b = 0; b < zp.block_count(); ++b) {
            int first = -1;
            for (int i = 0; i < zp.size(); ++i) {
                if (zp.rgs[static_cast<size_t>(i)] != b) continue;
                if (first < 0)
                    first = i;
                else
                    uf.unite(border[static_cast<size_t>(first)], border[static_cast<size_t>(i)]);
            }
            if (b == parent_color->marked && first >= 0)
                uf.unite(virt, border[static_cast<size_t>(first)]);
        }
    } else {
        uf.unite(virt, origin_vertex);
    }
    apply_open_edges(uf, edges, open_edges);
    for (size_t k = 0, si = 0; k < slots.size(); ++k) {
        if (static_cast<int>(k) == target) {
            if (!compact) ++si;
            continue;
        }
        apply_slot_partition(uf, slots[k], sibling_partitions[si++]);
    }
    return read_color(uf, slots[static_cast<size_t>(target)].attach, virt);
}

}  // namespace

Color child_color(const ModelPiece& piece, const Color& parent_color, std::uint32_t open_edges,
                  std::span<const Partition> sibling_partitions, int target, UnionFind& uf) {
    return child_color_impl(piece.vertices, piece.edges, piece.children, piece.border,
                            &parent_color, -1, open_edges, sibling_partitions, target, uf);
}

Color child_color_from_root(const RootPiece& root, std::uint32_t open_edges,
                            std::span<const Partition> sibling_partitions, int target,
                            UnionFind& uf) {
    return child_color_impl(root.vertices, root.edges, root.children, {}, nullptr, root.origin,
                            open_edges, sibling_partitions, target, uf);
}

}  // namespace perctree
