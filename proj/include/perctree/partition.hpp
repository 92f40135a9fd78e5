#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "perctree/structure.hpp"

namespace perctree {

inline constexpr int kMaxBorder = 12;  // Bell(12) = 4,213,597

// Set partition of positions 0..n-1 in canonical restricted-growth form:
// rgs[0] = 0 and rgs[i] <= 1 + max(rgs[0..i-1]).
struct Partition {
    std::vector<std::uint8_t> rgs;

    int size() const { return static_cast<int>(rgs.size()); }
    int block_count() const;
    bool same_block(int a, int b) const { return rgs[static_cast<size_t>(a)] == rgs[static_cast<size_t>(b)]; }

    static Partition diagonal(int n);      // all singletons
    static Partition single_block(int n);  // everything joined

    bool operator==(const Partition&) const = default;
};

// x refines y: every block of x is contained in a block of y.
bool refines(const Partition& x, const Partition& y);

// Partition plus the block connected to the origin (or none = white).
struct Color {
    Partition partition;
    int marked = -1;
    bool white() const { return marked < 0; }
    bool operator==(const Color&) const = default;
};

// 4 bits per position plus the marked block; usable as a hash/ordering key.
std::uint64_t partition_key(const Partition& z);
std::uint64_t color_key(const Color& y);
Color color_from_key(std::uint64_t key, int n);

// All partitions of an n-set in lexicographic rgs order. This order is the
// index space used by every probability vector in the solver.
std::vector<Partition> enumerate_partitions(int n);

class PartitionTable {
  public:
    explicit PartitionTable(int n);
    int n() const { return n_; }
    int size() const { return static_cast<int>(all_.size()); }
    const Partition& at(int idx) const { return all_[static_cast<size_t>(idx)]; }
    const std::vector<Partition>& all() const { return all_; }
    int index_of(const Partition& z) const;
    int index_of_key(std::uint64_t key) const;
    int diagonal_index() const { return diag_; }

  private:
    int n_;
    std::vector<Partition> all_;
    std::unordered_map<std::uint64_t, int> index_;
    int diag_;
};

// Path-halving union-find over a caller-owned buffer; no ranks.
class UnionFind {
  public:
    void reset(int n);
    void copy_from(const UnionFind& other) { parent_ = other.parent_; }
    int find(int v);
    void unite(int a, int b);
    bool same(int a, int b) { return find(a) == find(b); }

  private:
    std::vector<int> parent_;
};

// Read the canonical partition of the listed vertices out of a union-find.
Partition read_partition(UnionFind& uf, std::span<const int> verts);
// Same, plus the block containing `origin_node` (marked = -1 if absent).
Color read_color(UnionFind& uf, std::span<const int> verts, int origin_node);

// Descendant partition of the piece border: union open-edge endpoints and,
// per child slot, attach vertices lying in one block of the child partition.
// open_edges is a bitmask over piece.edges; child_partitions has one entry
// per child slot, over that slot's border positions.
Partition induced_partition(const ModelPiece& piece, std::uint32_t open_edges,
                            std::span<const Partition> child_partitions, UnionFind& uf);

// Color of the child in slot `target`, given the parent piece's color, its
// open edges, and the sibling descendant partitions. sibling_partitions may
// have one entry per slot (the target entry is ignored) or one entry per slot
// except the target (compacted).
Color child_color(const ModelPiece& piece, const Color& parent_color, std::uint32_t open_edges,
                  std::span<const Partition> sibling_partitions, int target, UnionFind& uf);

// Same with the root piece as parent: the virtual origin is the root origin.
Color child_color_from_root(const RootPiece& root, std::uint32_t open_edges,
                            std::span<const Partition> sibling_partitions, int target,
                            UnionFind& uf);

}  // namespace perctree
