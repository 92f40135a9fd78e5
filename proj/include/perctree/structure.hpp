#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace perctree {

// Child attachment: the referenced model's border vertices are identified,
// position by position, with `attach` vertices of the enclosing piece.
struct ChildSlot {
    std::string model;
    std::vector<int> attach;
};

struct ModelPiece {
    std::string name;
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;  // unordered pairs, no self-loops
    std::vector<int> border;                 // ordered, nonempty, distinct
    std::vector<ChildSlot> children;
};

// The root piece carries an origin vertex instead of a border.
struct RootPiece {
    std::string name;
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;
    int origin = 0;
    std::vector<ChildSlot> children;
};

// A finite catalog of model pieces plus a root piece; the whole input to the
// engine. Immutable after construction, safe to share across threads.
struct TreeStructure {
    std::string name;
    std::vector<ModelPiece> models;
    RootPiece root;

    int model_index(std::string_view name) const;
    const ModelPiece& model(int idx) const { return models.at(static_cast<size_t>(idx)); }
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
    std::string to_string() const;
};

ValidationReport validate(const TreeStructure& s);

// Merge each model with one generation of its children: the new model keeps
// its border; its children are the old grandchild slots re-indexed into the
// merged vertex set. The root is kept unchanged, so the new tree instantiates
// the original pieces in pairs of generations and
// unfold(enlarge(s), d) == unfold(s, 2d) as rooted graphs.
TreeStructure enlarge(const TreeStructure& s);

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line, int col)
        : std::runtime_error(msg), line(line), col(col) {}
    int line = 0;
    int col = 0;
};

// JSON structure file format; see README. parse keeps unresolved model
// references (validate reports them), but rejects malformed JSON/shape.
TreeStructure parse_structure(const std::string& text);
std::string serialize_structure(const TreeStructure& s);

}  // namespace perctree
