#include "perctree/structure.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace perctree {

using ordered_json = nlohmann::ordered_json;

int TreeStructure::model_index(std::string_view name) const {
    for (size_t i = 0; i < models.size(); ++i)
        if (models[i].name == name) return static_cast<int>(i);
    return -1;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& e : errors) os << "error: " << e << '\n';
    for (const auto& w : warnings) os << "warning: " << w << '\n';
    return os.str();
}

namespace {

void check_edges(const std::string& who, int verts,
                 const std::vector<std::pair<int, int>>& edges,
                 std::vector<std::string>& errors) {
    std::set<std::pair<int, int>> seen;
    for (size_t k = 0; k < edges.size(); ++k) {
        auto [a, b] = edges[k];
        if (a < 0 || a >= verts || b < 0 || b >= verts) {
            errors.push_back(who + ": edge " + std::to_string(k) + " endpoint out of range");
            continue;
        }
        if (a == b) {
            errors.push_back(who + ": edge " + std::to_string(k) + " is a self-loop");
            continue;
        }
        auto key = std::minmax(a, b);
        if (!seen.insert(key).second)
            errors.push_back(who + ": duplicate edge (" + std::to_string(a) + "," +
                             std::to_string(b) + ")");
    }
}

void check_index_list(const std::string& who, const std::string& field, int verts,
                      const std::vector<int>& xs, std::vector<std::string>& errors) {
    std::set<int> seen;
    for (int v : xs) {
        if (v < 0 || v >= verts) {
            errors.push_back(who + ": " + field + " index " + std::to_string(v) +
                             " out of range (vertices = " + std::to_string(verts) + ")");
        } else if (!seen.insert(v).second) {
            errors.push_back(who + ": " + field + " has repeated index " + std::to_string(v));
        }
    }
}

void check_slots(const TreeStructure& s, const std::string& who, int verts,
                 const std::vector<ChildSlot>& slots, std::vector<std::string>& errors) {
    for (size_t k = 0; k < slots.size(); ++k) {
        const auto& c = slots[k];
        const std::string where = who + ": child " + std::to_string(k);
        int m = s.model_index(c.model);
        if (m < 0) {
            errors.push_back(where + ": unresolved model reference '" + c.model + "'");
        } else if (c.attach.size() != s.models[static_cast<size_t>(m)].border.size()) {
            errors.push_back(where + ": attach size " + std::to_string(c.attach.size()) +
                             " does not match border size " +
                             std::to_string(s.models[static_cast<size_t>(m)].border.size()) +
                             " of model '" + c.model + "'");
        }
        check_index_list(where, "attach", verts, c.attach, errors);
    }
}

int component_count(int verts, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> comp(static_cast<size_t>(verts), -1);
    std::vector<std::vector<int>> adj(static_cast<size_t>(verts));
    for (auto [a, b] : edges) {
        if (a >= 0 && a < verts && b >= 0 && b < verts) {
            adj[static_cast<size_t>(a)].push_back(b);
            adj[static_cast<size_t>(b)].push_back(a);
        }
    }
    int ncomp = 0;
    std::vector<int> stack;
    for (int v0 = 0; v0 < verts; ++v0) {
        if (comp[static_cast<size_t>(v0)] >= 0) continue;
        comp[static_cast<size_t>(v0)] = ncomp;
        stack.push_back(v0);
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[static_cast<size_t>(v)])
                if (comp[static_cast<size_t>(w)] < 0) {
                    comp[static_cast<size_t>(w)] = ncomp;
                    stack.push_back(w);
                }
        }
        ++ncomp;
    }
    return ncomp;
}

}  // namespace

ValidationReport validate(const TreeStructure& s) {
    ValidationReport rep;
    auto& errors = rep.errors;

    if (s.models.empty()) errors.push_back("structure has no models");
    std::set<std::string> names;
    for (const auto& m : s.models)
        if (!names.insert(m.name).second)
            errors.push_back("duplicate model name '" + m.name + "'");

    for (const auto& m : s.models) {
        const std::string who = "model '" + m.name + "'";
        if (m.vertices <= 0) {
            errors.push_back(who + ": vertex count must be positive");
            continue;
        }
        check_edges(who, m.vertices, m.edges, errors);
        if (m.border.empty()) errors.push_back(who + ": border is empty");
        check_index_list(who, "border", m.vertices, m.border, errors);
        check_slots(s, who, m.vertices, m.children, errors);
        if (component_count(m.vertices, m.edges) > 1)
            rep.warnings.push_back(who + " has more than one component");
    }

    const std::string rwho = "root '" + s.root.name + "'";
    if (s.root.vertices <= 0) {
        errors.push_back(rwho + ": vertex count must be positive");
    } else {
        check_edges(rwho, s.root.vertices, s.root.edges, errors);
        if (s.root.origin < 0 || s.root.origin >= s.root.vertices)
            errors.push_back(rwho + ": origin out of range");
        check_slots(s, rwho, s.root.vertices, s.root.children, errors);
        if (component_count(s.root.vertices, s.root.edges) > 1)
            rep.warnings.push_back(rwho + " has more than one component");
    }

    // Reachability and finiteness of the unfolding. The unfolded graph is
    // infinite iff some model on a directed cycle of the child-reference
    // digraph is reachable from the root.
    if (errors.empty()) {
        const int n = static_cast<int>(s.models.size());
        std::vector<std::set<int>> out(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j)
            for (const auto& c : s.models[static_cast<size_t>(j)].children)
                out[static_cast<size_t>(j)].insert(s.model_index(c.model));
        std::vector<char> reach(static_cast<size_t>(n), 0);
        std::vector<int> stack;
        for (const auto& c : s.root.children) {
            int m = s.model_index(c.model);
            if (m >= 0 && !reach[static_cast<size_t>(m)]) {
                reach[static_cast<size_t>(m)] = 1;
                stack.push_back(m);
            }
        }
        while (!stack.empty()) {
            int j = stack.back();
            stack.pop_back();
            for (int k : out[static_cast<size_t>(j)])
                if (!reach[static_cast<size_t>(k)]) {
                    reach[static_cast<size_t>(k)] = 1;
                    stack.push_back(k);
                }
        }
        for (int j = 0; j < n; ++j)
            if (!reach[static_cast<size_t>(j)])
                rep.warnings.push_back("model '" + s.models[static_cast<size_t>(j)].name +
                                       "' is unreachable from the root");
        // longest-path check: a reachable cycle makes the unfolding infinite
        bool infinite = false;
        std::vector<int> state(static_cast<size_t>(n), 0);  // 0 new, 1 active, 2 done
        std::vector<std::pair<int, int>> dfs;
        for (int j0 = 0; j0 < n && !infinite; ++j0) {
            if (!reach[static_cast<size_t>(j0)] || state[static_cast<size_t>(j0)] != 0) continue;
            dfs.push_back({j0, 0});
            state[static_cast<size_t>(j0)] = 1;
            while (!dfs.empty() && !infinite) {
                auto& [j, it] = dfs.back();
                std::vector<int> outs(out[static_cast<size_t>(j)].begin(),
                                      out[static_cast<size_t>(j)].end());
                if (it >= static_cast<int>(outs.size())) {
                    state[static_cast<size_t>(j)] = 2;
                    dfs.pop_back();
                    continue;
                }
                int k = outs[static_cast<size_t>(it++)];
                if (state[static_cast<size_t>(k)] == 1) infinite = true;
                else if (state[static_cast<size_t>(k)] == 0) {
                    state[static_cast<size_t>(k)] = 1;
                    dfs.push_back({k, 0});
                }
            }
        }
        if (!infinite)
            errors.push_back("finite unfolding: no model reachable from the root lies on a "
                             "child-reference cycle");
    }

    return rep;
}

namespace {

// Merged copy of `child` placed inside a host piece: border vertices map to
// the slot's attach vertices, the rest get fresh ids starting at next_free.
struct EmbeddedChild {
    std::vector<int> vertex_map;  // child-local id -> host id
    int next_free;
};

EmbeddedChild embed_child(const ModelPiece& child, const ChildSlot& slot, int next_free) {
    EmbeddedChild out;
    out.vertex_map.assign(static_cast<size_t>(child.vertices), -1);
    for (size_t k = 0; k < child.border.size(); ++k)
        out.vertex_map[static_cast<size_t>(child.border[k])] = slot.attach[k];
    for (int v = 0; v < child.vertices; ++v)
        if (out.vertex_map[static_cast<size_t>(v)] < 0) out.vertex_map[static_cast<size_t>(v)] = next_free++;
    out.next_free = next_free;
    return out;
}

}  // namespace

TreeStructure enlarge(const TreeStructure& s) {
    auto rep = validate(s);
    if (!rep.ok())
        throw std::invalid_argument("enlarge: invalid structure\n" + rep.to_string());

    TreeStructure out;
    out.name = s.name;
    out.root = s.root;  // unchanged; its slots re-resolve to the merged models

    for (const auto& m : s.models) {
        ModelPiece big;
        big.name = m.name;
        big.border = m.border;
        big.edges = m.edges;
        int next_free = m.vertices;
        for (const auto& slot : m.children) {
            const ModelPiece& child = s.model(s.model_index(slot.model));
            EmbeddedChild em = embed_child(child, slot, next_free);
            next_free = em.next_free;
            for (auto [a, b] : child.edges)
                big.edges.push_back({em.vertex_map[static_cast<size_t>(a)],
                                     em.vertex_map[static_cast<size_t>(b)]});
            for (const auto& g : child.children) {
                ChildSlot ns;
                ns.model = g.model;
                for (int v : g.attach) ns.attach.push_back(em.vertex_map[static_cast<size_t>(v)]);
                big.children.push_back(std::move(ns));
            }
        }
        big.vertices = next_free;
        out.models.push_back(std::move(big));
    }
    return out;
}

namespace {

std::pair<int, int> line_col(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::vector<std::pair<int, int>> parse_edges(const ordered_json& j, const std::string& who) {
    std::vector<std::pair<int, int>> out;
    if (!j.is_array()) throw ParseError(who + ": 'edges' must be an array", 0, 0);
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer())
            throw ParseError(who + ": each edge must be a pair of integers", 0, 0);
        out.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    return out;
}

std::vector<int> parse_int_list(const ordered_json& j, const std::string& who,
                                const std::string& field) {
    std::vector<int> out;
    if (!j.is_array()) throw ParseError(who + ": '" + field + "' must be an array", 0, 0);
    for (const auto& e : j) {
        if (!e.is_number_integer())
            throw ParseError(who + ": '" + field + "' must contain integers", 0, 0);
        out.push_back(e.get<int>());
    }
    return out;
}

const ordered_json& need(const ordered_json& j, const char* key, const std::string& who) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(who + ": missing field '" + key + "'", 0, 0);
    return *it;
}

std::vector<ChildSlot> parse_children(const ordered_json& j, const std::string& who) {
    std::vector<ChildSlot> out;
    if (!j.is_array()) throw ParseError(who + ": 'children' must be an array", 0, 0);
    for (const auto& c : j) {
        if (!c.is_object()) throw ParseError(who + ": each child must be an object", 0, 0);
        ChildSlot slot;
        const auto& m = need(c, "model", who);
        if (!m.is_string()) throw ParseError(who + ": child 'model' must be a string", 0, 0);
        slot.model = m.get<std::string>();
        slot.attach = parse_int_list(need(c, "attach", who), who, "attach");
        out.push_back(std::move(slot));
    }
    return out;
}

}  // namespace

TreeStructure parse_structure(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what(),
                         line, col);
    }
    if (!doc.is_object()) throw ParseError("top-level JSON value must be an object", 0, 0);

    TreeStructure s;
    const auto& nm = need(doc, "name", "structure");
    if (!nm.is_string()) throw ParseError("structure: 'name' must be a string", 0, 0);
    s.name = nm.get<std::string>();

    const auto& models = need(doc, "models", "structure");
    if (!models.is_array()) throw ParseError("structure: 'models' must be an array", 0, 0);
    for (const auto& jm : models) {
        if (!jm.is_object()) throw ParseError("each model must be an object", 0, 0);
        ModelPiece m;
        m.name = need(jm, "name", "model").get<std::string>();
        const std::string who = "model '" + m.name + "'";
        const auto& nv = need(jm, "vertices", who);
        if (!nv.is_number_integer()) throw ParseError(who + ": 'vertices' must be an integer", 0, 0);
        m.vertices = nv.get<int>();
        m.edges = parse_edges(need(jm, "edges", who), who);
        m.border = parse_int_list(need(jm, "border", who), who, "border");
        m.children = parse_children(need(jm, "children", who), who);
        s.models.push_back(std::move(m));
    }

    const auto& jr = need(doc, "root", "structure");
    if (!jr.is_object()) throw ParseError("structure: 'root' must be an object", 0, 0);
    s.root.name = need(jr, "name", "root").get<std::string>();
    const std::string who = "root '" + s.root.name + "'";
    const auto& nv = need(jr, "vertices", who);
    if (!nv.is_number_integer()) throw ParseError(who + ": 'vertices' must be an integer", 0, 0);
    s.root.vertices = nv.get<int>();
    s.root.edges = parse_edges(need(jr, "edges", who), who);
    const auto& og = need(jr, "origin", who);
    if (!og.is_number_integer()) throw ParseError(who + ": 'origin' must be an integer", 0, 0);
    s.root.origin = og.get<int>();
    s.root.children = parse_children(need(jr, "children", who), who);
    return s;
}

std::string serialize_structure(const TreeStructure& s) {
    ordered_json doc;
    doc["name"] = s.name;
    doc["models"] = ordered_json::array();
    auto slot_json = [](const ChildSlot& c) {
        ordered_json jc;
        jc["model"] = c.model;
        jc["attach"] = c.attach;
        return jc;
    };
    for (const auto& m : s.models) {
        ordered_json jm;
        jm["name"] = m.name;
        jm["vertices"] = m.vertices;
        jm["edges"] = ordered_json::array();
        for (auto [a, b] : m.edges) jm["edges"].push_back({a, b});
        jm["border"] = m.border;
        jm["children"] = ordered_json::array();
        for (const auto& c : m.children) jm["children"].push_back(slot_json(c));
        doc["models"].push_back(std::move(jm));
    }
    ordered_json jr;
    jr["name"] = s.root.name;
    jr["vertices"] = s.root.vertices;
    jr["edges"] = ordered_json::array();
    for (auto [a, b] : s.root.edges) jr["edges"].push_back({a, b});
    jr["origin"] = s.root.origin;
    jr["children"] = ordered_json::array();
    for (const auto& c : s.root.children) jr["children"].push_back(slot_json(c));
    doc["root"] = std::move(jr);
    return doc.dump(2) + "\n";
}

}  // namespace perctree
