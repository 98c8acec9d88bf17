#include "decmetrics/claims.hpp"

#include "decmetrics/errors.hpp"
#include "decmetrics/io.hpp"
#include "decmetrics/text.hpp"

#include <set>

namespace decmetrics {

Claim::Claim(std::string_view raw) : text_(text::trim(raw)) {
    if (text_.empty()) throw ValidationError("claim text is empty");
    if (text_.find(kAnswerOpen) != std::string::npos ||
        text_.find(kAnswerClose) != std::string::npos)
        throw ValidationError("claim text contains an answer-block delimiter: " + text_);
}

std::vector<std::string> texts(const std::vector<Claim>& claims) {
    std::vector<std::string> out;
    out.reserve(claims.size());
    for (const auto& c : claims) out.push_back(c.text());
    return out;
}

std::vector<Claim> to_claims(const std::vector<std::string>& raw) {
    std::vector<Claim> out;
    out.reserve(raw.size());
    for (const auto& t : raw) out.emplace_back(t);
    return out;
}

NodePath NodePath::child(std::size_t i) const {
    NodePath p = *this;
    p.indices.push_back(i);
    return p;
}

bool NodePath::is_strict_ancestor_of(const NodePath& other) const {
    if (indices.size() >= other.indices.size()) return false;
    for (std::size_t i = 0; i < indices.size(); ++i)
        if (indices[i] != other.indices[i]) return false;
    return true;
}

std::string NodePath::to_string() const {
    if (indices.empty()) return "root";
    std::string s;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) s.push_back('.');
        s += std::to_string(indices[i]);
    }
    return s;
}

DecompositionTree::DecompositionTree(Claim claim, std::vector<DecompositionTree> children)
    : claim_(std::move(claim)), children_(std::move(children)) {
    if (children_.size() == 1)
        throw ValidationError("internal node has a single child: " + claim_.text());
}

std::size_t DecompositionTree::node_count() const {
    std::size_t n = 1;
    for (const auto& c : children_) n += c.node_count();
    return n;
}

std::size_t DecompositionTree::depth() const {
    std::size_t d = 0;
    for (const auto& c : children_) d = std::max(d, c.depth() + 1);
    return d;
}

const DecompositionTree& node_at(const DecompositionTree& tree, const NodePath& at) {
    const DecompositionTree* node = &tree;
    for (std::size_t i : at.indices) {
        if (i >= node->children().size())
            throw AddressError("path " + at.to_string() + " is out of range");
        node = &node->children()[i];
    }
    return *node;
}

namespace {
void preorder(const DecompositionTree& node, NodePath& path, const NodeVisitor& visit) {
    visit(path, node);
    for (std::size_t i = 0; i < node.children().size(); ++i) {
        path.indices.push_back(i);
        preorder(node.children()[i], path, visit);
        path.indices.pop_back();
    }
}
} // namespace

void visit_preorder(const DecompositionTree& tree, const NodeVisitor& visit) {
    NodePath path;
    preorder(tree, path, visit);
}

std::vector<AtomicClaim> leaves(const DecompositionTree& tree) {
    std::vector<AtomicClaim> out;
    visit_preorder(tree, [&](const NodePath&, const DecompositionTree& n) {
        if (n.is_leaf()) out.push_back(n.claim());
    });
    return out;
}

std::vector<Claim> descendants(const DecompositionTree& tree, const NodePath& at) {
    const auto& node = node_at(tree, at);
    std::vector<Claim> out;
    visit_preorder(node, [&](const NodePath& p, const DecompositionTree& n) {
        if (!p.is_root()) out.push_back(n.claim());
    });
    return out;
}

std::vector<DecompositionTree> enumerate_subtrees(const DecompositionTree& tree) {
    std::vector<DecompositionTree> out;
    visit_preorder(tree, [&](const NodePath&, const DecompositionTree& n) {
        if (!n.is_leaf()) out.push_back(n);
    });
    return out;
}

std::vector<NodePath> leaf_paths(const DecompositionTree& tree) {
    std::vector<NodePath> out;
    visit_preorder(tree, [&](const NodePath& p, const DecompositionTree& n) {
        if (n.is_leaf()) out.push_back(p);
    });
    return out;
}

std::vector<NodePath> descendant_paths(const DecompositionTree& tree, const NodePath& at) {
    const auto& node = node_at(tree, at);
    std::vector<NodePath> out;
    visit_preorder(node, [&](const NodePath& p, const DecompositionTree&) {
        if (p.is_root()) return;
        NodePath full = at;
        full.indices.insert(full.indices.end(), p.indices.begin(), p.indices.end());
        out.push_back(std::move(full));
    });
    return out;
}

std::vector<NodePath> internal_node_paths(const DecompositionTree& tree) {
    std::vector<NodePath> out;
    visit_preorder(tree, [&](const NodePath& p, const DecompositionTree& n) {
        if (!n.is_leaf()) out.push_back(p);
    });
    return out;
}

nlohmann::json tree_to_json(const DecompositionTree& tree) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : tree.children()) children.push_back(tree_to_json(c));
    return {{"claim", tree.claim().text()}, {"children", std::move(children)}};
}

DecompositionTree tree_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("tree node must be an object");
    auto claim_it = j.find("claim");
    if (claim_it == j.end() || !claim_it->is_string())
        throw ValidationError("tree node needs a string \"claim\"");
    auto children_it = j.find("children");
    if (children_it == j.end() || !children_it->is_array())
        throw ValidationError("tree node needs a \"children\" array");
    std::vector<DecompositionTree> children;
    children.reserve(children_it->size());
    for (const auto& c : *children_it) children.push_back(tree_from_json(c));
    return DecompositionTree(Claim(claim_it->get<std::string>()), std::move(children));
}

TreeFormat parse_tree_format(std::string_view name) {
    if (name == "tree-json") return TreeFormat::Json;
    if (name == "tree-jsonl") return TreeFormat::Jsonl;
    throw ValidationError("unknown tree format: " + std::string(name));
}

namespace {
TreeRecord record_from_json(const nlohmann::json& j, std::string fallback_id) {
    std::string id = std::move(fallback_id);
    if (j.is_object() && j.contains("id")) {
        if (!j["id"].is_string() || text::trim(j["id"].get<std::string>()).empty())
            throw ValidationError("tree \"id\" must be a non-empty string");
        id = j["id"].get<std::string>();
    }
    return {std::move(id), tree_from_json(j)};
}
} // namespace

std::vector<TreeRecord> load_trees(const std::filesystem::path& path, TreeFormat format) {
    std::vector<TreeRecord> out;
    if (format == TreeFormat::Json) {
        try {
            out.push_back(record_from_json(nlohmann::json::parse(io::read_file(path)),
                                           path.stem().string()));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ": " + e.what());
        }
        return out;
    }
    std::set<std::string> seen;
    for (const auto& line : io::read_nonblank_lines(path)) {
        auto where = path.string() + ":" + std::to_string(line.number);
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line.text),
                                           "tree-" + std::to_string(line.number)));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (!seen.insert(out.back().id).second)
            throw ValidationError(where + ": duplicate tree id " + out.back().id);
    }
    return out;
}

std::string trees_to_jsonl(const std::vector<TreeRecord>& trees) {
    std::string out;
    for (const auto& t : trees) {
        nlohmann::json j = tree_to_json(t.tree);
        nlohmann::json row = {{"id", t.id}};
        row.update(j);
        out += row.dump();
        out.push_back('\n');
    }
    return out;
}

} // namespace decmetrics
