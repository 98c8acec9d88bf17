#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace decmetrics {

inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

// Non-empty, trimmed claim text that can never collide with the answer-block
// delimiters used by the generation prompts.
class Claim {
public:
    // Throws ValidationError.
    explicit Claim(std::string_view text);

    const std::string& text() const noexcept { return text_; }

    friend bool operator==(const Claim&, const Claim&) = default;

private:
    std::string text_;
};

// An atomic claim is a claim sitting at a leaf.
using AtomicClaim = Claim;

std::vector<std::string> texts(const std::vector<Claim>& claims);
std::vector<Claim> to_claims(const std::vector<std::string>& texts);

struct NodePath {
    std::vector<std::size_t> indices;

    bool is_root() const noexcept { return indices.empty(); }
    NodePath child(std::size_t i) const;
    // True when this path is a strict prefix of other.
    bool is_strict_ancestor_of(const NodePath& other) const;
    // "root" or dotted child indices, e.g. "0.1".
    std::string to_string() const;

    friend bool operator==(const NodePath&, const NodePath&) = default;
    friend auto operator<=>(const NodePath&, const NodePath&) = default;
};

class DecompositionTree {
public:
    // Throws ValidationError when given exactly one child.
    explicit DecompositionTree(Claim claim, std::vector<DecompositionTree> children = {});

    const Claim& claim() const noexcept { return claim_; }
    const std::vector<DecompositionTree>& children() const noexcept { return children_; }
    bool is_leaf() const noexcept { return children_.empty(); }

    std::size_t node_count() const;
    std::size_t depth() const;   // a single leaf has depth 0

    friend bool operator==(const DecompositionTree&, const DecompositionTree&) = default;

private:
    Claim claim_;
    std::vector<DecompositionTree> children_;
};

// Resolves a path; throws AddressError when an index is out of range.
const DecompositionTree& node_at(const DecompositionTree& tree, const NodePath& at);

using NodeVisitor = std::function<void(const NodePath&, const DecompositionTree&)>;

// Pre-order, left to right, root included.
void visit_preorder(const DecompositionTree& tree, const NodeVisitor& visit);

std::vector<AtomicClaim> leaves(const DecompositionTree& tree);
std::vector<Claim> descendants(const DecompositionTree& tree, const NodePath& at);
std::vector<DecompositionTree> enumerate_subtrees(const DecompositionTree& tree);

// Same traversals, but reporting where each node sits.
std::vector<NodePath> leaf_paths(const DecompositionTree& tree);
std::vector<NodePath> descendant_paths(const DecompositionTree& tree, const NodePath& at);
std::vector<NodePath> internal_node_paths(const DecompositionTree& tree);

// {"claim": text, "children": [...]}
nlohmann::json tree_to_json(const DecompositionTree& tree);
DecompositionTree tree_from_json(const nlohmann::json& j);

// A tree with the identifier used for provenance. In files, the id is an
// optional "id" member on the root object.
struct TreeRecord {
    std::string id;
    DecompositionTree tree;
};

enum class TreeFormat { Json, Jsonl };

TreeFormat parse_tree_format(std::string_view name);

// Missing ids become "tree-<n>" (1-based line number) for JSONL or the
// file stem for single-tree JSON. Duplicate ids are rejected.
std::vector<TreeRecord> load_trees(const std::filesystem::path& path, TreeFormat format);
std::string trees_to_jsonl(const std::vector<TreeRecord>& trees);

} // namespace decmetrics
