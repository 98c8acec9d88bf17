#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "decmetrics/bench.hpp"
#include "decmetrics/claims.hpp"
#include "decmetrics/decomposer.hpp"
#include "decmetrics/entailment.hpp"
#include "decmetrics/rng.hpp"

namespace decmetrics {

enum class SynthMetric { Completeness, Correctness, SemanticEntropy };
std::string_view to_string(SynthMetric m);
SynthMetric parse_synth_metric(std::string_view s);

// Which atomic claims pair with an internal node.
enum class PairingMode { DirectChildren, LeafFrontier, Both };
PairingMode parse_pairing_mode(std::string_view s);
std::string_view to_string(PairingMode m);

struct LabeledExample {
    SynthMetric metric = SynthMetric::Completeness;
    std::string premise;
    std::string hypothesis;
    Label label = Label::Supported;
    std::string tree_id;
    // Node paths inside tree_id, except for cross-tree negatives whose last
    // path lives in source_tree_id.
    std::vector<NodePath> paths;
    std::string source_tree_id;
};

nlohmann::json example_to_json(const LabeledExample& e);
std::string examples_to_jsonl(const std::vector<LabeledExample>& examples);

struct SynthConfig {
    int negatives_per_positive = 1;
    std::uint64_t seed = 0;
    double split_ratio = 0.8;
    PairingMode pairing_mode = PairingMode::Both;

    void validate() const;
};

// Collects skipped inputs and sampling shortfalls for the run log.
struct SynthNotes {
    std::vector<std::string> messages;
    void add(std::string m) { messages.push_back(std::move(m)); }
};

// Offline fixtures read "<dir>/<entity>.txt"; the Wikipedia source calls
// the REST page-summary endpoint.
class SummarySource {
public:
    virtual ~SummarySource() = default;
    // Throws SummaryNotFoundError, DisambiguationError or BackendError.
    virtual std::string fetch_summary(const std::string& entity) = 0;
};

class FixtureSummaries final : public SummarySource {
public:
    explicit FixtureSummaries(std::filesystem::path dir) : dir_(std::move(dir)) {}
    std::string fetch_summary(const std::string& entity) override;

private:
    std::filesystem::path dir_;
};

class WikipediaSummaries final : public SummarySource {
public:
    explicit WikipediaSummaries(const std::string& base_url = "https://en.wikipedia.org",
                                double timeout_seconds = 30.0, http::RetryPolicy retry = {});
    std::string fetch_summary(const std::string& entity) override;

private:
    http::Client client_;
};

// Number of non-empty proper subsets of m items: 2^m - 2.
std::uint64_t negative_subset_count(std::size_t m);

// Positive: shuffled pairing joined by spaces ⇒ node claim. Negatives drop a
// uniformly random non-empty proper subset (distinct per positive).
std::vector<LabeledExample> gen_completeness_examples(const TreeRecord& tree, const SynthConfig& config,
                                                      Rng& rng, SynthNotes* notes = nullptr);

// Positive: (node, each strict descendant) for every internal node.
// Negatives come from nodes of the same tree that are neither ancestors nor
// descendants, and from every node of the other corpus trees.
std::vector<LabeledExample> gen_correctness_examples(const TreeRecord& tree,
                                                     const std::vector<TreeRecord>& corpus,
                                                     const SynthConfig& config, Rng& rng,
                                                     SynthNotes* notes = nullptr);

// Supported: (ancestor, descendant) among non-root nodes. Unsupported:
// non-root nodes in disjoint subtrees. Each unordered pair at most once.
std::vector<LabeledExample> gen_entropy_examples(const TreeRecord& tree, const SynthConfig& config,
                                                 Rng& rng, SynthNotes* notes = nullptr);

struct TrainEvalSplit {
    std::vector<TreeRecord> train;
    std::vector<TreeRecord> eval;
};

// Seeded shuffle of trees; the first round(ratio * N), clamped to
// [1, N-1], train. Each side keeps input order.
TrainEvalSplit split_train_eval(const std::vector<TreeRecord>& trees, const SynthConfig& config);

struct Rejection {
    std::string id;
    NodePath at;   // node whose check failed
    CheckVerdict verdict;
};

// Completed checks keyed by item id (subtree checks: "<id>@<path>").
// Survives a backend failure so a rerun only asks what is missing.
struct FilterProgress {
    std::map<std::string, CheckVerdict> verdicts;

    std::string to_jsonl() const;
    static FilterProgress from_jsonl(std::string_view jsonl);
};

struct TreeFilterResult {
    std::vector<TreeRecord> kept;
    std::vector<Rejection> rejected;
};

// Root-level check of (root claim, leaves) by default; with subtree_level
// every internal node is checked against its own leaves and the first
// failure rejects the tree.
TreeFilterResult filter_by_reverse_check(const std::vector<TreeRecord>& trees, Decomposer& decomposer,
                                         bool subtree_level = false,
                                         FilterProgress* progress = nullptr, int workers = 1);

struct RecordFilterResult {
    std::vector<DatasetRecord> kept;
    std::vector<Rejection> rejected;
};

// Claim2Atom filtering: reverse_check(claim, atomic_claims) per record.
RecordFilterResult filter_records(const std::vector<DatasetRecord>& records, Decomposer& decomposer,
                                  FilterProgress* progress = nullptr, int workers = 1);

nlohmann::json rejection_to_json(const Rejection& r);

// Entities → summaries → recursive decomposition. Entities whose summary is
// missing, ambiguous, invalid, or does not converge are skipped and noted.
std::vector<TreeRecord> build_trees(const std::vector<std::string>& entities, SummarySource& source,
                                    Decomposer& decomposer, SynthNotes* notes = nullptr,
                                    int workers = 1);

// (claim, atomic claims) rows per internal node and pairing. Ids are
// "<tree>:<path>:<children|leaves>".
std::vector<DatasetRecord> decdata_records(const std::vector<TreeRecord>& trees, Split split,
                                           PairingMode mode);

struct SynthOutput {
    TrainEvalSplit split;
    std::vector<LabeledExample> train_examples;
    std::vector<LabeledExample> eval_examples;
    std::vector<DatasetRecord> decdata;
};

// Split, then generate all three example kinds per side (negatives drawn
// only from the same side), sorted by tree id then node path.
SynthOutput synthesize(const std::vector<TreeRecord>& trees, const SynthConfig& config,
                       SynthNotes* notes = nullptr);

} // namespace decmetrics
