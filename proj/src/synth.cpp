#include "decmetrics/synth.hpp"

#include "decmetrics/errors.hpp"
#include "decmetrics/parallel.hpp"
#include "decmetrics/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <unordered_map>

namespace decmetrics {

std::string_view to_string(SynthMetric m) {
    switch (m) {
    case SynthMetric::Completeness: return "completeness";
    case SynthMetric::Correctness: return "correctness";
    case SynthMetric::SemanticEntropy: return "semantic-entropy";
    }
    return "completeness";
}

SynthMetric parse_synth_metric(std::string_view s) {
    if (s == "completeness") return SynthMetric::Completeness;
    if (s == "correctness") return SynthMetric::Correctness;
    if (s == "semantic-entropy") return SynthMetric::SemanticEntropy;
    throw ValidationError("unknown metric: " + std::string(s));
}

PairingMode parse_pairing_mode(std::string_view s) {
    if (s == "direct-children") return PairingMode::DirectChildren;
    if (s == "leaf-frontier") return PairingMode::LeafFrontier;
    if (s == "both") return PairingMode::Both;
    throw ValidationError("pairing mode must be direct-children, leaf-frontier or both");
}

std::string_view to_string(PairingMode m) {
    switch (m) {
    case PairingMode::DirectChildren: return "direct-children";
    case PairingMode::LeafFrontier: return "leaf-frontier";
    case PairingMode::Both: return "both";
    }
    return "both";
}

nlohmann::json example_to_json(const LabeledExample& e) {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : e.paths) paths.push_back(p.indices);
    nlohmann::json j = {
        {"metric", to_string(e.metric)},
        {"premise", e.premise},
        {"hypothesis", e.hypothesis},
        {"label", to_string(e.label)},
        {"tree_id", e.tree_id},
        {"paths", std::move(paths)},
    };
    if (!e.source_tree_id.empty()) j["source_tree_id"] = e.source_tree_id;
    return j;
}

std::string examples_to_jsonl(const std::vector<LabeledExample>& examples) {
    std::string out;
    for (const auto& e : examples) {
        out += example_to_json(e).dump();
        out.push_back('\n');
    }
    return out;
}

void SynthConfig::validate() const {
    if (negatives_per_positive < 1) throw ValidationError("negatives_per_positive must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw ValidationError("split_ratio must lie strictly between 0 and 1");
}

// --- summaries -------------------------------------------------------------

std::string FixtureSummaries::fetch_summary(const std::string& entity) {
    if (text::trim(entity).empty()) throw ValidationError("entity name is empty");
    if (entity.find('/') != std::string::npos || entity == "." || entity == "..")
        throw ValidationError("entity name cannot be used as a fixture file name: " + entity);
    const auto path = dir_ / (entity + ".txt");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw SummaryNotFoundError("no summary fixture for " + entity);
    std::ifstream in(path, std::ios::binary);
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto summary = text::trim(body);
    if (summary.empty()) throw SummaryNotFoundError("empty summary for " + entity);
    const auto lines = text::split_lines(summary);
    const auto first_line = text::trim(lines.front());
    if (first_line.size() >= 13 && first_line.substr(first_line.size() - 13) == "may refer to:")
        throw DisambiguationError(entity + " is a disambiguation page");
    return std::string(summary);
}

WikipediaSummaries::WikipediaSummaries(const std::string& base_url, double timeout_seconds,
                                       http::RetryPolicy retry)
    : client_(base_url, timeout_seconds, std::move(retry)) {}

std::string WikipediaSummaries::fetch_summary(const std::string& entity) {
    auto title = std::string(text::trim(entity));
    if (title.empty()) throw ValidationError("entity name is empty");
    std::replace(title.begin(), title.end(), ' ', '_');
    const auto resp = client_.get("/api/rest_v1/page/summary/" + http::percent_encode(title));
    if (resp.status == 404) throw SummaryNotFoundError("no page for " + entity);
    if (resp.status != 200)
        throw BackendError("summary endpoint returned status " + std::to_string(resp.status));
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(resp.body);
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("summary response is not JSON", resp.body);
    }
    if (body.value("type", "") == "disambiguation")
        throw DisambiguationError(entity + " is a disambiguation page");
    const auto extract = body.value("extract", "");
    if (text::trim(extract).empty()) throw SummaryNotFoundError("empty summary for " + entity);
    return std::string(text::trim(extract));
}

// --- sampling helpers ------------------------------------------------------

std::uint64_t negative_subset_count(std::size_t m) {
    if (m < 2) return 0;
    if (m >= 64) return UINT64_MAX;
    return (std::uint64_t{1} << m) - 2;
}

namespace {

// Fisher–Yates over a virtual [0, n) so large pools need no index array.
class LazySampler {
public:
    LazySampler(std::size_t n, Rng& rng) : remaining_(n), rng_(rng) {}

    std::optional<std::size_t> next() {
        if (remaining_ == 0) return std::nullopt;
        const auto j = static_cast<std::size_t>(rng_.below(remaining_));
        const auto last = remaining_ - 1;
        const auto picked = value(j);
        swapped_[j] = value(last);
        swapped_.erase(last);
        --remaining_;
        return picked;
    }

private:
    std::size_t value(std::size_t i) const {
        auto it = swapped_.find(i);
        return it == swapped_.end() ? i : it->second;
    }

    std::size_t remaining_;
    Rng& rng_;
    std::unordered_map<std::size_t, std::size_t> swapped_;
};

NodePath join_paths(const NodePath& prefix, const NodePath& rel) {
    NodePath p = prefix;
    p.indices.insert(p.indices.end(), rel.indices.begin(), rel.indices.end());
    return p;
}

struct Pairing {
    std::vector<NodePath> items;
    bool direct_children;
};

std::vector<Pairing> pairings_for(const DecompositionTree& root, const NodePath& at, PairingMode mode) {
    const auto& node = node_at(root, at);
    std::vector<NodePath> children, frontier;
    for (std::size_t i = 0; i < node.children().size(); ++i) children.push_back(at.child(i));
    for (const auto& p : leaf_paths(node)) frontier.push_back(join_paths(at, p));
    std::vector<Pairing> out;
    if (mode != PairingMode::LeafFrontier) out.push_back({children, true});
    if (mode != PairingMode::DirectChildren && !(mode == PairingMode::Both && frontier == children))
        out.push_back({frontier, false});
    return out;
}

std::string joined_text(const DecompositionTree& root, const std::vector<NodePath>& items) {
    std::vector<std::string> parts;
    parts.reserve(items.size());
    for (const auto& p : items) parts.push_back(node_at(root, p).claim().text());
    return text::join(parts, " ");
}

std::string where(const TreeRecord& t, const NodePath& p) {
    return t.id + "@" + p.to_string();
}

} // namespace

// --- generators ------------------------------------------------------------

std::vector<LabeledExample> gen_completeness_examples(const TreeRecord& tree, const SynthConfig& config,
                                                      Rng& rng, SynthNotes* notes) {
    config.validate();
    std::vector<LabeledExample> out;
    if (leaves(tree.tree).size() < 2) {
        if (notes) notes->add("completeness: " + tree.id + " has a single leaf; skipped");
        return out;
    }
    const auto& root = tree.tree;
    for (const auto& at : internal_node_paths(root)) {
        const auto& hypothesis = node_at(root, at).claim().text();
        for (auto pairing : pairings_for(root, at, config.pairing_mode)) {
            auto shuffled = pairing.items;
            rng.shuffle(shuffled);
            LabeledExample pos{SynthMetric::Completeness, joined_text(root, shuffled), hypothesis,
                               Label::Supported, tree.id, {at}, {}};
            pos.paths.insert(pos.paths.end(), shuffled.begin(), shuffled.end());
            out.push_back(std::move(pos));

            const auto m = pairing.items.size();
            const auto possible = negative_subset_count(m);
            const auto wanted = std::min<std::uint64_t>(
                static_cast<std::uint64_t>(config.negatives_per_positive), possible);
            std::set<std::vector<bool>> used;
            while (used.size() < wanted) {
                std::vector<bool> dropped(m);
                std::size_t count = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    dropped[i] = rng.coin();
                    count += dropped[i];
                }
                if (count == 0 || count == m || !used.insert(dropped).second) continue;
                std::vector<NodePath> kept;
                for (std::size_t i = 0; i < m; ++i)
                    if (!dropped[i]) kept.push_back(pairing.items[i]);
                rng.shuffle(kept);
                LabeledExample neg{SynthMetric::Completeness, joined_text(root, kept), hypothesis,
                                   Label::Unsupported, tree.id, {at}, {}};
                neg.paths.insert(neg.paths.end(), kept.begin(), kept.end());
                out.push_back(std::move(neg));
            }
            if (notes && wanted < static_cast<std::uint64_t>(config.negatives_per_positive))
                notes->add("completeness: " + where(tree, at) + " allows only " +
                           std::to_string(possible) + " distinct negatives");
        }
    }
    return out;
}

std::vector<LabeledExample> gen_correctness_examples(const TreeRecord& tree,
                                                     const std::vector<TreeRecord>& corpus,
                                                     const SynthConfig& config, Rng& rng,
                                                     SynthNotes* notes) {
    config.validate();
    std::vector<LabeledExample> out;
    const auto& root = tree.tree;

    struct Candidate {
        const TreeRecord* tree;
        NodePath path;
    };
    std::vector<Candidate> foreign;
    for (const auto& other : corpus) {
        if (other.id == tree.id) continue;
        visit_preorder(other.tree, [&](const NodePath& p, const DecompositionTree&) {
            foreign.push_back({&other, p});
        });
    }
    std::vector<NodePath> all_paths;
    visit_preorder(root, [&](const NodePath& p, const DecompositionTree&) { all_paths.push_back(p); });

    for (const auto& at : internal_node_paths(root)) {
        const auto& premise = node_at(root, at).claim().text();
        const auto below = descendant_paths(root, at);
        std::set<std::string> covered_texts{premise};
        for (const auto& d : below) {
            const auto& h = node_at(root, d).claim().text();
            covered_texts.insert(h);
            out.push_back({SynthMetric::Correctness, premise, h, Label::Supported, tree.id, {at, d}, {}});
        }

        std::vector<NodePath> disjoint;
        for (const auto& p : all_paths)
            if (p != at && !p.is_strict_ancestor_of(at) && !at.is_strict_ancestor_of(p))
                disjoint.push_back(p);

        const auto wanted = below.size() * static_cast<std::size_t>(config.negatives_per_positive);
        LazySampler sampler(disjoint.size() + foreign.size(), rng);
        std::size_t produced = 0;
        while (produced < wanted) {
            auto pick = sampler.next();
            if (!pick) break;
            const bool local = *pick < disjoint.size();
            const TreeRecord& source = local ? tree : *foreign[*pick - disjoint.size()].tree;
            const NodePath& path = local ? disjoint[*pick] : foreign[*pick - disjoint.size()].path;
            const auto& h = node_at(source.tree, path).claim().text();
            if (covered_texts.count(h)) continue;
            out.push_back({SynthMetric::Correctness, premise, h, Label::Unsupported, tree.id,
                           {at, path}, local ? std::string() : source.id});
            ++produced;
        }
        if (notes && produced < wanted)
            notes->add("correctness: " + where(tree, at) + " found " + std::to_string(produced) +
                       " of " + std::to_string(wanted) + " negatives");
    }
    return out;
}

std::vector<LabeledExample> gen_entropy_examples(const TreeRecord& tree, const SynthConfig& config,
                                                 Rng& rng, SynthNotes* notes) {
    config.validate();
    std::vector<LabeledExample> out;
    const auto& root = tree.tree;
    std::vector<NodePath> nodes;
    visit_preorder(root, [&](const NodePath& p, const DecompositionTree&) {
        if (!p.is_root()) nodes.push_back(p);
    });
    if (nodes.size() < 2) {
        if (notes) notes->add("semantic-entropy: " + tree.id + " has fewer than two non-root nodes");
        return out;
    }
    auto text_at = [&](const NodePath& p) -> const std::string& { return node_at(root, p).claim().text(); };

    std::vector<std::pair<std::size_t, std::size_t>> unrelated;
    std::size_t positives = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            // Pre-order puts an ancestor before its descendants.
            if (nodes[a].is_strict_ancestor_of(nodes[b])) {
                out.push_back({SynthMetric::SemanticEntropy, text_at(nodes[a]), text_at(nodes[b]),
                               Label::Supported, tree.id, {nodes[a], nodes[b]}, {}});
                ++positives;
            } else {
                unrelated.emplace_back(a, b);
            }
        }
    }
    const auto wanted = positives * static_cast<std::size_t>(config.negatives_per_positive);
    LazySampler sampler(unrelated.size(), rng);
    std::size_t produced = 0;
    while (produced < wanted) {
        auto pick = sampler.next();
        if (!pick) break;
        const auto [a, b] = unrelated[*pick];
        out.push_back({SynthMetric::SemanticEntropy, text_at(nodes[a]), text_at(nodes[b]),
                       Label::Unsupported, tree.id, {nodes[a], nodes[b]}, {}});
        ++produced;
    }
    if (notes && produced < wanted)
        notes->add("semantic-entropy: " + tree.id + " found " + std::to_string(produced) + " of " +
                   std::to_string(wanted) + " negatives");
    return out;
}

// --- split -----------------------------------------------------------------

TrainEvalSplit split_train_eval(const std::vector<TreeRecord>& trees, const SynthConfig& config) {
    config.validate();
    if (trees.size() < 2) throw ValidationError("splitting needs at least two trees");
    std::set<std::string> ids;
    for (const auto& t : trees)
        if (!ids.insert(t.id).second) throw ValidationError("duplicate tree id " + t.id);

    const auto n = trees.size();
    auto n_train = static_cast<std::size_t>(std::llround(config.split_ratio * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto rng = Rng::derive(config.seed, "split");
    rng.shuffle(order);
    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

    TrainEvalSplit split;
    for (std::size_t i = 0; i < n; ++i) (in_train[i] ? split.train : split.eval).push_back(trees[i]);
    return split;
}

// --- reverse-check filtering -----------------------------------------------

std::string FilterProgress::to_jsonl() const {
    std::string out;
    for (const auto& [key, v] : verdicts) {
        out += nlohmann::json{{"key", key},
                              {"complete", v.complete},
                              {"correct", v.correct},
                              {"independent", v.independent}}
                   .dump();
        out.push_back('\n');
    }
    return out;
}

FilterProgress FilterProgress::from_jsonl(std::string_view jsonl) {
    FilterProgress p;
    const auto lines = text::split_lines(jsonl);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        try {
            auto j = nlohmann::json::parse(lines[i]);
            p.verdicts[j.at("key").get<std::string>()] = {
                j.at("complete").get<bool>(), j.at("correct").get<bool>(),
                j.at("independent").get<bool>()};
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("progress line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return p;
}

namespace {

// Looks up or computes one verdict, recording it in progress.
CheckVerdict checked(const std::string& key, FilterProgress* progress, std::mutex& mu,
                     const std::function<CheckVerdict()>& run) {
    if (progress) {
        std::lock_guard lock(mu);
        auto it = progress->verdicts.find(key);
        if (it != progress->verdicts.end()) return it->second;
    }
    auto v = run();
    if (progress) {
        std::lock_guard lock(mu);
        progress->verdicts[key] = v;
    }
    return v;
}

} // namespace

TreeFilterResult filter_by_reverse_check(const std::vector<TreeRecord>& trees, Decomposer& decomposer,
                                         bool subtree_level, FilterProgress* progress, int workers) {
    std::mutex mu;
    std::vector<std::optional<Rejection>> outcome(trees.size());
    parallel_for(trees.size(), workers, [&](std::size_t i) {
        const auto& t = trees[i];
        std::vector<NodePath> checks;
        if (subtree_level && !t.tree.is_leaf()) checks = internal_node_paths(t.tree);
        else checks.push_back(NodePath{});
        for (const auto& at : checks) {
            const auto& node = node_at(t.tree, at);
            const auto key = subtree_level ? t.id + "@" + at.to_string() : t.id;
            auto v = checked(key, progress, mu,
                             [&] { return decomposer.reverse_check(node.claim(), leaves(node)); });
            if (!v.passed()) {
                outcome[i] = Rejection{t.id, at, v};
                return;
            }
        }
    });
    TreeFilterResult result;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        if (outcome[i]) result.rejected.push_back(*outcome[i]);
        else result.kept.push_back(trees[i]);
    }
    return result;
}

RecordFilterResult filter_records(const std::vector<DatasetRecord>& records, Decomposer& decomposer,
                                  FilterProgress* progress, int workers) {
    std::mutex mu;
    std::vector<std::optional<CheckVerdict>> failed(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const auto& r = records[i];
        auto v = checked(r.id, progress, mu,
                         [&] { return decomposer.reverse_check(r.claim, r.atomic_claims); });
        if (!v.passed()) failed[i] = v;
    });
    RecordFilterResult result;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (failed[i]) result.rejected.push_back({records[i].id, NodePath{}, *failed[i]});
        else result.kept.push_back(records[i]);
    }
    return result;
}

nlohmann::json rejection_to_json(const Rejection& r) {
    return {{"id", r.id},
            {"path", r.at.indices},
            {"complete", r.verdict.complete},
            {"correct", r.verdict.correct},
            {"independent", r.verdict.independent},
            {"reason", r.verdict.reason()}};
}

// --- pipeline --------------------------------------------------------------

std::vector<TreeRecord> build_trees(const std::vector<std::string>& entities, SummarySource& source,
                                    Decomposer& decomposer, SynthNotes* notes, int workers) {
    std::vector<std::optional<TreeRecord>> built(entities.size());
    std::vector<std::string> skipped(entities.size());
    parallel_for(entities.size(), workers, [&](std::size_t i) {
        const auto& entity = entities[i];
        try {
            Claim summary(source.fetch_summary(entity));
            built[i] = TreeRecord{entity, decomposer.decompose_recursive(summary)};
        } catch (const SummaryNotFoundError& e) {
            skipped[i] = std::string("not found: ") + e.what();
        } catch (const DisambiguationError& e) {
            skipped[i] = std::string("disambiguation: ") + e.what();
        } catch (const NonConvergenceError& e) {
            skipped[i] = std::string("no convergence: ") + e.what();
        } catch (const ValidationError& e) {
            skipped[i] = std::string("invalid summary: ") + e.what();
        }
    });
    std::vector<TreeRecord> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (built[i]) {
            if (!seen.insert(built[i]->id).second) {
                if (notes) notes->add("entity " + entities[i] + " listed twice; kept the first");
                continue;
            }
            out.push_back(std::move(*built[i]));
        } else if (notes) {
            notes->add("entity " + entities[i] + " skipped, " + skipped[i]);
        }
    }
    return out;
}

std::vector<DatasetRecord> decdata_records(const std::vector<TreeRecord>& trees, Split split,
                                           PairingMode mode) {
    std::vector<DatasetRecord> out;
    for (const auto& t : trees) {
        for (const auto& at : internal_node_paths(t.tree)) {
            const auto& node = node_at(t.tree, at);
            for (const auto& pairing : pairings_for(t.tree, at, mode)) {
                std::vector<AtomicClaim> atomics;
                for (const auto& p : pairing.items) atomics.push_back(node_at(t.tree, p).claim());
                out.push_back({t.id + ":" + at.to_string() + ":" + (pairing.direct_children ? "children" : "leaves"),
                               SourceDataset::DecData, split, node.claim(), std::move(atomics)});
            }
        }
    }
    return out;
}

namespace {
std::vector<LabeledExample> examples_for_side(const std::vector<TreeRecord>& side,
                                              const SynthConfig& config, SynthNotes* notes) {
    std::vector<LabeledExample> all;
    for (const auto& t : side) {
        auto cp_rng = Rng::derive(config.seed, "completeness:" + t.id);
        auto cr_rng = Rng::derive(config.seed, "correctness:" + t.id);
        auto se_rng = Rng::derive(config.seed, "semantic-entropy:" + t.id);
        auto cp = gen_completeness_examples(t, config, cp_rng, notes);
        auto cr = gen_correctness_examples(t, side, config, cr_rng, notes);
        auto se = gen_entropy_examples(t, config, se_rng, notes);
        for (auto* v : {&cp, &cr, &se}) all.insert(all.end(), v->begin(), v->end());
    }
    std::stable_sort(all.begin(), all.end(), [](const LabeledExample& a, const LabeledExample& b) {
        if (a.tree_id != b.tree_id) return a.tree_id < b.tree_id;
        return a.paths.front() < b.paths.front();
    });
    return all;
}
} // namespace

SynthOutput synthesize(const std::vector<TreeRecord>& trees, const SynthConfig& config, SynthNotes* notes) {
    SynthOutput out;
    out.split = split_train_eval(trees, config);
    out.train_examples = examples_for_side(out.split.train, config, notes);
    out.eval_examples = examples_for_side(out.split.eval, config, notes);
    out.decdata = decdata_records(out.split.train, Split::Train, config.pairing_mode);
    auto test_rows = decdata_records(out.split.eval, Split::Test, config.pairing_mode);
    out.decdata.insert(out.decdata.end(), test_rows.begin(), test_rows.end());
    return out;
}

} // namespace decmetrics
