#include "decmetrics/metrics.hpp"

#include "decmetrics/errors.hpp"
#include "decmetrics/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace decmetrics {

Partition Partition::from_labels(const std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::size_t> cluster_of_label;
    Partition p;
    p.n = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = cluster_of_label.emplace(labels[i], p.clusters.size());
        if (inserted) p.clusters.emplace_back();
        p.clusters[it->second].push_back(i);
    }
    return p;
}

std::vector<std::size_t> Partition::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) out.push_back(c.size());
    return out;
}

void Partition::validate() const {
    std::vector<bool> seen(n, false);
    std::size_t covered = 0;
    std::size_t previous_min = 0;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const auto& c = clusters[k];
        if (c.empty()) throw ValidationError("partition has an empty cluster");
        if (!std::is_sorted(c.begin(), c.end()))
            throw ValidationError("cluster members must be ascending");
        if (k > 0 && c.front() <= previous_min)
            throw ValidationError("clusters must be ordered by smallest member");
        previous_min = c.front();
        for (auto i : c) {
            if (i >= n || seen[i]) throw ValidationError("partition clusters overlap or overflow");
            seen[i] = true;
            ++covered;
        }
    }
    if (covered != n) throw ValidationError("partition does not cover every index");
}

void RewardWeights::validate() const {
    for (double w : {alpha, beta, gamma})
        if (!std::isfinite(w) || w < 0.0)
            throw ValidationError("reward weights must be finite and non-negative");
}

LogBase parse_log_base(std::string_view s) {
    if (s == "e") return LogBase::E;
    if (s == "2") return LogBase::Two;
    throw ValidationError("log base must be e or 2, got " + std::string(s));
}

namespace {
void require_atomics(const std::vector<AtomicClaim>& atomics) {
    if (atomics.empty()) throw ValidationError("at least one atomic claim is required");
}

// Minimal union-find; n is tiny (atomic claims of one claim).
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};
} // namespace

Judgment completeness_judgment(Entailer& entailer, const Claim& claim,
                               const std::vector<AtomicClaim>& atomics) {
    require_atomics(atomics);
    return entailer.judge(text::join(texts(atomics), " "), claim.text());
}

double completeness(Entailer& entailer, const Claim& claim, const std::vector<AtomicClaim>& atomics) {
    return completeness_judgment(entailer, claim, atomics).p_supported;
}

Correctness correctness(Entailer& entailer, const Claim& claim,
                        const std::vector<AtomicClaim>& atomics) {
    require_atomics(atomics);
    std::vector<Entailer::Pair> pairs;
    pairs.reserve(atomics.size());
    for (const auto& ac : atomics) pairs.emplace_back(claim.text(), ac.text());
    Correctness out;
    out.verdicts = entailer.judge_batch(pairs);
    const auto supported = std::count_if(out.verdicts.begin(), out.verdicts.end(),
                                         [](const Judgment& j) { return j.supported(); });
    out.fraction = static_cast<double>(supported) / static_cast<double>(atomics.size());
    return out;
}

Partition cluster(Entailer& entailer, const std::vector<AtomicClaim>& atomics, ClusterLinking linking) {
    require_atomics(atomics);
    const auto n = atomics.size();
    struct Query {
        std::size_t i, j;
    };
    std::vector<Query> queries;
    std::vector<Entailer::Pair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            queries.push_back({i, j});
            pairs.emplace_back(atomics[i].text(), atomics[j].text());
            queries.push_back({j, i});
            pairs.emplace_back(atomics[j].text(), atomics[i].text());
        }
    }
    std::vector<Judgment> verdicts;
    try {
        verdicts = entailer.judge_batch(pairs);
    } catch (const BatchError& e) {
        const auto& q = queries[e.index()];
        throw BackendError("clustering pair (" + std::to_string(q.i) + ", " + std::to_string(q.j) +
                           ") failed: " + e.what());
    }
    DisjointSets sets(n);
    for (std::size_t k = 0; k < verdicts.size(); k += 2) {
        const bool forward = verdicts[k].supported();
        const bool backward = verdicts[k + 1].supported();
        const bool linked = linking == ClusterLinking::Either ? (forward || backward)
                                                              : (forward && backward);
        if (linked) sets.unite(queries[k].i, queries[k].j);
    }
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = sets.find(i);
    return Partition::from_labels(labels);
}

double semantic_entropy(const Partition& partition, LogBase base) {
    if (partition.n == 0) throw ValidationError("entropy of an empty partition");
    const double n = static_cast<double>(partition.n);
    double h = 0.0;
    for (const auto& c : partition.clusters) {
        if (c.empty()) continue;
        const double p = static_cast<double>(c.size()) / n;
        h -= p * std::log(p);
    }
    if (base == LogBase::Two) h /= std::log(2.0);
    // -0.0 from a single full cluster.
    return h == 0.0 ? 0.0 : h;
}

double reward(double cp, double cr, double se, const RewardWeights& weights) {
    if (!std::isfinite(cp) || !std::isfinite(cr) || !std::isfinite(se))
        throw ValidationError("reward inputs must be finite");
    weights.validate();
    return weights.alpha * cp + weights.beta * cr + weights.gamma * se;
}

MetricReport evaluate(Entailer& entailer, const Claim& claim, const std::vector<AtomicClaim>& atomics,
                      const RewardWeights& weights, const MetricOptions& options) {
    require_atomics(atomics);
    weights.validate();
    MetricReport report;
    const auto cp = completeness_judgment(entailer, claim, atomics);
    report.completeness = cp.p_supported;
    report.completeness_supported = cp.supported();
    auto cr = correctness(entailer, claim, atomics);
    report.correctness = cr.fraction;
    report.per_claim_verdicts = std::move(cr.verdicts);
    report.partition = cluster(entailer, atomics, options.linking);
    report.semantic_entropy = semantic_entropy(report.partition, options.log_base);
    report.reward = reward(report.completeness, report.correctness, report.semantic_entropy, weights);
    check_report(report, weights, options.log_base);
    return report;
}

void check_report(const MetricReport& r, const RewardWeights& w, LogBase base) {
    r.partition.validate();
    const double n = static_cast<double>(r.partition.n);
    double max_se = std::log(n);
    if (base == LogBase::Two) max_se /= std::log(2.0);
    if (!(r.completeness >= 0.0 && r.completeness <= 1.0))
        throw Error("completeness outside [0, 1]");
    if (!(r.correctness >= 0.0 && r.correctness <= 1.0)) throw Error("correctness outside [0, 1]");
    if (!(r.semantic_entropy >= 0.0 && r.semantic_entropy <= max_se + 1e-12))
        throw Error("semantic entropy outside [0, log n]");
    const double expected = w.alpha * r.completeness + w.beta * r.correctness + w.gamma * r.semantic_entropy;
    if (std::abs(expected - r.reward) > 1e-12) throw Error("reward differs from weighted sum");
    if (r.per_claim_verdicts.size() != r.partition.n)
        throw Error("verdict count differs from atomic claim count");
}

nlohmann::json report_to_json(const std::string& id, const MetricReport& r) {
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : r.per_claim_verdicts) verdicts.push_back(to_string(v.label));
    return {
        {"id", id},
        {"completeness", r.completeness},
        {"correctness", r.correctness},
        {"semantic_entropy", r.semantic_entropy},
        {"reward", r.reward},
        {"n_atomic", r.partition.n},
        {"clusters", r.partition.clusters},
        {"verdicts", std::move(verdicts)},
    };
}

} // namespace decmetrics
