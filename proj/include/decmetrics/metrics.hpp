#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "decmetrics/claims.hpp"
#include "decmetrics/entailment.hpp"

namespace decmetrics {

// Disjoint clusters covering {0, ..., n-1}; members ascending, clusters
// ordered by their smallest member.
struct Partition {
    std::vector<std::vector<std::size_t>> clusters;
    std::size_t n = 0;

    // Canonical partition from a component label per element.
    static Partition from_labels(const std::vector<std::size_t>& labels);

    std::vector<std::size_t> sizes() const;
    void validate() const;   // throws ValidationError

    friend bool operator==(const Partition&, const Partition&) = default;
};

struct RewardWeights {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;

    void validate() const;
};

enum class LogBase { E, Two };
LogBase parse_log_base(std::string_view s);   // "e" | "2"

// How the two directional judgments of a pair combine into a link.
enum class ClusterLinking {
    Either,   // NLI(i, j) or NLI(j, i) supported
    Both,     // strict mutual entailment
};

struct MetricOptions {
    ClusterLinking linking = ClusterLinking::Either;
    LogBase log_base = LogBase::E;
};

struct MetricReport {
    double completeness = 0.0;
    bool completeness_supported = false;
    double correctness = 0.0;
    double semantic_entropy = 0.0;
    double reward = 0.0;
    Partition partition;
    std::vector<Judgment> per_claim_verdicts;
};

// premise = atomics joined by single spaces, hypothesis = claim.
Judgment completeness_judgment(Entailer& entailer, const Claim& claim,
                               const std::vector<AtomicClaim>& atomics);
double completeness(Entailer& entailer, const Claim& claim, const std::vector<AtomicClaim>& atomics);

struct Correctness {
    double fraction = 0.0;
    std::vector<Judgment> verdicts;   // verdicts[i] = NLI(claim, atomics[i])
};
Correctness correctness(Entailer& entailer, const Claim& claim,
                        const std::vector<AtomicClaim>& atomics);

// Connected components of the link graph over all unordered pairs; both
// directions are queried for every pair.
Partition cluster(Entailer& entailer, const std::vector<AtomicClaim>& atomics,
                  ClusterLinking linking = ClusterLinking::Either);

// -sum |C|/n log |C|/n.
double semantic_entropy(const Partition& partition, LogBase base = LogBase::E);

double reward(double cp, double cr, double se, const RewardWeights& weights);

MetricReport evaluate(Entailer& entailer, const Claim& claim, const std::vector<AtomicClaim>& atomics,
                      const RewardWeights& weights, const MetricOptions& options = {});

// Throws Error if a report breaks its bounds or the reward identity.
void check_report(const MetricReport& report, const RewardWeights& weights, LogBase base);

// Row schema used by the evaluate subcommand.
nlohmann::json report_to_json(const std::string& id, const MetricReport& report);

} // namespace decmetrics
