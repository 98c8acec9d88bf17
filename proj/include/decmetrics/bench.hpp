#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "decmetrics/claims.hpp"
#include "decmetrics/entailment.hpp"
#include "decmetrics/metrics.hpp"

namespace decmetrics {

enum class SourceDataset { FActScore, WICE, DecData, Other };
std::string_view to_string(SourceDataset d);
SourceDataset parse_source_dataset(std::string_view s);   // case-insensitive

enum class Split { Train, Test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

// One Claim2Atom row: {"id","dataset","split","claim","atomic_claims":[...]}.
struct DatasetRecord {
    std::string id;
    SourceDataset dataset = SourceDataset::Other;
    Split split = Split::Test;
    Claim claim;
    std::vector<AtomicClaim> atomic_claims;
};

nlohmann::json record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const nlohmann::json& j);

// Every error names "<source>:<line>".
std::vector<DatasetRecord> parse_dataset(std::string_view jsonl, const std::string& source = "<input>");
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);
std::string dataset_to_jsonl(const std::vector<DatasetRecord>& records);

struct StatsRow {
    std::string dataset;
    std::string split;
    std::size_t claims = 0;
    std::size_t atomic_claims = 0;
    std::size_t max = 0;
    double avg = 0.0;
};

// One row per (dataset, split) present, in dataset then split order,
// followed by an ALL row per split.
std::vector<StatsRow> stats(const std::vector<DatasetRecord>& records);

std::string format_avg(double avg);   // two decimals
std::string format_stats_table(const std::vector<StatsRow>& rows);
nlohmann::json stats_to_json(const std::vector<StatsRow>& rows);

// Predictions JSONL: {"id", "atomic_claims": [...]}.
using Predictions = std::map<std::string, std::vector<AtomicClaim>>;
Predictions load_predictions(const std::filesystem::path& path);

struct EvalOptions {
    RewardWeights weights;
    MetricOptions metric;
    // Threshold completeness per record before averaging COMP.
    bool comp_binary = false;
    int workers = 1;
};

struct RecordResult {
    std::string id;
    MetricReport report;
};

struct EvalSummary {
    double comp_pct = 0.0;
    double corr_pct = 0.0;
    double sem_mean = 0.0;
    std::size_t n = 0;
    std::size_t skipped = 0;
    std::vector<std::string> skipped_ids;
};

struct EvalReport {
    std::vector<RecordResult> per_record;   // sorted by id
    EvalSummary summary;
};

// Gold mode when predictions is null; otherwise each record is scored on
// its predicted decomposition, and records without one are skipped.
EvalReport run_eval(Entailer& entailer, const std::vector<DatasetRecord>& records,
                    const Predictions* predictions, const EvalOptions& options);

// {"per_record": [...], "summary": {comp_pct, corr_pct, sem_mean, n, skipped}}
nlohmann::json eval_report_to_json(const EvalReport& report);
std::string metric_rows_jsonl(const EvalReport& report);

// Supported iff every atomic verdict is supported. Throws on empty input.
Label aggregate_verdicts(const std::vector<Label>& verdicts);

} // namespace decmetrics
