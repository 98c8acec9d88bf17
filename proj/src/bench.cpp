#include "decmetrics/bench.hpp"

#include "decmetrics/errors.hpp"
#include "decmetrics/io.hpp"
#include "decmetrics/parallel.hpp"
#include "decmetrics/text.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace decmetrics {

std::string_view to_string(SourceDataset d) {
    switch (d) {
    case SourceDataset::FActScore: return "FActScore";
    case SourceDataset::WICE: return "WICE";
    case SourceDataset::DecData: return "DecData";
    case SourceDataset::Other: return "other";
    }
    return "other";
}

SourceDataset parse_source_dataset(std::string_view s) {
    const auto lower = text::to_lower_ascii(s);
    if (lower == "factscore") return SourceDataset::FActScore;
    if (lower == "wice") return SourceDataset::WICE;
    if (lower == "decdata") return SourceDataset::DecData;
    if (lower == "other") return SourceDataset::Other;
    throw ValidationError("unknown dataset: " + std::string(s));
}

std::string_view to_string(Split s) {
    return s == Split::Train ? "train" : "test";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw ValidationError("split must be train or test, got " + std::string(s));
}

nlohmann::json record_to_json(const DatasetRecord& r) {
    return {
        {"id", r.id},
        {"dataset", to_string(r.dataset)},
        {"split", to_string(r.split)},
        {"claim", r.claim.text()},
        {"atomic_claims", texts(r.atomic_claims)},
    };
}

namespace {
const nlohmann::json& field(const nlohmann::json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ValidationError(std::string("missing field \"") + name + "\"");
    return *it;
}

std::string string_field(const nlohmann::json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_string()) throw ValidationError(std::string("field \"") + name + "\" must be a string");
    return v.get<std::string>();
}

std::vector<AtomicClaim> atomics_field(const nlohmann::json& j) {
    const auto& v = field(j, "atomic_claims");
    if (!v.is_array()) throw ValidationError("field \"atomic_claims\" must be an array");
    if (v.empty()) throw ValidationError("field \"atomic_claims\" is empty");
    std::vector<AtomicClaim> out;
    for (const auto& a : v) {
        if (!a.is_string()) throw ValidationError("atomic claims must be strings");
        out.emplace_back(a.get<std::string>());
    }
    return out;
}
} // namespace

DatasetRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("record must be a JSON object");
    auto id = string_field(j, "id");
    if (text::trim(id).empty()) throw ValidationError("record id is empty");
    return {
        std::move(id),
        parse_source_dataset(string_field(j, "dataset")),
        parse_split(string_field(j, "split")),
        Claim(string_field(j, "claim")),
        atomics_field(j),
    };
}

std::vector<DatasetRecord> parse_dataset(std::string_view jsonl, const std::string& source) {
    std::vector<DatasetRecord> out;
    std::set<std::string> ids;
    const auto lines = text::split_lines(jsonl);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto where = source + ":" + std::to_string(i + 1) + ": ";
        try {
            out.push_back(record_from_json(nlohmann::json::parse(lines[i])));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + "malformed JSON: " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
        if (!ids.insert(out.back().id).second)
            throw ValidationError(where + "duplicate id " + out.back().id);
    }
    return out;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
    return parse_dataset(io::read_file(path), path.string());
}

std::string dataset_to_jsonl(const std::vector<DatasetRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<StatsRow> stats(const std::vector<DatasetRecord>& records) {
    if (records.empty()) throw ValidationError("stats need at least one record");
    auto accumulate = [](StatsRow& row, const DatasetRecord& r) {
        row.claims += 1;
        row.atomic_claims += r.atomic_claims.size();
        row.max = std::max(row.max, r.atomic_claims.size());
    };
    std::map<std::pair<SourceDataset, Split>, StatsRow> groups;
    std::map<Split, StatsRow> totals;
    for (const auto& r : records) {
        auto& g = groups[{r.dataset, r.split}];
        g.dataset = to_string(r.dataset);
        g.split = to_string(r.split);
        accumulate(g, r);
        auto& t = totals[r.split];
        t.dataset = "ALL";
        t.split = to_string(r.split);
        accumulate(t, r);
    }
    std::vector<StatsRow> rows;
    for (auto& [_, g] : groups) rows.push_back(g);
    for (auto& [_, t] : totals) rows.push_back(t);
    for (auto& row : rows)
        row.avg = static_cast<double>(row.atomic_claims) / static_cast<double>(row.claims);
    return rows;
}

std::string format_avg(double avg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", avg);
    return buf;
}

std::string format_stats_table(const std::vector<StatsRow>& rows) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %-6s %8s %14s %5s %6s\n", "Dataset", "Split", "Claims",
                  "Atomic Claims", "Max", "Avg");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-10s %-6s %8zu %14zu %5zu %6s\n", r.dataset.c_str(),
                      r.split.c_str(), r.claims, r.atomic_claims, r.max, format_avg(r.avg).c_str());
        out << line;
    }
    return out.str();
}

nlohmann::json stats_to_json(const std::vector<StatsRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows)
        out.push_back({{"dataset", r.dataset},
                       {"split", r.split},
                       {"claims", r.claims},
                       {"atomic_claims", r.atomic_claims},
                       {"max", r.max},
                       {"avg", r.avg}});
    return out;
}

Predictions load_predictions(const std::filesystem::path& path) {
    Predictions out;
    for (const auto& line : io::read_nonblank_lines(path)) {
        const auto where = path.string() + ":" + std::to_string(line.number) + ": ";
        try {
            auto j = nlohmann::json::parse(line.text);
            if (!j.is_object()) throw ValidationError("prediction must be a JSON object");
            auto id = string_field(j, "id");
            if (!out.emplace(id, atomics_field(j)).second)
                throw ValidationError("duplicate id " + id);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + "malformed JSON: " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }
    return out;
}

EvalReport run_eval(Entailer& entailer, const std::vector<DatasetRecord>& records,
                    const Predictions* predictions, const EvalOptions& options) {
    struct Job {
        const DatasetRecord* record;
        const std::vector<AtomicClaim>* atomics;
    };
    EvalReport report;
    std::vector<Job> jobs;
    for (const auto& r : records) {
        if (!predictions) {
            jobs.push_back({&r, &r.atomic_claims});
            continue;
        }
        auto it = predictions->find(r.id);
        if (it == predictions->end()) {
            report.summary.skipped_ids.push_back(r.id);
            continue;
        }
        jobs.push_back({&r, &it->second});
    }
    std::sort(jobs.begin(), jobs.end(),
              [](const Job& a, const Job& b) { return a.record->id < b.record->id; });
    std::sort(report.summary.skipped_ids.begin(), report.summary.skipped_ids.end());

    report.per_record.resize(jobs.size());
    parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
        report.per_record[i] = {jobs[i].record->id,
                                evaluate(entailer, jobs[i].record->claim, *jobs[i].atomics,
                                         options.weights, options.metric)};
    });

    auto& s = report.summary;
    s.n = report.per_record.size();
    s.skipped = s.skipped_ids.size();
    if (s.n > 0) {
        double comp = 0.0, corr = 0.0, sem = 0.0;
        for (const auto& r : report.per_record) {
            comp += options.comp_binary ? (r.report.completeness_supported ? 1.0 : 0.0)
                                        : r.report.completeness;
            corr += r.report.correctness;
            sem += r.report.semantic_entropy;
        }
        const double n = static_cast<double>(s.n);
        s.comp_pct = 100.0 * comp / n;
        s.corr_pct = 100.0 * corr / n;
        s.sem_mean = sem / n;
    }
    return report;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.per_record) rows.push_back(report_to_json(r.id, r.report));
    const auto& s = report.summary;
    return {
        {"per_record", std::move(rows)},
        {"summary",
         {{"comp_pct", s.comp_pct},
          {"corr_pct", s.corr_pct},
          {"sem_mean", s.sem_mean},
          {"n", s.n},
          {"skipped", s.skipped},
          {"skipped_ids", s.skipped_ids}}},
    };
}

std::string metric_rows_jsonl(const EvalReport& report) {
    std::string out;
    for (const auto& r : report.per_record) {
        out += report_to_json(r.id, r.report).dump();
        out.push_back('\n');
    }
    return out;
}

Label aggregate_verdicts(const std::vector<Label>& verdicts) {
    if (verdicts.empty()) throw ValidationError("cannot aggregate an empty verdict list");
    for (auto v : verdicts)
        if (v != Label::Supported) return Label::Unsupported;
    return Label::Supported;
}

} // namespace decmetrics
