#include "cli.hpp"

#include "decmetrics/bench.hpp"
#include "decmetrics/claims.hpp"
#include "decmetrics/decomposer.hpp"
#include "decmetrics/entailment.hpp"
#include "decmetrics/errors.hpp"
#include "decmetrics/io.hpp"
#include "decmetrics/metrics.hpp"
#include "decmetrics/parallel.hpp"
#include "decmetrics/synth.hpp"
#include "decmetrics/text.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace decmetrics::cli {

namespace fs = std::filesystem;

namespace {

enum class LogLevel { Error, Warn, Info, Debug };

LogLevel parse_log_level(const std::string& s) {
    if (s == "error") return LogLevel::Error;
    if (s == "warn") return LogLevel::Warn;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    throw ValidationError("log level must be error, warn, info or debug");
}

class Log {
public:
    Log(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
    void warn(const std::string& m) const { emit(LogLevel::Warn, "warning", m); }
    void info(const std::string& m) const { emit(LogLevel::Info, "info", m); }

private:
    void emit(LogLevel at, const char* tag, const std::string& m) const {
        if (at <= level_) err_ << tag << ": " << m << '\n';
    }
    std::ostream& err_;
    LogLevel level_;
};

// Resolved settings: config file first, then any flag given on the command line.
struct RunConfig {
    BackendConfig backend;
    RewardWeights weights;
    std::uint64_t seed = 0;
    LogLevel log_level = LogLevel::Warn;
    int depth_cap = 10;
};

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> backend;
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    std::optional<double> timeout;
    std::optional<int> max_in_flight;
    std::optional<int> max_retries;
    std::optional<double> threshold;
    std::optional<std::string> log_level;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    cmd->add_option("--backend", f.backend, "mock | http-nli | chat");
    cmd->add_option("--endpoint", f.endpoint, "Base URL of a remote backend");
    cmd->add_option("--model", f.model, "Model name for chat backends");
    cmd->add_option("--timeout", f.timeout, "Request timeout in seconds");
    cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent backend requests");
    cmd->add_option("--max-retries", f.max_retries, "Retries for timeouts and 5xx responses");
    cmd->add_option("--threshold", f.threshold, "Decision threshold on p_supported");
    cmd->add_option("--log-level", f.log_level, "error | warn | info | debug");
}

RunConfig resolve(const CommonFlags& f) {
    RunConfig rc;
    if (!f.config_path.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(io::read_file(f.config_path));
            if (j.contains("backend")) {
                const auto& b = j.at("backend");
                if (b.contains("kind")) rc.backend.kind = parse_backend_kind(b.at("kind").get<std::string>());
                rc.backend.endpoint = b.value("endpoint", rc.backend.endpoint);
                rc.backend.model_name = b.value("model_name", rc.backend.model_name);
                rc.backend.timeout_seconds = b.value("timeout", rc.backend.timeout_seconds);
                rc.backend.max_in_flight = b.value("max_in_flight", rc.backend.max_in_flight);
                rc.backend.max_retries = b.value("max_retries", rc.backend.max_retries);
                rc.backend.threshold = b.value("threshold", rc.backend.threshold);
            }
            if (j.contains("weights")) {
                const auto& w = j.at("weights");
                rc.weights.alpha = w.value("alpha", rc.weights.alpha);
                rc.weights.beta = w.value("beta", rc.weights.beta);
                rc.weights.gamma = w.value("gamma", rc.weights.gamma);
            }
            rc.seed = j.value("seed", rc.seed);
            rc.depth_cap = j.value("depth_cap", rc.depth_cap);
            if (j.contains("log_level")) rc.log_level = parse_log_level(j.at("log_level").get<std::string>());
            if (j.contains("api_key"))
                throw ValidationError("API keys belong in DECMETRICS_API_KEY, not the config file");
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("config " + f.config_path + ": " + e.what());
        }
    }
    if (f.backend) rc.backend.kind = parse_backend_kind(*f.backend);
    if (f.endpoint) rc.backend.endpoint = *f.endpoint;
    if (f.model) rc.backend.model_name = *f.model;
    if (f.timeout) rc.backend.timeout_seconds = *f.timeout;
    if (f.max_in_flight) rc.backend.max_in_flight = *f.max_in_flight;
    if (f.max_retries) rc.backend.max_retries = *f.max_retries;
    if (f.threshold) rc.backend.threshold = *f.threshold;
    if (f.log_level) rc.log_level = parse_log_level(*f.log_level);
    rc.backend.validate();
    rc.weights.validate();
    return rc;
}

int workers_for(const BackendConfig& b) {
    return b.kind == BackendKind::Mock ? 1 : b.max_in_flight;
}

void emit(const std::string& path, const std::string& bytes, std::ostream& out) {
    if (path.empty() || path == "-") out << bytes;
    else io::write_file_atomic(path, bytes);
}

std::string jsonl(const std::vector<nlohmann::json>& rows) {
    std::string s;
    for (const auto& r : rows) {
        s += r.dump();
        s.push_back('\n');
    }
    return s;
}

std::vector<std::string> read_text_list(const std::string& path) {
    std::vector<std::string> out;
    for (const auto& line : io::read_nonblank_lines(path)) out.emplace_back(text::trim(line.text));
    return out;
}

void save_progress(const std::string& path, const FilterProgress& progress) {
    if (!path.empty()) io::write_file_atomic(path, progress.to_jsonl());
}

FilterProgress load_progress(const std::string& path) {
    if (path.empty() || !fs::exists(path)) return {};
    return FilterProgress::from_jsonl(io::read_file(path));
}

// Runs a filter step, flushing the progress record before a failure escapes.
template <typename Step>
auto with_progress(const std::string& path, FilterProgress& progress, Step&& step) {
    try {
        auto result = step();
        save_progress(path, progress);
        return result;
    } catch (...) {
        save_progress(path, progress);
        throw;
    }
}

// --------------------------------------------------------------------------

struct EvaluateArgs {
    CommonFlags common;
    std::string input, predictions, out, report;
    std::optional<double> alpha, beta, gamma;
    std::string log_base = "e";
    std::string linking = "either";
    bool comp_binary = false;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    auto rc = resolve(a.common);
    if (a.alpha) rc.weights.alpha = *a.alpha;
    if (a.beta) rc.weights.beta = *a.beta;
    if (a.gamma) rc.weights.gamma = *a.gamma;
    rc.weights.validate();
    Log log(err, rc.log_level);

    auto records = load_dataset(a.input);
    std::optional<Predictions> predictions;
    if (!a.predictions.empty()) predictions = load_predictions(a.predictions);

    EvalOptions opts;
    opts.weights = rc.weights;
    opts.metric.log_base = parse_log_base(a.log_base);
    opts.metric.linking = a.linking == "both" ? ClusterLinking::Both : ClusterLinking::Either;
    opts.comp_binary = a.comp_binary;
    opts.workers = workers_for(rc.backend);

    Entailer entailer(rc.backend);
    auto report = run_eval(entailer, records, predictions ? &*predictions : nullptr, opts);
    for (const auto& id : report.summary.skipped_ids) log.warn("no prediction for " + id + "; skipped");

    const auto rows = metric_rows_jsonl(report);
    if (!a.report.empty()) {
        io::AtomicFile report_file(a.report);
        report_file.write(eval_report_to_json(report).dump(2) + "\n");
        emit(a.out, rows, out);
        report_file.commit();
    } else {
        emit(a.out, rows, out);
    }
    const auto& s = report.summary;
    log.info("COMP " + std::to_string(s.comp_pct) + "% CORR " + std::to_string(s.corr_pct) +
             "% SEM " + std::to_string(s.sem_mean) + " over " + std::to_string(s.n) +
             " record(s), " + std::to_string(s.skipped) + " skipped");
    return 0;
}

struct DecomposeArgs {
    CommonFlags common;
    std::string claims, out, failed;
    std::optional<int> depth_cap;
};

int run_decompose(const DecomposeArgs& a, std::ostream& out, std::ostream& err) {
    auto rc = resolve(a.common);
    if (a.depth_cap) rc.depth_cap = *a.depth_cap;
    Log log(err, rc.log_level);
    Decomposer decomposer(DecomposerConfig{rc.backend, rc.depth_cap, 0.0});

    const auto lines = io::read_nonblank_lines(a.claims);
    std::vector<std::optional<TreeRecord>> trees(lines.size());
    std::vector<std::string> failures(lines.size());
    parallel_for(lines.size(), workers_for(rc.backend), [&](std::size_t i) {
        const auto id = "claim-" + std::to_string(lines[i].number);
        try {
            trees[i] = TreeRecord{id, decomposer.decompose_recursive(Claim(lines[i].text))};
        } catch (const NonConvergenceError& e) {
            failures[i] = nlohmann::json{{"id", id}, {"claim", e.claim()}, {"depth", e.depth()}}.dump();
        }
    });

    std::vector<TreeRecord> ok;
    std::string failed_rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trees[i]) {
            ok.push_back(std::move(*trees[i]));
        } else {
            log.warn("claim on line " + std::to_string(lines[i].number) +
                     " did not converge within the depth cap; filtered out");
            failed_rows += failures[i] + "\n";
        }
    }
    if (!a.failed.empty()) {
        io::AtomicFile failed_file(a.failed);
        failed_file.write(failed_rows);
        emit(a.out, trees_to_jsonl(ok), out);
        failed_file.commit();
    } else {
        emit(a.out, trees_to_jsonl(ok), out);
    }
    log.info(std::to_string(ok.size()) + " tree(s), " + std::to_string(lines.size() - ok.size()) +
             " filtered");
    return 0;
}

struct SynthArgs {
    CommonFlags common;
    std::string trees, format = "tree-jsonl", entities, summaries, wikipedia_url, out_dir, progress;
    bool wikipedia = false;
    bool reverse_check = false;
    bool subtree_check = false;
    std::optional<std::uint64_t> seed;
    double split_ratio = 0.8;
    int negatives = 1;
    std::string pairing = "both";
    std::optional<int> depth_cap;
};

int run_synth(const SynthArgs& a, std::ostream&, std::ostream& err) {
    auto rc = resolve(a.common);
    if (a.seed) rc.seed = *a.seed;
    if (a.depth_cap) rc.depth_cap = *a.depth_cap;
    Log log(err, rc.log_level);

    SynthConfig config;
    config.seed = rc.seed;
    config.split_ratio = a.split_ratio;
    config.negatives_per_positive = a.negatives;
    config.pairing_mode = parse_pairing_mode(a.pairing);
    config.validate();

    if (a.trees.empty() == a.entities.empty())
        throw ValidationError("synth needs exactly one of --trees or --entities");

    SynthNotes notes;
    std::optional<Decomposer> decomposer;
    auto need_decomposer = [&]() -> Decomposer& {
        if (!decomposer) decomposer.emplace(DecomposerConfig{rc.backend, rc.depth_cap, 0.0});
        return *decomposer;
    };

    std::vector<TreeRecord> trees;
    const bool built_from_entities = !a.entities.empty();
    if (!a.trees.empty()) {
        trees = load_trees(a.trees, parse_tree_format(a.format));
    } else {
        std::unique_ptr<SummarySource> source;
        if (a.wikipedia) {
            auto retry = retry_policy_for(rc.backend);
            source = std::make_unique<WikipediaSummaries>(
                a.wikipedia_url.empty() ? "https://en.wikipedia.org" : a.wikipedia_url,
                rc.backend.timeout_seconds, retry);
        } else if (!a.summaries.empty()) {
            source = std::make_unique<FixtureSummaries>(a.summaries);
        } else {
            throw ValidationError("--entities needs --summaries DIR or --wikipedia");
        }
        trees = build_trees(read_text_list(a.entities), *source, need_decomposer(), &notes,
                            workers_for(rc.backend));
    }

    std::vector<Rejection> rejected;
    if (a.reverse_check) {
        auto progress = load_progress(a.progress);
        auto filtered = with_progress(a.progress, progress, [&] {
            return filter_by_reverse_check(trees, need_decomposer(), a.subtree_check, &progress,
                                           workers_for(rc.backend));
        });
        trees = std::move(filtered.kept);
        rejected = std::move(filtered.rejected);
    }

    auto result = synthesize(trees, config, &notes);
    for (const auto& m : notes.messages) log.info(m);

    fs::create_directories(a.out_dir);
    const fs::path dir = a.out_dir;
    std::vector<io::AtomicFile> files;
    auto stage = [&](const char* name, const std::string& bytes) {
        files.emplace_back(dir / name);
        files.back().write(bytes);
    };
    stage("train.jsonl", examples_to_jsonl(result.train_examples));
    stage("eval.jsonl", examples_to_jsonl(result.eval_examples));
    stage("decdata.jsonl", dataset_to_jsonl(result.decdata));
    nlohmann::json split = {{"train", nlohmann::json::array()}, {"eval", nlohmann::json::array()}};
    for (const auto& t : result.split.train) split["train"].push_back(t.id);
    for (const auto& t : result.split.eval) split["eval"].push_back(t.id);
    stage("split.json", split.dump(2) + "\n");
    if (built_from_entities || a.reverse_check) stage("trees.jsonl", trees_to_jsonl(trees));
    if (a.reverse_check) {
        std::vector<nlohmann::json> rows;
        for (const auto& r : rejected) rows.push_back(rejection_to_json(r));
        stage("rejected.jsonl", jsonl(rows));
    }
    for (auto& f : files) f.commit();

    log.info(std::to_string(result.split.train.size()) + " train / " +
             std::to_string(result.split.eval.size()) + " eval trees; " +
             std::to_string(result.train_examples.size()) + " + " +
             std::to_string(result.eval_examples.size()) + " examples");
    return 0;
}

struct StatsArgs {
    std::string input;
    bool json = false;
};

int run_stats(const StatsArgs& a, std::ostream& out) {
    const auto rows = stats(load_dataset(a.input));
    if (a.json) out << stats_to_json(rows).dump(2) << '\n';
    else out << format_stats_table(rows);
    return 0;
}

struct ClusterArgs {
    CommonFlags common;
    std::string input, out;
    std::string log_base = "e";
    std::string linking = "either";
};

int run_cluster(const ClusterArgs& a, std::ostream& out) {
    auto rc = resolve(a.common);
    const auto base = parse_log_base(a.log_base);
    const auto linking = a.linking == "both" ? ClusterLinking::Both : ClusterLinking::Either;
    auto records = load_dataset(a.input);
    std::sort(records.begin(), records.end(),
              [](const DatasetRecord& x, const DatasetRecord& y) { return x.id < y.id; });
    Entailer entailer(rc.backend);
    std::vector<nlohmann::json> rows(records.size());
    parallel_for(records.size(), workers_for(rc.backend), [&](std::size_t i) {
        const auto partition = cluster(entailer, records[i].atomic_claims, linking);
        rows[i] = {{"id", records[i].id},
                   {"n_atomic", partition.n},
                   {"clusters", partition.clusters},
                   {"semantic_entropy", semantic_entropy(partition, base)}};
    });
    emit(a.out, jsonl(rows), out);
    return 0;
}

struct AggregateArgs {
    std::string input, out;
    std::vector<std::string> verdicts;
};

std::vector<Label> labels_of(const nlohmann::json& arr) {
    if (!arr.is_array()) throw ValidationError("\"verdicts\" must be an array");
    std::vector<Label> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw ValidationError("verdicts must be strings");
        out.push_back(parse_label(v.get<std::string>()));
    }
    return out;
}

int run_aggregate(const AggregateArgs& a, std::ostream& out) {
    if (a.input.empty() == a.verdicts.empty())
        throw ValidationError("aggregate needs exactly one of --input or --verdicts");
    if (!a.verdicts.empty()) {
        std::vector<Label> labels;
        for (const auto& v : a.verdicts) labels.push_back(parse_label(v));
        emit(a.out, std::string(to_string(aggregate_verdicts(labels))) + "\n", out);
        return 0;
    }
    std::vector<nlohmann::json> rows;
    for (const auto& line : io::read_nonblank_lines(a.input)) {
        const auto where = a.input + ":" + std::to_string(line.number) + ": ";
        try {
            auto j = nlohmann::json::parse(line.text);
            if (!j.is_object() || !j.contains("verdicts"))
                throw ValidationError("row needs a \"verdicts\" array");
            nlohmann::json row;
            if (j.contains("id")) row["id"] = j["id"];
            row["label"] = to_string(aggregate_verdicts(labels_of(j["verdicts"])));
            rows.push_back(std::move(row));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }
    emit(a.out, jsonl(rows), out);
    return 0;
}

struct FilterArgs {
    CommonFlags common;
    std::string input, trees, format = "tree-jsonl", out, rejected, progress;
    bool subtree_check = false;
    std::optional<int> depth_cap;
};

int run_filter(const FilterArgs& a, std::ostream& out, std::ostream& err) {
    auto rc = resolve(a.common);
    Log log(err, rc.log_level);
    if (a.input.empty() == a.trees.empty())
        throw ValidationError("filter needs exactly one of --input or --trees");
    Decomposer decomposer(DecomposerConfig{rc.backend, a.depth_cap.value_or(rc.depth_cap), 0.0});
    auto progress = load_progress(a.progress);

    std::string kept_bytes;
    std::vector<Rejection> rejected;
    if (!a.input.empty()) {
        auto records = load_dataset(a.input);
        auto result = with_progress(a.progress, progress, [&] {
            return filter_records(records, decomposer, &progress, workers_for(rc.backend));
        });
        kept_bytes = dataset_to_jsonl(result.kept);
        rejected = std::move(result.rejected);
    } else {
        auto trees = load_trees(a.trees, parse_tree_format(a.format));
        auto result = with_progress(a.progress, progress, [&] {
            return filter_by_reverse_check(trees, decomposer, a.subtree_check, &progress,
                                           workers_for(rc.backend));
        });
        kept_bytes = trees_to_jsonl(result.kept);
        rejected = std::move(result.rejected);
    }
    std::vector<nlohmann::json> rows;
    for (const auto& r : rejected) {
        rows.push_back(rejection_to_json(r));
        log.info("rejected " + r.id + " (" + std::string(r.verdict.reason()) + ")");
    }
    if (!a.rejected.empty()) {
        io::AtomicFile rejected_file(a.rejected);
        rejected_file.write(jsonl(rows));
        emit(a.out, kept_bytes, out);
        rejected_file.commit();
    } else {
        emit(a.out, kept_bytes, out);
    }
    return 0;
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Claim decomposition metrics, synthetic data and benchmark tooling"};
    app.name("decmetrics");
    app.require_subcommand(1);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score decompositions: completeness, correctness, semantic entropy");
    add_common(evaluate, ev.common);
    evaluate->add_option("--input", ev.input, "Claim2Atom JSONL")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--predictions", ev.predictions, "Predicted decompositions keyed by id")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--out", ev.out, "Per-record metric rows (JSONL); default stdout");
    evaluate->add_option("--report", ev.report, "Eval report JSON with per_record and summary");
    evaluate->add_option("--alpha", ev.alpha, "Completeness weight");
    evaluate->add_option("--beta", ev.beta, "Correctness weight");
    evaluate->add_option("--gamma", ev.gamma, "Semantic entropy weight");
    evaluate->add_option("--log-base", ev.log_base, "Entropy log base: e or 2")
        ->check(CLI::IsMember({"e", "2"}));
    evaluate->add_option("--cluster-linking", ev.linking, "either (default) or both directions")
        ->check(CLI::IsMember({"either", "both"}));
    evaluate->add_flag("--comp-binary", ev.comp_binary, "Threshold completeness before averaging");

    DecomposeArgs de;
    auto* decompose = app.add_subcommand("decompose", "Recursively decompose claims into trees");
    add_common(decompose, de.common);
    decompose->add_option("--claims", de.claims, "One claim per line")->required()->check(CLI::ExistingFile);
    decompose->add_option("--out", de.out, "Trees JSONL; default stdout");
    decompose->add_option("--failed", de.failed, "JSONL of claims that did not converge");
    decompose->add_option("--depth-cap", de.depth_cap, "Maximum recursion depth (default 10)");

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth", "Generate labeled examples from decomposition trees");
    add_common(synth, sy.common);
    synth->add_option("--trees", sy.trees, "Decomposition trees")->check(CLI::ExistingFile);
    synth->add_option("--format", sy.format, "tree-json | tree-jsonl")
        ->check(CLI::IsMember({"tree-json", "tree-jsonl"}));
    synth->add_option("--entities", sy.entities, "One entity per line")->check(CLI::ExistingFile);
    synth->add_option("--summaries", sy.summaries, "Directory of <entity>.txt summaries")
        ->check(CLI::ExistingDirectory);
    synth->add_flag("--wikipedia", sy.wikipedia, "Fetch summaries from Wikipedia");
    synth->add_option("--wikipedia-url", sy.wikipedia_url, "Override the Wikipedia base URL");
    synth->add_option("--out-dir", sy.out_dir, "Output directory")->required();
    synth->add_option("--seed", sy.seed, "Sampling seed");
    synth->add_option("--split-ratio", sy.split_ratio, "Fraction of trees used for training");
    synth->add_option("--negatives-per-positive", sy.negatives, "Unsupported examples per supported one");
    synth->add_option("--pairing-mode", sy.pairing, "direct-children | leaf-frontier | both")
        ->check(CLI::IsMember({"direct-children", "leaf-frontier", "both"}));
    synth->add_flag("--reverse-check", sy.reverse_check, "Drop trees failing the reverse check");
    synth->add_flag("--subtree-check", sy.subtree_check, "Reverse-check every subtree, not just the root");
    synth->add_option("--progress", sy.progress, "Resumable reverse-check progress file");
    synth->add_option("--depth-cap", sy.depth_cap, "Maximum recursion depth (default 10)");

    StatsArgs st;
    auto* stats_cmd = app.add_subcommand("stats", "Claim2Atom statistics table");
    stats_cmd->add_option("--input", st.input, "Claim2Atom JSONL")->required()->check(CLI::ExistingFile);
    stats_cmd->add_flag("--json", st.json, "Emit JSON instead of a table");

    ClusterArgs cl;
    auto* cluster_cmd = app.add_subcommand("cluster", "Cluster atomic claims and report semantic entropy");
    add_common(cluster_cmd, cl.common);
    cluster_cmd->add_option("--input", cl.input, "Claim2Atom JSONL")->required()->check(CLI::ExistingFile);
    cluster_cmd->add_option("--out", cl.out, "JSONL; default stdout");
    cluster_cmd->add_option("--log-base", cl.log_base, "Entropy log base: e or 2")
        ->check(CLI::IsMember({"e", "2"}));
    cluster_cmd->add_option("--cluster-linking", cl.linking, "either (default) or both directions")
        ->check(CLI::IsMember({"either", "both"}));

    AggregateArgs ag;
    auto* aggregate = app.add_subcommand("aggregate", "Claim label from atomic verdicts");
    aggregate->add_option("--input", ag.input, "JSONL rows with a \"verdicts\" array")
        ->check(CLI::ExistingFile);
    aggregate->add_option("--verdicts", ag.verdicts, "Inline verdicts")->delimiter(',');
    aggregate->add_option("--out", ag.out, "Output; default stdout");

    FilterArgs fi;
    auto* filter = app.add_subcommand("filter", "Reverse-check records or trees and keep passing ones");
    add_common(filter, fi.common);
    filter->add_option("--input", fi.input, "Claim2Atom JSONL")->check(CLI::ExistingFile);
    filter->add_option("--trees", fi.trees, "Decomposition trees")->check(CLI::ExistingFile);
    filter->add_option("--format", fi.format, "tree-json | tree-jsonl")
        ->check(CLI::IsMember({"tree-json", "tree-jsonl"}));
    filter->add_option("--out", fi.out, "Kept items; default stdout");
    filter->add_option("--rejected", fi.rejected, "Rejected items with verdicts (JSONL)");
    filter->add_option("--progress", fi.progress, "Resumable progress file");
    filter->add_flag("--subtree-check", fi.subtree_check, "Check every subtree of each tree");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return 1;
    }

    try {
        if (*evaluate) return run_evaluate(ev, out, err);
        if (*decompose) return run_decompose(de, out, err);
        if (*synth) return run_synth(sy, out, err);
        if (*stats_cmd) return run_stats(st, out);
        if (*cluster_cmd) return run_cluster(cl, out);
        if (*aggregate) return run_aggregate(ag, out);
        if (*filter) return run_filter(fi, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 1;
}

} // namespace decmetrics::cli
