#include "cli.hpp"
#include "decmetrics/bench.hpp"
#include "decmetrics/io.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace decmetrics;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "decmetrics");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> jsonl_rows(const std::string& s) {
    std::vector<nlohmann::json> rows;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
    return rows;
}

void write_dataset(const std::filesystem::path& p) {
    std::ofstream f(p);
    f << R"({"id": "r2", "dataset": "FActScore", "split": "test", "claim": "Lanny Flaherty was born on December 18, 1949, in Pensacola, Florida.", "atomic_claims": ["Lanny Flaherty was born on December 18, 1949.", "Lanny Flaherty was born in Pensacola, Florida."]})" "\n";
    f << R"({"id": "r1", "dataset": "WICE", "split": "train", "claim": "A and B.", "atomic_claims": ["A."]})" "\n";
}

} // namespace

TEST_SUITE("cli") {
    TEST_CASE("usage and help") {
        CHECK(run({"--help"}).code == 0);
        CHECK(run({"evaluate", "--help"}).code == 0);
        CHECK(run({}).code == 1);
        CHECK(run({"frobnicate"}).code == 1);
        auto r = run({"evaluate", "--input", "/no/such/file.jsonl"});
        CHECK(r.code == 1);
        CHECK(r.out.empty());
        CHECK_FALSE(r.err.empty());
        CHECK(run({"evaluate", "--input", "x", "--log-base", "10"}).code == 1);
    }

    TEST_CASE("evaluate writes rows and a report") {
        fixtures::TempDir dir;
        write_dataset(dir / "d.jsonl");
        auto r = run({"evaluate", "--input", (dir / "d.jsonl").string(), "--backend", "mock", "--out",
                      (dir / "rows.jsonl").string(), "--report", (dir / "report.json").string()});
        REQUIRE(r.code == 0);
        CHECK(r.out.empty());
        auto rows = jsonl_rows(io::read_file(dir / "rows.jsonl"));
        REQUIRE(rows.size() == 2);
        CHECK(rows[0]["id"] == "r1");
        CHECK(rows[1]["completeness"] == 1.0);
        CHECK(rows[1]["semantic_entropy"].get<double>() == doctest::Approx(std::log(2.0)));
        auto report = nlohmann::json::parse(io::read_file(dir / "report.json"));
        CHECK(report["summary"]["n"] == 2);
        CHECK(report["per_record"].size() == 2);

        auto to_stdout = run({"evaluate", "--input", (dir / "d.jsonl").string(), "--gamma", "0"});
        REQUIRE(to_stdout.code == 0);
        auto rows2 = jsonl_rows(to_stdout.out);
        CHECK(rows2[1]["reward"] == 2.0);
    }

    TEST_CASE("evaluate with predictions and log base 2") {
        fixtures::TempDir dir;
        write_dataset(dir / "d.jsonl");
        std::ofstream(dir / "p.jsonl") << R"({"id": "r2", "atomic_claims": ["a", "b", "c", "d"]})" "\n";
        auto r = run({"evaluate", "--input", (dir / "d.jsonl").string(), "--predictions",
                      (dir / "p.jsonl").string(), "--log-base", "2", "--report", (dir / "rep.json").string()});
        REQUIRE(r.code == 0);
        auto rows = jsonl_rows(r.out);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0]["semantic_entropy"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
        auto rep = nlohmann::json::parse(io::read_file(dir / "rep.json"));
        CHECK(rep["summary"]["skipped"] == 1);
        CHECK(rep["summary"]["skipped_ids"] == nlohmann::json::array({"r1"}));
    }

    TEST_CASE("backend failures exit 2 and leave no partial files") {
        fixtures::TempDir dir;
        write_dataset(dir / "d.jsonl");
        auto r = run({"evaluate", "--input", (dir / "d.jsonl").string(), "--backend", "http-nli", "--endpoint",
                      "http://127.0.0.1:1", "--max-retries", "0", "--timeout", "2", "--out",
                      (dir / "rows.jsonl").string(), "--report", (dir / "report.json").string()});
        CHECK(r.code == 2);
        CHECK_FALSE(std::filesystem::exists(dir / "rows.jsonl"));
        CHECK_FALSE(std::filesystem::exists(dir / "report.json"));
        CHECK(std::distance(std::filesystem::directory_iterator(dir.path()),
                            std::filesystem::directory_iterator{}) == 1);
    }

    TEST_CASE("config files and overrides") {
        fixtures::TempDir dir;
        write_dataset(dir / "d.jsonl");
        std::ofstream(dir / "cfg.json") << R"({"backend": {"kind": "http-nli", "endpoint": "http://127.0.0.1:1"}, "weights": {"gamma": 0}})";
        auto flagged = run({"evaluate", "--config", (dir / "cfg.json").string(), "--backend", "mock", "--input",
                            (dir / "d.jsonl").string()});
        REQUIRE(flagged.code == 0);
        CHECK(jsonl_rows(flagged.out)[1]["reward"] == 2.0);

        std::ofstream(dir / "secret.json") << R"({"api_key": "abc"})";
        CHECK(run({"stats", "--input", (dir / "d.jsonl").string()}).code == 0);
        CHECK(run({"evaluate", "--config", (dir / "secret.json").string(), "--input", (dir / "d.jsonl").string()})
                  .code == 1);
        std::ofstream(dir / "broken.json") << "{";
        CHECK(run({"evaluate", "--config", (dir / "broken.json").string(), "--input", (dir / "d.jsonl").string()})
                  .code == 1);
        CHECK(run({"evaluate", "--input", (dir / "d.jsonl").string(), "--backend", "chat", "--endpoint",
                   "http://127.0.0.1:1"})
                  .code == 1);
    }

    TEST_CASE("stats, cluster and aggregate") {
        fixtures::TempDir dir;
        write_dataset(dir / "d.jsonl");
        auto s = run({"stats", "--input", (dir / "d.jsonl").string()});
        REQUIRE(s.code == 0);
        CHECK(s.out.find("FActScore") != std::string::npos);
        CHECK(s.out.find("ALL") != std::string::npos);
        auto sj = run({"stats", "--input", (dir / "d.jsonl").string(), "--json"});
        CHECK(nlohmann::json::parse(sj.out).size() == 4);

        auto c = run({"cluster", "--input", (dir / "d.jsonl").string()});
        REQUIRE(c.code == 0);
        auto rows = jsonl_rows(c.out);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0]["id"] == "r1");
        CHECK(rows[1]["clusters"].size() == 2);

        auto a = run({"aggregate", "--verdicts", "supported,supported"});
        CHECK(a.code == 0);
        CHECK(a.out == "supported\n");
        CHECK(run({"aggregate", "--verdicts", "supported,maybe"}).code == 1);
        std::ofstream(dir / "v.jsonl") << R"({"id": "x", "verdicts": ["supported", "unsupported"]})" "\n"
                                       << R"({"id": "y", "verdicts": ["supported"]})" "\n";
        auto af = run({"aggregate", "--input", (dir / "v.jsonl").string()});
        REQUIRE(af.code == 0);
        auto ag = jsonl_rows(af.out);
        CHECK(ag[0]["label"] == "unsupported");
        CHECK(ag[1]["label"] == "supported");
        std::ofstream(dir / "bad.jsonl") << R"({"id": "x", "verdicts": []})" "\n";
        auto bad = run({"aggregate", "--input", (dir / "bad.jsonl").string()});
        CHECK(bad.code == 1);
        CHECK(bad.err.find("bad.jsonl:1") != std::string::npos);
    }

    TEST_CASE("decompose") {
        fixtures::TempDir dir;
        std::ofstream(dir / "claims.txt") << "A and B. C.\n\nOnly one.\n";
        auto r = run({"decompose", "--claims", (dir / "claims.txt").string(), "--out", (dir / "t.jsonl").string()});
        REQUIRE(r.code == 0);
        auto trees = load_trees(dir / "t.jsonl", TreeFormat::Jsonl);
        REQUIRE(trees.size() == 2);
        CHECK(trees[0].id == "claim-1");
        CHECK(trees[1].id == "claim-3");
        CHECK(texts(leaves(trees[0].tree)) == std::vector<std::string>{"A.", "B.", "C."});
        CHECK(trees[1].tree.is_leaf());
        CHECK(run({"decompose", "--claims", (dir / "claims.txt").string(), "--depth-cap", "1"}).code == 0);
    }

    TEST_CASE("filter") {
        fixtures::TempDir dir;
        write_dataset(dir / "d.jsonl");
        auto r = run({"filter", "--input", (dir / "d.jsonl").string(), "--out", (dir / "kept.jsonl").string(),
                      "--rejected", (dir / "rej.jsonl").string(), "--progress", (dir / "prog.jsonl").string()});
        REQUIRE(r.code == 0);
        auto kept = load_dataset(dir / "kept.jsonl");
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].id == "r2");
        auto rej = jsonl_rows(io::read_file(dir / "rej.jsonl"));
        REQUIRE(rej.size() == 1);
        CHECK(rej[0]["id"] == "r1");
        CHECK(rej[0]["reason"] == "completeness");
        CHECK(jsonl_rows(io::read_file(dir / "prog.jsonl")).size() == 2);
        CHECK(run({"filter"}).code == 1);
    }

    TEST_CASE("synth from trees and from entities") {
        fixtures::TempDir dir;
        std::ofstream(dir / "trees.jsonl")
            << R"({"id": "a", "claim": "A and B.", "children": [{"claim": "A.", "children": []}, {"claim": "B.", "children": []}]})" "\n"
            << R"({"id": "b", "claim": "C and D.", "children": [{"claim": "C.", "children": []}, {"claim": "D.", "children": []}]})" "\n"
            << R"({"id": "c", "claim": "E and F and G.", "children": [{"claim": "E.", "children": []}, {"claim": "G.", "children": []}]})" "\n";
        const auto out = dir / "out";
        auto r = run({"synth", "--trees", (dir / "trees.jsonl").string(), "--out-dir", out.string(), "--seed", "3",
                      "--reverse-check"});
        REQUIRE(r.code == 0);
        for (auto name : {"train.jsonl", "eval.jsonl", "decdata.jsonl", "split.json", "trees.jsonl", "rejected.jsonl"})
            CHECK(std::filesystem::exists(out / name));
        auto split = nlohmann::json::parse(io::read_file(out / "split.json"));
        CHECK(split["train"].size() + split["eval"].size() == 2);
        auto rejected = jsonl_rows(io::read_file(out / "rejected.jsonl"));
        REQUIRE(rejected.size() == 1);
        CHECK(rejected[0]["id"] == "c");

        std::ofstream(dir / "entities.txt") << "Ash\nMercury\nBo\n";
        std::filesystem::create_directories(dir / "summaries");
        std::ofstream(dir / "summaries" / "Ash.txt") << "Ash sings and Ash acts.";
        std::ofstream(dir / "summaries" / "Bo.txt") << "Bo paints. Bo cooks and Bo swims.";
        std::ofstream(dir / "summaries" / "Mercury.txt") << "Mercury may refer to:\n";
        auto e = run({"synth", "--entities", (dir / "entities.txt").string(), "--summaries",
                      (dir / "summaries").string(), "--out-dir", (dir / "out2").string(), "--log-level", "info"});
        REQUIRE(e.code == 0);
        CHECK(e.err.find("Mercury") != std::string::npos);
        auto built = load_trees(dir / "out2" / "trees.jsonl", TreeFormat::Jsonl);
        CHECK(built.size() == 2);

        CHECK(run({"synth", "--out-dir", (dir / "x").string()}).code == 1);
        CHECK(run({"synth", "--entities", (dir / "entities.txt").string(), "--out-dir", (dir / "x").string()}).code == 1);
    }
}
