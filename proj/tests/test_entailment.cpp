#include "decmetrics/entailment.hpp"
#include "decmetrics/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>
#include <unordered_set>

using namespace decmetrics;

namespace {

// Counts calls, optionally slows down, and fails on a chosen hypothesis.
class ScriptedBackend final : public EntailmentBackend {
public:
    explicit ScriptedBackend(std::chrono::milliseconds delay = {}, std::string fail_on = {})
        : delay_(delay), fail_on_(std::move(fail_on)) {}

    Judgment judge(const std::string& premise, const std::string& hypothesis) override {
        calls.fetch_add(1);
        if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
        if (!fail_on_.empty() && hypothesis == fail_on_) throw BackendError("scripted failure");
        return mock_judge(premise, hypothesis);
    }

    std::atomic<int> calls{0};

private:
    std::chrono::milliseconds delay_;
    std::string fail_on_;
};

// Oracle: coverage ratio computed from scratch, without the library tokenizer.
double coverage(const std::string& premise, const std::string& hypothesis) {
    auto tokens = [](const std::string& s) {
        std::set<std::string> out;
        std::string cur;
        for (char ch : s + " ") {
            unsigned char c = static_cast<unsigned char>(ch);
            if (std::isspace(c)) {
                if (!cur.empty()) out.insert(cur);
                cur.clear();
            } else if (!std::ispunct(c)) {
                cur.push_back(static_cast<char>(std::tolower(c)));
            }
        }
        return out;
    };
    auto p = tokens(premise), h = tokens(hypothesis);
    if (h.empty()) return 1.0;
    std::size_t hit = 0;
    for (auto& t : h) hit += p.count(t);
    return static_cast<double>(hit) / static_cast<double>(h.size());
}

} // namespace

TEST_SUITE("entailment") {
    TEST_CASE("labels and judgments") {
        CHECK(parse_label("supported") == Label::Supported);
        CHECK(to_string(Label::Unsupported) == "unsupported");
        CHECK_THROWS_AS(parse_label("maybe"), ValidationError);
        CHECK(make_judgment(0.5, 0.5).supported());
        CHECK_FALSE(make_judgment(0.4999, 0.5).supported());
    }

    TEST_CASE("backend config validation") {
        BackendConfig c;
        CHECK_NOTHROW(c.validate());
        c.kind = BackendKind::HttpNli;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c.endpoint = "http://localhost:1";
        CHECK_NOTHROW(c.validate());
        c.kind = BackendKind::ChatLlm;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c.model_name = "m";
        CHECK_NOTHROW(c.validate());
        c.max_in_flight = 0;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        CHECK(parse_backend_kind("nli") == BackendKind::HttpNli);
        CHECK(parse_backend_kind("chat") == BackendKind::ChatLlm);
        CHECK_THROWS_AS(parse_backend_kind("gpu"), ValidationError);
    }

    TEST_CASE("mock oracle examples") {
        CHECK(mock_judge("a b c", "a b c") == Judgment{Label::Supported, 1.0});
        CHECK(mock_judge("x y", "z") == Judgment{Label::Unsupported, 0.0});
        CHECK(mock_judge("the cat sat", "cat sat") == Judgment{Label::Supported, 1.0});
        CHECK(mock_judge("the cat sat", "cat ran") == Judgment{Label::Unsupported, 0.5});
        CHECK(mock_judge("A B", "A B C D") == Judgment{Label::Unsupported, 0.5});
        CHECK(mock_judge("Hello, World!", "world hello") == Judgment{Label::Supported, 1.0});
        CHECK(mock_judge("x", "...") == Judgment{Label::Supported, 1.0});
        CHECK_THROWS_AS(mock_judge("", "a"), ValidationError);
    }

    TEST_CASE("missing year leaves one of eight hypothesis tokens uncovered") {
        const std::string premise = "Lanny Flaherty was born on December 18.";
        const std::string hypothesis = "Lanny Flaherty was born on December 18, 1949.";
        auto j = mock_judge(premise, hypothesis);
        CHECK(j.label == Label::Unsupported);
        CHECK(j.p_supported == doctest::Approx(coverage(premise, hypothesis)).epsilon(1e-15));
        CHECK(j.p_supported == doctest::Approx(7.0 / 8.0).epsilon(1e-15));
        CHECK(mock_tokens(hypothesis).size() == 8);
    }

    TEST_CASE("mock matches an independent coverage oracle on random text") {
        std::mt19937 gen(5);
        const std::vector<std::string> vocab = {"Alpha", "beta,", "Gamma.", "delta", "eps!", "zeta", "eta"};
        for (int i = 0; i < 500; ++i) {
            auto sentence = [&] {
                std::string s;
                int n = std::uniform_int_distribution<int>(1, 5)(gen);
                for (int k = 0; k < n; ++k) s += vocab[gen() % vocab.size()] + " ";
                return s;
            };
            auto p = sentence(), h = sentence();
            auto j = mock_judge(p, h);
            CHECK(j.p_supported == doctest::Approx(coverage(p, h)).epsilon(1e-15));
            CHECK(j.supported() == (coverage(p, h) == 1.0));
        }
    }

    TEST_CASE("cache keys") {
        CHECK_FALSE(cache_key("a", "b") == cache_key("b", "a"));
        CHECK(cache_key("a", "b") == cache_key("a", "b"));
        CHECK_FALSE(cache_key("ab", "c") == cache_key("a", "bc"));
        CHECK(cache_key("a", "b").fingerprint() == cache_key("a", "b").fingerprint());
        CHECK(normalize_for_backend("  a \n b ") == "a b");

        std::mt19937_64 gen(99);
        std::unordered_set<std::string> bytes;
        std::unordered_set<std::uint64_t> prints;
        std::set<std::pair<std::string, std::string>> inputs;
        auto word = [&] {
            std::string s;
            int n = 1 + static_cast<int>(gen() % 12);
            for (int k = 0; k < n; ++k) s.push_back(static_cast<char>('a' + gen() % 26));
            return s;
        };
        while (inputs.size() < 100000) inputs.emplace(word(), word());
        for (const auto& [p, h] : inputs) {
            auto k = cache_key(p, h);
            bytes.insert(k.bytes());
            prints.insert(k.fingerprint());
        }
        CHECK(bytes.size() == inputs.size());
        CHECK(prints.size() == inputs.size());
    }

    TEST_CASE("identical pairs in a batch cost at most one call") {
        auto backend = std::make_unique<ScriptedBackend>();
        auto* raw = backend.get();
        Entailer e(std::move(backend), 4);
        auto out = e.judge_batch({{"a b", "a"}, {"a b", "a"}, {" a  b", "a "}});
        REQUIRE(out.size() == 3);
        CHECK(out[0] == out[1]);
        CHECK(out[1] == out[2]);
        CHECK(raw->calls.load() == 1);
        CHECK(e.judge_batch({}).empty());
        e.judge("a b", "a");
        CHECK(raw->calls.load() == 1);
    }

    TEST_CASE("batch equals element-wise judge in any order") {
        std::vector<Entailer::Pair> pairs;
        std::mt19937 gen(3);
        const std::vector<std::string> words = {"a", "b", "c", "d"};
        for (int i = 0; i < 60; ++i) {
            auto s = [&] { return words[gen() % 4] + " " + words[gen() % 4]; };
            pairs.emplace_back(s(), s());
        }
        std::shuffle(pairs.begin(), pairs.end(), gen);
        Entailer batch(std::make_unique<ScriptedBackend>(std::chrono::milliseconds(1)), 8);
        auto got = batch.judge_batch(pairs);
        Entailer seq(std::make_unique<MockBackend>(), 1);
        for (std::size_t i = 0; i < pairs.size(); ++i)
            CHECK(got[i] == seq.judge(pairs[i].first, pairs[i].second));
    }

    TEST_CASE("in-flight calls stay within the bound") {
        auto backend = std::make_unique<ScriptedBackend>(std::chrono::milliseconds(5));
        Entailer e(std::move(backend), 3);
        std::vector<Entailer::Pair> pairs;
        for (int i = 0; i < 30; ++i) pairs.emplace_back("p" + std::to_string(i), "h");
        e.judge_batch(pairs);
        CHECK(e.peak_in_flight() <= 3);
        CHECK(e.peak_in_flight() >= 2);
        CHECK(e.backend_calls() == 30);
    }

    TEST_CASE("concurrent callers share one backend call per key") {
        auto backend = std::make_unique<ScriptedBackend>(std::chrono::milliseconds(20));
        auto* raw = backend.get();
        Entailer e(std::move(backend), 8);
        std::vector<std::jthread> threads;
        std::vector<Judgment> results(8);
        for (int t = 0; t < 8; ++t)
            threads.emplace_back([&, t] { results[t] = e.judge("x y", "x"); });
        threads.clear();
        CHECK(raw->calls.load() == 1);
        for (auto& r : results) CHECK(r.supported());
    }

    TEST_CASE("a failing batch element is identified by index") {
        Entailer e(std::make_unique<ScriptedBackend>(std::chrono::milliseconds(0), "boom"), 2);
        try {
            e.judge_batch({{"a", "a"}, {"b", "b"}, {"c", "boom"}, {"d", "d"}});
            FAIL("expected BatchError");
        } catch (const BatchError& err) {
            CHECK(err.index() == 2);
        }
        CHECK_THROWS_AS(e.judge_batch({{"a", "a"}, {" ", "b"}}), ValidationError);
        CHECK_THROWS_AS(e.judge("", "x"), ValidationError);
    }

    TEST_CASE("chat label parsing") {
        CHECK(parse_chat_label("Supported.") == Label::Supported);
        CHECK(parse_chat_label("The answer: UNSUPPORTED") == Label::Unsupported);
        CHECK(parse_chat_label("supported, not unsupported") == Label::Supported);
        CHECK(parse_chat_label("unsupported; earlier I said supported") == Label::Unsupported);
        CHECK_THROWS_AS(parse_chat_label("no idea"), ProtocolError);
        auto prompt = render_judgment_prompt("P text", "H text");
        CHECK(prompt.find("P text") != std::string::npos);
        CHECK(prompt.find("H text") != std::string::npos);
    }
}
