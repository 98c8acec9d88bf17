#include "decmetrics/errors.hpp"
#include "decmetrics/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace decmetrics;

namespace {

Entailer mock_entailer() { return Entailer(std::make_unique<MockBackend>(), 1); }

std::vector<AtomicClaim> atoms(const std::vector<std::string>& t) { return to_claims(t); }

const std::string kClaim = "Lanny Flaherty was born on December 18, 1949, in Pensacola, Florida.";

// Entropy straight from cluster sizes.
double direct_entropy(const std::vector<std::size_t>& sizes) {
    double n = 0;
    for (auto s : sizes) n += static_cast<double>(s);
    double h = 0;
    for (auto s : sizes) {
        double q = static_cast<double>(s) / n;
        h -= q * std::log(q);
    }
    return h;
}

// Reachability by Warshall's closure over the either-direction link relation.
std::vector<std::size_t> closure_labels(const std::vector<std::string>& t) {
    const auto n = t.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        r[i][i] = true;
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && (mock_judge(t[i], t[j]).supported() || mock_judge(t[j], t[i]).supported()))
                r[i][j] = true;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) {
        label[i] = i;
        for (std::size_t j = 0; j < i; ++j)
            if (r[i][j]) {
                label[i] = label[j];
                break;
            }
    }
    return label;
}

} // namespace

TEST_SUITE("metrics") {
    TEST_CASE("Partition canonical form and validation") {
        auto p = Partition::from_labels({5, 2, 5, 7});
        CHECK(p.n == 4);
        CHECK(p.clusters == std::vector<std::vector<std::size_t>>{{0, 2}, {1}, {3}});
        CHECK(p.sizes() == std::vector<std::size_t>{2, 1, 1});
        CHECK_NOTHROW(p.validate());
        CHECK_THROWS_AS((Partition{{{0}, {0, 1}}, 2}).validate(), ValidationError);
        CHECK_THROWS_AS((Partition{{{0}}, 2}).validate(), ValidationError);
        CHECK_THROWS_AS((Partition{{{1}, {0}}, 2}).validate(), ValidationError);
    }

    TEST_CASE("completeness") {
        auto e = mock_entailer();
        CHECK(completeness(e, Claim("a b c"), atoms({"a b c"})) == 1.0);
        CHECK(completeness(e, Claim("a b c"), atoms({"a b", "c"})) == 1.0);
        CHECK_THROWS_AS(completeness(e, Claim("a"), {}), ValidationError);

        // Left panel: the year is dropped.
        auto j = completeness_judgment(e, Claim(kClaim),
                                       atoms({"Lanny Flaherty was born on December 18.",
                                              "Lanny Flaherty was born in Pensacola, Florida."}));
        CHECK_FALSE(j.supported());
        CHECK(j.p_supported < 1.0);
        CHECK(j.p_supported == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
    }

    TEST_CASE("correctness") {
        auto e = mock_entailer();
        auto c = correctness(e, Claim(kClaim),
                             atoms({"Lanny Flaherty was born on July 27, 1942.",
                                    "Lanny Flaherty was born in Pensacola, Florida."}));
        CHECK(c.fraction == doctest::Approx(0.5).epsilon(1e-12));
        REQUIRE(c.verdicts.size() == 2);
        CHECK_FALSE(c.verdicts[0].supported());
        CHECK(c.verdicts[1].supported());
        CHECK(correctness(e, Claim("x y"), atoms({"x y", "x y"})).fraction == 1.0);

        std::mt19937 gen(11);
        const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<std::string> t;
            for (int i = 0; i < 4; ++i) t.push_back(vocab[gen() % 5] + " " + vocab[gen() % 5]);
            const std::string claim = "a b c";
            int hits = 0;
            for (auto& s : t) hits += mock_judge(claim, s).supported();
            CHECK(correctness(e, Claim(claim), atoms(t)).fraction == doctest::Approx(hits / 4.0).epsilon(1e-15));
        }
    }

    TEST_CASE("clustering") {
        auto e = mock_entailer();
        auto bottom = cluster(e, atoms({"Lanny Flaherty was born on December 18, 1949.",
                                        "Lanny Flaherty was born on December 18.",
                                        "Lanny Flaherty was born on 1949.",
                                        "Lanny Flaherty was born in Pensacola, Florida."}));
        CHECK(bottom.clusters == std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3}});
        CHECK(semantic_entropy(bottom) == doctest::Approx(0.562335).epsilon(1e-6));

        CHECK(cluster(e, atoms({"a", "b", "c"})).clusters.size() == 3);
        CHECK(cluster(e, atoms({"x", "x", "y"})).clusters == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});

        // "a b" contains both "a" and "b", chaining them in either mode but not in strict mode.
        CHECK(cluster(e, atoms({"a", "a b", "b"})).clusters.size() == 1);
        CHECK(cluster(e, atoms({"a", "a b", "b"}), ClusterLinking::Both).clusters.size() == 3);
    }

    TEST_CASE("cluster matches a transitive-closure oracle") {
        std::mt19937 gen(17);
        const std::vector<std::string> vocab = {"p", "q", "r", "s"};
        auto e = mock_entailer();
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<std::string> t;
            const int n = 1 + static_cast<int>(gen() % 6);
            for (int i = 0; i < n; ++i) {
                std::string s;
                for (const auto& w : vocab)
                    if (gen() % 2) s += w + " ";
                if (s.empty()) s = vocab[gen() % 4];
                t.push_back(s);
            }
            auto got = cluster(e, atoms(t));
            CHECK(got == Partition::from_labels(closure_labels(t)));
            CHECK(semantic_entropy(got) == doctest::Approx(direct_entropy(got.sizes())).epsilon(1e-12));
        }
    }

    TEST_CASE("entropy identities") {
        CHECK(semantic_entropy(Partition::from_labels({0})) == 0.0);
        CHECK(semantic_entropy(Partition::from_labels({0, 0, 0})) == 0.0);
        CHECK_FALSE(std::signbit(semantic_entropy(Partition::from_labels({0, 0}))));
        for (std::size_t k : {2u, 3u, 4u, 8u}) {
            std::vector<std::size_t> labels(k);
            for (std::size_t i = 0; i < k; ++i) labels[i] = i;
            CHECK(semantic_entropy(Partition::from_labels(labels)) ==
                  doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-12));
            auto doubled = labels;
            doubled.insert(doubled.end(), labels.begin(), labels.end());
            CHECK(semantic_entropy(Partition::from_labels(doubled)) ==
                  doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-12));
        }
        CHECK(semantic_entropy(Partition::from_labels({0, 1, 2, 3})) == doctest::Approx(1.386294).epsilon(1e-6));
        CHECK(semantic_entropy(Partition::from_labels({0, 1, 2, 3}), LogBase::Two) ==
              doctest::Approx(2.0).epsilon(1e-12));
        CHECK_THROWS_AS(semantic_entropy(Partition{}), ValidationError);
    }

    TEST_CASE("reward") {
        RewardWeights w;
        CHECK(reward(1.0, 1.0, 0.0, w) == 2.0);
        CHECK(reward(0.5, 0.5, std::log(2.0), w) == doctest::Approx(1.693147).epsilon(1e-6));
        CHECK(reward(0.9, 0.8, 0.3, RewardWeights{0, 1, 0}) == 0.8);
        CHECK_THROWS_AS(reward(NAN, 0, 0, w), ValidationError);
        CHECK_THROWS_AS(reward(INFINITY, 0, 0, w), ValidationError);
        CHECK_THROWS_AS((RewardWeights{-1, 1, 1}).validate(), ValidationError);

        // Linear in each weight with the metric values held fixed.
        const double cp = 0.3, cr = 0.6, se = 0.9;
        for (double a : {0.0, 1.0, 2.5})
            CHECK(reward(cp, cr, se, {a, 1, 1}) == doctest::Approx(a * cp + cr + se).epsilon(1e-12));
    }

    TEST_CASE("evaluate") {
        auto e = mock_entailer();
        auto identity = evaluate(e, Claim("a b c"), atoms({"a b c"}), {});
        CHECK(identity.completeness == 1.0);
        CHECK(identity.correctness == 1.0);
        CHECK(identity.semantic_entropy == 0.0);
        CHECK(identity.reward == 2.0);

        auto right = evaluate(e, Claim(kClaim),
                              atoms({"Lanny Flaherty was born on December 18, 1949.",
                                     "Lanny Flaherty was born in Pensacola, Florida."}),
                              {});
        CHECK(right.completeness == 1.0);
        CHECK(right.correctness == 1.0);
        CHECK(right.semantic_entropy == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(right.reward == doctest::Approx(2.0 + std::log(2.0)).epsilon(1e-12));
        CHECK(right.reward == doctest::Approx(2.6931).epsilon(1e-4));
        CHECK(right.per_claim_verdicts.size() == 2);

        auto row = report_to_json("r1", right);
        CHECK(row["id"] == "r1");
        CHECK(row["n_atomic"] == 2);
        CHECK(row["verdicts"] == nlohmann::json::array({"supported", "supported"}));
    }

    TEST_CASE("permutation invariance under the mock") {
        auto e = mock_entailer();
        std::vector<std::string> t = {"a b", "b", "c d", "e", "a"};
        auto base = evaluate(e, Claim("a b c d e f"), atoms(t), {});
        std::mt19937 gen(2);
        for (int i = 0; i < 20; ++i) {
            std::shuffle(t.begin(), t.end(), gen);
            auto r = evaluate(e, Claim("a b c d e f"), atoms(t), {});
            CHECK(r.completeness == base.completeness);
            CHECK(r.correctness == base.correctness);
            CHECK(r.semantic_entropy == doctest::Approx(base.semantic_entropy).epsilon(1e-12));
        }
    }

    TEST_CASE("check_report rejects broken reports") {
        MetricReport r;
        r.completeness = 1.0;
        r.correctness = 1.0;
        r.partition = Partition::from_labels({0});
        r.per_claim_verdicts = {Judgment{Label::Supported, 1.0}};
        r.reward = 2.0;
        CHECK_NOTHROW(check_report(r, {}, LogBase::E));
        r.reward = 2.5;
        CHECK_THROWS_AS(check_report(r, {}, LogBase::E), Error);
        r.reward = 2.0;
        r.semantic_entropy = 0.5;
        r.reward = 2.5;
        CHECK_THROWS_AS(check_report(r, {}, LogBase::E), Error);
    }
}
