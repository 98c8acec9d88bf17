#pragma once

#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "decmetrics/claims.hpp"
#include "decmetrics/entailment.hpp"

namespace decmetrics {

// Prompt templates. Slots: "[Claim]" in the decomposition prompt,
// "[Original Claim]" and "[Atomic Claims]" in the reverse-check prompt.
inline constexpr std::string_view kPromptVersion = "v1";
std::string_view decomposition_template();
std::string_view reverse_check_template();

enum class PromptKind { Decomposition, ReverseCheck };

// Rendered text plus the slot values it was rendered from, so offline
// generators can answer without re-parsing the prompt.
struct RenderedPrompt {
    PromptKind kind = PromptKind::Decomposition;
    std::string text;
    std::string claim;
    std::vector<std::string> atomics;
};

RenderedPrompt render_decomposition_prompt(const Claim& claim);
RenderedPrompt render_reverse_check_prompt(const Claim& claim, const std::vector<AtomicClaim>& atomics);

// Items of the first <answer>...</answer> block: lines starting with "- ",
// prefix stripped and trimmed, empty items dropped. Throws ParseError when
// there is no block, the block is unterminated, or it holds no items.
std::vector<std::string> parse_answer_block(std::string_view reply);

struct CheckVerdict {
    bool complete = false;
    bool correct = false;
    bool independent = false;

    bool passed() const noexcept { return complete && correct && independent; }
    // First failing criterion, or "" when passed.
    std::string_view reason() const noexcept;

    friend bool operator==(const CheckVerdict&, const CheckVerdict&) = default;
};

// Exactly three items, in order: [not ]complete, [not ]correct, [not ]independent.
CheckVerdict parse_check_verdict(std::string_view reply);

std::string format_answer_block(const std::vector<std::string>& items);
std::string format_check_verdict(const CheckVerdict& verdict);

class Generator {
public:
    virtual ~Generator() = default;
    virtual std::string generate(const RenderedPrompt& prompt) = 0;
};

class ChatGenerator final : public Generator {
public:
    ChatGenerator(const BackendConfig& config, http::RetryPolicy retry);
    std::string generate(const RenderedPrompt& prompt) override;

private:
    ChatClient chat_;
};

// Offline splitter: more than one sentence (period followed by whitespace
// or end of text, outside brackets) splits into sentences; otherwise the
// top-level token "and" splits the sentence; otherwise the claim is atomic.
std::vector<std::string> mock_split(std::string_view claim);

// Token heuristics standing in for an LLM reverse check. The splitter
// consumes the connective "and", so completeness disregards that token.
CheckVerdict mock_reverse_check(std::string_view claim, const std::vector<std::string>& atomics);

class MockSplitter final : public Generator {
public:
    std::string generate(const RenderedPrompt& prompt) override;
};

std::unique_ptr<Generator> make_generator(const BackendConfig& config);

struct DecomposerConfig {
    BackendConfig generation;   // chat-llm, or mock for the offline splitter
    int depth_cap = 10;
    double temperature = 0.0;

    void validate() const;
};

class Decomposer {
public:
    explicit Decomposer(const DecomposerConfig& config);
    Decomposer(std::shared_ptr<Generator> generator, int depth_cap, int max_in_flight = 1);

    // Render, generate, parse. A malformed reply is re-asked once.
    std::vector<Claim> decompose_once(const Claim& claim);

    // Leaves are claims whose decomposition is a single sub-claim. A claim
    // at depth_cap that still splits raises NonConvergenceError.
    DecompositionTree decompose_recursive(const Claim& claim);

    CheckVerdict reverse_check(const Claim& claim, const std::vector<AtomicClaim>& atomics);

    int depth_cap() const noexcept { return depth_cap_; }

private:
    std::string ask(const RenderedPrompt& prompt);
    DecompositionTree build(const Claim& claim, int depth);

    std::shared_ptr<Generator> generator_;
    int depth_cap_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

} // namespace decmetrics
