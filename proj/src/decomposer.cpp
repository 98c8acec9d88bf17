#include "decmetrics/decomposer.hpp"

#include "decmetrics/errors.hpp"
#include "decmetrics/text.hpp"
#include "prompt_assets.hpp"

#include <cctype>

namespace decmetrics {

std::string_view decomposition_template() { return assets::kDecompositionPromptV1; }
std::string_view reverse_check_template() { return assets::kReverseCheckPromptV1; }

namespace {
std::string replace_slot(std::string_view tmpl, std::string_view slot, std::string_view value) {
    std::string out(tmpl);
    auto pos = out.rfind(slot);
    if (pos == std::string::npos) throw Error("prompt template lacks slot " + std::string(slot));
    out.replace(pos, slot.size(), value);
    return out;
}

std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back('\n');
        out += "- " + items[i];
    }
    return out;
}
} // namespace

RenderedPrompt render_decomposition_prompt(const Claim& claim) {
    RenderedPrompt p;
    p.kind = PromptKind::Decomposition;
    p.claim = claim.text();
    p.text = replace_slot(decomposition_template(), "[Claim]", claim.text());
    return p;
}

RenderedPrompt render_reverse_check_prompt(const Claim& claim, const std::vector<AtomicClaim>& atomics) {
    if (atomics.empty()) throw ValidationError("reverse check needs at least one atomic claim");
    RenderedPrompt p;
    p.kind = PromptKind::ReverseCheck;
    p.claim = claim.text();
    p.atomics = texts(atomics);
    const std::string_view tmpl = reverse_check_template();
    constexpr std::string_view claim_slot = "[Original Claim]";
    constexpr std::string_view atomics_slot = "[Atomic Claims]";
    const auto c = tmpl.rfind(claim_slot);
    const auto a = tmpl.rfind(atomics_slot);
    if (c == std::string_view::npos || a == std::string_view::npos || a < c)
        throw Error("reverse-check template slots are missing or misordered");
    p.text.append(tmpl.substr(0, c));
    p.text.append(claim.text());
    p.text.append(tmpl.substr(c + claim_slot.size(), a - c - claim_slot.size()));
    p.text.append(bullet_list(p.atomics));
    p.text.append(tmpl.substr(a + atomics_slot.size()));
    return p;
}

std::vector<std::string> parse_answer_block(std::string_view reply) {
    const auto open = reply.find(kAnswerOpen);
    if (open == std::string_view::npos)
        throw ParseError("reply contains no answer block", std::string(reply));
    const auto body_start = open + kAnswerOpen.size();
    const auto close = reply.find(kAnswerClose, body_start);
    if (close == std::string_view::npos)
        throw ParseError("answer block is not terminated", std::string(reply));
    std::vector<std::string> items;
    for (const auto& raw : text::split_lines(reply.substr(body_start, close - body_start))) {
        auto line = text::trim(raw);
        if (line.size() < 2 || line.substr(0, 2) != "- ") continue;
        auto item = text::trim(line.substr(2));
        if (!item.empty()) items.emplace_back(item);
    }
    if (items.empty()) throw ParseError("answer block holds no items", std::string(reply));
    return items;
}

std::string_view CheckVerdict::reason() const noexcept {
    if (!complete) return "completeness";
    if (!correct) return "correctness";
    if (!independent) return "independence";
    return "";
}

CheckVerdict parse_check_verdict(std::string_view reply) {
    const auto items = parse_answer_block(reply);
    if (items.size() != 3)
        throw ParseError("verdict block must hold exactly three lines", std::string(reply));
    auto read = [&](const std::string& item, std::string_view word) {
        auto s = text::to_lower_ascii(item);
        while (!s.empty() && s.back() == '.') s.pop_back();
        if (s == word) return true;
        if (s == "not " + std::string(word)) return false;
        throw ParseError("unexpected verdict line \"" + item + "\", wanted " + std::string(word),
                         std::string(reply));
    };
    return {read(items[0], "complete"), read(items[1], "correct"), read(items[2], "independent")};
}

std::string format_answer_block(const std::vector<std::string>& items) {
    std::string out(kAnswerOpen);
    out.push_back('\n');
    for (const auto& i : items) out += "  - " + i + "\n";
    out += kAnswerClose;
    return out;
}

std::string format_check_verdict(const CheckVerdict& v) {
    return format_answer_block({v.complete ? "complete" : "not complete",
                                v.correct ? "correct" : "not correct",
                                v.independent ? "independent" : "not independent"});
}

// --- generators ------------------------------------------------------------

ChatGenerator::ChatGenerator(const BackendConfig& config, http::RetryPolicy retry)
    : chat_(config, std::move(retry)) {}

std::string ChatGenerator::generate(const RenderedPrompt& prompt) {
    return chat_.complete(prompt.text);
}

namespace {
bool opens(char c) { return c == '(' || c == '[' || c == '{'; }
bool closes(char c) { return c == ')' || c == ']' || c == '}'; }

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (opens(s[i])) ++depth;
        if (closes(s[i]) && depth > 0) --depth;
        const bool boundary = s[i] == '.' && depth == 0 &&
                              (i + 1 == s.size() || std::isspace(static_cast<unsigned char>(s[i + 1])));
        if (boundary) {
            auto sentence = text::trim(s.substr(start, i + 1 - start));
            if (!sentence.empty()) out.emplace_back(sentence);
            start = i + 1;
        }
    }
    auto rest = text::trim(s.substr(std::min(start, s.size())));
    if (!rest.empty()) out.emplace_back(rest);
    return out;
}

std::vector<std::string> split_on_and(std::string_view sentence) {
    std::vector<std::string> pieces(1);
    int depth = 0;
    std::size_t i = 0;
    while (i < sentence.size()) {
        if (std::isspace(static_cast<unsigned char>(sentence[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
        auto token = sentence.substr(i, j - i);
        if (depth == 0 && text::to_lower_ascii(token) == "and") {
            pieces.emplace_back();
        } else {
            if (!pieces.back().empty()) pieces.back().push_back(' ');
            pieces.back().append(token);
        }
        for (char c : token) {
            if (opens(c)) ++depth;
            if (closes(c) && depth > 0) --depth;
        }
        i = j;
    }
    std::vector<std::string> out;
    for (auto& p : pieces)
        if (!p.empty()) out.push_back(std::move(p));
    return out;
}
} // namespace

std::vector<std::string> mock_split(std::string_view claim) {
    const auto trimmed = text::trim(claim);
    auto sentences = split_sentences(trimmed);
    if (sentences.size() > 1) return sentences;
    auto pieces = split_on_and(trimmed);
    if (pieces.size() > 1) {
        if (!trimmed.empty() && trimmed.back() == '.')
            for (auto& p : pieces)
                if (p.back() != '.') p.push_back('.');
        return pieces;
    }
    return {std::string(trimmed)};
}

CheckVerdict mock_reverse_check(std::string_view claim, const std::vector<std::string>& atomics) {
    CheckVerdict v;
    auto claim_tokens = mock_tokens(claim);
    claim_tokens.erase("and");
    std::set<std::string> merged;
    for (const auto& a : atomics) {
        auto t = mock_tokens(a);
        merged.insert(t.begin(), t.end());
    }
    v.complete = true;
    for (const auto& t : claim_tokens)
        if (!merged.count(t)) v.complete = false;
    v.correct = true;
    for (const auto& a : atomics)
        if (!mock_judge(claim, a).supported()) v.correct = false;
    v.independent = true;
    for (std::size_t i = 0; i < atomics.size(); ++i)
        for (std::size_t j = 0; j < atomics.size(); ++j)
            if (i != j && mock_judge(atomics[i], atomics[j]).supported()) v.independent = false;
    return v;
}

std::string MockSplitter::generate(const RenderedPrompt& prompt) {
    if (prompt.kind == PromptKind::Decomposition) return format_answer_block(mock_split(prompt.claim));
    return format_check_verdict(mock_reverse_check(prompt.claim, prompt.atomics));
}

std::unique_ptr<Generator> make_generator(const BackendConfig& config) {
    config.validate();
    switch (config.kind) {
    case BackendKind::ChatLlm: return std::make_unique<ChatGenerator>(config, retry_policy_for(config));
    case BackendKind::Mock: return std::make_unique<MockSplitter>();
    case BackendKind::HttpNli: break;
    }
    throw ValidationError("the http-nli backend cannot generate text; use chat-llm or mock");
}

// --- decomposer ------------------------------------------------------------

void DecomposerConfig::validate() const {
    generation.validate();
    if (depth_cap < 1) throw ValidationError("depth cap must be >= 1");
}

Decomposer::Decomposer(const DecomposerConfig& config)
    : Decomposer((config.validate(), std::shared_ptr<Generator>(make_generator(config.generation))),
                 config.depth_cap, config.generation.max_in_flight) {}

Decomposer::Decomposer(std::shared_ptr<Generator> generator, int depth_cap, int max_in_flight)
    : generator_(std::move(generator)),
      depth_cap_(depth_cap),
      slots_(std::make_unique<std::counting_semaphore<>>(std::max(1, max_in_flight))) {
    if (!generator_) throw ValidationError("decomposer needs a generator");
    if (depth_cap_ < 1) throw ValidationError("depth cap must be >= 1");
}

std::string Decomposer::ask(const RenderedPrompt& prompt) {
    slots_->acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{*slots_};
    return generator_->generate(prompt);
}

std::vector<Claim> Decomposer::decompose_once(const Claim& claim) {
    const auto prompt = render_decomposition_prompt(claim);
    for (int attempt = 0;; ++attempt) {
        const auto reply = ask(prompt);
        try {
            std::vector<Claim> subs;
            for (const auto& item : parse_answer_block(reply)) {
                try {
                    subs.emplace_back(item);
                } catch (const ValidationError& e) {
                    throw ParseError(std::string("invalid sub-claim: ") + e.what(), reply);
                }
            }
            return subs;
        } catch (const ParseError&) {
            if (attempt >= 1) throw;
        }
    }
}

DecompositionTree Decomposer::build(const Claim& claim, int depth) {
    auto subs = decompose_once(claim);
    if (subs.size() == 1) return DecompositionTree(claim);
    if (depth >= depth_cap_) throw NonConvergenceError(claim.text(), depth);
    std::vector<DecompositionTree> children;
    children.reserve(subs.size());
    for (const auto& s : subs) children.push_back(build(s, depth + 1));
    return DecompositionTree(claim, std::move(children));
}

DecompositionTree Decomposer::decompose_recursive(const Claim& claim) {
    return build(claim, 0);
}

CheckVerdict Decomposer::reverse_check(const Claim& claim, const std::vector<AtomicClaim>& atomics) {
    const auto prompt = render_reverse_check_prompt(claim, atomics);
    for (int attempt = 0;; ++attempt) {
        const auto reply = ask(prompt);
        try {
            return parse_check_verdict(reply);
        } catch (const ParseError&) {
            if (attempt >= 1) throw;
        }
    }
}

} // namespace decmetrics
