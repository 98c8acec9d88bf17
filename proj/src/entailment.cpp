#include "decmetrics/entailment.hpp"

#include "decmetrics/errors.hpp"
#include "decmetrics/parallel.hpp"
#include "decmetrics/text.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <future>

namespace decmetrics {

std::string_view to_string(Label label) {
    return label == Label::Supported ? "supported" : "unsupported";
}

Label parse_label(std::string_view s) {
    if (s == "supported") return Label::Supported;
    if (s == "unsupported") return Label::Unsupported;
    throw ValidationError("unknown label: " + std::string(s));
}

Judgment make_judgment(double p_supported, double threshold) {
    return {p_supported >= threshold ? Label::Supported : Label::Unsupported, p_supported};
}

std::string_view to_string(BackendKind kind) {
    switch (kind) {
    case BackendKind::HttpNli: return "http-nli";
    case BackendKind::ChatLlm: return "chat-llm";
    case BackendKind::Mock: return "mock";
    }
    return "mock";
}

BackendKind parse_backend_kind(std::string_view s) {
    if (s == "http-nli" || s == "nli") return BackendKind::HttpNli;
    if (s == "chat-llm" || s == "chat") return BackendKind::ChatLlm;
    if (s == "mock" || s == "mock-splitter") return BackendKind::Mock;
    throw ValidationError("unknown backend kind: " + std::string(s));
}

void BackendConfig::validate() const {
    if (kind != BackendKind::Mock && endpoint.empty())
        throw ValidationError(std::string(to_string(kind)) + " backend requires an endpoint");
    if (kind == BackendKind::ChatLlm && model_name.empty())
        throw ValidationError("chat-llm backend requires a model name");
    if (max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
    if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
    if (!(timeout_seconds > 0.0) || !std::isfinite(timeout_seconds))
        throw ValidationError("timeout must be a positive number of seconds");
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ValidationError("threshold must lie in [0, 1]");
}

std::string normalize_for_backend(std::string_view s) {
    return text::collapse_whitespace(s);
}

std::uint64_t CacheKey::fingerprint() const noexcept {
    return text::fnv1a64(bytes_);
}

CacheKey cache_key(std::string_view premise, std::string_view hypothesis) {
    auto p = normalize_for_backend(premise);
    auto h = normalize_for_backend(hypothesis);
    CacheKey key;
    // Length prefix makes the encoding injective and direction-sensitive.
    key.bytes_ = std::to_string(p.size()) + ":" + p + h;
    return key;
}

// --- mock oracle -----------------------------------------------------------

std::set<std::string> mock_tokens(std::string_view s) {
    std::set<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.insert(std::move(current));
        current.clear();
    };
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            continue;
        } else {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
    }
    flush();
    return tokens;
}

Judgment mock_judge(std::string_view premise, std::string_view hypothesis) {
    if (text::trim(premise).empty() || text::trim(hypothesis).empty())
        throw ValidationError("premise and hypothesis must be non-empty");
    const auto p = mock_tokens(premise);
    const auto h = mock_tokens(hypothesis);
    if (h.empty()) return {Label::Supported, 1.0};
    std::size_t covered = 0;
    for (const auto& t : h) covered += p.count(t);
    const double coverage = static_cast<double>(covered) / static_cast<double>(h.size());
    return make_judgment(coverage, 1.0);
}

// --- remote backends -------------------------------------------------------

http::RetryPolicy retry_policy_for(const BackendConfig& config) {
    http::RetryPolicy policy;
    policy.max_retries = config.max_retries;
    return policy;
}

HttpNliBackend::HttpNliBackend(const BackendConfig& config, http::RetryPolicy retry)
    : client_(config.endpoint, config.timeout_seconds, std::move(retry)),
      threshold_(config.threshold) {}

Judgment HttpNliBackend::judge(const std::string& premise, const std::string& hypothesis) {
    auto resp = client_.post_json("/v1/entail", {{"premise", premise}, {"hypothesis", hypothesis}});
    if (resp.status != 200)
        throw BackendError("entail endpoint returned status " + std::to_string(resp.status) +
                           ": " + resp.body);
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(resp.body);
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("entail response is not JSON", resp.body);
    }
    if (!body.is_object() || !body.contains("label") || !body["label"].is_string() ||
        !body.contains("p_supported") || !body["p_supported"].is_number())
        throw ProtocolError("entail response lacks label/p_supported", resp.body);
    const auto label = body["label"].get<std::string>();
    if (label != "supported" && label != "unsupported")
        throw ProtocolError("entail response has unknown label " + label, resp.body);
    const double p = body["p_supported"].get<double>();
    if (!(p >= 0.0 && p <= 1.0))
        throw ProtocolError("p_supported outside [0, 1]", resp.body);
    // The reported label is checked for shape only; the threshold decides.
    return make_judgment(p, threshold_);
}

ChatClient::ChatClient(const BackendConfig& config, http::RetryPolicy retry)
    : client_(config.endpoint, config.timeout_seconds, std::move(retry)),
      model_(config.model_name) {}

std::string ChatClient::complete(const std::string& prompt) {
    nlohmann::json request = {
        {"model", model_},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", 0},
    };
    std::map<std::string, std::string> headers;
    if (const char* key = std::getenv("DECMETRICS_API_KEY"); key && *key)
        headers["Authorization"] = std::string("Bearer ") + key;
    auto resp = client_.post_json("/v1/chat/completions", request, headers);
    if (resp.status != 200)
        throw BackendError("chat endpoint returned status " + std::to_string(resp.status) + ": " +
                           resp.body);
    try {
        auto body = nlohmann::json::parse(resp.body);
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("chat response lacks choices[0].message.content", resp.body);
    }
}

std::string render_judgment_prompt(std::string_view premise, std::string_view hypothesis) {
    std::string prompt =
        "Decide whether the Hypothesis is fully supported by the Premise.\n"
        "Answer with exactly one word: supported or unsupported.\n\n"
        "Premise: ";
    prompt += premise;
    prompt += "\nHypothesis: ";
    prompt += hypothesis;
    prompt += "\nAnswer:";
    return prompt;
}

Label parse_chat_label(const std::string& reply) {
    const std::string_view r = reply;
    for (std::size_t i = 0; i < r.size(); ++i) {
        // "unsupported" starts two characters before its inner "supported",
        // so scanning left to right sees it first.
        if (text::starts_with_icase(r.substr(i), "unsupported")) return Label::Unsupported;
        if (text::starts_with_icase(r.substr(i), "supported")) return Label::Supported;
    }
    throw ProtocolError("chat reply names no label", reply);
}

ChatLlmBackend::ChatLlmBackend(const BackendConfig& config, http::RetryPolicy retry)
    : chat_(config, std::move(retry)) {}

Judgment ChatLlmBackend::judge(const std::string& premise, const std::string& hypothesis) {
    const auto label = parse_chat_label(chat_.complete(render_judgment_prompt(premise, hypothesis)));
    return {label, label == Label::Supported ? 1.0 : 0.0};
}

std::unique_ptr<EntailmentBackend> make_backend(const BackendConfig& config) {
    config.validate();
    switch (config.kind) {
    case BackendKind::HttpNli:
        return std::make_unique<HttpNliBackend>(config, retry_policy_for(config));
    case BackendKind::ChatLlm:
        return std::make_unique<ChatLlmBackend>(config, retry_policy_for(config));
    case BackendKind::Mock:
        return std::make_unique<MockBackend>();
    }
    throw ValidationError("unknown backend kind");
}

// --- Entailer --------------------------------------------------------------

struct Entailer::Cache {
    std::mutex mu;
    std::unordered_map<CacheKey, std::shared_future<Judgment>, CacheKeyHash> entries;
};

Entailer::Entailer(const BackendConfig& config)
    : Entailer(make_backend(config), config.max_in_flight) {}

Entailer::Entailer(std::unique_ptr<EntailmentBackend> backend, int max_in_flight)
    : backend_(std::move(backend)),
      max_in_flight_(max_in_flight),
      slots_(max_in_flight),
      cache_(std::make_unique<Cache>()) {
    if (max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
}

Entailer::~Entailer() = default;

Judgment Entailer::call_backend(const std::string& premise, const std::string& hypothesis) {
    slots_.acquire();
    auto now = in_flight_.fetch_add(1) + 1;
    auto peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    backend_calls_.fetch_add(1);
    struct Release {
        Entailer* self;
        ~Release() {
            self->in_flight_.fetch_sub(1);
            self->slots_.release();
        }
    } release{this};
    return backend_->judge(premise, hypothesis);
}

Judgment Entailer::resolve(const std::string& premise, const std::string& hypothesis) {
    auto key = cache_key(premise, hypothesis);
    std::promise<Judgment> promise;
    std::shared_future<Judgment> pending;
    bool owner = false;
    {
        std::lock_guard lock(cache_->mu);
        auto it = cache_->entries.find(key);
        if (it != cache_->entries.end()) {
            pending = it->second;
        } else {
            pending = promise.get_future().share();
            cache_->entries.emplace(key, pending);
            owner = true;
        }
    }
    if (!owner) return pending.get();
    try {
        auto j = call_backend(premise, hypothesis);
        promise.set_value(j);
        return j;
    } catch (...) {
        promise.set_exception(std::current_exception());
        // Forget failures so a later call can retry.
        std::lock_guard lock(cache_->mu);
        cache_->entries.erase(key);
        throw;
    }
}

Judgment Entailer::judge(std::string_view premise, std::string_view hypothesis) {
    auto p = normalize_for_backend(premise);
    auto h = normalize_for_backend(hypothesis);
    if (p.empty() || h.empty()) throw ValidationError("premise and hypothesis must be non-empty");
    return resolve(p, h);
}

std::vector<Judgment> Entailer::judge_batch(const std::vector<Pair>& pairs) {
    std::vector<Pair> normalized;
    normalized.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto p = normalize_for_backend(pairs[i].first);
        auto h = normalize_for_backend(pairs[i].second);
        if (p.empty() || h.empty())
            throw ValidationError("batch element " + std::to_string(i) +
                                  ": premise and hypothesis must be non-empty");
        normalized.emplace_back(std::move(p), std::move(h));
    }

    // Coalesce duplicates so each distinct pair costs at most one call.
    std::unordered_map<CacheKey, std::size_t, CacheKeyHash> slot_of;
    std::vector<std::size_t> first_index;   // unique slot -> first input index
    std::vector<std::size_t> slot_for(pairs.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        auto [it, inserted] = slot_of.emplace(cache_key(normalized[i].first, normalized[i].second),
                                              first_index.size());
        if (inserted) first_index.push_back(i);
        slot_for[i] = it->second;
    }

    std::vector<Judgment> unique(first_index.size());
    const int workers = backend_->remote() ? max_in_flight_ : 1;
    std::size_t failed = 0;
    try {
        parallel_for(
            unique.size(), workers,
            [&](std::size_t u) {
                const auto& [p, h] = normalized[first_index[u]];
                unique[u] = resolve(p, h);
            },
            [&](std::size_t u) { failed = first_index[u]; });
    } catch (const std::exception& e) {
        throw BatchError(failed, e.what());
    }

    std::vector<Judgment> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = unique[slot_for[i]];
    return out;
}

} // namespace decmetrics
