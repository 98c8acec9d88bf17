#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "decmetrics/http.hpp"

namespace decmetrics {

enum class Label { Supported, Unsupported };

std::string_view to_string(Label label);
Label parse_label(std::string_view s);   // throws ValidationError

struct Judgment {
    Label label = Label::Unsupported;
    double p_supported = 0.0;

    bool supported() const noexcept { return label == Label::Supported; }
    friend bool operator==(const Judgment&, const Judgment&) = default;
};

// Label for p under threshold: supported iff p >= threshold.
Judgment make_judgment(double p_supported, double threshold);

enum class BackendKind { HttpNli, ChatLlm, Mock };

std::string_view to_string(BackendKind kind);
// Accepts "http-nli"/"nli", "chat-llm"/"chat", "mock".
BackendKind parse_backend_kind(std::string_view s);

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::string endpoint;       // required unless kind == Mock
    std::string model_name;     // chat-llm only
    double timeout_seconds = 30.0;
    int max_in_flight = 4;
    int max_retries = 3;
    double threshold = 0.5;

    void validate() const;   // throws ValidationError
};

// Backend requests are keyed by premise/hypothesis with whitespace collapsed;
// the same normalized texts are what reach the backend.
std::string normalize_for_backend(std::string_view s);

// Direction-sensitive, injective encoding of a normalized pair.
class CacheKey {
public:
    const std::string& bytes() const noexcept { return bytes_; }
    // FNV-1a over bytes(); stable across runs.
    std::uint64_t fingerprint() const noexcept;

    friend bool operator==(const CacheKey&, const CacheKey&) = default;

private:
    friend CacheKey cache_key(std::string_view premise, std::string_view hypothesis);
    std::string bytes_;
};

CacheKey cache_key(std::string_view premise, std::string_view hypothesis);

struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const noexcept {
        return static_cast<std::size_t>(k.fingerprint());
    }
};

// ---------------------------------------------------------------------------
// Mock oracle
//
// Both sides are case-folded (ASCII), stripped of ASCII punctuation, split on
// whitespace and treated as token sets. p_supported is the fraction of
// hypothesis tokens found in the premise; supported requires p == 1 exactly.
// A hypothesis without any token is vacuously covered.

std::set<std::string> mock_tokens(std::string_view s);
Judgment mock_judge(std::string_view premise, std::string_view hypothesis);

// ---------------------------------------------------------------------------

class EntailmentBackend {
public:
    virtual ~EntailmentBackend() = default;

    // Inputs are already validated and normalized.
    virtual Judgment judge(const std::string& premise, const std::string& hypothesis) = 0;

    // False for in-process backends where fanning out threads buys nothing.
    virtual bool remote() const { return true; }
};

class MockBackend final : public EntailmentBackend {
public:
    Judgment judge(const std::string& premise, const std::string& hypothesis) override {
        return mock_judge(premise, hypothesis);
    }
    bool remote() const override { return false; }
};

// POST {endpoint}/v1/entail.
class HttpNliBackend final : public EntailmentBackend {
public:
    HttpNliBackend(const BackendConfig& config, http::RetryPolicy retry);
    Judgment judge(const std::string& premise, const std::string& hypothesis) override;

private:
    http::Client client_;
    double threshold_;
};

// Minimal chat-completions client shared by the chat judge and the generator.
class ChatClient {
public:
    ChatClient(const BackendConfig& config, http::RetryPolicy retry);
    // Returns choices[0].message.content.
    std::string complete(const std::string& prompt);

private:
    http::Client client_;
    std::string model_;
};

std::string render_judgment_prompt(std::string_view premise, std::string_view hypothesis);

// First case-insensitive occurrence of "supported" or "unsupported" wins.
// Throws ProtocolError when neither occurs.
Label parse_chat_label(const std::string& reply);

class ChatLlmBackend final : public EntailmentBackend {
public:
    ChatLlmBackend(const BackendConfig& config, http::RetryPolicy retry);
    Judgment judge(const std::string& premise, const std::string& hypothesis) override;

private:
    ChatClient chat_;
};

http::RetryPolicy retry_policy_for(const BackendConfig& config);
std::unique_ptr<EntailmentBackend> make_backend(const BackendConfig& config);

// ---------------------------------------------------------------------------

// Shareable judging handle: validates inputs, caches judgments per CacheKey
// (concurrent callers for the same key share one backend call) and bounds
// outstanding backend calls by max_in_flight.
class Entailer {
public:
    explicit Entailer(const BackendConfig& config);
    Entailer(std::unique_ptr<EntailmentBackend> backend, int max_in_flight);
    ~Entailer();

    Entailer(const Entailer&) = delete;
    Entailer& operator=(const Entailer&) = delete;

    Judgment judge(std::string_view premise, std::string_view hypothesis);

    using Pair = std::pair<std::string, std::string>;
    // result[i] answers pairs[i]. Failures surface as BatchError carrying
    // the lowest failing index.
    std::vector<Judgment> judge_batch(const std::vector<Pair>& pairs);

    std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
    int max_in_flight() const noexcept { return max_in_flight_; }
    bool remote() const { return backend_->remote(); }
    std::size_t peak_in_flight() const noexcept { return peak_in_flight_.load(); }

private:
    struct Cache;

    Judgment resolve(const std::string& premise, const std::string& hypothesis);
    Judgment call_backend(const std::string& premise, const std::string& hypothesis);

    std::unique_ptr<EntailmentBackend> backend_;
    int max_in_flight_;
    std::counting_semaphore<> slots_;
    std::unique_ptr<Cache> cache_;
    std::atomic<std::size_t> backend_calls_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_in_flight_{0};
};

} // namespace decmetrics
