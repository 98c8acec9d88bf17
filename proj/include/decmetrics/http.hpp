#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

namespace decmetrics::http {

// Exponential backoff: attempt k (0-based) waits
// initial_delay * factor^k * U[1 - jitter, 1 + jitter].
struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_delay{500};
    double factor = 2.0;
    double jitter = 0.25;
    // Injected in tests to avoid real sleeping.
    std::function<void(std::chrono::milliseconds)> sleep;

    std::chrono::milliseconds delay_for(int attempt, double unit_draw) const;
};

// "http://host:8080/prefix" → origin "http://host:8080", base path "/prefix".
struct Endpoint {
    std::string origin;
    std::string base_path;

    static Endpoint parse(const std::string& url);
};

struct Response {
    int status = 0;
    std::string body;
};

// Thin retrying client. Timeouts, connection failures and 5xx responses are
// retried; other statuses come straight back to the caller.
class Client {
public:
    Client(const std::string& url, double timeout_seconds, RetryPolicy retry);
    ~Client();
    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    Response post_json(const std::string& path, const nlohmann::json& body,
                       const std::map<std::string, std::string>& headers = {});
    Response get(const std::string& path);

    const Endpoint& endpoint() const noexcept { return endpoint_; }

private:
    template <typename Send>
    Response with_retries(const std::string& what, Send&& send);

    Endpoint endpoint_;
    double timeout_seconds_;
    RetryPolicy retry_;
};

std::string percent_encode(const std::string& s);

} // namespace decmetrics::http
