#include "decmetrics/http.hpp"

#include "decmetrics/errors.hpp"

#include <cctype>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>

namespace decmetrics::http {

std::chrono::milliseconds RetryPolicy::delay_for(int attempt, double unit_draw) const {
    const double base = static_cast<double>(initial_delay.count()) * std::pow(factor, attempt);
    const double scale = 1.0 - jitter + 2.0 * jitter * unit_draw;
    return std::chrono::milliseconds(static_cast<long long>(std::llround(base * scale)));
}

Endpoint Endpoint::parse(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("endpoint needs a scheme: " + url);
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw ValidationError("unsupported endpoint scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    if (path_start == std::string::npos) {
        e.origin = url;
    } else {
        e.origin = url.substr(0, path_start);
        e.base_path = url.substr(path_start);
    }
    while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
    if (e.origin.size() <= scheme_end + 3) throw ValidationError("endpoint has no host: " + url);
    return e;
}

namespace {
double jitter_draw() {
    static std::mutex mu;
    static std::mt19937_64 engine{std::random_device{}()};
    std::lock_guard lock(mu);
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

httplib::Headers to_headers(const std::map<std::string, std::string>& headers) {
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    return h;
}
} // namespace

Client::Client(const std::string& url, double timeout_seconds, RetryPolicy retry)
    : endpoint_(Endpoint::parse(url)), timeout_seconds_(timeout_seconds), retry_(std::move(retry)) {
    if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

Client::~Client() = default;

template <typename Send>
Response Client::with_retries(const std::string& what, Send&& send) {
    // httplib::Client is not safe for concurrent use; one per request.
    std::string last_failure;
    for (int attempt = 0;; ++attempt) {
        httplib::Client cli(endpoint_.origin);
        const auto secs = static_cast<time_t>(timeout_seconds_);
        const auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);

        auto result = send(cli);
        if (result) {
            if (result->status < 500) return {result->status, result->body};
            last_failure = "status " + std::to_string(result->status);
        } else {
            last_failure = httplib::to_string(result.error());
        }
        if (attempt >= retry_.max_retries) break;
        retry_.sleep(retry_.delay_for(attempt, jitter_draw()));
    }
    throw BackendError(what + " " + endpoint_.origin + " failed after " +
                       std::to_string(retry_.max_retries + 1) + " attempt(s): " + last_failure);
}

Response Client::post_json(const std::string& path, const nlohmann::json& body,
                           const std::map<std::string, std::string>& headers) {
    const auto full = endpoint_.base_path + path;
    const auto payload = body.dump();
    const auto h = to_headers(headers);
    return with_retries("POST " + full, [&](httplib::Client& cli) {
        return cli.Post(full, h, payload, "application/json");
    });
}

Response Client::get(const std::string& path) {
    const auto full = endpoint_.base_path + path;
    return with_retries("GET " + full, [&](httplib::Client& cli) { return cli.Get(full); });
}

std::string percent_encode(const std::string& s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

} // namespace decmetrics::http
