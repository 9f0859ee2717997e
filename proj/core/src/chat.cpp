#include "groke/chat.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace groke {

namespace {
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
}  // namespace

// ------------------------------------------------------------ rate limit

RateLimiter::RateLimiter(int max_in_flight, double requests_per_second)
    : max_in_flight_(max_in_flight > 0 ? max_in_flight : 1),
      rate_(requests_per_second),
      tokens_(requests_per_second),
      last_refill_(std::chrono::steady_clock::now()) {}

RateLimiter::Ticket RateLimiter::acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
    if (rate_ > 0.0) {
        for (;;) {
            const auto now = std::chrono::steady_clock::now();
            tokens_ = std::min(rate_, tokens_ + rate_ * std::chrono::duration<double>(
                                                            now - last_refill_).count());
            last_refill_ = now;
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                break;
            }
            const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
        }
    }
    return Ticket(this);
}

void RateLimiter::release() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        --in_flight_;
    }
    cv_.notify_one();
}

RateLimiter::Ticket::~Ticket() {
    if (parent_) parent_->release();
}

// ------------------------------------------------------------------ http

HttpChatTransport::HttpChatTransport(HttpTransportConfig config)
    : config_(std::move(config)),
      limiter_(std::make_shared<RateLimiter>(config_.max_in_flight,
                                             config_.requests_per_second)) {}

std::string HttpChatTransport::request_to_json(const ChatRequest& request) {
    ordered_json j;
    j["model"] = request.model;
    ordered_json msgs = ordered_json::array();
    for (const auto& m : request.messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    j["messages"] = std::move(msgs);
    j["temperature"] = request.temperature;
    if (!request.reasoning_effort.empty()) {
        j["reasoning_effort"] = request.reasoning_effort;
    }
    return j.dump();
}

ChatResult HttpChatTransport::parse_response_body(const std::string& body) {
    ChatResult result;
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        result.status = TransportStatus::Error;
        result.error = std::string("response body is not JSON: ") + e.what();
        return result;
    }
    if (!j.is_object() || !j.contains("content") || !j.at("content").is_string()) {
        result.status = TransportStatus::Error;
        result.error = "response body lacks the 'content' string";
        return result;
    }
    result.response.content = j.at("content").get<std::string>();
    if (j.contains("usage") && j.at("usage").is_object()) {
        const auto& u = j.at("usage");
        auto get = [&](const char* k) -> long {
            return u.contains(k) && u.at(k).is_number() ? u.at(k).get<long>() : 0;
        };
        result.response.usage.prompt_tokens = get("prompt_tokens");
        result.response.usage.thoughts_tokens = get("thoughts_tokens");
        result.response.usage.total_tokens = get("total_tokens");
    }
    return result;
}

ChatResult HttpChatTransport::send(const ChatRequest& request) {
    const auto ticket = limiter_->acquire();

    // split scheme://host:port/path
    std::string base = config_.endpoint;
    std::string path = "/";
    auto scheme_end = base.find("://");
    auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        path = base.substr(path_start);
        base = base.substr(0, path_start);
    }

    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto res = client.Post(path, headers, request_to_json(request), "application/json");
    ChatResult result;
    if (!res) {
        result.status = TransportStatus::Error;
        result.error = "connection to " + config_.endpoint + " failed: " +
                       httplib::to_string(res.error());
        return result;
    }
    if (res->status == 429) {
        result.status = TransportStatus::RateLimited;
        result.error = "rate limited (429)";
        return result;
    }
    if (res->status != 200) {
        result.status = TransportStatus::Error;
        result.error = "HTTP " + std::to_string(res->status) + ": " + res->body;
        return result;
    }
    return parse_response_body(res->body);
}

// -------------------------------------------------------------- scripted

ChatResult ScriptedChatTransport::send(const ChatRequest& request) {
    std::lock_guard<std::mutex> lock(mu_);
    requests_.push_back(request);
    if (queue_.empty()) {
        ChatResult r;
        r.status = TransportStatus::Error;
        r.error = "scripted transport exhausted";
        return r;
    }
    ChatResult r = std::move(queue_.front());
    queue_.pop_front();
    return r;
}

// ------------------------------------------------------------ transcript

std::string transcript_entry_to_json(const std::string& instance_id, int call_index,
                                     const TranscriptEntry& entry) {
    ordered_json j;
    j["instance_id"] = instance_id;
    j["call"] = call_index;
    ordered_json req;
    req["model"] = entry.request.model;
    ordered_json msgs = ordered_json::array();
    for (const auto& m : entry.request.messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    req["messages"] = std::move(msgs);
    req["temperature"] = entry.request.temperature;
    if (!entry.request.reasoning_effort.empty()) {
        req["reasoning_effort"] = entry.request.reasoning_effort;
    }
    j["request"] = std::move(req);
    j["response"] = {{"content", entry.response.content},
                     {"usage",
                      {{"prompt_tokens", entry.response.usage.prompt_tokens},
                       {"thoughts_tokens", entry.response.usage.thoughts_tokens},
                       {"total_tokens", entry.response.usage.total_tokens}}}};
    return j.dump();
}

ChatResult RecordingChatTransport::send(const ChatRequest& request) {
    ChatResult result = inner_->send(request);
    if (result.ok()) {
        std::lock_guard<std::mutex> lock(mu_);
        recorded_.push_back({request, result.response});
    }
    return result;
}

ChatResult ReplayChatTransport::send(const ChatRequest&) {
    std::lock_guard<std::mutex> lock(mu_);
    ChatResult result;
    if (next_ >= entries_.size()) {
        result.status = TransportStatus::Error;
        result.error = "replay transcript exhausted";
        return result;
    }
    result.response = entries_[next_++].response;
    return result;
}

std::map<std::string, std::vector<TranscriptEntry>> load_transcript(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open transcript '" + path + "'");
    }
    std::map<std::string, std::vector<std::pair<int, TranscriptEntry>>> staged;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("transcript " + path + ":" + std::to_string(lineno) +
                                     " is not JSON: " + e.what());
        }
        TranscriptEntry entry;
        const auto& req = j.at("request");
        entry.request.model = req.value("model", "");
        for (const auto& m : req.value("messages", json::array())) {
            entry.request.messages.push_back(
                {m.value("role", ""), m.value("content", "")});
        }
        entry.request.temperature = req.value("temperature", 1.0);
        entry.request.reasoning_effort = req.value("reasoning_effort", "");
        const auto& resp = j.at("response");
        entry.response.content = resp.value("content", "");
        if (resp.contains("usage")) {
            const auto& u = resp.at("usage");
            entry.response.usage.prompt_tokens = u.value("prompt_tokens", 0L);
            entry.response.usage.thoughts_tokens = u.value("thoughts_tokens", 0L);
            entry.response.usage.total_tokens = u.value("total_tokens", 0L);
        }
        staged[j.value("instance_id", "")].push_back({j.value("call", 0), std::move(entry)});
    }
    std::map<std::string, std::vector<TranscriptEntry>> out;
    for (auto& [id, list] : staged) {
        std::sort(list.begin(), list.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [call, entry] : list) out[id].push_back(std::move(entry));
    }
    return out;
}

}  // namespace groke
