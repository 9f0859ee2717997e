#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace groke {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long thoughts_tokens = 0;
    long total_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& o) {
        prompt_tokens += o.prompt_tokens;
        thoughts_tokens += o.thoughts_tokens;
        total_tokens += o.total_tokens;
        return *this;
    }
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
    std::string reasoning_effort;  // opaque provider passthrough, may be empty
};

struct ChatResponse {
    std::string content;
    TokenUsage usage;
};

enum class TransportStatus { Ok, RateLimited, Error };

struct ChatResult {
    TransportStatus status = TransportStatus::Ok;
    ChatResponse response;
    std::string error;

    bool ok() const { return status == TransportStatus::Ok; }
};

/// The only surface a model provider has to satisfy: one blocking
/// request/response exchange. Implementations must be callable from
/// concurrent episodes.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual ChatResult send(const ChatRequest& request) = 0;
};

/// Combined in-flight cap and token-bucket rate limiter shared by all
/// episodes of a run.
class RateLimiter {
public:
    RateLimiter(int max_in_flight, double requests_per_second);
    ~RateLimiter() = default;

    class Ticket {
    public:
        explicit Ticket(RateLimiter* parent) : parent_(parent) {}
        ~Ticket();
        Ticket(const Ticket&) = delete;
        Ticket& operator=(const Ticket&) = delete;

    private:
        RateLimiter* parent_;
    };

    /// Blocks until both an in-flight slot and a rate token are available.
    Ticket acquire();

private:
    friend class Ticket;
    void release();
    std::mutex mu_;
    std::condition_variable cv_;
    int max_in_flight_;
    int in_flight_ = 0;
    double rate_;  // tokens per second; <= 0 disables rate limiting
    double tokens_;
    std::chrono::steady_clock::time_point last_refill_;
};

struct HttpTransportConfig {
    std::string endpoint;           // e.g. http://127.0.0.1:8080/chat
    std::string api_key_env = "GROKE_API_KEY";
    int max_in_flight = 4;
    double requests_per_second = 0.0;  // 0 = unlimited
    int timeout_seconds = 120;
};

/// POSTs the request as JSON over HTTP and maps status codes onto
/// TransportStatus (429 -> RateLimited, other failures -> Error).
class HttpChatTransport : public ChatTransport {
public:
    explicit HttpChatTransport(HttpTransportConfig config);
    ChatResult send(const ChatRequest& request) override;

    static std::string request_to_json(const ChatRequest& request);
    static ChatResult parse_response_body(const std::string& body);

private:
    HttpTransportConfig config_;
    std::shared_ptr<RateLimiter> limiter_;
};

/// Scripted transport for tests: returns queued results in order.
class ScriptedChatTransport : public ChatTransport {
public:
    void push(ChatResult result) { queue_.push_back(std::move(result)); }
    ChatResult send(const ChatRequest& request) override;
    const std::vector<ChatRequest>& requests_seen() const { return requests_; }

private:
    std::mutex mu_;
    std::deque<ChatResult> queue_;
    std::vector<ChatRequest> requests_;
};

/// One recorded exchange, serializable to the transcript format.
struct TranscriptEntry {
    ChatRequest request;
    ChatResponse response;
};

std::string transcript_entry_to_json(const std::string& instance_id, int call_index,
                                     const TranscriptEntry& entry);

/// Wraps another transport and keeps every successful exchange.
class RecordingChatTransport : public ChatTransport {
public:
    explicit RecordingChatTransport(std::shared_ptr<ChatTransport> inner)
        : inner_(std::move(inner)) {}
    ChatResult send(const ChatRequest& request) override;
    const std::vector<TranscriptEntry>& recorded() const { return recorded_; }

private:
    std::shared_ptr<ChatTransport> inner_;
    std::vector<TranscriptEntry> recorded_;
    std::mutex mu_;
};

/// Replays recorded exchanges in order with zero network involvement.
class ReplayChatTransport : public ChatTransport {
public:
    explicit ReplayChatTransport(std::vector<TranscriptEntry> entries)
        : entries_(std::move(entries)) {}
    ChatResult send(const ChatRequest& request) override;

private:
    std::vector<TranscriptEntry> entries_;
    std::size_t next_ = 0;
    std::mutex mu_;
};

/// Parses a transcript file (one JSON record per line) into per-instance
/// entry sequences, ordered by call index.
std::map<std::string, std::vector<TranscriptEntry>> load_transcript(const std::string& path);

}  // namespace groke
