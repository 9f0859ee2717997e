#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "groke/chat.hpp"
#include "groke/encoders.hpp"
#include "groke/instruction.hpp"
#include "groke/visibility.hpp"

namespace groke {

struct PolicyDecision {
    SubGoalStatus status = SubGoalStatus::InProgress;  // InProgress or Completed
    NodeId next_node;
};

enum class PolicyErrorKind {
    None,
    InvalidNode,      // decision names a node the agent cannot move to
    MalformedOutput,  // response could not be parsed into a decision
    Transport,        // endpoint unreachable after retries
};

struct PolicyResult {
    PolicyDecision decision;
    PolicyErrorKind error = PolicyErrorKind::None;
    std::string message;
    TokenUsage usage;

    bool ok() const { return error == PolicyErrorKind::None; }
    static PolicyResult failure(PolicyErrorKind kind, std::string msg, TokenUsage usage = {}) {
        PolicyResult r;
        r.error = kind;
        r.message = std::move(msg);
        r.usage = usage;
        return r;
    }
};

/// Step context handed to a policy. The encoded prompt text is built
/// lazily so text-free baselines never pay for serialization.
struct DecisionContext {
    const Instance& instance;
    const PlanningState& plan;
    const VisibleArea& area;
    RepresentationKind kind = RepresentationKind::OptimizedJson;
    std::function<const std::string&()> encoded;  // cached by the episode loop
};

/// A navigation policy: one instance per episode, so implementations may
/// keep per-episode state (RNG, cursors) without any cross-episode sharing.
class Policy {
public:
    virtual ~Policy() = default;
    virtual const char* name() const = 0;
    virtual PolicyResult decide(const DecisionContext& ctx) = 0;

    /// The sub-goal plan for this episode. The default is a single
    /// follow-the-instruction sub-goal; LLM policies override this with a
    /// real extraction call. Errors surface as MalformedOutput/Transport.
    struct PlanResult {
        std::optional<SubGoalPlan> plan;
        PolicyErrorKind error = PolicyErrorKind::None;
        std::string message;
        TokenUsage usage;
    };
    virtual PlanResult make_plan(const Instance& instance);

    /// Exchanges recorded by LLM-backed policies, empty otherwise.
    virtual std::vector<TranscriptEntry> transcript() const { return {}; }
};

using PolicyFactory = std::function<std::unique_ptr<Policy>(const Instance&, std::uint64_t seed)>;

/// Stable 64-bit hash used for per-instance seed derivation.
std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed = 1469598103934665603ULL);

// ----------------------------------------------------------------- oracle

/// Replays the ground-truth route one hop per step; Completed exactly when
/// the final route node is chosen. Used to validate the whole loop.
class OraclePolicy : public Policy {
public:
    explicit OraclePolicy(const Instance& instance) : route_(instance.route) {}
    const char* name() const override { return "oracle"; }
    PolicyResult decide(const DecisionContext& ctx) override;

private:
    std::vector<NodeId> route_;
    std::size_t cursor_ = 0;
};

// ----------------------------------------------------------------- random

/// Uniform over outgoing edges at intersections; follows the most-aligned
/// edge between them. Never stops on its own.
class RandomWalkerPolicy : public Policy {
public:
    explicit RandomWalkerPolicy(std::uint64_t seed) : rng_(seed) {}
    const char* name() const override { return "random"; }
    PolicyResult decide(const DecisionContext& ctx) override;

private:
    std::mt19937_64 rng_;
};

// -------------------------------------------------------------- heuristic

enum class DirectiveKind { Straight, Left, Right };

/// Ordered directional keywords found in an instruction.
std::vector<DirectiveKind> extract_directives(const std::string& instruction);

/// Consumes one extracted directive per intersection and picks the edge
/// best aligned with the commanded angle (left -90, right +90, straight 0);
/// keeps the most-aligned forward edge between intersections. Stops at the
/// first intersection reached after the directive list is exhausted; with
/// no directives at all it keeps walking straight.
class HeuristicPolicy : public Policy {
public:
    explicit HeuristicPolicy(const Instance& instance)
        : directives_(extract_directives(instance.instruction)) {}
    const char* name() const override { return "heuristic"; }
    PolicyResult decide(const DecisionContext& ctx) override;

private:
    std::vector<DirectiveKind> directives_;
    std::size_t cursor_ = 0;
};

// --------------------------------------------------------------- sampling

/// Per-context movement statistics fitted from ground-truth routes:
/// move-class probabilities (forward/left/right, summing to 1) plus a
/// separate stop probability, for intersection and non-intersection nodes.
struct ActionDistribution {
    struct Bucket {
        std::array<double, 3> move = {1.0, 0.0, 0.0};  // forward, left, right
        double stop = 0.0;
        std::array<long, 3> move_counts = {0, 0, 0};
        long stop_count = 0;
    };
    Bucket intersection;
    Bucket non_intersection;

    const Bucket& bucket(bool at_intersection) const {
        return at_intersection ? intersection : non_intersection;
    }
};

/// Tallies every route step into forward/left/right by the step bearing's
/// offset from the incoming heading, and every route terminal into the stop
/// count of its node's bucket. Throws on an empty corpus.
ActionDistribution fit_action_distribution(const std::vector<Instance>& instances);

/// Ignores the instruction entirely: samples stop-or-move from the fitted
/// table and maps sampled move classes onto the angularly nearest edge.
class ActionSamplingPolicy : public Policy {
public:
    ActionSamplingPolicy(ActionDistribution table, std::uint64_t seed)
        : table_(std::move(table)), rng_(seed) {}
    const char* name() const override { return "sampling"; }
    PolicyResult decide(const DecisionContext& ctx) override;

private:
    ActionDistribution table_;
    std::mt19937_64 rng_;
};

// -------------------------------------------------------------------- llm

struct LlmPolicyConfig {
    std::string model;
    double temperature = 1.0;
    std::string reasoning_effort;           // opaque passthrough
    std::string extraction_template;        // template text, slots in {{...}}
    std::string navigator_template;
    int transport_retries = 5;              // exponential backoff attempts
    int extraction_parse_retries = 5;
    std::chrono::milliseconds backoff_base{250};
};

/// Renders `{{slot}}` placeholders in a template.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots);

/// Parses the navigator's strict-JSON decision output.
/// Returns MalformedOutput (with the raw text) when it does not conform.
PolicyResult parse_decision(const std::string& content);

/// Chat-backed policy speaking the minimal chat-completion protocol. The
/// extraction call produces the sub-goal plan; each decide renders the
/// navigator template and parses the strict-JSON decision. Transport
/// failures retry with exponential backoff before surfacing.
class LlmPolicy : public Policy {
public:
    LlmPolicy(std::shared_ptr<ChatTransport> transport, LlmPolicyConfig config)
        : transport_(std::make_shared<RecordingChatTransport>(std::move(transport))),
          config_(std::move(config)) {}

    const char* name() const override { return "llm"; }
    PlanResult make_plan(const Instance& instance) override;
    PolicyResult decide(const DecisionContext& ctx) override;
    std::vector<TranscriptEntry> transcript() const override { return transport_->recorded(); }

private:
    ChatResult send_with_backoff(const ChatRequest& request);
    std::shared_ptr<RecordingChatTransport> transport_;
    LlmPolicyConfig config_;
};

/// Scripted policy for tests: returns queued results verbatim.
class ScriptedPolicy : public Policy {
public:
    explicit ScriptedPolicy(std::vector<PolicyResult> script) : script_(std::move(script)) {}
    const char* name() const override { return "scripted"; }
    PolicyResult decide(const DecisionContext&) override;

private:
    std::vector<PolicyResult> script_;
    std::size_t next_ = 0;
};

}  // namespace groke
