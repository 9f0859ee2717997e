#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "groke/policy.hpp"

namespace groke {

enum class Termination { PlanFinished, StepCapExceeded, RetryCapExceeded, PolicyFailure };
const char* to_string(Termination t);

/// One policy invocation, accepted or not.
struct StepRecord {
    int step = 0;           // valid-step ordinal at the time of the invocation
    std::string area_digest;
    SubGoalStatus decision_status = SubGoalStatus::InProgress;
    NodeId decision_next;
    bool accepted = false;
    int retry_count = 0;    // per-sub-goal counter after this invocation
    int hops = 0;           // trajectory entries this invocation appended
    std::string note;       // rejection reason when not accepted
};

struct EpisodeResult {
    std::string instance_id;
    std::vector<NodeId> trajectory;  // starts at v_1
    NodeId final_node;
    Termination termination = Termination::PolicyFailure;
    std::vector<StepRecord> steps;
    int step_count = 0;  // accepted policy invocations
    TokenUsage token_usage;
    std::chrono::milliseconds duration{0};
    std::uint64_t seed = 0;
    std::string failure_message;
    std::vector<TranscriptEntry> transcript;
};

struct EpisodeConfig {
    int visibility_units = 1;
    RepresentationKind kind = RepresentationKind::OptimizedJson;
    int max_steps = 100;
    int max_retries = 15;
    double tau = kDefaultGroundingTau;
    std::uint64_t seed = 0;
    /// Raw extraction responses keyed by instance id; takes precedence over
    /// the policy's own plan when present.
    const std::map<std::string, std::string>* fixture_plans = nullptr;
};

/// Runs one navigation episode to termination. Policy failures terminate
/// the episode, they never escape as exceptions.
EpisodeResult run_episode(const Instance& instance, Policy& policy, const EpisodeConfig& cfg);

/// Runs a batch over `parallelism` worker threads. Results come back in
/// input order; per-episode seeds derive from (cfg.seed, instance_id) so
/// reordering the batch never changes per-instance behavior. Individual
/// failures are recorded and do not abort the batch.
std::vector<EpisodeResult> run_batch(const std::vector<Instance>& instances,
                                     const PolicyFactory& factory, const EpisodeConfig& cfg,
                                     int parallelism);

/// The seed an episode for this instance derives from the batch seed.
std::uint64_t derive_seed(std::uint64_t base_seed, const std::string& instance_id);

}  // namespace groke
