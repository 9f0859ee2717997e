#include "groke/episode.hpp"

#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

namespace groke {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::PlanFinished: return "PlanFinished";
        case Termination::StepCapExceeded: return "StepCapExceeded";
        case Termination::RetryCapExceeded: return "RetryCapExceeded";
        case Termination::PolicyFailure: return "PolicyFailure";
    }
    return "PolicyFailure";
}

namespace {

std::string area_digest(const VisibleArea& area) {
    std::string blob = area.origin + "|" + std::to_string(area.origin_heading.degrees());
    for (const auto& id : area.presented_nodes()) {
        blob += "," + id;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(blob)));
    return buf;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, const std::string& instance_id) {
    char prefix[17];
    std::snprintf(prefix, sizeof(prefix), "%016llx", static_cast<unsigned long long>(base_seed));
    return fnv1a64(std::string(prefix) + ":" + instance_id);
}

EpisodeResult run_episode(const Instance& instance, Policy& policy, const EpisodeConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    const MapGraph& g = *instance.graph;

    EpisodeResult result;
    result.instance_id = instance.instance_id;
    result.seed = cfg.seed;
    result.trajectory.push_back(instance.route.front());

    auto finish = [&](Termination t, const std::string& msg = {}) -> EpisodeResult& {
        result.termination = t;
        result.failure_message = msg;
        result.final_node = result.trajectory.back();
        result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        result.transcript = policy.transcript();
        return result;
    };

    try {
        // Plan: fixture response first, then the policy's own extraction.
        SubGoalPlan plan;
        bool have_plan = false;
        if (cfg.fixture_plans) {
            auto it = cfg.fixture_plans->find(instance.instance_id);
            if (it != cfg.fixture_plans->end()) {
                plan = parse_plan(it->second);
                have_plan = true;
            }
        }
        if (!have_plan) {
            auto pr = policy.make_plan(instance);
            result.token_usage += pr.usage;
            if (!pr.plan) {
                return finish(Termination::PolicyFailure, "plan extraction failed: " + pr.message);
            }
            plan = std::move(*pr.plan);
        }

        PlanningState state = make_planning_state(
            plan, ground_landmarks(assign_landmark_letters(plan.landmarks), g, cfg.tau));

        NodeId current = instance.route.front();
        Heading heading = instance.initial_heading;
        int retries = 0;

        while (true) {
            if (state.finished()) {
                return finish(Termination::PlanFinished);
            }
            if (result.step_count >= cfg.max_steps) {
                return finish(Termination::StepCapExceeded);
            }

            VisibleArea area = construct_visible_area(g, current, heading, cfg.visibility_units);
            annotate_pois(g, area, state.landmarks);

            std::string encoded_cache;
            bool encoded_ready = false;
            DecisionContext ctx{
                instance, state, area, cfg.kind,
                [&]() -> const std::string& {
                    if (!encoded_ready) {
                        encoded_cache = encode(cfg.kind,
                                               EncodeInput{area, result.trajectory, state.landmarks,
                                                           state, g, instance.instance_id});
                        encoded_ready = true;
                    }
                    return encoded_cache;
                }};

            PolicyResult pr = policy.decide(ctx);
            result.token_usage += pr.usage;

            StepRecord rec;
            rec.step = result.step_count;
            rec.area_digest = area_digest(area);
            rec.decision_status = pr.decision.status;
            rec.decision_next = pr.decision.next_node;

            if (!pr.ok() && pr.error == PolicyErrorKind::Transport) {
                rec.accepted = false;
                rec.retry_count = retries;
                rec.note = pr.message;
                result.steps.push_back(rec);
                return finish(Termination::PolicyFailure, pr.message);
            }

            const bool valid =
                pr.ok() && (pr.decision.next_node == current ||
                            area.contains(pr.decision.next_node) ||
                            (g.has_node(pr.decision.next_node) &&
                             g.has_edge(current, pr.decision.next_node)));
            if (!valid) {
                rec.accepted = false;
                rec.note = pr.ok() ? "node '" + pr.decision.next_node + "' not reachable here"
                                   : pr.message;
                if (retries >= cfg.max_retries) {
                    rec.retry_count = retries;
                    result.steps.push_back(rec);
                    return finish(Termination::RetryCapExceeded);
                }
                ++retries;
                rec.retry_count = retries;
                result.steps.push_back(rec);
                continue;
            }

            ++result.step_count;
            rec.accepted = true;

            std::vector<NodeId> hops;
            if (pr.decision.next_node != current) {
                if (area.contains(pr.decision.next_node)) {
                    hops = area.route_to(pr.decision.next_node);
                } else {
                    hops = {pr.decision.next_node};
                }
            }
            for (const auto& hop : hops) {
                heading = bearing(g.node(current).position, g.node(hop).position);
                current = hop;
                result.trajectory.push_back(hop);
            }
            rec.hops = static_cast<int>(hops.size());

            if (pr.decision.status == SubGoalStatus::Completed) {
                state.advance(SubGoalStatus::Completed);
                retries = 0;
            } else {
                state.advance(SubGoalStatus::InProgress);
            }
            rec.retry_count = retries;
            result.steps.push_back(rec);
        }
    } catch (const std::exception& e) {
        return finish(Termination::PolicyFailure, std::string("episode error: ") + e.what());
    }
}

std::vector<EpisodeResult> run_batch(const std::vector<Instance>& instances,
                                     const PolicyFactory& factory, const EpisodeConfig& cfg,
                                     int parallelism) {
    if (parallelism < 1) {
        throw std::invalid_argument("parallelism must be >= 1");
    }
    std::vector<EpisodeResult> results(instances.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) return;
            const Instance& inst = instances[i];
            EpisodeConfig episode_cfg = cfg;
            episode_cfg.seed = derive_seed(cfg.seed, inst.instance_id);
            try {
                auto policy = factory(inst, episode_cfg.seed);
                results[i] = run_episode(inst, *policy, episode_cfg);
            } catch (const std::exception& e) {
                EpisodeResult r;
                r.instance_id = inst.instance_id;
                r.seed = episode_cfg.seed;
                r.trajectory = {inst.route.front()};
                r.final_node = inst.route.front();
                r.termination = Termination::PolicyFailure;
                r.failure_message = e.what();
                results[i] = std::move(r);
            }
        }
    };

    const int n_threads = static_cast<int>(std::min<std::size_t>(
        static_cast<std::size_t>(parallelism), std::max<std::size_t>(1, instances.size())));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return results;
}

}  // namespace groke
