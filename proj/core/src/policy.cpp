#include "groke/policy.hpp"

#include <algorithm>
#include <regex>
#include <thread>

#include "json.hpp"

namespace groke {

namespace {
using nlohmann::json;
}

std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

Policy::PlanResult Policy::make_plan(const Instance&) {
    SubGoalPlan plan;
    SubGoal g;
    g.index = 1;
    g.description = "Follow the instruction to the destination.";
    g.action = SubGoalAction::MoveForward;
    g.status = SubGoalStatus::InProgress;
    plan.sub_goals.push_back(std::move(g));
    return {plan, PolicyErrorKind::None, "", {}};
}

// ----------------------------------------------------------------- oracle

PolicyResult OraclePolicy::decide(const DecisionContext& ctx) {
    // Locate the agent on the route; it always sits at cursor_ when every
    // prior decision was accepted.
    if (cursor_ + 1 >= route_.size()) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "oracle already reached the route end");
    }
    if (ctx.area.origin != route_[cursor_]) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "oracle lost the route at node " + ctx.area.origin);
    }
    PolicyResult r;
    r.decision.next_node = route_[cursor_ + 1];
    r.decision.status = (cursor_ + 2 == route_.size()) ? SubGoalStatus::Completed
                                                       : SubGoalStatus::InProgress;
    ++cursor_;
    return r;
}

// ----------------------------------------------------------------- random

PolicyResult RandomWalkerPolicy::decide(const DecisionContext& ctx) {
    const MapGraph& g = *ctx.instance.graph;
    const auto& edges = g.node(ctx.area.origin).out_edges;
    if (edges.empty()) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "no outgoing edges at " + ctx.area.origin);
    }
    PolicyResult r;
    if (g.is_intersection(ctx.area.origin)) {
        std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
        r.decision.next_node = edges[pick(rng_)].target;
    } else {
        r.decision.next_node = tie_break_neighbor(edges, ctx.area.origin_heading);
    }
    r.decision.status = SubGoalStatus::InProgress;
    return r;
}

// -------------------------------------------------------------- heuristic

std::vector<DirectiveKind> extract_directives(const std::string& instruction) {
    static const std::regex pattern(
        R"((turn\s+left|turn\s+right|bear\s+left|bear\s+right|go\s+straight|continue\s+straight|straight\s+through|keep\s+left|keep\s+right))",
        std::regex::icase);
    std::vector<DirectiveKind> out;
    auto begin = std::sregex_iterator(instruction.begin(), instruction.end(), pattern);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        std::string m = it->str();
        std::transform(m.begin(), m.end(), m.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (m.find("left") != std::string::npos) {
            out.push_back(DirectiveKind::Left);
        } else if (m.find("right") != std::string::npos) {
            out.push_back(DirectiveKind::Right);
        } else {
            out.push_back(DirectiveKind::Straight);
        }
    }
    return out;
}

PolicyResult HeuristicPolicy::decide(const DecisionContext& ctx) {
    const MapGraph& g = *ctx.instance.graph;
    const auto& edges = g.node(ctx.area.origin).out_edges;
    if (edges.empty()) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "no outgoing edges at " + ctx.area.origin);
    }
    PolicyResult r;
    r.decision.status = SubGoalStatus::InProgress;
    if (g.is_intersection(ctx.area.origin)) {
        if (cursor_ >= directives_.size()) {
            if (!directives_.empty()) {
                // commands exhausted: this block end is the destination
                r.decision.status = SubGoalStatus::Completed;
                r.decision.next_node = ctx.area.origin;
                return r;
            }
            r.decision.next_node = tie_break_neighbor(edges, ctx.area.origin_heading);
            return r;
        }
        const DirectiveKind d = directives_[cursor_++];
        const double angle = d == DirectiveKind::Left ? -90.0
                             : d == DirectiveKind::Right ? 90.0
                                                         : 0.0;
        r.decision.next_node =
            tie_break_neighbor(edges, ctx.area.origin_heading.rotated(angle));
    } else {
        r.decision.next_node = tie_break_neighbor(edges, ctx.area.origin_heading);
    }
    return r;
}

// --------------------------------------------------------------- sampling

ActionDistribution fit_action_distribution(const std::vector<Instance>& instances) {
    if (instances.empty()) {
        throw std::invalid_argument("action distribution needs a non-empty corpus");
    }
    ActionDistribution table;
    auto bucket_of = [&](ActionDistribution& t, bool inter) -> ActionDistribution::Bucket& {
        return inter ? t.intersection : t.non_intersection;
    };
    for (const auto& inst : instances) {
        const MapGraph& g = *inst.graph;
        const auto& route = inst.route;
        for (std::size_t i = 0; i + 1 < route.size(); ++i) {
            const Heading step = bearing(g.node(route[i]).position, g.node(route[i + 1]).position);
            const Heading arrival =
                i == 0 ? inst.initial_heading
                       : bearing(g.node(route[i - 1]).position, g.node(route[i]).position);
            const auto rel = relative_direction(step, arrival);
            std::size_t cls;
            switch (rel.direction) {
                case RelativeDirection::Forward: cls = 0; break;
                case RelativeDirection::Left: cls = 1; break;
                case RelativeDirection::Right: cls = 2; break;
                default: cls = rel.delta < 0 ? 1 : 2; break;  // fold u-turns into the turn side
            }
            bucket_of(table, g.is_intersection(route[i])).move_counts[cls] += 1;
        }
        bucket_of(table, g.is_intersection(route.back())).stop_count += 1;
    }
    for (ActionDistribution::Bucket* b : {&table.intersection, &table.non_intersection}) {
        const long moves = b->move_counts[0] + b->move_counts[1] + b->move_counts[2];
        if (moves > 0) {
            for (std::size_t i = 0; i < 3; ++i) {
                b->move[i] = static_cast<double>(b->move_counts[i]) / static_cast<double>(moves);
            }
        }
        const long visits = moves + b->stop_count;
        b->stop = visits > 0 ? static_cast<double>(b->stop_count) / static_cast<double>(visits)
                             : 0.0;
    }
    return table;
}

PolicyResult ActionSamplingPolicy::decide(const DecisionContext& ctx) {
    const MapGraph& g = *ctx.instance.graph;
    const auto& edges = g.node(ctx.area.origin).out_edges;
    if (edges.empty()) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "no outgoing edges at " + ctx.area.origin);
    }
    const auto& bucket = table_.bucket(g.is_intersection(ctx.area.origin));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PolicyResult r;
    if (unit(rng_) < bucket.stop) {
        r.decision.status = SubGoalStatus::Completed;
        r.decision.next_node = ctx.area.origin;
        return r;
    }
    const double roll = unit(rng_);
    double acc = 0.0;
    std::size_t cls = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        acc += bucket.move[i];
        if (roll < acc) {
            cls = i;
            break;
        }
        cls = i;
    }
    const double angle = cls == 1 ? -90.0 : cls == 2 ? 90.0 : 0.0;
    r.decision.status = SubGoalStatus::InProgress;
    r.decision.next_node = tie_break_neighbor(edges, ctx.area.origin_heading.rotated(angle));
    return r;
}

// -------------------------------------------------------------------- llm

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots) {
    std::string out = tmpl;
    for (const auto& [key, value] : slots) {
        const std::string needle = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

PolicyResult parse_decision(const std::string& content) {
    std::string body = content;
    const auto fence = body.find("```");
    if (fence != std::string::npos) {
        auto start = body.find('\n', fence);
        auto end = body.rfind("```");
        if (start != std::string::npos && end != std::string::npos && end > start) {
            body = body.substr(start + 1, end - start - 1);
        }
    }
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception&) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "decision is not valid JSON: " + content);
    }
    if (!j.is_object() || !j.contains("SubPlan_Status") || !j.contains("Next_Place") ||
        !j.at("SubPlan_Status").is_string() || !j.at("Next_Place").is_string()) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "decision lacks SubPlan_Status/Next_Place: " + content);
    }
    const std::string status = j.at("SubPlan_Status").get<std::string>();
    PolicyResult r;
    if (status == "COMPLETED") {
        r.decision.status = SubGoalStatus::Completed;
    } else if (status == "IN_PROGRESS") {
        r.decision.status = SubGoalStatus::InProgress;
    } else {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput,
                                     "unknown SubPlan_Status '" + status + "'");
    }
    r.decision.next_node = j.at("Next_Place").get<std::string>();
    if (r.decision.next_node.empty()) {
        return PolicyResult::failure(PolicyErrorKind::MalformedOutput, "empty Next_Place");
    }
    return r;
}

ChatResult LlmPolicy::send_with_backoff(const ChatRequest& request) {
    ChatResult result;
    auto delay = config_.backoff_base;
    for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
        result = transport_->send(request);
        if (result.ok()) return result;
        if (attempt < config_.transport_retries) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
    return result;
}

Policy::PlanResult LlmPolicy::make_plan(const Instance& instance) {
    ChatRequest request;
    request.model = config_.model;
    request.temperature = config_.temperature;
    request.reasoning_effort = config_.reasoning_effort;
    request.messages.push_back(
        {"user", render_template(config_.extraction_template,
                                 {{"instruction", instance.instruction}})});

    PlanResult out;
    for (int attempt = 0; attempt <= config_.extraction_parse_retries; ++attempt) {
        ChatResult result = send_with_backoff(request);
        out.usage += result.response.usage;
        if (!result.ok()) {
            out.error = PolicyErrorKind::Transport;
            out.message = result.error;
            return out;
        }
        try {
            out.plan = parse_plan(result.response.content);
            out.error = PolicyErrorKind::None;
            return out;
        } catch (const MalformedResponse& e) {
            out.error = PolicyErrorKind::MalformedOutput;
            out.message = e.what();
        }
    }
    return out;
}

PolicyResult LlmPolicy::decide(const DecisionContext& ctx) {
    const PlanningState& plan = ctx.plan;
    std::string current_goal = "Follow the instruction.";
    std::string goal_state = "IN_PROGRESS";
    if (!plan.finished()) {
        current_goal = plan.current().description;
        goal_state = to_string(plan.current().status);
    }
    std::string landmark_names;
    for (const auto& gl : plan.landmarks) {
        if (!landmark_names.empty()) landmark_names += ", ";
        landmark_names += gl.landmark.name;
    }

    ChatRequest request;
    request.model = config_.model;
    request.temperature = config_.temperature;
    request.reasoning_effort = config_.reasoning_effort;
    request.messages.push_back(
        {"user", render_template(config_.navigator_template,
                                 {{"instruction", ctx.instance.instruction},
                                  {"current_sub_goal", current_goal},
                                  {"sub_goal_state", goal_state},
                                  {"landmarks", landmark_names},
                                  {"context", ctx.encoded()}})});

    ChatResult result = send_with_backoff(request);
    if (!result.ok()) {
        return PolicyResult::failure(PolicyErrorKind::Transport, result.error);
    }
    PolicyResult decision = parse_decision(result.response.content);
    decision.usage = result.response.usage;
    return decision;
}

// --------------------------------------------------------------- scripted

PolicyResult ScriptedPolicy::decide(const DecisionContext&) {
    if (next_ >= script_.size()) {
        return PolicyResult::failure(PolicyErrorKind::Transport, "script exhausted");
    }
    return script_[next_++];
}

}  // namespace groke
