// groke: batch evaluation harness for instruction navigability.
//   groke run     -- execute a policy over a dataset and score it
//   groke score   -- re-score stored results, optionally against ratings
//   groke encode  -- print the prompt a policy would see at one step

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "groke/episode.hpp"
#include "groke/metrics.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace groke;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string dataset;
    std::string policy = "oracle";
    std::string repr = "optimized-json";
    int u = 1;
    int max_steps = 100;
    int max_retries = 15;
    double tau = kDefaultGroundingTau;
    double threshold = kSuccessRadiusM;
    std::uint64_t seed = 0;
    int parallelism = 4;
    std::string out_dir;
    std::string endpoint;
    std::string model;
    std::string reasoning;
    std::string prompts_dir = "prompts";
    std::string transcript;
    std::string plans;
    std::string tags;
    int limit = 0;
    double rate_limit = 0.0;
    int max_in_flight = 4;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::map<std::string, std::string> load_string_map(const std::string& path) {
    // {"instance-id": "value"} objects; values may be nested JSON
    std::map<std::string, std::string> out;
    const json doc = json::parse(read_file(path));
    if (!doc.is_object()) {
        throw std::runtime_error(path + ": expected a JSON object keyed by instance id");
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        out[it.key()] =
            it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    return out;
}

std::map<std::string, double> load_ratings(const std::string& path) {
    std::map<std::string, double> out;
    const std::string text = read_file(path);
    // JSON array or JSONL records {"instance_id":..., "rating":...}
    auto take = [&](const json& j) {
        out[j.at("instance_id").get<std::string>()] = j.at("rating").get<double>();
    };
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        for (const auto& j : json::parse(text)) take(j);
    } else {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            take(json::parse(line));
        }
    }
    return out;
}

ordered_json usage_json(const TokenUsage& u) {
    return {{"prompt_tokens", u.prompt_tokens},
            {"thoughts_tokens", u.thoughts_tokens},
            {"total_tokens", u.total_tokens}};
}

ordered_json result_json(const EpisodeResult& r, const TrajectoryScore& s) {
    ordered_json j;
    j["instance_id"] = r.instance_id;
    j["seed"] = r.seed;
    j["termination"] = to_string(r.termination);
    j["final_node"] = r.final_node;
    j["trajectory"] = r.trajectory;
    j["steps"] = r.step_count;
    j["metrics"] = {{"ne", s.ne}, {"sr", s.sr}, {"osr", s.osr},
                    {"ndtw", s.ndtw}, {"sdtw", s.sdtw}};
    j["token_usage"] = usage_json(r.token_usage);
    j["duration_ms"] = r.duration.count();
    if (!r.failure_message.empty()) j["failure"] = r.failure_message;
    return j;
}

void print_report(const AggregateReport& rep, const std::string& label) {
    std::printf("%-10s %6zu  %8.1f  %6.1f%%  %6.1f%%  %6.3f  %6.3f\n", label.c_str(), rep.count,
                rep.mean_ne, rep.sr_pct, rep.osr_pct, rep.mean_ndtw, rep.mean_sdtw);
}

void print_summary(const AggregateReport& rep) {
    std::printf("%-10s %6s  %8s  %7s  %7s  %6s  %6s\n", "split", "n", "NE(m)", "SR", "OSR",
                "nDTW", "SDTW");
    print_report(rep, "overall");
    for (const auto& [tag, sub] : rep.by_tag) {
        print_report(sub, tag);
    }
}

PolicyFactory build_factory(const RunConfig& cfg, const std::vector<Instance>& instances) {
    if (cfg.policy == "oracle") {
        return [](const Instance& inst, std::uint64_t) {
            return std::make_unique<OraclePolicy>(inst);
        };
    }
    if (cfg.policy == "random") {
        return [](const Instance&, std::uint64_t seed) {
            return std::make_unique<RandomWalkerPolicy>(seed);
        };
    }
    if (cfg.policy == "heuristic") {
        return [](const Instance& inst, std::uint64_t) {
            return std::make_unique<HeuristicPolicy>(inst);
        };
    }
    if (cfg.policy == "sampling") {
        auto table = std::make_shared<ActionDistribution>(fit_action_distribution(instances));
        return [table](const Instance&, std::uint64_t seed) {
            return std::make_unique<ActionSamplingPolicy>(*table, seed);
        };
    }
    if (cfg.policy == "llm") {
        if (cfg.endpoint.empty() || cfg.model.empty()) {
            throw std::runtime_error("--endpoint and --model are required for --policy llm");
        }
        HttpTransportConfig tcfg;
        tcfg.endpoint = cfg.endpoint;
        tcfg.max_in_flight = cfg.max_in_flight;
        tcfg.requests_per_second = cfg.rate_limit;
        auto transport = std::make_shared<HttpChatTransport>(tcfg);
        auto pcfg = std::make_shared<LlmPolicyConfig>();
        pcfg->model = cfg.model;
        pcfg->reasoning_effort = cfg.reasoning;
        pcfg->extraction_template = read_file(cfg.prompts_dir + "/extraction.txt");
        pcfg->navigator_template = read_file(cfg.prompts_dir + "/navigator.txt");
        return [transport, pcfg](const Instance&, std::uint64_t) {
            return std::make_unique<LlmPolicy>(transport, *pcfg);
        };
    }
    if (cfg.policy == "replay") {
        if (cfg.transcript.empty()) {
            throw std::runtime_error("--transcript is required for --policy replay");
        }
        auto entries = std::make_shared<std::map<std::string, std::vector<TranscriptEntry>>>(
            load_transcript(cfg.transcript));
        auto pcfg = std::make_shared<LlmPolicyConfig>();
        pcfg->model = "replay";
        pcfg->extraction_template = "{{instruction}}";
        pcfg->navigator_template = "{{context}}";
        return [entries, pcfg](const Instance& inst, std::uint64_t) -> std::unique_ptr<Policy> {
            auto it = entries->find(inst.instance_id);
            std::vector<TranscriptEntry> mine =
                it == entries->end() ? std::vector<TranscriptEntry>{} : it->second;
            return std::make_unique<LlmPolicy>(std::make_shared<ReplayChatTransport>(mine),
                                               *pcfg);
        };
    }
    throw std::runtime_error("unknown policy '" + cfg.policy + "'");
}

ordered_json config_json(const RunConfig& cfg) {
    ordered_json j;
    j["dataset"] = cfg.dataset;
    j["policy"] = cfg.policy;
    j["representation"] = cfg.repr;
    j["visibility_units"] = cfg.u;
    j["max_steps"] = cfg.max_steps;
    j["max_retries"] = cfg.max_retries;
    j["tau"] = cfg.tau;
    j["threshold_m"] = cfg.threshold;
    j["seed"] = cfg.seed;
    j["parallelism"] = cfg.parallelism;
    j["endpoint"] = cfg.endpoint;
    j["model"] = cfg.model;
    j["reasoning"] = cfg.reasoning;
    j["prompts_dir"] = cfg.prompts_dir;
    j["transcript"] = cfg.transcript;
    j["plans"] = cfg.plans;
    j["tags"] = cfg.tags;
    j["limit"] = cfg.limit;
    return j;
}

int cmd_run(const RunConfig& cfg) {
    auto instances = load_instances(cfg.dataset);
    if (cfg.limit > 0 && static_cast<int>(instances.size()) > cfg.limit) {
        instances.resize(cfg.limit);
    }

    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);
    {
        std::ofstream snap(out / "config.json");
        snap << config_json(cfg).dump(2) << "\n";
    }

    // resumable: skip instances already present in results.jsonl
    std::set<std::string> done;
    const fs::path results_path = out / "results.jsonl";
    if (fs::exists(results_path)) {
        std::ifstream in(results_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            done.insert(json::parse(line).at("instance_id").get<std::string>());
        }
        if (!done.empty()) {
            std::fprintf(stderr, "resuming: %zu instances already complete\n", done.size());
        }
    }

    std::map<std::string, std::string> fixture_plans;
    if (!cfg.plans.empty()) fixture_plans = load_string_map(cfg.plans);
    std::map<std::string, std::string> tag_map;
    if (!cfg.tags.empty()) tag_map = load_string_map(cfg.tags);

    EpisodeConfig ecfg;
    ecfg.visibility_units = cfg.u;
    ecfg.kind = representation_from_string(cfg.repr);
    ecfg.max_steps = cfg.max_steps;
    ecfg.max_retries = cfg.max_retries;
    ecfg.tau = cfg.tau;
    ecfg.seed = cfg.seed;
    if (!fixture_plans.empty()) ecfg.fixture_plans = &fixture_plans;

    const PolicyFactory factory = build_factory(cfg, instances);

    std::vector<Instance> pending;
    for (const auto& inst : instances) {
        if (!done.count(inst.instance_id)) pending.push_back(inst);
    }

    std::ofstream results_out(results_path, std::ios::app);
    std::ofstream steps_out(out / "steps.jsonl", std::ios::app);
    std::ofstream transcript_out;
    if (cfg.policy == "llm" && !cfg.transcript.empty()) {
        transcript_out.open(cfg.transcript, std::ios::app);
    }

    // graph lookup for scoring
    std::map<std::string, const Instance*> by_id;
    for (const auto& inst : instances) by_id[inst.instance_id] = &inst;

    // chunked execution keeps interrupted batches resumable
    const std::size_t chunk = static_cast<std::size_t>(std::max(1, cfg.parallelism)) * 4;
    for (std::size_t start = 0; start < pending.size(); start += chunk) {
        std::vector<Instance> slice(pending.begin() + start,
                                    pending.begin() + std::min(start + chunk, pending.size()));
        const auto results = run_batch(slice, factory, ecfg, cfg.parallelism);
        for (const auto& r : results) {
            const Instance& inst = *by_id.at(r.instance_id);
            const auto s = score(r.trajectory, inst.route, *inst.graph, cfg.threshold);
            results_out << result_json(r, s).dump() << "\n";
            for (const auto& rec : r.steps) {
                ordered_json sj;
                sj["instance_id"] = r.instance_id;
                sj["step"] = rec.step;
                sj["area_digest"] = rec.area_digest;
                sj["decision"] = {{"status", to_string(rec.decision_status)},
                                  {"next", rec.decision_next}};
                sj["accepted"] = rec.accepted;
                sj["retry_count"] = rec.retry_count;
                sj["hops"] = rec.hops;
                if (!rec.note.empty()) sj["note"] = rec.note;
                steps_out << sj.dump() << "\n";
            }
            if (transcript_out.is_open()) {
                int call = 0;
                for (const auto& entry : r.transcript) {
                    transcript_out << transcript_entry_to_json(r.instance_id, call++, entry)
                                   << "\n";
                }
            }
        }
        results_out.flush();
        steps_out.flush();
    }
    results_out.close();

    // recompute the aggregate over the full results file (old + new)
    std::vector<TrajectoryScore> scores;
    std::vector<std::string> tags;
    long total_tokens = 0;
    double total_steps = 0.0;
    std::size_t counted = 0;
    {
        std::ifstream in(results_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const auto& m = j.at("metrics");
            scores.push_back({m.at("ne").get<double>(), m.at("sr").get<int>(),
                              m.at("osr").get<int>(), m.at("ndtw").get<double>(),
                              m.at("sdtw").get<double>()});
            total_tokens += j.at("token_usage").at("total_tokens").get<long>();
            total_steps += j.at("steps").get<double>();
            ++counted;
            if (!tag_map.empty()) {
                auto it = tag_map.find(j.at("instance_id").get<std::string>());
                tags.push_back(it == tag_map.end() ? "untagged" : it->second);
            }
        }
    }
    if (scores.empty()) {
        std::fprintf(stderr, "no results produced\n");
        return 1;
    }
    const auto rep = aggregate(scores, tag_map.empty() ? nullptr : &tags);
    {
        std::ofstream agg(out / "aggregate.json");
        ordered_json aj;
        aj["count"] = rep.count;
        aj["mean_ne"] = rep.mean_ne;
        aj["sr_pct"] = rep.sr_pct;
        aj["osr_pct"] = rep.osr_pct;
        aj["mean_ndtw"] = rep.mean_ndtw;
        aj["mean_sdtw"] = rep.mean_sdtw;
        aj["avg_steps"] = total_steps / static_cast<double>(counted);
        aj["avg_total_tokens"] = static_cast<double>(total_tokens) / static_cast<double>(counted);
        agg << aj.dump(2) << "\n";
    }
    std::printf("policy=%s dataset=%s\n", cfg.policy.c_str(), cfg.dataset.c_str());
    print_summary(rep);
    std::printf("avg steps %.2f, avg total tokens %.0f\n",
                total_steps / static_cast<double>(counted),
                static_cast<double>(total_tokens) / static_cast<double>(counted));
    return 0;
}

int cmd_score(const std::string& dataset, const std::string& results_path,
              const std::string& ratings_path, const std::string& tags_path,
              double threshold, int permutations) {
    const auto instances = load_instances(dataset);
    std::map<std::string, const Instance*> by_id;
    for (const auto& inst : instances) by_id[inst.instance_id] = &inst;

    std::map<std::string, std::string> tag_map;
    if (!tags_path.empty()) tag_map = load_string_map(tags_path);

    struct Row {
        std::string id;
        TrajectoryScore s;
    };
    std::vector<Row> rows;
    {
        std::ifstream in(results_path);
        if (!in) {
            std::fprintf(stderr, "cannot open results '%s'\n", results_path.c_str());
            return 1;
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const std::string id = j.at("instance_id").get<std::string>();
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                std::fprintf(stderr, "results reference unknown instance '%s'\n", id.c_str());
                return 1;
            }
            std::vector<NodeId> traj;
            for (const auto& n : j.at("trajectory")) traj.push_back(n.get<std::string>());
            rows.push_back({id, score(traj, it->second->route, *it->second->graph, threshold)});
        }
    }
    if (rows.empty()) {
        std::fprintf(stderr, "no results in '%s'\n", results_path.c_str());
        return 1;
    }

    std::vector<TrajectoryScore> scores;
    std::vector<std::string> tags;
    for (const auto& row : rows) {
        scores.push_back(row.s);
        if (!tag_map.empty()) {
            auto it = tag_map.find(row.id);
            tags.push_back(it == tag_map.end() ? "untagged" : it->second);
        }
    }
    print_summary(aggregate(scores, tag_map.empty() ? nullptr : &tags));

    if (!ratings_path.empty()) {
        const auto ratings = load_ratings(ratings_path);
        for (const auto& [id, rating] : ratings) {
            if (!by_id.count(id)) {
                std::fprintf(stderr, "ratings reference unknown instance '%s'\n", id.c_str());
                return 1;
            }
        }
        std::vector<double> rating_col;
        std::map<std::string, std::vector<double>> metric_cols;
        for (const auto& row : rows) {
            auto it = ratings.find(row.id);
            if (it == ratings.end()) continue;
            rating_col.push_back(it->second);
            metric_cols["SR"].push_back(row.s.sr);
            metric_cols["OSR"].push_back(row.s.osr);
            metric_cols["SDTW"].push_back(row.s.sdtw);
            metric_cols["nDTW"].push_back(row.s.ndtw);
            metric_cols["NE"].push_back(row.s.ne);
        }
        std::printf("\nCorrelation vs ratings (n=%zu)\n", rating_col.size());
        std::printf("%-6s %10s %10s %13s %10s\n", "metric", "pearson r", "p-value",
                    "spearman rho", "p-value");
        for (const char* name : {"SR", "OSR", "SDTW", "nDTW", "NE"}) {
            try {
                const auto c = correlate(metric_cols[name], rating_col,
                                         permutations > 0 ? std::optional<int>(permutations)
                                                          : std::nullopt);
                std::printf("%-6s %10.4f %10.4f %13.4f %10.4f\n", name, c.pearson_r, c.pearson_p,
                            c.spearman_rho, c.spearman_p);
            } catch (const std::exception& e) {
                std::printf("%-6s undefined (%s)\n", name, e.what());
            }
        }
    }
    return 0;
}

int cmd_encode(const std::string& dataset, const std::string& instance_id, int step,
               const std::string& repr, int u, double tau, const std::string& plan_path) {
    const auto instances = load_instances(dataset);
    const Instance* inst = nullptr;
    for (const auto& i : instances) {
        if (i.instance_id == instance_id) inst = &i;
    }
    if (!inst) {
        std::fprintf(stderr, "unknown instance '%s'\n", instance_id.c_str());
        return 1;
    }
    if (step < 0 || step >= static_cast<int>(inst->route.size())) {
        std::fprintf(stderr, "step %d out of range [0, %zu)\n", step, inst->route.size());
        return 1;
    }

    SubGoalPlan plan;
    if (!plan_path.empty()) {
        plan = parse_plan(read_file(plan_path));
    } else {
        SubGoal g;
        g.index = 1;
        g.description = "Follow the instruction to the destination.";
        g.action = SubGoalAction::MoveForward;
        plan.sub_goals.push_back(g);
    }
    const auto grounded =
        ground_landmarks(assign_landmark_letters(plan.landmarks), *inst->graph, tau);
    PlanningState state = make_planning_state(plan, grounded);

    // oracle trajectory prefix up to the requested step
    std::vector<NodeId> trajectory(inst->route.begin(), inst->route.begin() + step + 1);
    const Heading heading =
        step == 0 ? inst->initial_heading
                  : bearing(inst->graph->node(inst->route[step - 1]).position,
                            inst->graph->node(inst->route[step]).position);

    VisibleArea area = construct_visible_area(*inst->graph, inst->route[step], heading, u);
    annotate_pois(*inst->graph, area, grounded);
    const std::string text =
        encode(representation_from_string(repr),
               EncodeInput{area, trajectory, grounded, state, *inst->graph, inst->instance_id});
    std::fputs(text.c_str(), stdout);
    std::fputc('\n', stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"groke: graph-based navigation-instruction evaluation"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto* run = app.add_subcommand("run", "run a policy over a dataset and score it");
    run->add_option("--dataset", cfg.dataset, "dataset file (see docs/DATASET.md)")->required();
    run->add_option("--policy", cfg.policy,
                    "oracle | random | heuristic | sampling | llm | replay");
    run->add_option("--repr", cfg.repr,
                    "textual | json | optimized-json | graphviz | grid");
    run->add_option("--u", cfg.u, "visibility units (intersections)");
    run->add_option("--max-steps", cfg.max_steps, "episode step cap");
    run->add_option("--max-retries", cfg.max_retries, "per-sub-goal retry cap");
    run->add_option("--tau", cfg.tau, "landmark grounding threshold (0-100)");
    run->add_option("--threshold", cfg.threshold, "success radius in meters");
    run->add_option("--seed", cfg.seed, "base seed for stochastic policies");
    run->add_option("--parallelism", cfg.parallelism, "concurrent episodes");
    run->add_option("--out", cfg.out_dir, "output directory")->required();
    run->add_option("--endpoint", cfg.endpoint, "chat endpoint URL (llm)");
    run->add_option("--model", cfg.model, "model identifier (llm)");
    run->add_option("--reasoning", cfg.reasoning, "reasoning-effort passthrough (llm)");
    run->add_option("--prompts", cfg.prompts_dir, "directory with prompt templates");
    run->add_option("--transcript", cfg.transcript,
                    "transcript file: written by llm runs, read by replay runs");
    run->add_option("--plans", cfg.plans, "fixture plans JSON keyed by instance id");
    run->add_option("--tags", cfg.tags, "difficulty tags JSON keyed by instance id");
    run->add_option("--limit", cfg.limit, "run only the first N instances");
    run->add_option("--rate-limit", cfg.rate_limit, "requests per second (llm, 0 = off)");
    run->add_option("--max-in-flight", cfg.max_in_flight, "concurrent requests (llm)");

    std::string s_dataset, s_results, s_ratings, s_tags;
    double s_threshold = kSuccessRadiusM;
    int s_permutations = 0;
    auto* sc = app.add_subcommand("score", "re-score stored results");
    sc->add_option("--dataset", s_dataset, "dataset file")->required();
    sc->add_option("--results", s_results, "results.jsonl from a run")->required();
    sc->add_option("--ratings", s_ratings, "per-instance ratings for correlation");
    sc->add_option("--tags", s_tags, "difficulty tags JSON");
    sc->add_option("--threshold", s_threshold, "success radius in meters");
    sc->add_option("--permutations", s_permutations,
                   "estimate p-values by permutation instead of the t approximation");

    std::string e_dataset, e_instance, e_repr = "optimized-json", e_plan;
    int e_step = 0, e_u = 1;
    double e_tau = kDefaultGroundingTau;
    auto* en = app.add_subcommand("encode", "print the prompt for one step");
    en->add_option("--dataset", e_dataset, "dataset file")->required();
    en->add_option("--instance", e_instance, "instance id")->required();
    en->add_option("--step", e_step, "step index along the ground-truth route");
    en->add_option("--repr", e_repr, "representation kind");
    en->add_option("--u", e_u, "visibility units");
    en->add_option("--tau", e_tau, "landmark grounding threshold");
    en->add_option("--plan", e_plan, "extraction-response file providing the plan");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(cfg);
        if (sc->parsed()) {
            return cmd_score(s_dataset, s_results, s_ratings, s_tags, s_threshold,
                             s_permutations);
        }
        if (en->parsed()) {
            return cmd_encode(e_dataset, e_instance, e_step, e_repr, e_u, e_tau, e_plan);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
