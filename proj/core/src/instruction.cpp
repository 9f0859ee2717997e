#include "groke/instruction.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"

namespace groke {

namespace {

using nlohmann::json;

std::string normalize_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

// Indel distance (insertions/deletions only, no substitutions), two-row DP.
std::size_t indel_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), curr(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                curr[j] = prev[j - 1];
            } else {
                curr[j] = 1 + std::min(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

double normalized_indel_similarity(const std::string& a, const std::string& b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 1.0;
    return 1.0 - static_cast<double>(indel_distance(a, b)) / static_cast<double>(total);
}

}  // namespace

const char* to_string(SubGoalAction a) {
    switch (a) {
        case SubGoalAction::MoveForward: return "MOVE_FORWARD";
        case SubGoalAction::TurnLeft: return "TURN_LEFT";
        case SubGoalAction::TurnRight: return "TURN_RIGHT";
    }
    return "MOVE_FORWARD";
}

const char* to_string(SubGoalStatus s) {
    switch (s) {
        case SubGoalStatus::Todo: return "TODO";
        case SubGoalStatus::InProgress: return "IN_PROGRESS";
        case SubGoalStatus::Completed: return "COMPLETED";
    }
    return "TODO";
}

void PlanningState::advance(SubGoalStatus decision_status) {
    if (finished()) return;
    SubGoal& cur = sub_goals[current_index - 1];
    if (decision_status == SubGoalStatus::Completed) {
        cur.status = SubGoalStatus::Completed;
        ++current_index;
        if (!finished()) {
            SubGoal& next = sub_goals[current_index - 1];
            next.status = SubGoalStatus::InProgress;
            next.iteration = 1;
        }
    } else {
        cur.iteration += 1;
    }
}

PlanningState make_planning_state(const SubGoalPlan& plan, std::vector<GroundedLandmark> grounded) {
    PlanningState state;
    state.sub_goals = plan.sub_goals;
    state.landmarks = std::move(grounded);
    state.current_index = 1;
    for (std::size_t i = 0; i < state.sub_goals.size(); ++i) {
        state.sub_goals[i].index = static_cast<int>(i) + 1;
        state.sub_goals[i].status = i == 0 ? SubGoalStatus::InProgress : SubGoalStatus::Todo;
        state.sub_goals[i].iteration = 1;
    }
    return state;
}

SubGoalPlan parse_plan(const std::string& extraction_response) {
    // Tolerate a fenced code block around the JSON body.
    std::string body = extraction_response;
    const auto fence = body.find("```");
    if (fence != std::string::npos) {
        auto start = body.find('\n', fence);
        auto end = body.rfind("```");
        if (start != std::string::npos && end != std::string::npos && end > start) {
            body = body.substr(start + 1, end - start - 1);
        }
    }

    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponse(std::string("extraction response is not valid JSON: ") + e.what(),
                                extraction_response);
    }
    if (!doc.is_object() || !doc.contains("sub_goals") || !doc.at("sub_goals").is_array()) {
        throw MalformedResponse("extraction response is missing the 'sub_goals' array",
                                extraction_response);
    }

    SubGoalPlan plan;
    for (const auto& gj : doc.at("sub_goals")) {
        if (!gj.is_object() || !gj.contains("description") || !gj.contains("action")) {
            throw MalformedResponse("sub-goal entries need 'description' and 'action'",
                                    extraction_response);
        }
        SubGoal g;
        g.description = gj.at("description").get<std::string>();
        const std::string verb = gj.at("action").get<std::string>();
        if (verb == "MOVE_FORWARD") {
            g.action = SubGoalAction::MoveForward;
        } else if (verb == "TURN_LEFT") {
            g.action = SubGoalAction::TurnLeft;
        } else if (verb == "TURN_RIGHT") {
            g.action = SubGoalAction::TurnRight;
        } else {
            throw MalformedResponse("unknown sub-goal action verb '" + verb + "'",
                                    extraction_response);
        }
        plan.sub_goals.push_back(std::move(g));
    }
    if (plan.sub_goals.empty()) {
        throw MalformedResponse("plan must contain at least one sub-goal", extraction_response);
    }
    for (std::size_t i = 0; i < plan.sub_goals.size(); ++i) {
        plan.sub_goals[i].index = static_cast<int>(i) + 1;
        plan.sub_goals[i].status = i == 0 ? SubGoalStatus::InProgress : SubGoalStatus::Todo;
        plan.sub_goals[i].iteration = 1;
    }

    if (doc.contains("landmarks")) {
        if (!doc.at("landmarks").is_array()) {
            throw MalformedResponse("'landmarks' must be an array", extraction_response);
        }
        for (const auto& lj : doc.at("landmarks")) {
            if (!lj.is_object() || !lj.contains("name")) {
                throw MalformedResponse("landmark entries need a 'name'", extraction_response);
            }
            Landmark l;
            l.name = lj.at("name").get<std::string>();
            if (l.name.empty()) {
                throw MalformedResponse("landmark name must be non-empty", extraction_response);
            }
            if (lj.contains("category") && lj.at("category").is_string()) {
                l.category = lj.at("category").get<std::string>();
            }
            plan.landmarks.push_back(std::move(l));
        }
    }
    return plan;
}

double partial_ratio(const std::string& a, const std::string& b) {
    const std::string na = normalize_text(a);
    const std::string nb = normalize_text(b);
    if (na.empty() || nb.empty()) {
        throw std::invalid_argument("partial_ratio requires non-empty inputs after normalization");
    }
    const std::string& shorter = na.size() <= nb.size() ? na : nb;
    const std::string& longer = na.size() <= nb.size() ? nb : na;

    double best = 0.0;
    for (std::size_t start = 0; start + shorter.size() <= longer.size(); ++start) {
        const std::string window = longer.substr(start, shorter.size());
        best = std::max(best, normalized_indel_similarity(shorter, window));
        if (best == 1.0) break;
    }
    return 100.0 * best;
}

std::vector<Landmark> assign_landmark_letters(std::vector<Landmark> landmarks) {
    if (landmarks.size() > 26) {
        throw std::invalid_argument("cannot assign letters to more than 26 landmarks (got " +
                                    std::to_string(landmarks.size()) + ")");
    }
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
        landmarks[i].letter = static_cast<char>('A' + i);
    }
    return landmarks;
}

std::vector<GroundedLandmark> ground_landmarks(const std::vector<Landmark>& landmarks,
                                               const MapGraph& g, double tau) {
    std::vector<Landmark> lettered = landmarks;
    const bool any_letters = std::any_of(landmarks.begin(), landmarks.end(),
                                         [](const Landmark& l) { return l.letter != '\0'; });
    if (!any_letters) {
        lettered = assign_landmark_letters(std::move(lettered));
    }

    std::vector<GroundedLandmark> out;
    out.reserve(lettered.size());
    for (const auto& lm : lettered) {
        GroundedLandmark gl;
        gl.landmark = lm;
        for (const auto& poi : g.pois()) {
            double poi_best = 0.0;
            for (const auto& [key, value] : poi.tags) {
                if (value.empty()) continue;
                if (normalize_text(value).empty() || normalize_text(lm.name).empty()) continue;
                poi_best = std::max(poi_best, partial_ratio(lm.name, value));
            }
            gl.best_score = std::max(gl.best_score, poi_best);
            if (poi_best > tau) {
                gl.pois.push_back(poi.id);
            }
        }
        std::sort(gl.pois.begin(), gl.pois.end());
        out.push_back(std::move(gl));
    }
    return out;
}

}  // namespace groke
