#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "groke/mapgraph.hpp"

namespace groke {

enum class SubGoalAction { MoveForward, TurnLeft, TurnRight };
enum class SubGoalStatus { Todo, InProgress, Completed };

const char* to_string(SubGoalAction a);
const char* to_string(SubGoalStatus s);

struct SubGoal {
    int index = 1;  // 1-based
    std::string description;
    SubGoalAction action = SubGoalAction::MoveForward;
    SubGoalStatus status = SubGoalStatus::Todo;
    int iteration = 1;  // steps spent while InProgress
};

struct Landmark {
    std::string name;
    std::string category;
    char letter = '\0';  // 'A'..'Z' once assigned
};

struct GroundedLandmark {
    Landmark landmark;
    std::vector<std::string> pois;  // matching POI ids, sorted
    double best_score = 0.0;        // highest similarity seen, in [0, 100]
};

/// Parsed output of the extraction prompt: the ordered sub-goals and the
/// landmarks they reference.
struct SubGoalPlan {
    std::vector<SubGoal> sub_goals;
    std::vector<Landmark> landmarks;
};

/// Episode-local plan progress. Exactly one sub-goal is InProgress until
/// the plan finishes.
struct PlanningState {
    std::vector<SubGoal> sub_goals;
    std::vector<GroundedLandmark> landmarks;
    int current_index = 1;  // 1-based; > size() once finished

    bool finished() const { return current_index > static_cast<int>(sub_goals.size()); }
    const SubGoal& current() const { return sub_goals.at(current_index - 1); }

    /// Applies a decision status: Completed closes the current sub-goal and
    /// opens the next one with a fresh iteration counter; InProgress bumps
    /// the iteration counter.
    void advance(SubGoalStatus decision_status);
};

/// Builds the initial state from a parsed plan: first sub-goal InProgress,
/// the rest Todo.
PlanningState make_planning_state(const SubGoalPlan& plan,
                                  std::vector<GroundedLandmark> grounded = {});

/// Raised when an extraction response cannot be parsed; carries the raw
/// response so the caller can retry.
class MalformedResponse : public std::runtime_error {
public:
    MalformedResponse(const std::string& what, std::string raw)
        : std::runtime_error(what), raw_response(std::move(raw)) {}
    std::string raw_response;
};

/// Parses the strict-JSON extraction response into a plan. Statuses are
/// normalized at parse time: first sub-goal InProgress, the rest Todo.
SubGoalPlan parse_plan(const std::string& extraction_response);

/// Sliding-window fuzzy similarity in [0, 100]: the best normalized indel
/// similarity between the shorter string and any window of its length in
/// the longer one, after casefolding and whitespace collapsing.
/// Throws std::invalid_argument when either side normalizes to empty.
double partial_ratio(const std::string& a, const std::string& b);

/// Assigns letters A, B, C, ... in list order. Throws when more than 26
/// landmarks are given.
std::vector<Landmark> assign_landmark_letters(std::vector<Landmark> landmarks);

inline constexpr double kDefaultGroundingTau = 80.0;

/// Grounds each landmark onto the POIs whose best tag-value similarity
/// exceeds tau. Letters are assigned in list order when not already set.
/// An empty POI set is a valid outcome.
std::vector<GroundedLandmark> ground_landmarks(const std::vector<Landmark>& landmarks,
                                               const MapGraph& g,
                                               double tau = kDefaultGroundingTau);

}  // namespace groke
