#include <algorithm>
#include <random>

#include "doctest.h"
#include "support/approx.hpp"
#include "groke/instruction.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace groke;
using namespace groke::testing;

TEST_CASE("partial_ratio basics") {
    CHECK(partial_ratio("starbucks", "starbucks coffee") == 100.0);
    CHECK(partial_ratio("bank", "bank") == 100.0);
    // frozen from the window-scan oracle: the 10-char window "duane read"
    // of "duane reade" matches exactly
    CHECK(partial_ratio("duane read", "Duane Reade") == 100.0);
    CHECK(partial_ratio("duane read", "Duane Reade") ==
          oracle_partial_ratio("duane read", "Duane Reade"));
    CHECK_THROWS_AS(partial_ratio("", "x"), std::invalid_argument);
    CHECK_THROWS_AS(partial_ratio("   ", "x"), std::invalid_argument);
}

TEST_CASE("partial_ratio equals the window-scan oracle on random strings") {
    std::mt19937_64 rng(31);
    const std::string alphabet = "abcdef gh";
    auto random_string = [&](std::size_t max_len) {
        std::uniform_int_distribution<std::size_t> len(1, max_len);
        std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
        std::string s;
        const std::size_t n = len(rng);
        for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
        return s;
    };
    int compared = 0;
    for (int i = 0; i < 300; ++i) {
        const std::string a = random_string(12);
        const std::string b = random_string(18);
        try {
            const double got = partial_ratio(a, b);
            CHECK(approx_eq(got, oracle_partial_ratio(a, b), 1e-12));
            CHECK(got == partial_ratio(b, a));  // symmetric
            ++compared;
        } catch (const std::invalid_argument&) {
            // all-space string; skip
        }
    }
    CHECK(compared > 200);
    CHECK(partial_ratio("abcd", "abcd") == 100.0);
}

TEST_CASE("ground_landmarks") {
    auto g = make_city({.blocks = 3, .waypoints_per_edge = 2, .pois = 8, .seed = 17});

    SUBCASE("exact tag match grounds with score 100") {
        auto grounded = ground_landmarks({{"Starbucks", "amenity", 0}}, *g, 80.0);
        REQUIRE(grounded.size() == 1);
        CHECK(!grounded[0].pois.empty());
        CHECK(grounded[0].best_score == 100.0);
        CHECK(grounded[0].landmark.letter == 'A');
    }

    SUBCASE("unmatched landmark grounds to the empty set") {
        auto grounded = ground_landmarks({{"cathedral", "building", 0}}, *g, 80.0);
        REQUIRE(grounded.size() == 1);
        CHECK(grounded[0].pois.empty());
    }

    SUBCASE("matches the all-pairs brute-force oracle") {
        std::vector<Landmark> lms = {{"starbucks", "", 0},
                                     {"bank", "", 0},
                                     {"garden", "", 0},
                                     {"duane read", "", 0},
                                     {"nothing here", "", 0}};
        const double tau = 80.0;
        auto grounded = ground_landmarks(lms, *g, tau);
        REQUIRE(grounded.size() == lms.size());
        for (std::size_t i = 0; i < lms.size(); ++i) {
            std::vector<std::string> want;
            for (const auto& poi : g->pois()) {
                double best = 0.0;
                for (const auto& [k, v] : poi.tags) {
                    best = std::max(best, oracle_partial_ratio(lms[i].name, v));
                }
                if (best > tau) want.push_back(poi.id);
            }
            std::sort(want.begin(), want.end());
            CHECK(grounded[i].pois == want);
        }
    }

    SUBCASE("raising tau never grows a poi set") {
        std::vector<Landmark> lms = {{"starbucks", "", 0}, {"light", "", 0}, {"bank", "", 0}};
        auto loose = ground_landmarks(lms, *g, 60.0);
        auto tight = ground_landmarks(lms, *g, 90.0);
        for (std::size_t i = 0; i < lms.size(); ++i) {
            CHECK(tight[i].pois.size() <= loose[i].pois.size());
            for (const auto& id : tight[i].pois) {
                CHECK(std::find(loose[i].pois.begin(), loose[i].pois.end(), id) !=
                      loose[i].pois.end());
            }
        }
    }
}

TEST_CASE("assign_landmark_letters") {
    auto lettered = assign_landmark_letters({{"bank", "", 0}});
    REQUIRE(lettered.size() == 1);
    CHECK(lettered[0].letter == 'A');

    lettered = assign_landmark_letters({{"light", "", 0}, {"bank", "", 0}, {"garden", "", 0}});
    CHECK(lettered[0].letter == 'A');
    CHECK(lettered[1].letter == 'B');
    CHECK(lettered[2].letter == 'C');

    std::vector<Landmark> many(27, {"x", "", 0});
    CHECK_THROWS_AS(assign_landmark_letters(many), std::invalid_argument);
}

TEST_CASE("parse_plan happy path") {
    const char* response = R"({
        "landmarks": [{"name": "light", "category": "traffic control"}],
        "sub_goals": [
            {"description": "Go straight to the light", "action": "MOVE_FORWARD", "status": "TODO"},
            {"description": "Turn left", "action": "TURN_LEFT", "status": "TODO"},
            {"description": "Stop at the corner", "action": "MOVE_FORWARD", "status": "TODO"}
        ]
    })";
    const SubGoalPlan plan = parse_plan(response);
    REQUIRE(plan.sub_goals.size() == 3);
    CHECK(plan.sub_goals[0].status == SubGoalStatus::InProgress);
    CHECK(plan.sub_goals[1].status == SubGoalStatus::Todo);
    CHECK(plan.sub_goals[2].status == SubGoalStatus::Todo);
    CHECK(plan.sub_goals[1].action == SubGoalAction::TurnLeft);
    CHECK(plan.sub_goals[2].index == 3);
    REQUIRE(plan.landmarks.size() == 1);
    CHECK(plan.landmarks[0].category == "traffic control");
}

TEST_CASE("parse_plan tolerates fenced output") {
    const std::string fenced =
        "```json\n{\"sub_goals\": [{\"description\": \"go\", \"action\": \"MOVE_FORWARD\"}]}\n```";
    CHECK(parse_plan(fenced).sub_goals.size() == 1);
}

TEST_CASE("parse_plan error paths") {
    CHECK_THROWS_AS(parse_plan("{\"landmarks\": []}"), MalformedResponse);
    CHECK_THROWS_AS(parse_plan("{\"sub_goals\": []}"), MalformedResponse);
    CHECK_THROWS_AS(parse_plan("garbage"), MalformedResponse);

    try {
        parse_plan(R"({"sub_goals": [{"description": "x", "action": "FLY_UP"}]})");
        FAIL("expected MalformedResponse");
    } catch (const MalformedResponse& e) {
        CHECK(std::string(e.what()).find("FLY_UP") != std::string::npos);
        CHECK(!e.raw_response.empty());
    }
}

TEST_CASE("planning state transitions") {
    SubGoalPlan plan;
    plan.sub_goals.push_back({1, "first", SubGoalAction::MoveForward, SubGoalStatus::Todo, 1});
    plan.sub_goals.push_back({2, "second", SubGoalAction::TurnLeft, SubGoalStatus::Todo, 1});
    PlanningState state = make_planning_state(plan);

    CHECK(state.current().index == 1);
    CHECK(state.current().status == SubGoalStatus::InProgress);

    state.advance(SubGoalStatus::InProgress);
    CHECK(state.current().iteration == 2);
    CHECK(state.current_index == 1);

    state.advance(SubGoalStatus::Completed);
    CHECK(state.sub_goals[0].status == SubGoalStatus::Completed);
    CHECK(state.current_index == 2);
    CHECK(state.current().status == SubGoalStatus::InProgress);
    CHECK(state.current().iteration == 1);

    state.advance(SubGoalStatus::Completed);
    CHECK(state.finished());
}

TEST_CASE("status walk is monotone and exactly one sub-goal is active") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const int goals = 1 + static_cast<int>(rng() % 5);
        SubGoalPlan plan;
        for (int i = 0; i < goals; ++i) {
            plan.sub_goals.push_back(
                {i + 1, "g" + std::to_string(i), SubGoalAction::MoveForward, SubGoalStatus::Todo, 1});
        }
        PlanningState state = make_planning_state(plan);
        std::vector<int> last_stage(goals, 0);  // 0=todo 1=in-progress 2=completed

        while (!state.finished()) {
            int active = 0;
            for (int i = 0; i < goals; ++i) {
                const auto st = state.sub_goals[i].status;
                const int stage = st == SubGoalStatus::Todo ? 0
                                  : st == SubGoalStatus::InProgress ? 1
                                                                    : 2;
                CHECK(stage >= last_stage[i]);  // never moves backwards
                last_stage[i] = stage;
                if (stage == 1) ++active;
            }
            CHECK(active == 1);
            state.advance(rng() % 3 == 0 ? SubGoalStatus::Completed : SubGoalStatus::InProgress);
        }
        for (int i = 0; i < goals; ++i) CHECK(state.sub_goals[i].status == SubGoalStatus::Completed);
    }
}
