#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groke/mapgraph.hpp"

namespace groke {

inline constexpr double kSuccessRadiusM = 25.0;

struct TrajectoryScore {
    double ne = 0.0;    // meters from final position to the goal
    int sr = 0;         // 1 iff ne <= threshold (inclusive)
    int osr = 0;        // 1 iff any trajectory point is within the threshold
    double ndtw = 0.0;  // exp(-DTW / (|gt| * threshold)), in (0, 1]
    double sdtw = 0.0;  // sr * ndtw
};

/// Scores an agent trajectory against the ground truth. DTW uses the
/// classic symmetric step pattern (match/insert/delete, unit weights) over
/// haversine ground distances; the 25 m success radius is inclusive.
TrajectoryScore score(const std::vector<NodeId>& agent_traj, const std::vector<NodeId>& gt_traj,
                      const MapGraph& g, double threshold_m = kSuccessRadiusM);

/// Raw DTW cost between two coordinate sequences, exposed for diagnostics.
double dtw_cost(const std::vector<GeoPoint>& a, const std::vector<GeoPoint>& b);

struct AggregateReport {
    std::size_t count = 0;
    double mean_ne = 0.0;
    double sr_pct = 0.0;
    double osr_pct = 0.0;
    double mean_ndtw = 0.0;
    double mean_sdtw = 0.0;
    std::map<std::string, AggregateReport> by_tag;  // difficulty breakdowns
};

/// Arithmetic means with SR/OSR as percentages; when tags are given (one
/// per score), sub-reports are produced per tag value.
AggregateReport aggregate(const std::vector<TrajectoryScore>& scores,
                          const std::vector<std::string>* tags = nullptr);

struct CorrelationResult {
    double pearson_r = 0.0;
    double pearson_p = 1.0;
    double spearman_rho = 0.0;
    double spearman_p = 1.0;
};

/// Pearson product-moment correlation plus Spearman rank correlation with
/// midranks for ties. Two-sided p-values come from the t statistic
/// t = r * sqrt((n-2) / (1-r^2)) against Student's t with n-2 df; an
/// optional permutation mode estimates them by resampling instead.
/// Throws std::domain_error for n < 3 or constant inputs.
CorrelationResult correlate(const std::vector<double>& metric_values,
                            const std::vector<double>& ratings,
                            std::optional<int> permutations = std::nullopt,
                            std::uint64_t permutation_seed = 0);

/// Midranks (average ranks for ties), 1-based.
std::vector<double> midranks(const std::vector<double>& values);

}  // namespace groke
