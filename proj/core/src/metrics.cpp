#include "groke/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace groke {

double dtw_cost(const std::vector<GeoPoint>& a, const std::vector<GeoPoint>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf), curr(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        curr[0] = inf;
        for (std::size_t j = 1; j <= m; ++j) {
            const double d = haversine_distance(a[i - 1], b[j - 1]);
            curr[j] = d + std::min({prev[j], curr[j - 1], prev[j - 1]});
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

TrajectoryScore score(const std::vector<NodeId>& agent_traj, const std::vector<NodeId>& gt_traj,
                      const MapGraph& g, double threshold_m) {
    if (agent_traj.empty() || gt_traj.empty()) {
        throw std::invalid_argument("score requires non-empty trajectories");
    }
    auto resolve = [&](const std::vector<NodeId>& ids) {
        std::vector<GeoPoint> pts;
        pts.reserve(ids.size());
        for (const auto& id : ids) pts.push_back(g.node(id).position);
        return pts;
    };
    const std::vector<GeoPoint> agent = resolve(agent_traj);
    const std::vector<GeoPoint> gt = resolve(gt_traj);
    const GeoPoint& goal = gt.back();

    TrajectoryScore s;
    s.ne = haversine_distance(agent.back(), goal);
    s.sr = s.ne <= threshold_m ? 1 : 0;
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& p : agent) {
        closest = std::min(closest, haversine_distance(p, goal));
    }
    s.osr = closest <= threshold_m ? 1 : 0;
    s.ndtw = std::exp(-dtw_cost(agent, gt) /
                      (static_cast<double>(gt.size()) * threshold_m));
    s.sdtw = s.sr * s.ndtw;
    return s;
}

AggregateReport aggregate(const std::vector<TrajectoryScore>& scores,
                          const std::vector<std::string>* tags) {
    if (scores.empty()) {
        throw std::invalid_argument("aggregate requires at least one score");
    }
    if (tags && tags->size() != scores.size()) {
        throw std::invalid_argument("tags must align one-to-one with scores");
    }
    auto fold = [](const std::vector<TrajectoryScore>& list) {
        AggregateReport r;
        r.count = list.size();
        for (const auto& s : list) {
            r.mean_ne += s.ne;
            r.sr_pct += s.sr;
            r.osr_pct += s.osr;
            r.mean_ndtw += s.ndtw;
            r.mean_sdtw += s.sdtw;
        }
        const double n = static_cast<double>(list.size());
        r.mean_ne /= n;
        r.sr_pct = 100.0 * r.sr_pct / n;
        r.osr_pct = 100.0 * r.osr_pct / n;
        r.mean_ndtw /= n;
        r.mean_sdtw /= n;
        return r;
    };
    AggregateReport report = fold(scores);
    if (tags) {
        std::map<std::string, std::vector<TrajectoryScore>> grouped;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            grouped[(*tags)[i]].push_back(scores[i]);
        }
        for (const auto& [tag, list] : grouped) {
            report.by_tag[tag] = fold(list);
        }
    }
    return report;
}

std::vector<double> midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::domain_error("correlation undefined for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

double t_test_p(double r, std::size_t n) {
    if (std::fabs(r) >= 1.0) return 0.0;
    const double df = static_cast<double>(n) - 2.0;
    const double t = r * std::sqrt(df / (1.0 - r * r));
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double permutation_p(const std::vector<double>& x, const std::vector<double>& y, double observed,
                     int permutations, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> shuffled = y;
    long hits = 0;
    for (int k = 0; k < permutations; ++k) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (std::fabs(pearson(x, shuffled)) >= std::fabs(observed)) ++hits;
    }
    return (static_cast<double>(hits) + 1.0) / (static_cast<double>(permutations) + 1.0);
}

}  // namespace

CorrelationResult correlate(const std::vector<double>& metric_values,
                            const std::vector<double>& ratings,
                            std::optional<int> permutations, std::uint64_t permutation_seed) {
    if (metric_values.size() != ratings.size()) {
        throw std::invalid_argument("correlate requires equal-length inputs");
    }
    if (metric_values.size() < 3) {
        throw std::domain_error("correlate requires n >= 3");
    }
    CorrelationResult out;
    out.pearson_r = pearson(metric_values, ratings);

    const std::vector<double> rx = midranks(metric_values);
    const std::vector<double> ry = midranks(ratings);
    out.spearman_rho = pearson(rx, ry);

    if (permutations && *permutations > 0) {
        out.pearson_p = permutation_p(metric_values, ratings, out.pearson_r, *permutations,
                                      permutation_seed);
        out.spearman_p = permutation_p(rx, ry, out.spearman_rho, *permutations,
                                       permutation_seed + 1);
    } else {
        out.pearson_p = t_test_p(out.pearson_r, metric_values.size());
        out.spearman_p = t_test_p(out.spearman_rho, metric_values.size());
    }
    return out;
}

}  // namespace groke
