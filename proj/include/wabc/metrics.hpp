#pragma once

#include "wabc/bezier.hpp"
#include "wabc/point_cloud.hpp"
#include "wabc/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wabc {

/// Generational distance: mean over x in X of the distance to the nearest y in Y.
double gd(const PointCloud& X, const PointCloud& Y, Exec exec = Exec::parallel);

/// Inverted generational distance: mean over y in Y of the distance to the nearest x in X.
double igd(const PointCloud& X, const PointCloud& Y, Exec exec = Exec::parallel);

/// For each point of `from`, Euclidean distance to its nearest neighbour in `to`.
std::vector<double> nearest_distances(const PointCloud& from, const PointCloud& to, Exec exec = Exec::parallel);

/// `count` uniform-simplex parameters pushed through the model.
PointCloud surface_sample_for_metrics(const BezierModel& model, std::size_t count, Rng& rng);

inline constexpr std::size_t default_metric_samples = 1000;

struct RankSumResult {
    double statistic = 0.0;  ///< z-score of the Mann-Whitney U of `a`
    double p_value = 1.0;
};

/// Two-sided Wilcoxon rank-sum test, normal approximation with tie correction.
RankSumResult ranksum_test(std::span<const double> a, std::span<const double> b);

/// One benchmark measurement.
struct MetricsRow {
    std::string problem;
    int objectives = 0;
    std::size_t n = 0;
    double sigma = 0.0;
    std::string method;
    int trial = 0;
    std::uint64_t seed = 0;
    double gd = 0.0;
    double igd = 0.0;
    double seconds = 0.0;

    static std::string csv_header();
    std::string to_csv() const;
};

}  // namespace wabc
