#include "wabc/metrics.hpp"

#include "wabc/io.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wabc {

namespace {

double nearest(std::span<const double> p, const PointCloud& to)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.size(); ++j) {
        const auto q = to.point(j);
        double s = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double d = p[k] - q[k];
            s += d * d;
        }
        best = std::min(best, s);
    }
    return std::sqrt(best);
}

}  // namespace

std::vector<double> nearest_distances(const PointCloud& from, const PointCloud& to, Exec exec)
{
    if (from.empty() || to.empty()) {
        throw std::invalid_argument("nearest_distances: empty cloud");
    }
    if (from.dim() != to.dim()) {
        throw std::invalid_argument("nearest_distances: dimension mismatch");
    }
    std::vector<double> out(from.size());
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < from.size(); ++i) {
            out[i] = nearest(from.point(i), to);
        }
    } else {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(from.size()); ++i) {
            out[static_cast<std::size_t>(i)] = nearest(from.point(static_cast<std::size_t>(i)), to);
        }
    }
    return out;
}

double gd(const PointCloud& X, const PointCloud& Y, Exec exec)
{
    const auto d = nearest_distances(X, Y, exec);
    // fixed-order sum so both execution paths agree bit for bit
    return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

double igd(const PointCloud& X, const PointCloud& Y, Exec exec)
{
    return gd(Y, X, exec);
}

PointCloud surface_sample_for_metrics(const BezierModel& model, std::size_t count, Rng& rng)
{
    return sample_model(model, count, rng);
}

RankSumResult ranksum_test(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 5 || b.size() < 5) {
        throw std::invalid_argument("ranksum_test: each sample needs at least 5 values");
    }
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n);
    for (double v : a) {
        pooled.emplace_back(v, 0);
    }
    for (double v : b) {
        pooled.emplace_back(v, 1);
    }
    std::sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) {
            ++j;
        }
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second == 0) {
                rank_sum_a += avg_rank;
            }
        }
        i = j;
    }
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    const double u = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
    const double mean = dn1 * dn2 / 2.0;
    const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    RankSumResult out;
    if (var <= 0.0) {
        return out;  // every value tied
    }
    out.statistic = (u - mean) / std::sqrt(var);
    out.p_value = std::clamp(std::erfc(std::abs(out.statistic) / std::sqrt(2.0)), DBL_MIN, 1.0);
    return out;
}

std::string MetricsRow::csv_header()
{
    return "problem,M,n,sigma,method,trial,seed,gd,igd,seconds";
}

std::string MetricsRow::to_csv() const
{
    return problem + "," + std::to_string(objectives) + "," + std::to_string(n) + "," + format_double(sigma) + "," +
           method + "," + std::to_string(trial) + "," + std::to_string(seed) + "," + format_double(gd) + "," +
           format_double(igd) + "," + format_double(seconds);
}

}  // namespace wabc
