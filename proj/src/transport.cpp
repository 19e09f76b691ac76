#include "wabc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wabc {

Assignment solve_assignment(const Matrix& cost)
{
    if (cost.rows() != cost.cols()) {
        throw std::invalid_argument("solve_assignment: cost matrix must be square");
    }
    const auto n = static_cast<std::size_t>(cost.rows());
    Assignment out;
    if (n == 0) {
        return out;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based: column 0 is a virtual source used while augmenting row i.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        match_col[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match_col[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                                   u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (j1 == 0) {
                throw std::invalid_argument("solve_assignment: non-finite cost matrix");
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    out.perm.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        out.perm[match_col[j] - 1] = j - 1;
    }
    // Recompute from the matrix rather than trusting the accumulated duals;
    // sorted so the total does not depend on row order.
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        terms[i] = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.perm[i]));
    }
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) {
        total += t;
    }
    out.cost = total;
    return out;
}

Matrix squared_distance_matrix(const PointCloud& x, const PointCloud& y)
{
    if (x.dim() != y.dim()) {
        throw std::invalid_argument("squared_distance_matrix: dimension mismatch");
    }
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto m = static_cast<Eigen::Index>(y.size());
    const auto dim = x.dim();
    Matrix c(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto xi = x.point(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto yj = y.point(static_cast<std::size_t>(j));
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = xi[k] - yj[k];
                s += d * d;
            }
            c(i, j) = s;
        }
    }
    return c;
}

double euclidean_aligned(const PointCloud& x, const PointCloud& y)
{
    require_same_shape(x, y, "euclidean_aligned");
    const auto a = x.aligned();
    const auto b = y.aligned();
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

Assignment optimal_matching(const PointCloud& x, const PointCloud& y)
{
    require_same_shape(x, y, "optimal_matching");
    if (x.empty()) {
        throw std::invalid_argument("optimal_matching: empty clouds");
    }
    auto a = solve_assignment(squared_distance_matrix(x, y));
    a.cost /= static_cast<double>(x.size());
    return a;
}

double wasserstein2(const PointCloud& x, const PointCloud& y)
{
    require_same_shape(x, y, "wasserstein2");
    // Canonical argument order so that d(x, y) and d(y, x) are bitwise equal.
    const auto a = x.aligned();
    const auto b = y.aligned();
    const bool swap = std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
    return std::sqrt(std::max(0.0, (swap ? optimal_matching(y, x) : optimal_matching(x, y)).cost));
}

double wasserstein2_bruteforce(const PointCloud& x, const PointCloud& y)
{
    require_same_shape(x, y, "wasserstein2_bruteforce");
    const auto n = x.size();
    if (n == 0) {
        throw std::invalid_argument("wasserstein2_bruteforce: empty clouds");
    }
    if (n > bruteforce_max_points) {
        throw std::invalid_argument("wasserstein2_bruteforce: at most 8 points supported");
    }
    const Matrix c = squared_distance_matrix(x, y);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
        }
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(n));
}

bool in_wasserstein_ball(const PointCloud& center, const PointCloud& y, double delta)
{
    if (!(delta >= 0.0)) {
        throw std::invalid_argument("in_wasserstein_ball: delta must be non-negative");
    }
    return wasserstein2(center, y) <= delta;
}

double separation_threshold(const PointCloud& x)
{
    const auto n = x.size();
    if (n < 2) {
        throw std::invalid_argument("separation_threshold: needs at least 2 points");
    }
    if (n > bruteforce_max_points) {
        throw std::invalid_argument("separation_threshold: at most 8 points supported");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (x.row(i) == x.row(j)) {
                throw std::invalid_argument("separation_threshold: duplicate points");
            }
        }
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    // identity is the first permutation in lexicographic order; skip it
    while (std::next_permutation(perm.begin(), perm.end())) {
        best = std::min(best, euclidean_aligned(x, x.permuted(perm)));
    }
    return best / (3.0 * std::sqrt(static_cast<double>(n)));
}

}  // namespace wabc
