#pragma once

#include "wabc/point_cloud.hpp"

#include <cstddef>
#include <vector>

namespace wabc {

/// Permutation sigma (row i matched to column perm[i]) and the mean squared
/// distance (1/n) sum_i |x_i - y_{sigma(i)}|^2 it achieves.
struct Assignment {
    std::vector<std::size_t> perm;
    double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix, O(n^3) shortest
/// augmenting paths with dual potentials. Returns the permutation and the
/// *total* cost of the matching.
Assignment solve_assignment(const Matrix& cost);

/// n x n matrix of squared Euclidean distances |x_i - y_j|^2.
Matrix squared_distance_matrix(const PointCloud& x, const PointCloud& y);

/// Euclidean distance between the aligned vectors x_{1:n} and y_{1:n}.
double euclidean_aligned(const PointCloud& x, const PointCloud& y);

/// Optimal matching between two equal-size clouds; `cost` is the mean squared distance.
Assignment optimal_matching(const PointCloud& x, const PointCloud& y);

/// 2-Wasserstein distance between equal-size uniform empirical measures.
double wasserstein2(const PointCloud& x, const PointCloud& y);

/// Same quantity by enumerating all n! permutations. Test oracle, n <= 8.
double wasserstein2_bruteforce(const PointCloud& x, const PointCloud& y);

inline constexpr std::size_t bruteforce_max_points = 8;

bool in_wasserstein_ball(const PointCloud& center, const PointCloud& y, double delta);

/// min over non-identity sigma of d_E(x_{1:n}, x_{sigma(1:n)}) / (3 sqrt(n)).
/// Below this radius, permuted Euclidean balls of radius sqrt(n)*delta around
/// x are pairwise disjoint. Enumerates permutations; requires 2 <= n <= 8 and
/// distinct points.
double separation_threshold(const PointCloud& x);

}  // namespace wabc
