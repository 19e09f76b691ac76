#pragma once

#include "wabc/point_cloud.hpp"
#include "wabc/rng.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace wabc {

enum class ProblemKind { schaffer, viennet2, med };

struct ProblemSpec {
    ProblemKind kind = ProblemKind::med;
    int objectives = 3;
    /// Grid resolution per axis for grid-filtered fronts (viennet2).
    int grid_res = 1024;

    /// Accepts "schaffer", "viennet2", "med" (with objectives) and "<M>-med".
    static ProblemSpec parse(const std::string& name, int med_objectives = 3);

    std::string name() const;

    /// Size of the front sample pool used by the benchmark harness
    /// (schaffer 201, 3-med 153, viennet2 8122, 5-med 4845).
    std::size_t default_pool_size() const;

    void validate() const;
};

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Componentwise Pareto dominance for minimization: a <= b everywhere and a < b somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Points not dominated by any other point, in input order. Duplicates are
/// mutually nondominated and all kept.
PointCloud nondominated_filter(const PointCloud& cloud);

/// Pairwise O(n^2) reference for nondominated_filter.
PointCloud nondominated_filter_bruteforce(const PointCloud& cloud);

/// Objectives of Schaffer's problem at decision x.
Vector schaffer_objectives(double x);
/// Objectives of Viennet2 at decision (x1, x2).
Vector viennet2_objectives(double x1, double x2);
/// Objectives of M-MED at decision x in R^M.
Vector med_objectives(const Vector& x);
/// MED exponents p_m = exp(2(m-1)/(M-1) - 1).
Vector med_exponents(int objectives);

/// Front of Schaffer's problem from x ~ U[0, 2].
PointCloud schaffer_front(std::size_t count, Rng& rng);

/// Front of M-MED from decisions drawn uniformly on the convex hull of the unit vectors.
PointCloud med_front(int objectives, std::size_t count, Rng& rng);

/// Nondominated image of a grid_res x grid_res grid over [-4, 4]^2, subsampled
/// to `count` points without replacement (in grid order).
PointCloud viennet2_front(int grid_res, std::size_t count, Rng& rng);

/// `count` rows drawn uniformly without replacement, kept in input order.
PointCloud subsample(const PointCloud& cloud, std::size_t count, Rng& rng);

/// Complete nondominated image of the Viennet2 grid.
PointCloud viennet2_grid_front(int grid_res);

PointCloud generate_front(const ProblemSpec& spec, std::size_t count, Rng& rng);

/// Adds i.i.d. N(0, sigma^2) noise per coordinate; sigma = 0 returns the input unchanged.
PointCloud add_noise(const PointCloud& cloud, double sigma, Rng& rng);
PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& spec);

}  // namespace wabc
