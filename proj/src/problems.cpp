#include "wabc/problems.hpp"

#include "wabc/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace wabc {

ProblemSpec ProblemSpec::parse(const std::string& name, int med_objectives)
{
    ProblemSpec spec;
    if (name == "schaffer") {
        spec.kind = ProblemKind::schaffer;
        spec.objectives = 2;
    } else if (name == "viennet2") {
        spec.kind = ProblemKind::viennet2;
        spec.objectives = 3;
    } else if (name == "med") {
        spec.kind = ProblemKind::med;
        spec.objectives = med_objectives;
    } else if (name.size() > 4 && name.substr(name.size() - 4) == "-med") {
        spec.kind = ProblemKind::med;
        try {
            std::size_t used = 0;
            spec.objectives = std::stoi(name.substr(0, name.size() - 4), &used);
            if (used != name.size() - 4) {
                throw std::invalid_argument(name);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("unknown problem: " + name);
        }
    } else {
        throw std::invalid_argument("unknown problem: " + name);
    }
    spec.validate();
    return spec;
}

std::string ProblemSpec::name() const
{
    switch (kind) {
    case ProblemKind::schaffer:
        return "schaffer";
    case ProblemKind::viennet2:
        return "viennet2";
    case ProblemKind::med:
        return std::to_string(objectives) + "-med";
    }
    return "unknown";
}

std::size_t ProblemSpec::default_pool_size() const
{
    switch (kind) {
    case ProblemKind::schaffer:
        return 201;
    case ProblemKind::viennet2:
        return 8122;
    case ProblemKind::med:
        // simplex-grid size C(M + 15, M - 1): 153 for 3-MED, 4845 for 5-MED
        return binomial(objectives + 15, objectives - 1);
    }
    return 0;
}

void ProblemSpec::validate() const
{
    if (kind == ProblemKind::schaffer && objectives != 2) {
        throw std::invalid_argument("schaffer has exactly 2 objectives");
    }
    if (kind == ProblemKind::viennet2 && objectives != 3) {
        throw std::invalid_argument("viennet2 has exactly 3 objectives");
    }
    if (kind == ProblemKind::med && objectives < 2) {
        throw std::invalid_argument("med needs at least 2 objectives");
    }
    if (kind == ProblemKind::viennet2 && grid_res < 50) {
        throw std::invalid_argument("viennet2 grid resolution must be at least 50");
    }
}

bool dominates(std::span<const double> a, std::span<const double> b)
{
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) {
            return false;
        }
        if (a[k] < b[k]) {
            strict = true;
        }
    }
    return strict;
}

PointCloud nondominated_filter_bruteforce(const PointCloud& cloud)
{
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < cloud.size() && !dominated; ++j) {
            dominated = j != i && dominates(cloud.point(j), cloud.point(i));
        }
        if (!dominated) {
            keep.push_back(i);
        }
    }
    return cloud.select(keep);
}

PointCloud nondominated_filter(const PointCloud& cloud)
{
    // In lexicographic order only earlier points can dominate later ones, and a
    // dominated point is always dominated by some nondominated one, so each
    // point is tested against the front built so far.
    std::vector<std::size_t> order(cloud.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto pa = cloud.point(a);
        const auto pb = cloud.point(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    });
    std::vector<std::size_t> front;
    std::vector<char> keep(cloud.size(), 0);
    for (auto i : order) {
        const auto p = cloud.point(i);
        bool dominated = false;
        for (auto f : front) {
            if (dominates(cloud.point(f), p)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) {
            front.push_back(i);
            keep[i] = 1;
        }
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (keep[i]) {
            rows.push_back(i);
        }
    }
    return cloud.select(rows);
}

Vector schaffer_objectives(double x)
{
    Vector f(2);
    f << x * x, (x - 2.0) * (x - 2.0);
    return f;
}

Vector viennet2_objectives(double x1, double x2)
{
    Vector f(3);
    f(0) = (x1 - 2.0) * (x1 - 2.0) / 2.0 + (x2 + 1.0) * (x2 + 1.0) / 13.0 + 3.0;
    f(1) = (x1 + x2 - 3.0) * (x1 + x2 - 3.0) / 36.0 + (-x1 + x2 + 2.0) * (-x1 + x2 + 2.0) / 8.0 - 17.0;
    f(2) = (x1 + 2.0 * x2 - 1.0) * (x1 + 2.0 * x2 - 1.0) / 175.0 + (2.0 * x2 - x1) * (2.0 * x2 - x1) / 17.0 - 13.0;
    return f;
}

Vector med_exponents(int objectives)
{
    if (objectives < 2) {
        throw std::invalid_argument("med_exponents: need at least 2 objectives");
    }
    Vector p(objectives);
    for (int m = 0; m < objectives; ++m) {
        p(m) = std::exp(2.0 * m / (objectives - 1) - 1.0);
    }
    return p;
}

Vector med_objectives(const Vector& x)
{
    const auto dim = static_cast<int>(x.size());
    const Vector p = med_exponents(dim);
    Vector f(dim);
    for (int m = 0; m < dim; ++m) {
        Vector diff = x;
        diff(m) -= 1.0;
        f(m) = std::pow(diff.norm() / std::sqrt(2.0), p(m));
    }
    return f;
}

PointCloud schaffer_front(std::size_t count, Rng& rng)
{
    if (count < 1) {
        throw std::invalid_argument("schaffer_front: count must be positive");
    }
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    PointCloud out(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
        out.row(i) = schaffer_objectives(unif(rng)).transpose();
    }
    return out;
}

PointCloud med_front(int objectives, std::size_t count, Rng& rng)
{
    if (objectives < 2) {
        throw std::invalid_argument("med_front: need at least 2 objectives");
    }
    if (count < 1) {
        throw std::invalid_argument("med_front: count must be positive");
    }
    // x = sum_m t_m e_m is just t itself
    const auto params = sample_uniform_simplex(objectives, count, rng);
    PointCloud out(count, static_cast<std::size_t>(objectives));
    for (std::size_t i = 0; i < count; ++i) {
        out.row(i) = med_objectives(params[i].coords()).transpose();
    }
    const auto filtered = nondominated_filter(out);
    if (filtered.size() != out.size()) {
        throw std::logic_error("med_front: generated points are not mutually nondominated");
    }
    return out;
}

PointCloud viennet2_grid_front(int grid_res)
{
    if (grid_res < 50) {
        throw std::invalid_argument("viennet2: grid resolution must be at least 50");
    }
    const auto n = static_cast<std::size_t>(grid_res);
    PointCloud grid(n * n, 3);
    for (std::size_t a = 0; a < n; ++a) {
        const double x1 = -4.0 + 8.0 * static_cast<double>(a) / static_cast<double>(n - 1);
        for (std::size_t b = 0; b < n; ++b) {
            const double x2 = -4.0 + 8.0 * static_cast<double>(b) / static_cast<double>(n - 1);
            grid.row(a * n + b) = viennet2_objectives(x1, x2).transpose();
        }
    }
    return nondominated_filter(grid);
}

PointCloud subsample(const PointCloud& cloud, std::size_t count, Rng& rng)
{
    if (count > cloud.size()) {
        throw std::invalid_argument("subsample: requested " + std::to_string(count) + " points but only " +
                                    std::to_string(cloud.size()) + " are available");
    }
    std::vector<std::size_t> all(cloud.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    picked.reserve(count);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), count, rng);
    return cloud.select(picked);
}

PointCloud viennet2_front(int grid_res, std::size_t count, Rng& rng)
{
    return subsample(viennet2_grid_front(grid_res), count, rng);
}

PointCloud generate_front(const ProblemSpec& spec, std::size_t count, Rng& rng)
{
    spec.validate();
    switch (spec.kind) {
    case ProblemKind::schaffer:
        return schaffer_front(count, rng);
    case ProblemKind::viennet2:
        return viennet2_front(spec.grid_res, count, rng);
    case ProblemKind::med:
        return med_front(spec.objectives, count, rng);
    }
    throw std::logic_error("generate_front: unknown problem");
}

PointCloud add_noise(const PointCloud& cloud, double sigma, Rng& rng)
{
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("add_noise: sigma must be non-negative");
    }
    if (sigma == 0.0) {
        return cloud;
    }
    std::normal_distribution<double> normal(0.0, sigma);
    PointCloud out = cloud;
    auto& m = out.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) += normal(rng);
        }
    }
    return out;
}

PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& spec)
{
    Rng rng(spec.seed);
    return add_noise(cloud, spec.sigma, rng);
}

}  // namespace wabc
