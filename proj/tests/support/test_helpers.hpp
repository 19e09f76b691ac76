#pragma once

#include "wabc/point_cloud.hpp"
#include "wabc/rng.hpp"

#include <random>

namespace wabc::testing {

inline PointCloud random_cloud(std::size_t n, std::size_t dim, Rng& rng, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    PointCloud c(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < dim; ++m) {
            c.row(i)(static_cast<Eigen::Index>(m)) = normal(rng);
        }
    }
    return c;
}

inline PointCloud cloud_1d(std::initializer_list<double> xs)
{
    PointCloud c(xs.size(), 1);
    std::size_t i = 0;
    for (double x : xs) {
        c.row(i++)(0) = x;
    }
    return c;
}

}  // namespace wabc::testing
