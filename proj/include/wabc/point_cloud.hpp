#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace wabc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Malformed input data (files, point clouds with inconsistent shapes).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered list of n points in R^M, stored row-major so that the flat buffer
/// is the aligned vector [x_1 : x_2 : ... : x_n].
class PointCloud {
public:
    PointCloud() = default;
    PointCloud(std::size_t count, std::size_t dim);
    explicit PointCloud(RowMatrix points);

    static PointCloud from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
    bool empty() const noexcept { return points_.rows() == 0; }

    auto row(std::size_t i) { return points_.row(static_cast<Eigen::Index>(i)); }
    auto row(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }
    std::span<const double> point(std::size_t i) const
    {
        return {points_.data() + i * dim(), dim()};
    }

    const RowMatrix& matrix() const noexcept { return points_; }
    RowMatrix& matrix() noexcept { return points_; }

    /// The aligned vector x_{1:n} (length n*M).
    std::span<const double> aligned() const noexcept
    {
        return {points_.data(), static_cast<std::size_t>(points_.size())};
    }

    /// Cloud whose i-th point is this cloud's perm[i]-th point.
    PointCloud permuted(std::span<const std::size_t> perm) const;

    /// Subset of rows in the given order.
    PointCloud select(std::span<const std::size_t> rows) const;

    friend bool operator==(const PointCloud& a, const PointCloud& b)
    {
        return a.points_.rows() == b.points_.rows() && a.points_.cols() == b.points_.cols() &&
               a.points_ == b.points_;
    }

private:
    RowMatrix points_;
};

/// Throws std::invalid_argument unless both clouds have the same size and dimension.
void require_same_shape(const PointCloud& x, const PointCloud& y, const char* what);

}  // namespace wabc
