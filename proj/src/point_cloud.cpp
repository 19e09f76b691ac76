#include "wabc/point_cloud.hpp"

#include <string>

namespace wabc {

PointCloud::PointCloud(std::size_t count, std::size_t dim)
    : points_(RowMatrix::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim)))
{
}

PointCloud::PointCloud(RowMatrix points) : points_(std::move(points)) {}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows)
{
    if (rows.empty()) {
        return {};
    }
    const auto dim = rows.front().size();
    PointCloud out(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) {
            throw DataError("point " + std::to_string(i) + " has dimension " + std::to_string(rows[i].size()) +
                            ", expected " + std::to_string(dim));
        }
        for (std::size_t m = 0; m < dim; ++m) {
            out.points_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = rows[i][m];
        }
    }
    return out;
}

PointCloud PointCloud::permuted(std::span<const std::size_t> perm) const
{
    if (perm.size() != size()) {
        throw std::invalid_argument("permutation length does not match cloud size");
    }
    return select(perm);
}

PointCloud PointCloud::select(std::span<const std::size_t> rows) const
{
    PointCloud out(rows.size(), dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= size()) {
            throw std::out_of_range("row index out of range");
        }
        out.row(i) = row(rows[i]);
    }
    return out;
}

void require_same_shape(const PointCloud& x, const PointCloud& y, const char* what)
{
    if (x.size() != y.size() || x.dim() != y.dim()) {
        throw std::invalid_argument(std::string(what) + ": clouds must have equal size and dimension (got " +
                                    std::to_string(x.size()) + "x" + std::to_string(x.dim()) + " vs " +
                                    std::to_string(y.size()) + "x" + std::to_string(y.dim()) + ")");
    }
}

}  // namespace wabc
