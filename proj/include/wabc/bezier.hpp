#pragma once

#include "wabc/point_cloud.hpp"
#include "wabc/rng.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace wabc {

/// Multi-index (d_1, ..., d_M) with sum D.
using Degree = std::vector<int>;

/// All multi-indices of length `dim` summing to `order`, in lexicographically
/// descending order. The ordering is part of the model file format.
std::vector<Degree> enumerate_degrees(int order, int dim);

/// D! / (d_1! ... d_M!) in exact integer arithmetic.
std::uint64_t multinomial_coeff(int order, const Degree& degree);

/// Binomial coefficient C(n, k).
std::uint64_t binomial(int n, int k);

/// Barycentric coordinates on the (M-1)-simplex.
class SimplexParam {
public:
    static constexpr double tolerance = 1e-12;

    /// Validates non-negativity and unit sum; throws std::invalid_argument.
    explicit SimplexParam(Vector coords);

    /// The m-th vertex e_m of the simplex in R^dim.
    static SimplexParam vertex(int dim, int m);

    const Vector& coords() const noexcept { return coords_; }
    int dim() const noexcept { return static_cast<int>(coords_.size()); }
    double operator[](int m) const { return coords_(m); }

private:
    Vector coords_;
};

/// Degrees of a Bezier simplex together with their multinomial weights. Shared
/// between every control-point set of the same (order, dim).
class BezierBasis {
public:
    BezierBasis(int order, int dim);

    static std::shared_ptr<const BezierBasis> make(int order, int dim);

    int order() const noexcept { return order_; }
    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return degrees_.size(); }
    const std::vector<Degree>& degrees() const noexcept { return degrees_; }
    const Degree& degree(std::size_t k) const { return degrees_.at(k); }
    double coeff(std::size_t k) const { return coeffs_.at(k); }

    /// Position of `degree` in the canonical order; throws std::out_of_range if absent.
    std::size_t index_of(const Degree& degree) const;

    /// Index of the vertex degree D*e_m.
    std::size_t vertex_index(int m) const;

    /// Bernstein weights B_d(t) = C(D,d) prod_m t_m^{d_m}, with 0^0 = 1.
    Vector weights(const Vector& t) const;

private:
    int order_;
    int dim_;
    std::vector<Degree> degrees_;
    std::vector<double> coeffs_;
};

/// Integer power with 0^0 = 1.
double ipow(double x, int e) noexcept;

/// Map degree -> control point in R^M, stored as one row per degree in canonical order.
class ControlPointSet {
public:
    ControlPointSet() = default;
    ControlPointSet(std::shared_ptr<const BezierBasis> basis, RowMatrix points);

    /// All control points zero.
    static ControlPointSet zeros(int order, int dim);

    const BezierBasis& basis() const { return *basis_; }
    const std::shared_ptr<const BezierBasis>& basis_ptr() const noexcept { return basis_; }
    int order() const { return basis_->order(); }
    int dim() const { return basis_->dim(); }
    std::size_t size() const { return basis_->size(); }

    const RowMatrix& points() const noexcept { return points_; }
    RowMatrix& points() noexcept { return points_; }

    Vector at(const Degree& degree) const;
    void set(const Degree& degree, const Vector& point);

    friend bool operator==(const ControlPointSet& a, const ControlPointSet& b)
    {
        return a.order() == b.order() && a.dim() == b.dim() && a.points_ == b.points_;
    }

private:
    std::shared_ptr<const BezierBasis> basis_;
    RowMatrix points_;
};

class BezierModel {
public:
    explicit BezierModel(ControlPointSet control_points);

    int order() const { return cps_.order(); }
    int dim() const { return cps_.dim(); }
    const ControlPointSet& control_points() const noexcept { return cps_; }

    /// b(t) = sum_d C(D,d) t^d p_d
    Vector evaluate(const SimplexParam& t) const;
    Vector evaluate(const Vector& t) const;

    PointCloud evaluate_many(std::span<const SimplexParam> params) const;

private:
    ControlPointSet cps_;
};

/// i.i.d. uniform draws on the simplex via normalized exponential variates.
std::vector<SimplexParam> sample_uniform_simplex(int dim, std::size_t count, Rng& rng);

/// Push-forward sampler: t_j ~ U(simplex), y_j = b(t_j).
PointCloud sample_model(const BezierModel& model, std::size_t count, Rng& rng);

/// Same as sample_model, writing into an existing (count x M) cloud.
void sample_model_into(const BezierModel& model, PointCloud& out, Rng& rng);

}  // namespace wabc
