#include "wabc/bezier.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wabc {

namespace {

void enumerate_into(int remaining, int position, Degree& current, std::vector<Degree>& out)
{
    const int dim = static_cast<int>(current.size());
    if (position == dim - 1) {
        current[position] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[position] = e;
        enumerate_into(remaining - e, position + 1, current, out);
    }
}

}  // namespace

std::vector<Degree> enumerate_degrees(int order, int dim)
{
    if (dim <= 0) {
        throw std::invalid_argument("enumerate_degrees: dimension must be positive");
    }
    if (order < 0) {
        throw std::invalid_argument("enumerate_degrees: order must be non-negative");
    }
    std::vector<Degree> out;
    Degree current(static_cast<std::size_t>(dim), 0);
    enumerate_into(order, 0, current, out);
    return out;
}

std::uint64_t binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        // r * (n - k + i) is divisible by i at every step
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

std::uint64_t multinomial_coeff(int order, const Degree& degree)
{
    int sum = 0;
    for (int d : degree) {
        if (d < 0) {
            throw std::invalid_argument("multinomial_coeff: negative exponent");
        }
        sum += d;
    }
    if (sum != order) {
        throw std::invalid_argument("multinomial_coeff: exponents sum to " + std::to_string(sum) + ", expected " +
                                    std::to_string(order));
    }
    // D!/(d_1!...d_M!) = prod_m C(d_1 + ... + d_m, d_m)
    std::uint64_t r = 1;
    int partial = 0;
    for (int d : degree) {
        partial += d;
        r *= binomial(partial, d);
    }
    return r;
}

double ipow(double x, int e) noexcept
{
    double r = 1.0;
    double base = x;
    while (e > 0) {
        if (e & 1) {
            r *= base;
        }
        base *= base;
        e >>= 1;
    }
    return r;
}

SimplexParam::SimplexParam(Vector coords) : coords_(std::move(coords))
{
    if (coords_.size() < 1) {
        throw std::invalid_argument("SimplexParam: empty coordinate vector");
    }
    double sum = 0.0;
    for (Eigen::Index m = 0; m < coords_.size(); ++m) {
        if (!(coords_(m) >= 0.0)) {
            throw std::invalid_argument("SimplexParam: negative or NaN coordinate");
        }
        sum += coords_(m);
    }
    if (std::abs(sum - 1.0) > tolerance) {
        throw std::invalid_argument("SimplexParam: coordinates do not sum to 1");
    }
}

SimplexParam SimplexParam::vertex(int dim, int m)
{
    Vector v = Vector::Zero(dim);
    v(m) = 1.0;
    return SimplexParam(std::move(v));
}

BezierBasis::BezierBasis(int order, int dim) : order_(order), dim_(dim), degrees_(enumerate_degrees(order, dim))
{
    coeffs_.reserve(degrees_.size());
    for (const auto& d : degrees_) {
        coeffs_.push_back(static_cast<double>(multinomial_coeff(order, d)));
    }
}

std::shared_ptr<const BezierBasis> BezierBasis::make(int order, int dim)
{
    return std::make_shared<const BezierBasis>(order, dim);
}

std::size_t BezierBasis::index_of(const Degree& degree) const
{
    for (std::size_t k = 0; k < degrees_.size(); ++k) {
        if (degrees_[k] == degree) {
            return k;
        }
    }
    throw std::out_of_range("degree not part of this basis");
}

std::size_t BezierBasis::vertex_index(int m) const
{
    Degree d(static_cast<std::size_t>(dim_), 0);
    d.at(static_cast<std::size_t>(m)) = order_;
    return index_of(d);
}

Vector BezierBasis::weights(const Vector& t) const
{
    Vector w(static_cast<Eigen::Index>(degrees_.size()));
    for (std::size_t k = 0; k < degrees_.size(); ++k) {
        double v = coeffs_[k];
        const auto& d = degrees_[k];
        for (int m = 0; m < dim_; ++m) {
            v *= ipow(t(m), d[static_cast<std::size_t>(m)]);
        }
        w(static_cast<Eigen::Index>(k)) = v;
    }
    return w;
}

ControlPointSet::ControlPointSet(std::shared_ptr<const BezierBasis> basis, RowMatrix points)
    : basis_(std::move(basis)), points_(std::move(points))
{
    if (!basis_) {
        throw std::invalid_argument("ControlPointSet: null basis");
    }
    if (static_cast<std::size_t>(points_.rows()) != basis_->size() || points_.cols() != basis_->dim()) {
        throw std::invalid_argument("ControlPointSet: expected " + std::to_string(basis_->size()) + "x" +
                                    std::to_string(basis_->dim()) + " control points");
    }
}

ControlPointSet ControlPointSet::zeros(int order, int dim)
{
    auto basis = BezierBasis::make(order, dim);
    RowMatrix pts = RowMatrix::Zero(static_cast<Eigen::Index>(basis->size()), dim);
    return {std::move(basis), std::move(pts)};
}

Vector ControlPointSet::at(const Degree& degree) const
{
    return points_.row(static_cast<Eigen::Index>(basis_->index_of(degree))).transpose();
}

void ControlPointSet::set(const Degree& degree, const Vector& point)
{
    if (point.size() != dim()) {
        throw std::invalid_argument("ControlPointSet::set: point dimension mismatch");
    }
    points_.row(static_cast<Eigen::Index>(basis_->index_of(degree))) = point.transpose();
}

BezierModel::BezierModel(ControlPointSet control_points) : cps_(std::move(control_points))
{
    if (cps_.order() < 1 || cps_.dim() < 2) {
        throw std::invalid_argument("BezierModel: requires order >= 1 and dimension >= 2");
    }
}

Vector BezierModel::evaluate(const SimplexParam& t) const
{
    if (t.dim() != dim()) {
        throw std::invalid_argument("BezierModel::evaluate: parameter dimension mismatch");
    }
    return evaluate(t.coords());
}

Vector BezierModel::evaluate(const Vector& t) const
{
    return cps_.points().transpose() * cps_.basis().weights(t);
}

PointCloud BezierModel::evaluate_many(std::span<const SimplexParam> params) const
{
    PointCloud out(params.size(), static_cast<std::size_t>(dim()));
    for (std::size_t j = 0; j < params.size(); ++j) {
        out.row(j) = evaluate(params[j]).transpose();
    }
    return out;
}

std::vector<SimplexParam> sample_uniform_simplex(int dim, std::size_t count, Rng& rng)
{
    if (dim < 2) {
        throw std::invalid_argument("sample_uniform_simplex: dimension must be at least 2");
    }
    std::exponential_distribution<double> expo(1.0);
    std::vector<SimplexParam> out;
    out.reserve(count);
    Vector e(dim);
    for (std::size_t j = 0; j < count; ++j) {
        for (int m = 0; m < dim; ++m) {
            e(m) = expo(rng);
        }
        e /= e.sum();
        out.emplace_back(e);
    }
    return out;
}

void sample_model_into(const BezierModel& model, PointCloud& out, Rng& rng)
{
    const int dim = model.dim();
    if (out.dim() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("sample_model_into: output dimension mismatch");
    }
    std::exponential_distribution<double> expo(1.0);
    const auto& basis = model.control_points().basis();
    const auto& pts = model.control_points().points();
    Vector t(dim);
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (int m = 0; m < dim; ++m) {
            t(m) = expo(rng);
        }
        t /= t.sum();
        out.row(j).noalias() = basis.weights(t).transpose() * pts;
    }
}

PointCloud sample_model(const BezierModel& model, std::size_t count, Rng& rng)
{
    PointCloud out(count, static_cast<std::size_t>(model.dim()));
    sample_model_into(model, out, rng);
    return out;
}

}  // namespace wabc
