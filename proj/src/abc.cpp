#include "wabc/abc.hpp"

#include "wabc/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <omp.h>
#include <stdexcept>

namespace wabc {

PriorHyperParams::PriorHyperParams(std::shared_ptr<const BezierBasis> basis, std::vector<GaussianFactor> factors)
    : basis_(std::move(basis)), factors_(std::move(factors))
{
    if (!basis_) {
        throw std::invalid_argument("PriorHyperParams: null basis");
    }
    if (factors_.size() != basis_->size()) {
        throw std::invalid_argument("PriorHyperParams: need one factor per degree");
    }
    const auto dim = basis_->dim();
    for (const auto& f : factors_) {
        if (f.mean.size() != dim || f.cov.rows() != dim || f.cov.cols() != dim) {
            throw std::invalid_argument("PriorHyperParams: factor shape mismatch");
        }
        const double scale = std::max(1.0, f.cov.cwiseAbs().maxCoeff());
        if ((f.cov - f.cov.transpose()).cwiseAbs().maxCoeff() > symmetry_tolerance * scale) {
            throw std::invalid_argument("PriorHyperParams: covariance is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(f.cov, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -eigen_tolerance * scale) {
            throw std::invalid_argument("PriorHyperParams: covariance is not positive semidefinite");
        }
    }
}

ControlPointSet PriorHyperParams::means() const
{
    RowMatrix pts(static_cast<Eigen::Index>(factors_.size()), dim());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        pts.row(static_cast<Eigen::Index>(k)) = factors_[k].mean.transpose();
    }
    return {basis_, std::move(pts)};
}

bool operator==(const PriorHyperParams& a, const PriorHyperParams& b)
{
    if (a.factors_.size() != b.factors_.size() || a.order() != b.order() || a.dim() != b.dim()) {
        return false;
    }
    for (std::size_t k = 0; k < a.factors_.size(); ++k) {
        if (a.factors_[k].mean != b.factors_[k].mean || a.factors_[k].cov != b.factors_[k].cov) {
            return false;
        }
    }
    return true;
}

PriorSampler::PriorSampler(const PriorHyperParams& hp) : basis_(hp.basis_ptr())
{
    means_.reserve(hp.size());
    roots_.reserve(hp.size());
    for (const auto& f : hp.factors()) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(f.cov);
        const Vector lambda = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        means_.push_back(f.mean);
        roots_.push_back(es.eigenvectors() * lambda.asDiagonal());
    }
}

void PriorSampler::draw_into(ControlPointSet& out, Rng& rng) const
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto dim = basis_->dim();
    Vector z(dim);
    auto& pts = out.points();
    for (std::size_t k = 0; k < means_.size(); ++k) {
        for (int m = 0; m < dim; ++m) {
            z(m) = normal(rng);
        }
        pts.row(static_cast<Eigen::Index>(k)) = (means_[k] + roots_[k] * z).transpose();
    }
}

ControlPointSet PriorSampler::draw(Rng& rng) const
{
    ControlPointSet out(basis_, RowMatrix(static_cast<Eigen::Index>(means_.size()), basis_->dim()));
    draw_into(out, rng);
    return out;
}

ControlPointSet sample_prior(const PriorHyperParams& hp, Rng& rng)
{
    return PriorSampler(hp).draw(rng);
}

namespace {

struct Proposal {
    ControlPointSet theta;
    double distance = 0.0;
};

Proposal evaluate_proposal(const PriorSampler& sampler, const PointCloud& data, const CloudDistance& distance,
                           std::uint64_t seed, std::size_t index)
{
    Rng rng(derive_seed(seed, {index}));
    Proposal p{sampler.draw(rng), 0.0};
    const BezierModel model(p.theta);
    PointCloud synthetic(data.size(), data.dim());
    sample_model_into(model, synthetic, rng);
    p.distance = distance(data, synthetic);
    return p;
}

void check_rejection_inputs(const PointCloud& data, const PriorHyperParams& hp, double delta)
{
    if (data.empty()) {
        throw std::invalid_argument("rejection_abc: empty data");
    }
    if (data.dim() != static_cast<std::size_t>(hp.dim())) {
        throw std::invalid_argument("rejection_abc: data dimension does not match the prior");
    }
    if (!(delta >= 0.0)) {
        throw std::invalid_argument("rejection_abc: delta must be non-negative");
    }
}

}  // namespace

RejectionResult rejection_abc(const PointCloud& data, const PriorHyperParams& hp, double delta, std::size_t n_abc,
                              std::size_t max_proposals, const CloudDistance& distance, std::uint64_t seed, Exec exec)
{
    check_rejection_inputs(data, hp, delta);
    const PriorSampler sampler(hp);
    RejectionResult out;
    out.accepted.reserve(n_abc);

    if (exec == Exec::serial) {
        while (out.accepted.size() < n_abc && out.attempted < max_proposals) {
            auto p = evaluate_proposal(sampler, data, distance, seed, out.attempted);
            ++out.attempted;
            if (p.distance <= delta) {
                out.accepted.push_back(std::move(p.theta));
            }
        }
        return out;
    }

    std::vector<Proposal> batch;
    std::size_t next = 0;
    while (out.accepted.size() < n_abc && next < max_proposals) {
        const int threads = omp_get_max_threads();
        const std::size_t want = std::max<std::size_t>(64, 16 * static_cast<std::size_t>(threads));
        const std::size_t count = std::min(want, max_proposals - next);
        batch.assign(count, Proposal{});
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(count); ++b) {
            batch[static_cast<std::size_t>(b)] =
                evaluate_proposal(sampler, data, distance, seed, next + static_cast<std::size_t>(b));
        }
        for (std::size_t b = 0; b < count && out.accepted.size() < n_abc; ++b) {
            ++out.attempted;
            if (batch[b].distance <= delta) {
                out.accepted.push_back(std::move(batch[b].theta));
            }
        }
        next += count;
    }
    return out;
}

PriorHyperParams update_hyperparams(const std::vector<ControlPointSet>& accepted)
{
    if (accepted.size() < 2) {
        throw std::invalid_argument("update_hyperparams: need at least 2 accepted samples");
    }
    const auto& basis = accepted.front().basis_ptr();
    const auto dim = basis->dim();
    const auto count = static_cast<double>(accepted.size());
    std::vector<GaussianFactor> factors;
    factors.reserve(basis->size());
    for (std::size_t k = 0; k < basis->size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        Vector mean = Vector::Zero(dim);
        for (const auto& s : accepted) {
            if (s.size() != basis->size() || s.dim() != dim) {
                throw std::invalid_argument("update_hyperparams: inconsistent control point sets");
            }
            mean += s.points().row(row).transpose();
        }
        mean /= count;
        Matrix cov = Matrix::Zero(dim, dim);
        for (const auto& s : accepted) {
            const Vector d = s.points().row(row).transpose() - mean;
            cov.noalias() += d * d.transpose();
        }
        cov /= (count - 1.0);
        factors.push_back({std::move(mean), nearest_psd(cov)});
    }
    return {basis, std::move(factors)};
}

double estimate_delta(const PriorHyperParams& hp, const PointCloud& data, std::size_t n_delta,
                      const CloudDistance& distance, std::uint64_t seed, Exec exec)
{
    if (n_delta < 1) {
        throw std::invalid_argument("estimate_delta: n_delta must be positive");
    }
    check_rejection_inputs(data, hp, 0.0);
    const PriorSampler sampler(hp);
    std::vector<double> d(n_delta);
    if (exec == Exec::serial) {
        for (std::size_t a = 0; a < n_delta; ++a) {
            d[a] = evaluate_proposal(sampler, data, distance, seed, a).distance;
        }
    } else {
#pragma omp parallel for schedule(dynamic, 2)
        for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(n_delta); ++a) {
            d[static_cast<std::size_t>(a)] =
                evaluate_proposal(sampler, data, distance, seed, static_cast<std::size_t>(a)).distance;
        }
    }
    double sum = 0.0;
    for (double v : d) {
        sum += v;
    }
    return sum / static_cast<double>(n_delta);
}

double max_eigenvalue(const Matrix& sigma)
{
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
        throw std::invalid_argument("max_eigenvalue: matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > PriorHyperParams::symmetry_tolerance * scale) {
        throw std::invalid_argument("max_eigenvalue: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Matrix nearest_psd(const Matrix& sigma)
{
    const Matrix sym = 0.5 * (sigma + sigma.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.eigenvalues().minCoeff() >= 0.0) {
        return sym;
    }
    const Vector clipped = es.eigenvalues().cwiseMax(0.0);
    Matrix out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

PriorHyperParams init_hyperparams(const PointCloud& data, int order, double init_var)
{
    if (data.empty()) {
        throw std::invalid_argument("init_hyperparams: empty data");
    }
    if (!(init_var > 0.0)) {
        throw std::invalid_argument("init_hyperparams: init_var must be positive");
    }
    const int dim = static_cast<int>(data.dim());
    auto basis = BezierBasis::make(order, dim);
    std::vector<Vector> vertices;
    for (int m = 0; m < dim; ++m) {
        Eigen::Index best = 0;
        data.matrix().col(m).minCoeff(&best);
        vertices.push_back(data.row(static_cast<std::size_t>(best)).transpose());
    }
    std::vector<GaussianFactor> factors;
    factors.reserve(basis->size());
    for (const auto& d : basis->degrees()) {
        Vector mean = Vector::Zero(dim);
        for (int m = 0; m < dim; ++m) {
            mean += (static_cast<double>(d[static_cast<std::size_t>(m)]) / order) * vertices[static_cast<std::size_t>(m)];
        }
        factors.push_back({std::move(mean), init_var * Matrix::Identity(dim, dim)});
    }
    return {std::move(basis), std::move(factors)};
}

void AbcConfig::validate() const
{
    if (delta && !(*delta > 0.0)) {
        throw std::invalid_argument("AbcConfig: delta must be positive");
    }
    if (n_abc < 2) {
        throw std::invalid_argument("AbcConfig: n_abc must be at least 2");
    }
    if (n_updates < 1 || n_delta < 1 || max_proposals_per_round < 1) {
        throw std::invalid_argument("AbcConfig: n_updates, n_delta and max_proposals_per_round must be positive");
    }
    if (!(eig_stop > 0.0)) {
        throw std::invalid_argument("AbcConfig: eig_stop must be positive");
    }
    if (!(delta_shrink > 0.0 && delta_shrink < 1.0)) {
        throw std::invalid_argument("AbcConfig: delta_shrink must lie in (0, 1)");
    }
}

std::string to_string(TerminationReason r)
{
    switch (r) {
    case TerminationReason::rounds_exhausted:
        return "rounds-exhausted";
    case TerminationReason::covariance_collapsed:
        return "covariance-collapsed";
    case TerminationReason::proposal_budget_exhausted:
        return "proposal-budget-exhausted";
    }
    return "unknown";
}

TerminationReason termination_from_string(const std::string& s)
{
    if (s == "rounds-exhausted") {
        return TerminationReason::rounds_exhausted;
    }
    if (s == "covariance-collapsed") {
        return TerminationReason::covariance_collapsed;
    }
    if (s == "proposal-budget-exhausted") {
        return TerminationReason::proposal_budget_exhausted;
    }
    throw std::invalid_argument("unknown termination reason: " + s);
}

std::uint64_t wabc_proposal_seed(std::uint64_t root, std::size_t round)
{
    return derive_seed(root, {label("abc"), round});
}

std::uint64_t wabc_delta_seed(std::uint64_t root, std::size_t round)
{
    return derive_seed(root, {label("delta"), round});
}

std::uint64_t wabc_initial_delta_seed(std::uint64_t root)
{
    return derive_seed(root, {label("delta-init")});
}

FitReport wabc_fit(const PointCloud& data, const PriorHyperParams& init_hp, const AbcConfig& cfg, Exec exec)
{
    return wabc_fit(data, init_hp, cfg, CloudDistance(&wasserstein2), exec);
}

FitReport wabc_fit(const PointCloud& data, const PriorHyperParams& init_hp, const AbcConfig& cfg,
                   const CloudDistance& distance, Exec exec)
{
    cfg.validate();
    if (data.dim() != static_cast<std::size_t>(init_hp.dim())) {
        throw std::invalid_argument("wabc_fit: data dimension does not match the prior");
    }
    const auto start = std::chrono::steady_clock::now();

    FitReport report;
    report.seed = cfg.seed;
    PriorHyperParams hp = init_hp;
    double delta = cfg.delta ? *cfg.delta
                             : estimate_delta(hp, data, cfg.n_delta, distance, wabc_initial_delta_seed(cfg.seed), exec);
    report.initial_delta = delta;
    report.termination = TerminationReason::rounds_exhausted;

    for (std::size_t r = 0; r < cfg.n_updates; ++r) {
        auto res = rejection_abc(data, hp, delta, cfg.n_abc, cfg.max_proposals_per_round, distance,
                                 wabc_proposal_seed(cfg.seed, r), exec);
        AbcRoundTrace trace;
        trace.round = r;
        trace.attempted = res.attempted;
        trace.accepted = res.accepted.size();
        trace.acceptance_rate =
            res.attempted ? static_cast<double>(res.accepted.size()) / static_cast<double>(res.attempted) : 0.0;
        trace.delta = delta;

        if (res.accepted.size() < cfg.n_abc) {
            trace.epsilon = std::numeric_limits<double>::quiet_NaN();
            trace.max_eigenvalue = std::numeric_limits<double>::quiet_NaN();
            trace.hyperparams = std::make_shared<const PriorHyperParams>(hp);
            report.rounds.push_back(std::move(trace));
            report.termination = TerminationReason::proposal_budget_exhausted;
            break;
        }

        hp = update_hyperparams(res.accepted);
        double lambda = 0.0;
        for (const auto& f : hp.factors()) {
            lambda = std::max(lambda, max_eigenvalue(f.cov));
        }
        const double eps = estimate_delta(hp, data, cfg.n_delta, distance, wabc_delta_seed(cfg.seed, r), exec);
        trace.epsilon = eps;
        trace.max_eigenvalue = lambda;
        trace.hyperparams = std::make_shared<const PriorHyperParams>(hp);
        report.rounds.push_back(std::move(trace));

        if (lambda <= cfg.eig_stop) {
            report.termination = TerminationReason::covariance_collapsed;
            break;
        }
        delta = cfg.delta_shrink * eps;
    }

    report.hyperparams = std::move(hp);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace wabc
