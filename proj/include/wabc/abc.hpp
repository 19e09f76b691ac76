#pragma once

#include "wabc/bezier.hpp"
#include "wabc/point_cloud.hpp"
#include "wabc/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wabc {

/// Distance between an observed and a synthetic cloud. Must be thread-safe.
using CloudDistance = std::function<double(const PointCloud&, const PointCloud&)>;

struct GaussianFactor {
    Vector mean;
    Matrix cov;
};

/// Factorized Gaussian prior over control points, one N(m_d, Sigma_d) per degree.
class PriorHyperParams {
public:
    static constexpr double symmetry_tolerance = 1e-10;
    static constexpr double eigen_tolerance = 1e-10;

    PriorHyperParams() = default;
    PriorHyperParams(std::shared_ptr<const BezierBasis> basis, std::vector<GaussianFactor> factors);

    const BezierBasis& basis() const { return *basis_; }
    const std::shared_ptr<const BezierBasis>& basis_ptr() const noexcept { return basis_; }
    int order() const { return basis_->order(); }
    int dim() const { return basis_->dim(); }
    std::size_t size() const noexcept { return factors_.size(); }

    const GaussianFactor& factor(std::size_t k) const { return factors_.at(k); }
    const std::vector<GaussianFactor>& factors() const noexcept { return factors_; }

    /// Control points at the prior means.
    ControlPointSet means() const;

    friend bool operator==(const PriorHyperParams& a, const PriorHyperParams& b);

private:
    std::shared_ptr<const BezierBasis> basis_;
    std::vector<GaussianFactor> factors_;
};

/// Draws control-point sets from a fixed prior. Factorizes every covariance once
/// (symmetric square root, eigenvalues clipped at 0) so Sigma_d = 0 reproduces m_d exactly.
class PriorSampler {
public:
    explicit PriorSampler(const PriorHyperParams& hp);

    ControlPointSet draw(Rng& rng) const;
    void draw_into(ControlPointSet& out, Rng& rng) const;

private:
    std::shared_ptr<const BezierBasis> basis_;
    std::vector<Vector> means_;
    std::vector<Matrix> roots_;
};

ControlPointSet sample_prior(const PriorHyperParams& hp, Rng& rng);

struct RejectionResult {
    std::vector<ControlPointSet> accepted;
    std::size_t attempted = 0;
};

/// Rejection ABC: draw theta from the prior, simulate a cloud of the data's size,
/// accept iff distance(data, synthetic) <= delta. Stops at n_abc acceptances or
/// max_proposals attempts. Proposal k uses the substream derive_seed(seed, {k}),
/// and acceptances are taken in proposal order, so serial and parallel execution
/// return identical results.
RejectionResult rejection_abc(const PointCloud& data, const PriorHyperParams& hp, double delta, std::size_t n_abc,
                              std::size_t max_proposals, const CloudDistance& distance, std::uint64_t seed,
                              Exec exec = Exec::parallel);

/// Sample mean and (n-1) covariance of the accepted control points, per degree.
/// Covariances are symmetrized and eigenvalue-clipped at 0.
PriorHyperParams update_hyperparams(const std::vector<ControlPointSet>& accepted);

/// Mean distance between data and n_delta synthetic clouds drawn through the prior.
double estimate_delta(const PriorHyperParams& hp, const PointCloud& data, std::size_t n_delta,
                      const CloudDistance& distance, std::uint64_t seed, Exec exec = Exec::parallel);

/// Largest eigenvalue of a symmetric matrix; throws on asymmetric input.
double max_eigenvalue(const Matrix& sigma);

/// Symmetrize and clip negative eigenvalues to zero.
Matrix nearest_psd(const Matrix& sigma);

/// Vertex means at the per-objective argmin data points, interior means on the
/// simplex grid spanned by them, every covariance init_var * I.
PriorHyperParams init_hyperparams(const PointCloud& data, int order, double init_var = 0.1);

struct AbcConfig {
    /// Initial threshold; when empty, the mean distance under the initial prior is used.
    std::optional<double> delta;
    std::size_t n_abc = 100;
    std::size_t n_updates = 50;
    std::size_t n_delta = 100;
    std::size_t max_proposals_per_round = 100000;
    double eig_stop = 1e-5;
    double delta_shrink = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class TerminationReason { rounds_exhausted, covariance_collapsed, proposal_budget_exhausted };

std::string to_string(TerminationReason r);
TerminationReason termination_from_string(const std::string& s);

struct AbcRoundTrace {
    std::size_t round = 0;
    std::size_t attempted = 0;
    std::size_t accepted = 0;
    double acceptance_rate = 0.0;
    double delta = 0.0;
    /// Mean distance under the updated prior (NaN when the round did not update).
    double epsilon = 0.0;
    double max_eigenvalue = 0.0;
    std::shared_ptr<const PriorHyperParams> hyperparams;
};

struct FitReport {
    PriorHyperParams hyperparams;
    double initial_delta = 0.0;
    std::vector<AbcRoundTrace> rounds;
    TerminationReason termination = TerminationReason::rounds_exhausted;
    double seconds = 0.0;
    std::uint64_t seed = 0;

    BezierModel model() const { return BezierModel(hyperparams.means()); }
};

/// Substream seeds used by wabc_fit, exposed for replaying a recorded run.
std::uint64_t wabc_proposal_seed(std::uint64_t root, std::size_t round);
std::uint64_t wabc_delta_seed(std::uint64_t root, std::size_t round);
/// Seed of the initial threshold estimate.
std::uint64_t wabc_initial_delta_seed(std::uint64_t root);

/// Wasserstein ABC fit of a Bezier simplex with Gaussian prior refits and
/// threshold shrinkage delta <- delta_shrink * epsilon.
FitReport wabc_fit(const PointCloud& data, const PriorHyperParams& init_hp, const AbcConfig& cfg,
                   Exec exec = Exec::parallel);

/// Same with an arbitrary cloud distance (tests use this to plug in oracles).
FitReport wabc_fit(const PointCloud& data, const PriorHyperParams& init_hp, const AbcConfig& cfg,
                   const CloudDistance& distance, Exec exec = Exec::parallel);

}  // namespace wabc
