#pragma once

#include "wabc/point_cloud.hpp"
#include "wabc/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wabc {

/// One-parameter toy models with prior N(0, 1):
/// gaussian: x ~ N(theta, 1);  uniform: x ~ U(0, theta) (theta > 0) or U(theta, 0).
enum class ToyKind { gaussian, uniform };

ToyKind toy_from_string(const std::string& name);
std::string to_string(ToyKind kind);

/// Posterior mean sum(x) / (n + 1) of the conjugate Gaussian toy.
double exact_posterior_mean_gaussian(std::span<const double> data);

/// Posterior mean of the uniform toy for data rescaled to max = 1:
///   int_1^inf e^{-t^2/2} t^{-(n-1)} dt / int_1^inf e^{-t^2/2} t^{-n} dt
/// by adaptive Gauss-Kronrod quadrature.
double exact_posterior_mean_uniform(std::span<const double> data);

/// Both integrals of exact_posterior_mean_uniform for sample size n, by
/// adaptive quadrature on [1, U] (U chosen so the Gaussian tail is < 1e-14).
struct UniformPosteriorIntegrals {
    double numerator = 0.0;
    double denominator = 0.0;
};
UniformPosteriorIntegrals uniform_posterior_integrals(std::size_t n);

/// Upper limit of the truncated integration domain.
double uniform_posterior_upper_limit();

/// Observed data for a toy: gaussian draws N(-1.5, 1); uniform draws U(0, 1)
/// rescaled so that the maximum is exactly 1.
std::vector<double> toy_data(ToyKind kind, std::size_t n, Rng& rng);

/// Synthetic sample of size n from the toy likelihood at theta.
void toy_simulate(ToyKind kind, double theta, std::span<double> out, Rng& rng);

/// 1-D 2-Wasserstein distance through the general assignment solver.
double wasserstein2_1d(std::span<const double> x, std::span<const double> y);

/// 1-D 2-Wasserstein distance as the RMS difference of sorted samples.
double wasserstein2_sorted_1d(std::span<const double> x, std::span<const double> y);

using ToyDistance = std::function<double(std::span<const double>, std::span<const double>)>;

/// Proposal k of a toy rejection run: theta ~ N(0,1), synthetic sample, and its
/// distance to the data, all from substream derive_seed(seed, {k}).
struct ToyProposal {
    double theta = 0.0;
    double distance = 0.0;
};

class ToyProposalStream {
public:
    ToyProposalStream(ToyKind kind, std::vector<double> data, std::uint64_t seed, ToyDistance distance = {});

    ToyProposal at(std::size_t k) const;

    /// Proposals [first, first + count) into out.
    void fill(std::size_t first, std::span<ToyProposal> out, Exec exec = Exec::parallel) const;

    ToyKind kind() const noexcept { return kind_; }
    const std::vector<double>& data() const noexcept { return data_; }

private:
    ToyKind kind_;
    std::vector<double> data_;
    std::uint64_t seed_;
    ToyDistance distance_;
};

class BudgetExhausted : public std::runtime_error {
public:
    BudgetExhausted(std::size_t attempted, std::size_t accepted);
    std::size_t attempted;
    std::size_t accepted;
};

inline constexpr std::size_t default_toy_budget = 2000000;

/// Mean of the first n_abc accepted theta of a toy rejection run. Throws
/// BudgetExhausted when max_proposals pass first.
double wabc_toy_estimate(const ToyProposalStream& stream, double delta, std::size_t n_abc,
                         std::size_t max_proposals = default_toy_budget, Exec exec = Exec::parallel);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept; needs >= 2 distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// n log-spaced values exp(lo) ... exp(hi) (natural log).
std::vector<double> log_grid(double log_lo, double log_hi, std::size_t points);

/// Drop floor(fraction * k) cells from each end of a k-point grid.
inline constexpr double middle_trim_fraction = 0.2;

struct BiasScanConfig {
    ToyKind kind = ToyKind::gaussian;
    std::size_t n = 100;
    std::size_t n_abc = 1000;
    std::size_t trials = 10;
    std::vector<double> delta_grid = log_grid(-1.0, 0.5, 13);
    std::size_t max_proposals = default_toy_budget;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BiasTrial {
    std::uint64_t data_seed = 0;
    std::uint64_t proposal_seed = 0;
    double posterior_mean = 0.0;
    /// Per delta cell: |mean accepted theta - posterior mean|, empty when the cell missed its budget.
    std::vector<std::optional<double>> bias;
    std::vector<std::size_t> attempted;
    LinearFit fit_all;
    LinearFit fit_middle;
};

struct BiasScanReport {
    BiasScanConfig config;
    std::vector<BiasTrial> trials;
    /// Per delta cell, mean bias over trials that filled the cell.
    std::vector<double> mean_bias;
    double slope_all_mean = 0.0;
    double slope_all_std = 0.0;
    double slope_mid_mean = 0.0;
    double slope_mid_std = 0.0;
    double intercept_all_mean = 0.0;
    double intercept_mid_mean = 0.0;
    std::size_t missing_cells = 0;
};

/// Log-bias versus log-delta regressions over trials, each trial with a fresh
/// data draw and one shared proposal stream for every delta cell.
BiasScanReport bias_scan(const BiasScanConfig& cfg, Exec exec = Exec::parallel);

/// pi^{q/2} / Gamma(q/2 + 1) * delta^q.
double ball_volume(int q, double delta);

struct AcceptanceScanConfig {
    ToyKind kind = ToyKind::gaussian;
    std::size_t n = 2;
    std::vector<double> delta_grid = log_grid(-2.0 * std::log(10.0), -0.5 * std::log(10.0), 7);
    std::size_t proposals = 4000000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AcceptanceCell {
    double delta = 0.0;
    std::size_t accepted = 0;
    double rate = 0.0;
};

struct AcceptanceScanReport {
    AcceptanceScanConfig config;
    std::vector<double> data;
    std::vector<AcceptanceCell> cells;
    /// log-log slope over cells with at least one acceptance
    double slope = 0.0;
    double intercept = 0.0;
    /// predicted exponent q = n * M (M = 1 for the toys)
    int predicted_exponent = 0;
    std::size_t flagged_cells = 0;
};

/// Acceptance rate per delta by rejection counting on one shared proposal stream.
AcceptanceScanReport acceptance_scan(const AcceptanceScanConfig& cfg, Exec exec = Exec::parallel);

}  // namespace wabc
