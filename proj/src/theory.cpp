#include "wabc/theory.hpp"

#include "wabc/transport.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace wabc {

ToyKind toy_from_string(const std::string& name)
{
    if (name == "gaussian") {
        return ToyKind::gaussian;
    }
    if (name == "uniform") {
        return ToyKind::uniform;
    }
    throw std::invalid_argument("unknown toy model: " + name);
}

std::string to_string(ToyKind kind)
{
    return kind == ToyKind::gaussian ? "gaussian" : "uniform";
}

double exact_posterior_mean_gaussian(std::span<const double> data)
{
    if (data.empty()) {
        throw std::invalid_argument("exact_posterior_mean_gaussian: empty data");
    }
    const double sum = std::accumulate(data.begin(), data.end(), 0.0);
    return sum / static_cast<double>(data.size() + 1);
}

double uniform_posterior_upper_limit()
{
    // int_9^inf e^{-t^2/2} dt ~ 3e-19
    return 9.0;
}

UniformPosteriorIntegrals uniform_posterior_integrals(std::size_t n)
{
    if (n < 1) {
        throw std::invalid_argument("uniform_posterior_integrals: n must be positive");
    }
    using boost::math::quadrature::gauss_kronrod;
    const double upper = uniform_posterior_upper_limit();
    // The integrand decays like t^{-n} from t = 1; geometric breakpoints
    // 1 + 2^j / n keep every panel resolved for large n.
    std::vector<double> cuts{1.0};
    for (double w = 1.0 / static_cast<double>(n); 1.0 + w < upper; w *= 2.0) {
        cuts.push_back(1.0 + w);
    }
    cuts.push_back(upper);

    auto integrate = [&](double power) {
        auto f = [power](double t) { return std::exp(-0.5 * t * t - power * std::log(t)); };
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            total += gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-13);
        }
        return total;
    };
    const double dn = static_cast<double>(n);
    return {integrate(dn - 1.0), integrate(dn)};
}

double exact_posterior_mean_uniform(std::span<const double> data)
{
    if (data.empty()) {
        throw std::invalid_argument("exact_posterior_mean_uniform: empty data");
    }
    const double mx = *std::max_element(data.begin(), data.end());
    if (std::abs(mx - 1.0) > 1e-12) {
        throw std::invalid_argument("exact_posterior_mean_uniform: data must be rescaled so that max = 1");
    }
    if (std::any_of(data.begin(), data.end(), [](double v) { return !(v > 0.0); })) {
        throw std::invalid_argument("exact_posterior_mean_uniform: data must lie in (0, 1]");
    }
    const auto in = uniform_posterior_integrals(data.size());
    return in.numerator / in.denominator;
}

std::vector<double> toy_data(ToyKind kind, std::size_t n, Rng& rng)
{
    if (n < 1) {
        throw std::invalid_argument("toy_data: n must be positive");
    }
    std::vector<double> x(n);
    if (kind == ToyKind::gaussian) {
        std::normal_distribution<double> normal(-1.5, 1.0);
        for (auto& v : x) {
            v = normal(rng);
        }
    } else {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (auto& v : x) {
            // (0, 1]: exclude exact zeros from the support
            do {
                v = unif(rng);
            } while (v == 0.0);
        }
        const double mx = *std::max_element(x.begin(), x.end());
        for (auto& v : x) {
            v /= mx;
        }
        *std::max_element(x.begin(), x.end()) = 1.0;
    }
    return x;
}

void toy_simulate(ToyKind kind, double theta, std::span<double> out, Rng& rng)
{
    if (kind == ToyKind::gaussian) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& v : out) {
            v = theta + normal(rng);
        }
    } else {
        // U(0, theta) for theta > 0 and U(theta, 0) for theta < 0 are both theta * U(0, 1)
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (auto& v : out) {
            v = theta * unif(rng);
        }
    }
}

namespace {

PointCloud column(std::span<const double> x)
{
    PointCloud c(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        c.row(i)(0) = x[i];
    }
    return c;
}

}  // namespace

double wasserstein2_1d(std::span<const double> x, std::span<const double> y)
{
    return wasserstein2(column(x), column(y));
}

double wasserstein2_sorted_1d(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("wasserstein2_sorted_1d: samples must have equal, non-zero size");
    }
    std::vector<double> a(x.begin(), x.end());
    std::vector<double> b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // ascending summation, same order as the assignment solver's total
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = (a[i] - b[i]) * (a[i] - b[i]);
    }
    std::sort(a.begin(), a.end());
    double s = 0.0;
    for (double v : a) {
        s += v;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

ToyProposalStream::ToyProposalStream(ToyKind kind, std::vector<double> data, std::uint64_t seed,
                                     ToyDistance distance)
    : kind_(kind), data_(std::move(data)), seed_(seed), distance_(std::move(distance))
{
    if (data_.empty()) {
        throw std::invalid_argument("ToyProposalStream: empty data");
    }
    if (!distance_) {
        distance_ = &wasserstein2_1d;
    }
}

ToyProposal ToyProposalStream::at(std::size_t k) const
{
    Rng rng(derive_seed(seed_, {k}));
    std::normal_distribution<double> prior(0.0, 1.0);
    ToyProposal p;
    p.theta = prior(rng);
    std::vector<double> y(data_.size());
    toy_simulate(kind_, p.theta, y, rng);
    p.distance = distance_(data_, y);
    return p;
}

void ToyProposalStream::fill(std::size_t first, std::span<ToyProposal> out, Exec exec) const
{
    if (exec == Exec::serial) {
        for (std::size_t b = 0; b < out.size(); ++b) {
            out[b] = at(first + b);
        }
        return;
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(out.size()); ++b) {
        out[static_cast<std::size_t>(b)] = at(first + static_cast<std::size_t>(b));
    }
}

BudgetExhausted::BudgetExhausted(std::size_t attempted_, std::size_t accepted_)
    : std::runtime_error("proposal budget exhausted after " + std::to_string(attempted_) + " proposals with " +
                         std::to_string(accepted_) + " accepted"),
      attempted(attempted_),
      accepted(accepted_)
{
}

namespace {

constexpr std::size_t toy_batch = 1024;

}  // namespace

double wabc_toy_estimate(const ToyProposalStream& stream, double delta, std::size_t n_abc, std::size_t max_proposals,
                         Exec exec)
{
    if (!(delta > 0.0)) {
        throw std::invalid_argument("wabc_toy_estimate: delta must be positive");
    }
    if (n_abc < 1) {
        throw std::invalid_argument("wabc_toy_estimate: n_abc must be positive");
    }
    std::vector<ToyProposal> batch;
    std::size_t next = 0;
    std::size_t accepted = 0;
    double sum = 0.0;
    while (next < max_proposals) {
        batch.resize(std::min(toy_batch, max_proposals - next));
        stream.fill(next, batch, exec);
        for (const auto& p : batch) {
            if (p.distance <= delta) {
                sum += p.theta;
                if (++accepted == n_abc) {
                    return sum / static_cast<double>(n_abc);
                }
            }
        }
        next += batch.size();
    }
    throw BudgetExhausted(next, accepted);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_line: need at least 2 paired values");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("fit_line: x values are all equal");
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

std::vector<double> log_grid(double log_lo, double log_hi, std::size_t points)
{
    if (points < 2 || !(log_hi > log_lo)) {
        throw std::invalid_argument("log_grid: need >= 2 points on an increasing range");
    }
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(points - 1);
        g[i] = std::exp(log_lo + f * (log_hi - log_lo));
    }
    return g;
}

namespace {

void validate_grid(const std::vector<double>& grid, std::size_t min_points, const char* what)
{
    if (grid.size() < min_points) {
        throw std::invalid_argument(std::string(what) + ": delta grid too short");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw std::invalid_argument(std::string(what) + ": delta grid must be positive and strictly increasing");
        }
    }
}

double mean_of(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void BiasScanConfig::validate() const
{
    validate_grid(delta_grid, 5, "bias_scan");
    // at least one e-fold between the extreme cells
    if (std::log(delta_grid.back() / delta_grid.front()) < 1.0) {
        throw std::invalid_argument("bias_scan: delta grid must span at least one unit of log(delta)");
    }
    if (n < 1 || n_abc < 1 || trials < 1 || max_proposals < n_abc) {
        throw std::invalid_argument("bias_scan: n, n_abc, trials must be positive and the budget >= n_abc");
    }
}

BiasScanReport bias_scan(const BiasScanConfig& cfg, Exec exec)
{
    cfg.validate();
    const auto& grid = cfg.delta_grid;
    const std::size_t cells = grid.size();
    const std::size_t trim = static_cast<std::size_t>(std::floor(middle_trim_fraction * static_cast<double>(cells)));

    BiasScanReport report;
    report.config = cfg;
    std::vector<double> log_delta(cells);
    std::transform(grid.begin(), grid.end(), log_delta.begin(), [](double d) { return std::log(d); });

    std::vector<double> slopes_all, slopes_mid, icpt_all, icpt_mid;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        BiasTrial trial;
        trial.data_seed = derive_seed(cfg.seed, {label("data"), t});
        trial.proposal_seed = derive_seed(cfg.seed, {label("proposals"), t});
        Rng data_rng(trial.data_seed);
        auto data = toy_data(cfg.kind, cfg.n, data_rng);
        trial.posterior_mean =
            cfg.kind == ToyKind::gaussian ? exact_posterior_mean_gaussian(data) : exact_posterior_mean_uniform(data);
        const ToyProposalStream stream(cfg.kind, std::move(data), trial.proposal_seed);

        // Every cell consumes the same proposal stream, keeping its first n_abc acceptances.
        std::vector<std::size_t> accepted(cells, 0);
        std::vector<double> sums(cells, 0.0);
        trial.attempted.assign(cells, 0);
        std::vector<ToyProposal> batch;
        std::size_t next = 0;
        std::size_t open = cells;
        while (open > 0 && next < cfg.max_proposals) {
            batch.resize(std::min(toy_batch, cfg.max_proposals - next));
            stream.fill(next, batch, exec);
            for (std::size_t b = 0; b < batch.size(); ++b) {
                for (std::size_t c = 0; c < cells; ++c) {
                    if (accepted[c] < cfg.n_abc && batch[b].distance <= grid[c]) {
                        sums[c] += batch[b].theta;
                        if (++accepted[c] == cfg.n_abc) {
                            trial.attempted[c] = next + b + 1;
                            --open;
                        }
                    }
                }
            }
            next += batch.size();
        }

        std::vector<double> xs_all, ys_all, xs_mid, ys_mid;
        trial.bias.assign(cells, std::nullopt);
        for (std::size_t c = 0; c < cells; ++c) {
            if (accepted[c] < cfg.n_abc) {
                trial.attempted[c] = next;
                ++report.missing_cells;
                continue;
            }
            const double bias = std::abs(sums[c] / static_cast<double>(cfg.n_abc) - trial.posterior_mean);
            trial.bias[c] = bias;
            if (!(bias > 0.0)) {
                continue;
            }
            xs_all.push_back(log_delta[c]);
            ys_all.push_back(std::log(bias));
            if (c >= trim && c < cells - trim) {
                xs_mid.push_back(log_delta[c]);
                ys_mid.push_back(std::log(bias));
            }
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        trial.fit_all = xs_all.size() >= 2 ? fit_line(xs_all, ys_all) : LinearFit{nan, nan};
        trial.fit_middle = xs_mid.size() >= 2 ? fit_line(xs_mid, ys_mid) : LinearFit{nan, nan};
        if (std::isfinite(trial.fit_all.slope)) {
            slopes_all.push_back(trial.fit_all.slope);
            icpt_all.push_back(trial.fit_all.intercept);
        }
        if (std::isfinite(trial.fit_middle.slope)) {
            slopes_mid.push_back(trial.fit_middle.slope);
            icpt_mid.push_back(trial.fit_middle.intercept);
        }
        report.trials.push_back(std::move(trial));
    }

    report.mean_bias.assign(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<double> v;
        for (const auto& tr : report.trials) {
            if (tr.bias[c]) {
                v.push_back(*tr.bias[c]);
            }
        }
        report.mean_bias[c] = v.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_of(v);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.slope_all_mean = slopes_all.empty() ? nan : mean_of(slopes_all);
    report.slope_all_std = sample_std(slopes_all);
    report.slope_mid_mean = slopes_mid.empty() ? nan : mean_of(slopes_mid);
    report.slope_mid_std = sample_std(slopes_mid);
    report.intercept_all_mean = icpt_all.empty() ? nan : mean_of(icpt_all);
    report.intercept_mid_mean = icpt_mid.empty() ? nan : mean_of(icpt_mid);
    return report;
}

double ball_volume(int q, double delta)
{
    if (q < 1) {
        throw std::invalid_argument("ball_volume: dimension must be positive");
    }
    if (!(delta >= 0.0)) {
        throw std::invalid_argument("ball_volume: radius must be non-negative");
    }
    if (delta == 0.0) {
        return 0.0;
    }
    const double half = 0.5 * q;
    return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0) + q * std::log(delta));
}

void AcceptanceScanConfig::validate() const
{
    validate_grid(delta_grid, 2, "acceptance_scan");
    if (proposals < 10000) {
        throw std::invalid_argument("acceptance_scan: at least 1e4 proposals per cell required");
    }
    if (n < 1) {
        throw std::invalid_argument("acceptance_scan: n must be positive");
    }
}

AcceptanceScanReport acceptance_scan(const AcceptanceScanConfig& cfg, Exec exec)
{
    cfg.validate();
    AcceptanceScanReport report;
    report.config = cfg;
    report.predicted_exponent = static_cast<int>(cfg.n);
    Rng data_rng(derive_seed(cfg.seed, {label("data")}));
    report.data = toy_data(cfg.kind, cfg.n, data_rng);
    const ToyProposalStream stream(cfg.kind, report.data, derive_seed(cfg.seed, {label("proposals")}));

    const auto& grid = cfg.delta_grid;
    std::vector<std::size_t> counts(grid.size(), 0);
    std::vector<ToyProposal> batch;
    for (std::size_t next = 0; next < cfg.proposals; next += batch.size()) {
        batch.resize(std::min<std::size_t>(16 * toy_batch, cfg.proposals - next));
        stream.fill(next, batch, exec);
        for (const auto& p : batch) {
            for (std::size_t c = 0; c < grid.size(); ++c) {
                counts[c] += p.distance <= grid[c] ? 1 : 0;
            }
        }
    }
    std::vector<double> xs, ys;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        AcceptanceCell cell{grid[c], counts[c], static_cast<double>(counts[c]) / static_cast<double>(cfg.proposals)};
        if (cell.accepted == 0) {
            ++report.flagged_cells;
        } else {
            xs.push_back(std::log(cell.delta));
            ys.push_back(std::log(cell.rate));
        }
        report.cells.push_back(cell);
    }
    if (xs.size() >= 2) {
        const auto fit = fit_line(xs, ys);
        report.slope = fit.slope;
        report.intercept = fit.intercept;
    } else {
        report.slope = report.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

}  // namespace wabc
