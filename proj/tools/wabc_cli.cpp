#include "commands.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <iostream>

using namespace wabc;
using namespace wabc::cli;

namespace {

void add_seed(CLI::App* app, std::uint64_t& seed)
{
    app->add_option("--seed", seed, "Root seed; every random substream derives from it");
}

void add_wabc_flags(CLI::App* app, WabcFlags& f)
{
    app->add_option("--n-abc", f.n_abc, "Accepted samples per round")->capture_default_str();
    app->add_option("--n-updates", f.n_updates, "Maximum number of rounds")->capture_default_str();
    app->add_option("--n-delta", f.n_delta, "Prior draws used to pick the initial threshold")->capture_default_str();
    app->add_option("--max-proposals", f.max_proposals, "Proposal budget per round")->capture_default_str();
    app->add_option("--eig-stop", f.eig_stop, "Stop when every covariance eigenvalue falls below this")
        ->capture_default_str();
    app->add_option("--delta-shrink", f.delta_shrink, "Next threshold = shrink * current epsilon")
        ->capture_default_str();
    app->add_option("--delta", f.delta, "Fixed initial threshold (default: estimated from the prior)");
    app->add_option("--init-var", f.init_var, "Initial isotropic prior variance")->capture_default_str();
}

void add_aao_flags(CLI::App* app, AaoFlags& f)
{
    app->add_option("--aao-iters", f.max_outer_iters, "Outer alternating iterations")->capture_default_str();
    app->add_option("--aao-newton-iters", f.t_newton_iters, "Newton steps per projection")->capture_default_str();
    app->add_option("--aao-t-tol", f.t_tol, "Projection convergence tolerance")->capture_default_str();
    app->add_option("--aao-loss-tol", f.loss_tol, "Relative loss change that stops the outer loop")
        ->capture_default_str();
}

json app_flags(const CLI::App* sub)
{
    json flags = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name() == "--config" || opt->count() == 0) {
            continue;
        }
        const auto res = opt->results();
        std::string key = opt->get_name();
        if (opt->get_expected_max() == 0) {
            flags[key] = true;
        } else if (res.size() == 1 && opt->get_expected_max() == 1) {
            flags[key] = res.front();
        } else {
            flags[key] = res;
        }
    }
    return flags;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bezier simplex fitting by Wasserstein ABC, with an alternating least-squares baseline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read flags from a TOML file");
    int threads = 0;
    app.add_option("--threads", threads, "OpenMP threads for parallel kernels (0: runtime default)");
    app.set_version_flag("--version", WABC_VERSION);

    GenOptions gen;
    auto* c_gen = app.add_subcommand("gen", "Sample a Pareto front and write truth.csv / train.csv");
    c_gen->add_option("--problem", gen.problem, "schaffer, viennet2 or <M>-med")->capture_default_str();
    c_gen->add_option("--n", gen.n, "Number of points")->capture_default_str();
    c_gen->add_option("--sigma", gen.sigma, "Gaussian noise standard deviation")->capture_default_str();
    c_gen->add_option("--pool", gen.pool, "Front pool size (0: problem default)")->capture_default_str();
    c_gen->add_option("--grid-res", gen.grid_res, "Grid resolution for viennet2")->capture_default_str();
    add_seed(c_gen, gen.seed);
    c_gen->add_option("-o,--out", gen.out, "Output directory")->capture_default_str();

    FitOptions fit;
    auto* c_fit = app.add_subcommand("fit", "Fit a Bezier simplex to a CSV point cloud");
    c_fit->add_option("input", fit.input, "Training CSV")->required();
    c_fit->add_option("--method", fit.method, "wabc or aao")->capture_default_str();
    c_fit->add_option("--degree", fit.degree, "Bezier degree")->capture_default_str();
    c_fit->add_option("--objectives", fit.objectives, "Expected number of objectives (checked against the data)");
    add_wabc_flags(c_fit, fit.wabc);
    add_aao_flags(c_fit, fit.aao);
    add_seed(c_fit, fit.seed);
    c_fit->add_flag("--no-timing", fit.no_timing, "Write zero wall-clock times");
    c_fit->add_option("-o,--out", fit.out, "Output directory")->capture_default_str();

    EvalOptions ev;
    auto* c_eval = app.add_subcommand("eval", "GD / IGD of a fitted model against a validation set");
    c_eval->add_option("--model", ev.model, "model.json")->required();
    c_eval->add_option("--truth", ev.truth, "Validation CSV")->required();
    c_eval->add_option("--meta", ev.meta, "meta.json from gen, fills problem / sigma / n");
    c_eval->add_option("--append", ev.append, "Also append the row to this CSV");
    c_eval->add_option("--method", ev.method, "Method label for the row")->capture_default_str();
    c_eval->add_option("--samples", ev.samples, "Model surface samples")->capture_default_str();
    add_seed(c_eval, ev.seed);
    c_eval->add_option("-o,--out", ev.out, "Output directory")->capture_default_str();

    BenchOptions bench;
    auto* c_bench = app.add_subcommand("bench", "Repeated gen / fit / eval over a grid of settings");
    c_bench->add_option("--problems", bench.problems, "Problems")->capture_default_str();
    c_bench->add_option("--n", bench.ns, "Sample sizes")->capture_default_str();
    c_bench->add_option("--sigma", bench.sigmas, "Noise levels")->capture_default_str();
    c_bench->add_option("--trials", bench.trials, "Trials per cell")->capture_default_str();
    c_bench->add_option("--methods", bench.methods, "Methods")->capture_default_str();
    c_bench->add_option("--degree", bench.degree, "Bezier degree")->capture_default_str();
    c_bench->add_option("--metric-samples", bench.metric_samples, "Model surface samples for metrics")
        ->capture_default_str();
    c_bench->add_option("--grid-res", bench.grid_res, "Grid resolution for viennet2")->capture_default_str();
    c_bench->add_option("--jobs", bench.jobs, "Trials run concurrently")->capture_default_str();
    add_wabc_flags(c_bench, bench.wabc);
    add_aao_flags(c_bench, bench.aao);
    add_seed(c_bench, bench.seed);
    c_bench->add_flag("--no-timing", bench.no_timing, "Write zero wall-clock times");
    c_bench->add_option("-o,--out", bench.out, "Output directory")->capture_default_str();

    BiasScanOptions bias;
    auto* c_bias = app.add_subcommand("bias-scan", "Posterior-mean bias against the threshold on a 1-D toy");
    c_bias->add_option("--model", bias.model, "gaussian or uniform")->capture_default_str();
    c_bias->add_option("--n", bias.n, "Data size")->capture_default_str();
    c_bias->add_option("--n-abc", bias.n_abc, "Accepted samples per cell")->capture_default_str();
    c_bias->add_option("--trials", bias.trials, "Independent data sets")->capture_default_str();
    c_bias->add_option("--delta-min", bias.delta_min, "Smallest threshold")->capture_default_str();
    c_bias->add_option("--delta-max", bias.delta_max, "Largest threshold")->capture_default_str();
    c_bias->add_option("--points", bias.points, "Log-spaced thresholds")->capture_default_str();
    c_bias->add_option("--max-proposals", bias.max_proposals, "Proposal budget per cell")->capture_default_str();
    c_bias->add_option("--band-lo", bias.band_lo, "Lower bound of the slope check");
    c_bias->add_option("--band-hi", bias.band_hi, "Upper bound of the slope check");
    add_seed(c_bias, bias.seed);
    c_bias->add_option("-o,--out", bias.out, "Output directory")->capture_default_str();

    AcceptScanOptions acc;
    auto* c_acc = app.add_subcommand("accept-scan", "Acceptance rate against the threshold on a 1-D toy");
    c_acc->add_option("--model", acc.model, "gaussian or uniform")->capture_default_str();
    c_acc->add_option("--n", acc.n, "Data size")->capture_default_str();
    c_acc->add_option("--delta-min", acc.delta_min, "Smallest threshold")->capture_default_str();
    c_acc->add_option("--delta-max", acc.delta_max, "Largest threshold")->capture_default_str();
    c_acc->add_option("--points", acc.points, "Log-spaced thresholds")->capture_default_str();
    c_acc->add_option("--proposals", acc.proposals, "Proposals shared by all thresholds")->capture_default_str();
    c_acc->add_option("--band-lo", acc.band_lo, "Lower bound of the slope check");
    c_acc->add_option("--band-hi", acc.band_hi, "Upper bound of the slope check");
    add_seed(c_acc, acc.seed);
    c_acc->add_option("-o,--out", acc.out, "Output directory")->capture_default_str();

    ReportOptions rep;
    auto* c_rep = app.add_subcommand("report", "Summarize finished run directories");
    c_rep->add_option("dirs", rep.dirs, "Run directories")->required();
    c_rep->add_option("-o,--out", rep.out, "Also write report.txt here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (threads < 0) {
            throw UsageError("--threads must be non-negative");
        }
        if (threads > 0) {
            omp_set_num_threads(threads);
        }
        const CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        std::optional<RunRecord> rec;
        if (sub == c_gen) {
            rec = run_gen(gen);
        } else if (sub == c_fit) {
            rec = run_fit(fit);
        } else if (sub == c_eval) {
            rec = run_eval(ev);
        } else if (sub == c_bench) {
            rec = run_bench(bench);
        } else if (sub == c_bias) {
            rec = run_bias_scan(bias);
        } else if (sub == c_acc) {
            rec = run_accept_scan(acc);
        } else {
            rec = run_report(rep);
        }
        if (rec) {
            write_manifest(*rec, name, app_flags(sub));
            std::cerr << name << ": wrote " << rec->out_dir.string() << "\n";
        }
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
