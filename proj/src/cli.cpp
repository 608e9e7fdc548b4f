#include "tcam/cli.hpp"

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tcam/completion.hpp"
#include "tcam/experiments.hpp"
#include "tcam/io.hpp"
#include "tcam/tmm.hpp"
#include "tcam/tt_svd.hpp"

namespace tcam {

namespace {

void emit(std::ostream& out, const std::string& path, const std::string& contents) {
    if (path == "-") {
        out << contents << std::flush;
    } else {
        io::write_atomically(path, contents);
    }
}

std::string report_text(const std::string& method, const CompletionReport& report, const DenseTensor* truth,
                        const ObservationMask& mask) {
    std::ostringstream s;
    s << "method: " << method << '\n';
    s << "iterations: " << report.iterations << '\n';
    s << "converged: " << (report.converged ? "true" : "false") << '\n';
    if (!report.objective_trace.empty()) {
        s << "objective: " << io::format_double(report.objective_trace.back()) << '\n';
        s << "epsilon: " << io::format_double(report.epsilon_trace.back()) << '\n';
    }
    if (truth) s << "reme: " << io::format_double(reme(*truth, report.recovered, mask)) << '\n';
    return s.str();
}

struct SynthArgs {
    std::string shape, rank, out;
    std::uint64_t seed = 0;
    bool binary = false;
};

struct MaskArgs {
    std::string shape, like, out;
    double ratio = 0.5;
    std::uint64_t seed = 0;
};

struct ApproxArgs {
    std::string in, rank, out, out_reme;
};

struct CompleteArgs {
    std::string in, mask, rank, method = "tcam-tt", out, truth, report = "-", trace;
    std::size_t split = 0;
    double tol = 1e-4;
    std::size_t max_iter = 0;
    double ridge = 0.0;
};

struct RemeArgs {
    std::string truth, recovered, mask;
};

struct SweepArgs {
    std::string plan, out, summary;
};

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tensor train completion by alternating least squares over MPS cores", "tcam"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a tensor from a random standard-normal tensor train");
    synth_cmd->add_option("--shape", synth.shape, "Mode sizes, e.g. 8,8,8,8")->required();
    synth_cmd->add_option("--rank", synth.rank, "TT-rank vector including boundary ones, e.g. 1,2,4,2,1")->required();
    synth_cmd->add_option("--seed", synth.seed, "RNG seed");
    synth_cmd->add_option("--out", synth.out, "Output tensor file ('-' for stdout)")->required();
    synth_cmd->add_flag("--binary", synth.binary, "Write the binary tensor format");

    MaskArgs mask;
    auto* mask_cmd = app.add_subcommand("mask", "Draw a Bernoulli observation mask");
    auto* mask_shape = mask_cmd->add_option("--shape", mask.shape, "Mode sizes");
    auto* mask_like = mask_cmd->add_option("--like", mask.like, "Take the shape from this tensor file");
    mask_shape->excludes(mask_like);
    mask_cmd->add_option("--ratio", mask.ratio, "Observation probability of each entry")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    mask_cmd->add_option("--seed", mask.seed, "RNG seed");
    mask_cmd->add_option("--out", mask.out, "Output mask file ('-' for stdout)")->required();

    ApproxArgs approx;
    auto* approx_cmd = app.add_subcommand("approx", "Tensor train approximation by sequential truncated SVD");
    approx_cmd->add_option("--in", approx.in, "Input tensor file")->required();
    approx_cmd->add_option("--rank", approx.rank, "TT-rank vector including boundary ones")->required();
    approx_cmd->add_option("--out", approx.out, "Write the reconstructed approximation here");
    approx_cmd->add_option("--out-reme", approx.out_reme,
                           "Write the relative reconstruction error (REME with every entry held out); '-' for stdout");

    CompleteArgs complete;
    auto* complete_cmd = app.add_subcommand("complete", "Complete a partially observed tensor");
    complete_cmd->add_option("--in", complete.in, "Input tensor file (unobserved entries are ignored)")->required();
    complete_cmd->add_option("--mask", complete.mask, "Observation mask file")->required();
    complete_cmd->add_option("--rank", complete.rank, "TT-rank vector including boundary ones")->required();
    complete_cmd->add_option("--method", complete.method, "tcam-tt or tmm")
        ->check(CLI::IsMember({"tcam-tt", "tmm"}));
    complete_cmd->add_option("--split", complete.split, "Matricization split for tmm (1..n-1)");
    complete_cmd->add_option("--tol", complete.tol, "Threshold on the summed relative factor change");
    complete_cmd->add_option("--max-iter", complete.max_iter, "Iteration cap (default 100 for tcam-tt, 1000 for tmm)");
    complete_cmd->add_option("--ridge", complete.ridge, "Tikhonov weight on each least-squares solve");
    complete_cmd->add_option("--out", complete.out, "Write the recovered tensor here");
    complete_cmd->add_option("--truth", complete.truth, "Ground-truth tensor; adds REME to the report");
    complete_cmd->add_option("--report", complete.report, "Report destination ('-' for stdout)");
    complete_cmd->add_option("--trace", complete.trace, "Write per-iteration epsilon/objective CSV here");

    RemeArgs reme_args;
    auto* reme_cmd = app.add_subcommand("reme", "Recovery error at the missing entries");
    reme_cmd->add_option("--truth", reme_args.truth, "Original tensor")->required();
    reme_cmd->add_option("--recovered", reme_args.recovered, "Recovered tensor")->required();
    reme_cmd->add_option("--mask", reme_args.mask, "Observation mask used for the completion")->required();

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a synthetic recovery experiment");
    sweep_cmd->add_option("--plan", sweep.plan, "Sweep plan file")->required();
    sweep_cmd->add_option("--out", sweep.out, "Per-run CSV ('-' for stdout)")->required();
    sweep_cmd->add_option("--summary", sweep.summary, "Per (method, ratio) mean REME CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    try {
        if (synth_cmd->parsed()) {
            const auto shape = io::parse_size_list(synth.shape, "shape");
            const auto rank = io::parse_size_list(synth.rank, "rank");
            const auto t = random_tt_tensor(shape, rank, synth.seed);
            std::ostringstream s;
            io::format_tensor(s, t, synth.binary ? io::TensorFormat::Binary : io::TensorFormat::Text);
            emit(out, synth.out, s.str());
        } else if (mask_cmd->parsed()) {
            Shape shape;
            if (!mask.like.empty()) {
                shape = io::read_tensor(mask.like).shape();
            } else if (!mask.shape.empty()) {
                shape = io::parse_size_list(mask.shape, "shape");
            } else {
                throw std::invalid_argument("mask needs --shape or --like");
            }
            std::ostringstream s;
            io::format_mask(s, bernoulli_mask(shape, mask.ratio, mask.seed));
            emit(out, mask.out, s.str());
        } else if (approx_cmd->parsed()) {
            const auto t = io::read_tensor(approx.in);
            const auto rank = io::parse_size_list(approx.rank, "rank");
            const auto approx_t = tt_reconstruct(tt_approximate(t, rank));
            if (!approx.out.empty()) {
                std::ostringstream s;
                io::format_tensor(s, approx_t);
                emit(out, approx.out, s.str());
            }
            if (!approx.out_reme.empty()) {
                const double e = reme(t, approx_t, ObservationMask::none(t.shape()));
                emit(out, approx.out_reme, io::format_double(e) + "\n");
            }
        } else if (complete_cmd->parsed()) {
            const auto data = io::read_tensor(complete.in);
            const auto m = io::read_mask(complete.mask);
            const auto rank = io::parse_size_list(complete.rank, "rank");
            check_rank_vector(data.shape(), rank);
            CompletionReport report;
            std::string label = complete.method;
            if (complete.method == "tcam-tt") {
                SolverConfig cfg;
                cfg.tol = complete.tol;
                cfg.max_iter = complete.max_iter ? complete.max_iter : 100;
                cfg.ridge = complete.ridge;
                report = tcam_tt(data, m, rank, cfg);
            } else {
                if (complete.split == 0) throw std::invalid_argument("tmm needs --split");
                TmmConfig cfg;
                cfg.split = complete.split;
                if (cfg.split >= rank.size() - 1) throw std::invalid_argument("--split out of range");
                cfg.rank = rank[cfg.split];
                cfg.tol = complete.tol;
                cfg.max_iter = complete.max_iter ? complete.max_iter : 1000;
                cfg.ridge = complete.ridge;
                report = tmm_complete(data, m, cfg);
                label = Method{Method::Kind::Tmm, cfg.split}.label();
            }
            if (!complete.out.empty()) {
                std::ostringstream s;
                io::format_tensor(s, report.recovered);
                emit(out, complete.out, s.str());
            }
            if (!complete.trace.empty()) {
                std::ostringstream s;
                s << "iteration,epsilon,objective\n";
                for (std::size_t i = 0; i < report.iterations; ++i) {
                    s << i + 1 << ',' << io::format_double(report.epsilon_trace[i]) << ','
                      << io::format_double(report.objective_trace[i]) << '\n';
                }
                emit(out, complete.trace, s.str());
            }
            std::optional<DenseTensor> truth;
            if (!complete.truth.empty()) truth = io::read_tensor(complete.truth);
            emit(out, complete.report, report_text(label, report, truth ? &*truth : nullptr, m));
        } else if (reme_cmd->parsed()) {
            const auto truth = io::read_tensor(reme_args.truth);
            const auto recovered = io::read_tensor(reme_args.recovered);
            const auto m = io::read_mask(reme_args.mask);
            out << io::format_double(reme(truth, recovered, m)) << '\n';
        } else if (sweep_cmd->parsed()) {
            const auto plan = io::read_plan(sweep.plan);
            const auto result = run_sweep(plan);
            std::ostringstream s;
            io::format_sweep_csv(s, result);
            emit(out, sweep.out, s.str());
            if (!sweep.summary.empty()) {
                std::ostringstream sum;
                io::format_summary_csv(sum, summarize(plan, result));
                emit(out, sweep.summary, sum.str());
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace tcam
