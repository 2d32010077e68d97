// Command-line front end: closed-form minimizers, subgradient training,
// propositional retrieval and the property-verification suite.

#include "verify_suite.hpp"

#include "subspace/closed_form.hpp"
#include "subspace/descent.hpp"
#include "subspace/errors.hpp"
#include "subspace/kernel.hpp"
#include "subspace/lattice.hpp"
#include "subspace/matrix_io.hpp"
#include "subspace/retrieval.hpp"
#include "subspace/tolerance.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace subspace;

namespace {

// Exit codes: 0 success, 1 usage, 2 rank/shape, 3 divergence,
// 4 basis degeneracy, 5 verification failure.
enum ExitCode {
    kOk = 0,
    kUsage = 1,
    kRankShape = 2,
    kDivergence = 3,
    kBasisDegeneracy = 4,
    kVerifyFailure = 5,
};

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void run_parallel(int jobs, std::size_t count, const std::function<void(std::size_t)> &fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> workers;
    const int n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w]() {
            for (std::size_t i = static_cast<std::size_t>(w); i < count;
                 i += static_cast<std::size_t>(n_workers)) {
                fn(i);
            }
        });
    }
    for (auto &worker : workers) {
        worker.join();
    }
}

Matrix normalized_columns_or_throw(Matrix x) {
    for (Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (norm < 1e-12) {
            throw NormalizationError("embedding column " + std::to_string(j) +
                                     " has zero norm");
        }
        x.col(j) /= norm;
    }
    return x;
}

json spectrum_to_json(const Vector &sv) {
    json out = json::array();
    for (Index i = 0; i < sv.size(); ++i) {
        out.push_back(sv(i));
    }
    return out;
}

struct ClosedFormArgs {
    std::string labels;
    double alpha = 0.99;
    double beta = 0.7;
    std::string variant = "squared";
    Index d = 0; // 0: use the label count
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool expand_minterms = false;
};

int cmd_closed_form(const ClosedFormArgs &args) {
    Stopwatch watch;
    LabelMatrix y(read_matrix_csv(args.labels));
    if (args.expand_minterms) {
        y = minterm_indicator(extract_minterms(y));
    }
    LossConfig cfg{args.alpha, args.beta, loss_variant_from_string(args.variant)};
    if (cfg.variant == LossVariant::SpectralPenalty) {
        cfg.alpha = 1.0;
    }
    const Index d = args.d > 0 ? args.d : y.label_count();

    const MinimizerSpec spec = minimizer(y, d, cfg, args.seed);
    const Matrix x_star = spec.materialize();

    fs::create_directories(args.out_dir);
    const fs::path x_path = fs::path(args.out_dir) / "x_star.csv";
    write_matrix_csv(x_path, x_star);

    const Vector mu = singular_values(y.matrix());
    json report;
    report["command"] = "closed-form";
    report["labels"] = args.labels;
    report["config"] = {{"alpha", cfg.alpha},
                        {"beta", cfg.beta},
                        {"variant", to_string(cfg.variant)},
                        {"d", d},
                        {"expand_minterms", args.expand_minterms}};
    report["seed"] = args.seed;
    if (cfg.variant == LossVariant::NoPenalty) {
        report["t_star"] = nullptr;
        report["scales"] = spec.scales;
    } else {
        report["t_star"] = spec.t_star();
    }
    report["alpha_bound"] = alpha_lower_bound(mu(y.label_count() - 1), y.label_count(), cfg.beta);
    report["min_loss"] = joint_loss(x_star, y, cfg);
    report["wall_time_s"] = watch.seconds();
    report["outputs"] = {x_path.string()};
    std::cout << report.dump(2) << "\n";
    return kOk;
}

struct TrainArgs {
    std::string labels;
    double alpha = 0.99;
    double beta = 0.7;
    std::string variant = "squared";
    Index d = 0;
    int epochs = 2000;
    double lr = 0.05;
    int batch = 0;
    std::uint64_t seed = 0;
    std::vector<int> milestones;
    double decay = 0.5;
    int patience = 50;
    bool backtracking = false;
    std::string baseline;
    std::string out_dir = ".";
};

int write_train_outputs(const Trajectory &traj, const TrainArgs &args, json &report) {
    fs::create_directories(args.out_dir);
    const fs::path x_path = fs::path(args.out_dir) / "x_final.csv";
    const fs::path traj_path = fs::path(args.out_dir) / "trajectory.csv";
    const fs::path gram_path = fs::path(args.out_dir) / "gram.pgm";

    write_matrix_csv(x_path, traj.final);
    write_trajectory_csv(traj_path, traj);

    Matrix normalized = traj.final;
    for (Index j = 0; j < normalized.cols(); ++j) {
        const double norm = normalized.col(j).norm();
        if (norm > 1e-12) {
            normalized.col(j) /= norm;
        }
    }
    write_pgm_heatmap(gram_path, normalized.transpose() * normalized);

    report["outputs"] = {x_path.string(), traj_path.string(), gram_path.string()};
    return kOk;
}

int cmd_train(const TrainArgs &args) {
    Stopwatch watch;
    const LabelMatrix y(read_matrix_csv(args.labels));
    const Index d = args.d > 0 ? args.d : y.label_count();

    DescentConfig dcfg;
    dcfg.step_size = args.lr;
    dcfg.epochs = args.epochs;
    dcfg.batch_size = args.batch;
    dcfg.seed = args.seed;
    dcfg.milestones = args.milestones;
    dcfg.decay = args.decay;
    dcfg.patience = args.patience;
    dcfg.backtracking = args.backtracking;

    json report;
    report["command"] = "train";
    report["labels"] = args.labels;
    report["config"] = {{"alpha", args.alpha},       {"beta", args.beta},
                        {"variant", args.variant},   {"d", d},
                        {"epochs", args.epochs},     {"lr", args.lr},
                        {"batch", args.batch},       {"decay", args.decay},
                        {"patience", args.patience}, {"milestones", args.milestones},
                        {"backtracking", args.backtracking},
                        {"baseline", args.baseline.empty() ? "none" : args.baseline}};
    report["seed"] = args.seed;

    try {
        Trajectory traj;
        if (!args.baseline.empty()) {
            traj = minimize_baseline(y, d, baseline_from_string(args.baseline), dcfg);
        } else {
            LossConfig cfg{args.alpha, args.beta, loss_variant_from_string(args.variant)};
            if (cfg.variant == LossVariant::SpectralPenalty) {
                cfg.alpha = 1.0;
            }
            traj = minimize_loss(y, d, cfg, dcfg);
        }
        write_train_outputs(traj, args, report);
        report["iterations"] = traj.iterations();
        report["final_loss"] = traj.losses.back();
        report["final_spectrum"] = spectrum_to_json(traj.spectra.back());
        report["wall_time_s"] = watch.seconds();
        std::cout << report.dump(2) << "\n";
        return kOk;
    } catch (const DivergenceError &e) {
        // keep the partial trajectory on disk for inspection
        fs::create_directories(args.out_dir);
        const fs::path traj_path = fs::path(args.out_dir) / "trajectory.csv";
        write_trajectory_csv(traj_path, e.prefix());
        report["error"] = e.what();
        report["outputs"] = {traj_path.string()};
        report["wall_time_s"] = watch.seconds();
        std::cout << report.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return kDivergence;
    }
}

struct QueryArgs {
    std::string embeddings;
    std::string labels;
    std::string label_names;
    std::string queries;
    int top_k = 10;
    int jobs = 1;
    std::string out_dir = ".";
};

struct QueryOutcome {
    std::string text;
    bool skipped = false;
    double ap = 0.0;
    double pr_at_k = 0.0;
    int n_relevant = 0;
    std::vector<int> top;
};

int cmd_query(const QueryArgs &args) {
    Stopwatch watch;
    const Matrix x_raw = read_matrix_csv(args.embeddings);
    const LabelMatrix y(read_matrix_csv(args.labels));
    const std::vector<std::string> names = read_lines(args.label_names);
    const std::vector<std::string> query_lines = read_lines(args.queries);

    if (static_cast<Index>(names.size()) != y.label_count()) {
        throw DimensionError("label-names file has " + std::to_string(names.size()) +
                             " names but Y has " + std::to_string(y.label_count()) + " rows");
    }
    if (x_raw.cols() != y.sample_count()) {
        throw DimensionError("embeddings and labels disagree on the sample count");
    }

    const Matrix x = normalized_columns_or_throw(x_raw);
    const MintermTable table = extract_minterms(y);
    const MintermBasis basis = minterm_basis(x, table);

    // Parse everything first so syntax errors surface with their line number.
    std::vector<PropositionAst> asts;
    for (std::size_t line = 0; line < query_lines.size(); ++line) {
        try {
            asts.push_back(parse_proposition(query_lines[line], names));
        } catch (const ParseError &e) {
            throw ParseError("query line " + std::to_string(line + 1) + ": " + e.what(),
                             e.position());
        }
    }

    const int k = std::min<int>(args.top_k, static_cast<int>(y.sample_count()));
    std::vector<QueryOutcome> outcomes(asts.size());
    run_parallel(args.jobs, asts.size(), [&](std::size_t i) {
        QueryOutcome &out = outcomes[i];
        out.text = query_lines[i];

        // ground truth from the true label columns, not from scores
        std::set<int> relevant;
        for (Index col = 0; col < y.sample_count(); ++col) {
            std::vector<std::uint8_t> assignment(static_cast<std::size_t>(y.label_count()));
            for (Index row = 0; row < y.label_count(); ++row) {
                assignment[static_cast<std::size_t>(row)] =
                    y.matrix()(row, col) > 0.5 ? 1 : 0;
            }
            if (asts[i].evaluate(assignment)) {
                relevant.insert(static_cast<int>(col));
            }
        }
        out.n_relevant = static_cast<int>(relevant.size());
        if (relevant.empty()) {
            out.skipped = true;
            return;
        }
        const ProjectionOperator p = projection_operator(to_dnf(asts[i], table), basis);
        const RankedResult ranked = rank_by_query(x, p, query_lines[i]);
        out.ap = average_precision(ranked, relevant);
        out.pr_at_k = precision_at_k(ranked, relevant, k);
        out.top.assign(ranked.indices.begin(), ranked.indices.begin() + k);
    });

    fs::create_directories(args.out_dir);
    const fs::path metrics_path = fs::path(args.out_dir) / "metrics.csv";
    const fs::path topk_path = fs::path(args.out_dir) / "topk.txt";
    {
        std::ofstream metrics(metrics_path);
        metrics << "query,ap,pr_at_k,n_relevant\n";
        std::ofstream topk(topk_path);
        char buf[40];
        for (const auto &out : outcomes) {
            if (out.skipped) {
                continue;
            }
            std::snprintf(buf, sizeof(buf), "%.17g", out.ap);
            metrics << '"' << out.text << "\"," << buf << ",";
            std::snprintf(buf, sizeof(buf), "%.17g", out.pr_at_k);
            metrics << buf << "," << out.n_relevant << "\n";

            topk << out.text << ":";
            for (int idx : out.top) {
                topk << " " << idx;
            }
            topk << "\n";
        }
    }

    double mean_ap = 0.0, mean_pr = 0.0;
    int evaluated = 0, skipped = 0;
    for (const auto &out : outcomes) {
        if (out.skipped) {
            ++skipped;
        } else {
            mean_ap += out.ap;
            mean_pr += out.pr_at_k;
            ++evaluated;
        }
    }
    if (evaluated > 0) {
        mean_ap /= evaluated;
        mean_pr /= evaluated;
    }

    json report;
    report["command"] = "query";
    report["embeddings"] = args.embeddings;
    report["labels"] = args.labels;
    report["config"] = {{"top_k", args.top_k}, {"jobs", args.jobs}};
    report["n_queries"] = query_lines.size();
    report["n_evaluated"] = evaluated;
    report["n_skipped_no_positives"] = skipped;
    report["mean_ap"] = mean_ap;
    report["mean_pr_at_k"] = mean_pr;
    report["wall_time_s"] = watch.seconds();
    report["outputs"] = {metrics_path.string(), topk_path.string()};
    std::cout << report.dump(2) << "\n";
    return kOk;
}

struct VerifyArgs {
    std::string only;
    std::uint64_t seed = 7;
    int trials = 200;
    int jobs = 1;
};

int cmd_verify(const VerifyArgs &args) {
    Stopwatch watch;
    std::vector<verify::Check> selected;
    for (const auto &check : verify::all_checks()) {
        if (args.only.empty() || check.name == args.only) {
            selected.push_back(check);
        }
    }
    if (selected.empty()) {
        std::cerr << "error: no check named '" << args.only << "'; available:\n";
        for (const auto &check : verify::all_checks()) {
            std::cerr << "  " << check.name << "\n";
        }
        return kUsage;
    }

    std::vector<verify::CheckResult> results(selected.size());
    run_parallel(args.jobs, selected.size(),
                 [&](std::size_t i) { results[i] = selected[i].run(args.seed, args.trials); });

    json checks = json::array();
    bool all_pass = true;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const bool pass = results[i].pass;
        all_pass = all_pass && pass;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << selected[i].name << " (" <<
            selected[i].lemma << ")";
        if (!pass) {
            std::cout << ": " << results[i].detail;
        }
        std::cout << "\n";
        checks.push_back({{"name", selected[i].name},
                          {"lemma", selected[i].lemma},
                          {"pass", pass},
                          {"detail", results[i].detail}});
    }

    json report;
    report["command"] = "verify";
    report["config"] = {{"seed", args.seed}, {"trials", args.trials}, {"jobs", args.jobs},
                        {"only", args.only.empty() ? "all" : args.only}};
    report["checks"] = checks;
    report["all_pass"] = all_pass;
    report["wall_time_s"] = watch.seconds();
    std::cout << report.dump(2) << "\n";
    return all_pass ? kOk : kVerifyFailure;
}

int dispatch(const std::function<int()> &body) {
    try {
        return body();
    } catch (const ParseError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidAlpha &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NonDegenerateBlock &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBasisDegeneracy;
    } catch (const BasisMismatch &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBasisDegeneracy;
    } catch (const DivergenceError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDivergence;
    } catch (const Error &e) {
        // rank, shape, spectrum and normalization problems
        std::cerr << "error: " << e.what() << "\n";
        return kRankShape;
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Nuclear-norm subspace representations: closed forms, training, "
                 "propositional retrieval and verification"};
    app.require_subcommand(1);

    // touch the tolerance record early so a malformed SUBSPACE_TOL fails fast
    try {
        tolerances();
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    ClosedFormArgs cf;
    auto *closed_form_cmd =
        app.add_subcommand("closed-form", "Analytic minimizer and t* for a label matrix");
    closed_form_cmd->add_option("--labels", cf.labels, "label matrix CSV")->required();
    closed_form_cmd->add_option("--alpha", cf.alpha, "nuclear-norm weight in (0,1)");
    closed_form_cmd->add_option("--beta", cf.beta, "spectral-penalty weight in (0,1)");
    closed_form_cmd->add_option("--variant", cf.variant, "no-penalty | spectral | squared");
    closed_form_cmd->add_option("--d", cf.d, "embedding dimension (default: label count)");
    closed_form_cmd->add_option("--seed", cf.seed, "seed for the Stiefel frame U");
    closed_form_cmd->add_option("--out-dir", cf.out_dir, "output directory");
    closed_form_cmd->add_flag("--expand-minterms", cf.expand_minterms,
                              "minimize over the minterm-indicator labels (one class per "
                              "observed minterm)");

    TrainArgs tr;
    auto *train_cmd = app.add_subcommand("train", "Subgradient descent on the loss");
    train_cmd->add_option("--labels", tr.labels, "label matrix CSV")->required();
    train_cmd->add_option("--alpha", tr.alpha, "nuclear-norm weight");
    train_cmd->add_option("--beta", tr.beta, "spectral-penalty weight");
    train_cmd->add_option("--variant", tr.variant, "no-penalty | spectral | squared");
    train_cmd->add_option("--d", tr.d, "embedding dimension (default: label count)");
    train_cmd->add_option("--epochs", tr.epochs, "descent epochs");
    train_cmd->add_option("--lr", tr.lr, "step size");
    train_cmd->add_option("--batch", tr.batch, "batch size (0 = full batch)");
    train_cmd->add_option("--seed", tr.seed, "init / sampler seed");
    train_cmd->add_option("--milestones", tr.milestones,
                          "epochs at which the step decays (default: adaptive halving)");
    train_cmd->add_option("--decay", tr.decay, "step decay factor");
    train_cmd->add_option("--patience", tr.patience,
                          "iterations without improvement before adaptive halving");
    train_cmd->add_flag("--backtracking", tr.backtracking,
                        "halve each step until the loss does not increase");
    train_cmd->add_option("--baseline", tr.baseline, "train a baseline instead: ole | mmcr");
    train_cmd->add_option("--out-dir", tr.out_dir, "output directory");

    QueryArgs qu;
    auto *query_cmd =
        app.add_subcommand("query", "Evaluate propositional queries against embeddings");
    query_cmd->add_option("--embeddings", qu.embeddings, "embedding matrix CSV")->required();
    query_cmd->add_option("--labels", qu.labels, "label matrix CSV")->required();
    query_cmd->add_option("--label-names", qu.label_names, "one label name per line")
        ->required();
    query_cmd->add_option("--queries", qu.queries, "one proposition per line")->required();
    query_cmd->add_option("--top-k", qu.top_k, "precision cutoff")
        ->check(CLI::PositiveNumber);
    query_cmd->add_option("--jobs", qu.jobs, "parallel query evaluation")
        ->check(CLI::PositiveNumber);
    query_cmd->add_option("--out-dir", qu.out_dir, "output directory");

    VerifyArgs ve;
    auto *verify_cmd = app.add_subcommand("verify", "Run the property-check suite");
    verify_cmd->add_option("--only", ve.only, "run a single named check");
    verify_cmd->add_option("--seed", ve.seed, "base seed for random instances");
    verify_cmd->add_option("--trials", ve.trials, "instances per check")
        ->check(CLI::PositiveNumber);
    verify_cmd->add_option("--jobs", ve.jobs, "parallel check execution")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage; // --help and --version stay 0
    }

    if (closed_form_cmd->parsed()) {
        return dispatch([&] { return cmd_closed_form(cf); });
    }
    if (train_cmd->parsed()) {
        return dispatch([&] { return cmd_train(tr); });
    }
    if (query_cmd->parsed()) {
        return dispatch([&] { return cmd_query(qu); });
    }
    if (verify_cmd->parsed()) {
        return dispatch([&] { return cmd_verify(ve); });
    }
    return kUsage;
}
