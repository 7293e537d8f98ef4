#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "semg/experiment.hpp"
#include "semg/gradcheck.hpp"

namespace {

// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
// error, 4 gradient check above threshold.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitGradFail = 4;

// Flag values are kept as raw strings and pushed through the same
// `key = value` channel as config files, so both paths share one parser and
// one set of diagnostics.  Precedence: defaults < --config < flags.
struct CommonFlags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    void attach(CLI::App* cmd, bool with_lambdas) {
        cmd->add_option("--config", config_path, "key = value file applied before any flag");
        const auto pass = [this](const char* key) {
            return [this, key](const std::string& v) { overrides.emplace_back(key, v); };
        };
        cmd->add_option_function<std::string>(
               "--data", [this](const std::string& v) {
                   overrides.emplace_back("synthetic", "0");
                   overrides.emplace_back("data", v);
               },
               "read trial CSVs from this directory instead of generating data");
        cmd->add_flag_callback(
            "--synthetic", [this] { overrides.emplace_back("synthetic", "1"); },
            "generate the synthetic cohort (default)");
        cmd->add_option_function<std::string>("--classes", pass("classes"), "gesture count: 6 or 10");
        cmd->add_option_function<std::string>("--lambda", pass("csae.lambda"), "L1 activity coefficient");
        cmd->add_option_function<std::string>("--seed", pass("seed"), "master seed (default 42)");
        cmd->add_option_function<std::string>("--out", pass("out"), "output directory (default ./out)");
        cmd->add_option_function<std::string>("--calib-fraction", pass("calib_fraction"),
                                              "share of calibration segments used for fine-tuning");
        cmd->add_option_function<std::string>("--threads", pass("threads"),
                                              "parallel fold/sweep workers, 0 = hardware count");
        if (with_lambdas)
            cmd->add_option_function<std::string>("--lambdas", pass("sweep.lambdas"),
                                                  "comma-separated sweep values");
    }

    semg::RunConfig materialize() const {
        semg::RunConfig cfg;
        if (!config_path.empty()) semg::apply_config_file(cfg, config_path);
        for (const auto& [key, value] : overrides) semg::apply_config_line(cfg, key, value);
        cfg.validate();
        return cfg;
    }
};

// ------------------------------------------------------------- gradcheck --

// One assembled autoencoder plus one assembled classifier at reduced width:
// between them every layer kind (conv, transposed conv, leaky relu, layer
// norm, attention pool, dense, softmax) gets finite-difference coverage.
int run_gradcheck_battery(std::uint64_t base_seed, int rounds) {
    using namespace semg;
    bool all_ok = true;

    const auto print = [&](const std::string& graph_name, std::uint64_t seed, const GradCheckReport& r) {
        std::printf("%s seed %llu: max_rel %.3e over %zu entries%s\n", graph_name.c_str(),
                    static_cast<unsigned long long>(seed), r.max_rel, r.checked,
                    r.passed() ? "" : "  FAIL");
        for (const auto& [layer, rel] : r.per_layer) std::printf("  %-12s %.3e\n", layer.c_str(), rel);
        if (!r.passed()) {
            std::printf("  worst entry: %s\n", r.worst.c_str());
            all_ok = false;
        }
    };

    CsaeConfig acfg;
    acfg.input_len = 60;
    acfg.filters = {4, 5, 3};
    acfg.kernel_sizes = {5, 3, 2};
    acfg.strides = {4, 3, 1};

    ClassifierConfig ccfg;
    ccfg.head_conv_channels = 3;
    ccfg.head_conv_kernel = 2;
    ccfg.head_conv_stride = 1;
    ccfg.mlp_widths = {5, 4};
    ccfg.num_classes = 3;

    for (int round = 0; round < rounds; ++round) {
        const std::uint64_t seed = mix_seed(base_seed, static_cast<std::uint64_t>(round));
        Rng rng(mix_seed(seed, 0xda7aULL));
        Tensor x({acfg.input_len, 2});
        for (double& v : x.data) v = rng.normal();

        ModelGraph ae = build_csae(acfg, seed);
        Tensor target({acfg.input_len, 2});
        for (double& v : target.data) v = rng.normal();
        print("autoencoder", seed, gradient_check(ae, reconstruction_probe(target, 1e-5), x));

        ModelGraph clf = build_classifier(ae, ccfg, mix_seed(seed, 0xc1a55ULL));
        print("classifier", seed, gradient_check(clf, classification_probe(round % ccfg.num_classes), x));
    }
    return all_ok ? 0 : kExitGradFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2-channel sEMG gesture pipeline: sparse conv autoencoder, attention classifier, "
                 "few-shot user adaptation, class expansion, baselines"};
    app.require_subcommand(1);

    int exit_code = 0;
    const auto quiet = [&](const char* line) { std::printf("%s\n", line); };

    // gradcheck ---------------------------------------------------------
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the backward pass");
    auto grad_seed = std::make_shared<std::uint64_t>(42);
    auto grad_rounds = std::make_shared<int>(5);
    grad_cmd->add_option("--seed", *grad_seed, "base seed for the battery");
    grad_cmd->add_option("--rounds", *grad_rounds, "independent seeds to run");
    grad_cmd->callback([&, grad_seed, grad_rounds] {
        exit_code = run_gradcheck_battery(*grad_seed, *grad_rounds);
    });

    // experiment subcommands ---------------------------------------------
    auto gen_flags = std::make_shared<CommonFlags>();
    auto* gen_cmd = app.add_subcommand("gen-synthetic", "write the synthetic cohort as per-subject CSVs");
    gen_flags->attach(gen_cmd, false);
    gen_cmd->callback([&, gen_flags] {
        semg::run_gen_synthetic(gen_flags->materialize());
        quiet("synthetic cohort written");
    });

    auto ae_flags = std::make_shared<CommonFlags>();
    auto* ae_cmd = app.add_subcommand("train-ae", "train the autoencoder on pooled data");
    ae_flags->attach(ae_cmd, false);
    ae_cmd->callback([&, ae_flags] {
        const semg::TrainAeOutcome out = semg::run_train_ae(ae_flags->materialize());
        std::printf("train R2 %.4f  val R2 %.4f  val mean|Z| %.6g  epochs %zu\n", out.train_r2, out.val_r2,
                    out.val_mean_abs_z, out.log.epochs.size());
    });

    auto clf_flags = std::make_shared<CommonFlags>();
    auto* clf_cmd = app.add_subcommand("train-clf", "train autoencoder + classifier on pooled data");
    clf_flags->attach(clf_cmd, false);
    clf_cmd->callback([&, clf_flags] {
        const semg::TrainClfOutcome out = semg::run_train_clf(clf_flags->materialize());
        std::printf("val micro-F1 %.4f", out.val_report.micro);
        if (!out.test_report.per_class.empty()) std::printf("  test micro-F1 %.4f", out.test_report.micro);
        std::printf("  train R2 %.4f\n", out.train_r2);
    });

    auto loso_flags = std::make_shared<CommonFlags>();
    auto* loso_cmd = app.add_subcommand("loso", "leave-one-subject-out protocol with per-fold adaptation");
    loso_flags->attach(loso_cmd, false);
    loso_cmd->callback([&, loso_flags] {
        const semg::LosoOutcome out = semg::run_loso(loso_flags->materialize());
        std::printf("source micro-F1 %.4f  pre-tune %.4f  post-tune %.4f  (%zu folds)\n",
                    out.source_summary.micro.mean, out.pre_summary.micro.mean, out.post_summary.micro.mean,
                    out.folds.size());
    });

    auto tune_flags = std::make_shared<CommonFlags>();
    auto* tune_cmd = app.add_subcommand("finetune", "single-fold calibration fine-tuning demo");
    tune_flags->attach(tune_cmd, false);
    tune_cmd->callback([&, tune_flags] {
        const semg::FoldOutcome out = semg::run_finetune(tune_flags->materialize());
        std::printf("target %d: pre-tune micro-F1 %.4f  post-tune %.4f\n", out.target_subject,
                    out.pre_tune.micro, out.post_tune.micro);
    });

    auto expand_flags = std::make_shared<CommonFlags>();
    auto* expand_cmd = app.add_subcommand("expand", "grow the 6-class head to 10 classes in two phases");
    expand_flags->attach(expand_cmd, false);
    expand_cmd->callback([&, expand_flags] {
        const semg::ExpandOutcome out = semg::run_expand(expand_flags->materialize());
        std::printf("base-6 micro-F1 %.4f  phase I %.4f  phase II %.4f\n", out.base6_test.micro,
                    out.report.phase1_metrics.micro, out.report.phase2_metrics.micro);
    });

    auto sweep_flags = std::make_shared<CommonFlags>();
    auto* sweep_cmd = app.add_subcommand("sweep-lambda", "classification F1 across L1 coefficients");
    sweep_flags->attach(sweep_cmd, true);
    sweep_cmd->callback([&, sweep_flags] {
        const semg::SweepOutcome out = semg::run_sweep(sweep_flags->materialize());
        for (const semg::SweepPoint& p : out.points)
            std::printf("lambda %.3g: test micro-F1 %.4f  mean|Z| %.6g  train R2 %.4f\n", p.lambda,
                        p.test_micro_f1, p.mean_abs_z, p.train_r2);
    });

    auto bench_flags = std::make_shared<CommonFlags>();
    auto* bench_cmd = app.add_subcommand("bench", "method comparison with resource accounting");
    bench_flags->attach(bench_cmd, false);
    bench_cmd->callback([&, bench_flags] {
        const semg::BenchOutcome out = semg::run_bench(bench_flags->materialize());
        for (const semg::BenchRow& r : out.rows)
            std::printf("%-14s micro-F1 %.4f  static %lld B%s  runtime %lld B  flops %lld\n",
                        r.method.c_str(), r.micro_f1, r.static_bytes, r.static_comparable ? "" : "*",
                        r.runtime_bytes, r.flops);
        quiet("* tree-size estimate, not a parameter payload (see resource_rules.txt)");
    });

    // report --------------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "render the CSVs in a results directory as text");
    auto report_dir = std::make_shared<std::string>("out");
    report_cmd->add_option("--out", *report_dir, "results directory to read");
    report_cmd->callback([&, report_dir] { semg::render_report_text(*report_dir, std::cout); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    } catch (const semg::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const semg::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return exit_code;
}
