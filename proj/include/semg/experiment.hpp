#pragma once

// Experiment orchestration: the merged run configuration (defaults, config
// file, flag overrides), the LOSO protocol with per-fold user adaptation,
// the sparsity sweep, the 6 -> 10 class-expansion study, the
// method-comparison bench, and the CSV/text report emitters.  Every runner
// is deterministic for a fixed RunConfig: report files are byte-identical
// across repeats.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "semg/adaptation.hpp"
#include "semg/baselines.hpp"
#include "semg/csae.hpp"
#include "semg/synthetic.hpp"

namespace semg {

struct RunConfig {
    bool synthetic = true;
    std::string data_dir;        // CSV directory, read when synthetic is off
    std::string out_dir = "out";
    int classes = 6;             // 6 or 10
    int subjects = 8;            // synthetic cohort size
    int trials = 6;              // synthetic trials per class
    int samples_per_trial = 20000;
    double snr_db = 10.0;
    std::uint64_t seed = 42;
    double calib_fraction = 1.0;  // share of calibration segments handed to fine-tuning
    int threads = 0;              // parallel fold/sweep workers; 0 = hardware count

    CsaeConfig csae;
    ClassifierConfig clf;
    TrainConfig finetune;         // calibration fine-tuning (lr 1e-4)
    FreezePolicy finetune_policy = FreezePolicy::FinalDenseOnly;
    TrainConfig phase1;           // expansion Phase I, new output only (lr 1e-3)
    TrainConfig phase2;           // expansion Phase II, full head (lr 1e-5)
    std::vector<double> sweep_lambdas{0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-3};

    RunConfig();  // wires the derived defaults above
    void validate() const;
};

// Flat `key = value` lines with section prefixes (e.g. `csae.lambda = 1e-7`);
// '#' starts a comment; later keys win.  Unknown keys throw.
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical flat listing of every effective field.  Feeding the text back
// through apply_config_line reproduces the config; every run echoes it to
// <out>/config_effective.txt.
std::string render_config(const RunConfig& cfg);

struct FoldOutcome {
    int target_subject = 0;
    FoldReport source_test;  // sources' held-out trial-6 segments
    FoldReport pre_tune;     // target trials 3-6, before calibration
    FoldReport post_tune;    // same segments, after calibration
    TrainLog ae_log, clf_log, tune_log;
    double train_r2 = 0.0;   // autoencoder reconstruction on its train split
    ModelGraph classifier;   // source-trained model
    ModelGraph tuned;        // after target calibration
    Standardizer stdz;
};

struct LosoOutcome {
    std::vector<FoldOutcome> folds;
    CvSummary source_summary;  // table1
    CvSummary pre_summary;     // table2 "original"
    CvSummary post_summary;    // table2 "finetuned"
};

struct SweepPoint {
    double lambda = 0.0;
    double test_micro_f1 = 0.0;  // fig6
    double mean_abs_z = 0.0;     // sparsity.csv, measured on validation segments
    double train_r2 = 0.0;
};

struct SweepOutcome {
    std::vector<SweepPoint> points;
};

struct ExpandOutcome {
    ExpansionReport report;  // phases + forgetting
    FoldReport base6_test;   // the 6-class model on its own test split
};

struct BenchRow {
    std::string method;
    double micro_f1 = 0.0;
    long long static_bytes = 0;
    long long runtime_bytes = 0;
    long long flops = 0;
    bool static_comparable = true;  // forest pipelines carry an as-serialized
                                    // tree size, not a parameter payload
};

struct BenchOutcome {
    std::vector<BenchRow> rows;  // csae, cae-lambda0, csae-gap, classical-rf, fcae-rf
    double attention_f1 = 0.0;   // the pooling ablation pair
    double gap_f1 = 0.0;
    std::string rules;           // resource counting conventions
};

struct TrainAeOutcome {
    TrainLog log;
    double train_r2 = 0.0;
    double val_r2 = 0.0;
    double val_mean_abs_z = 0.0;
};

struct TrainClfOutcome {
    TrainLog ae_log, clf_log;
    double train_r2 = 0.0;
    FoldReport val_report, test_report;
};

// Each runner executes its experiment and writes reports, logs, checkpoints,
// the effective config, and a run manifest into cfg.out_dir.
LosoOutcome run_loso(const RunConfig& cfg);
SweepOutcome run_sweep(const RunConfig& cfg);
ExpandOutcome run_expand(const RunConfig& cfg);
BenchOutcome run_bench(const RunConfig& cfg);
TrainAeOutcome run_train_ae(const RunConfig& cfg);
TrainClfOutcome run_train_clf(const RunConfig& cfg);
FoldOutcome run_finetune(const RunConfig& cfg);  // one fold, lowest subject as target
void run_gen_synthetic(const RunConfig& cfg);    // per-subject CSVs into out_dir

// Renders every report CSV present in `dir` as text tables with one-decimal
// percent "mean ± SE" cells.
void render_report_text(const std::string& dir, std::ostream& os);

} // namespace semg
