#include "semg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "semg/checkpoint.hpp"
#include "semg/format.hpp"
#include "semg/rng.hpp"

namespace semg {

namespace fs = std::filesystem;

namespace {

// Every trainable stage derives its stream from (run seed, stage tag, fold
// key), so no two stages share draws and adding a stage never shifts
// another's stream.
enum SeedTag : std::uint64_t {
    kSeedAeInit = 1,
    kSeedAeTrain,
    kSeedClfInit,
    kSeedClfTrain,
    kSeedTune,
    kSeedPhase1,
    kSeedPhase2,
    kSeedExpand,
    kSeedFcaeInit,
    kSeedFcaeTrain,
    kSeedForestClassical,
    kSeedForestFcae,
};

std::uint64_t stage_seed(const RunConfig& cfg, SeedTag tag, int key = 0) {
    return mix_seed(cfg.seed, static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(key));
}

// ---------------------------------------------------------------- config --

long long cfg_ll(const std::string& value, const std::string& key) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        throw std::invalid_argument("config: bad integer '" + value + "' for " + key);
    return v;
}

double cfg_f64(const std::string& value, const std::string& key) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        throw std::invalid_argument("config: bad number '" + value + "' for " + key);
    return v;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<double> cfg_f64_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    for (const std::string& part : split_commas(value)) out.push_back(cfg_f64(part, key));
    return out;
}

template <std::size_t N>
std::array<int, N> cfg_int_array(const std::string& value, const std::string& key) {
    const std::vector<std::string> parts = split_commas(value);
    if (parts.size() != N)
        throw std::invalid_argument("config: " + key + " expects " + std::to_string(N) + " comma-separated values");
    std::array<int, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<int>(cfg_ll(parts[i], key));
    return out;
}

bool apply_train_key(TrainConfig& t, const std::string& sub, const std::string& value, const std::string& key) {
    if (sub == "lr") t.learning_rate = cfg_f64(value, key);
    else if (sub == "batch") t.batch_size = static_cast<int>(cfg_ll(value, key));
    else if (sub == "epochs") t.max_epochs = static_cast<int>(cfg_ll(value, key));
    else if (sub == "early_stop") t.early_stop_patience = static_cast<int>(cfg_ll(value, key));
    else if (sub == "plateau") t.plateau_patience = static_cast<int>(cfg_ll(value, key));
    else if (sub == "plateau_factor") t.plateau_factor = cfg_f64(value, key);
    else if (sub == "min_lr") t.min_lr = cfg_f64(value, key);
    else return false;
    return true;
}

std::string render_train(const std::string& prefix, const TrainConfig& t) {
    std::string s;
    s += prefix + ".lr = " + g17(t.learning_rate) + "\n";
    s += prefix + ".batch = " + std::to_string(t.batch_size) + "\n";
    s += prefix + ".epochs = " + std::to_string(t.max_epochs) + "\n";
    s += prefix + ".early_stop = " + std::to_string(t.early_stop_patience) + "\n";
    s += prefix + ".plateau = " + std::to_string(t.plateau_patience) + "\n";
    s += prefix + ".plateau_factor = " + g17(t.plateau_factor) + "\n";
    s += prefix + ".min_lr = " + g17(t.min_lr) + "\n";
    return s;
}

// ------------------------------------------------------------- parallelism --

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw > 0 ? static_cast<int>(hw) : 1;
    }
    threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (err) return;  // a sibling already failed; stop picking up work
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// ------------------------------------------------------------- data prep --

std::vector<TrialRecording> load_or_generate(const RunConfig& cfg, int classes) {
    std::vector<TrialRecording> recs;
    if (cfg.synthetic) {
        SyntheticConfig sc;
        sc.samples_per_trial = cfg.samples_per_trial;
        sc.snr_db = cfg.snr_db;
        recs = generate_synthetic_dataset(cfg.subjects, classes, cfg.trials, cfg.seed, sc);
    } else {
        recs = load_dataset_dir(cfg.data_dir);
        std::erase_if(recs, [classes](const TrialRecording& r) { return r.movement >= classes; });
        if (recs.empty())
            throw DataError("no recordings with movement < " + std::to_string(classes) + " in " + cfg.data_dir);
    }
    return recs;
}

std::vector<int> subject_ids(const std::vector<TrialRecording>& recs) {
    std::vector<int> ids;
    for (const TrialRecording& r : recs) ids.push_back(r.subject);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

template <typename Pred>
SegmentSet filter_set(const SegmentSet& all, Pred keep) {
    SegmentSet out;
    out.window = all.window;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (keep(all.labels[i], all.provenance[i])) {
            out.segments.push_back(all.segments[i]);
            out.labels.push_back(all.labels[i]);
            out.provenance.push_back(all.provenance[i]);
        }
    return out;
}

// First ceil(fraction * n) segments of every class, in set order — the
// deterministic few-shot budget knob.
SegmentSet subsample_calib(const SegmentSet& set, double fraction) {
    if (fraction >= 1.0) return set;
    std::map<int, long long> total, kept;
    for (int label : set.labels) ++total[label];
    SegmentSet out;
    out.window = set.window;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const int label = set.labels[i];
        const long long budget =
            std::max<long long>(1, static_cast<long long>(std::ceil(fraction * static_cast<double>(total[label]))));
        if (kept[label] >= budget) continue;
        ++kept[label];
        out.segments.push_back(set.segments[i]);
        out.labels.push_back(label);
        out.provenance.push_back(set.provenance[i]);
    }
    return out;
}

struct FoldData {
    SegmentSet train, val, test, calib, calib_val, adapt_test;
    Standardizer stdz;
};

FoldData prepare_fold(const SegmentSet& all, const SplitPlan& plan, double calib_fraction) {
    const auto by_role = [&](TrialRole r) { return plan.select(all, r); };
    FoldData d;
    const SegmentSet train_raw = by_role(TrialRole::Train);
    d.stdz = fit_standardizer(train_raw, "fold target " + std::to_string(plan.target_subject) +
                                             ": source trials 1-4");
    d.train = apply_standardizer(d.stdz, train_raw, SplitUse::Fit);
    d.val = apply_standardizer(d.stdz, by_role(TrialRole::Val), SplitUse::Evaluation);
    d.test = apply_standardizer(d.stdz, by_role(TrialRole::Test), SplitUse::Evaluation);
    d.calib = subsample_calib(apply_standardizer(d.stdz, by_role(TrialRole::Calib), SplitUse::Evaluation),
                              calib_fraction);
    d.calib_val = apply_standardizer(d.stdz, by_role(TrialRole::CalibVal), SplitUse::Evaluation);
    d.adapt_test = apply_standardizer(d.stdz, by_role(TrialRole::AdaptTest), SplitUse::Evaluation);
    return d;
}

// Pooled (non-LOSO) split by trial index: last trial = test, the one before
// it = validation, the rest = train.  With only two trials: train/val.
struct PooledData {
    SegmentSet train, val, test;  // test empty when trials < 3
    Standardizer stdz;
};

PooledData prepare_pooled(const SegmentSet& all) {
    int tmax = 0;
    for (const SegmentOrigin& o : all.provenance) tmax = std::max(tmax, o.trial);
    if (tmax < 2) throw DataError("protocol needs at least 2 trials per class, found " + std::to_string(tmax));
    const int val_trial = tmax >= 3 ? tmax - 1 : tmax;
    const int train_hi = val_trial - 1;

    PooledData d;
    const SegmentSet train_raw =
        filter_set(all, [&](int, const SegmentOrigin& o) { return o.trial <= train_hi; });
    d.stdz = fit_standardizer(train_raw, "trials 1-" + std::to_string(train_hi) + " of all subjects");
    d.train = apply_standardizer(d.stdz, train_raw, SplitUse::Fit);
    d.val = apply_standardizer(
        d.stdz, filter_set(all, [&](int, const SegmentOrigin& o) { return o.trial == val_trial; }),
        SplitUse::Evaluation);
    if (tmax >= 3)
        d.test = apply_standardizer(
            d.stdz, filter_set(all, [&](int, const SegmentOrigin& o) { return o.trial == tmax; }),
            SplitUse::Evaluation);
    return d;
}

// ------------------------------------------------------------- emitters --

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open '" + path.string() + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) throw DataError("write to '" + path.string() + "' failed");
}

std::string se_cell(const MeanSe& m) { return m.has_se ? g17(m.se) : ""; }

std::string csv_table1(const CvSummary& s, const MeanSe& macro) {
    std::string csv = "class,f1_mean,f1_se\n";
    for (std::size_t c = 0; c < s.per_class_f1.size(); ++c)
        csv += class_label(static_cast<int>(c)) + "," + g17(s.per_class_f1[c].mean) + "," +
               se_cell(s.per_class_f1[c]) + "\n";
    csv += "micro-average," + g17(s.micro.mean) + "," + se_cell(s.micro) + "\n";
    csv += "macro-average," + g17(macro.mean) + "," + se_cell(macro) + "\n";
    return csv;
}

std::string csv_table2(const CvSummary& pre, const CvSummary& post) {
    std::string csv = "class,f1_original,se_original,f1_finetuned,se_finetuned\n";
    for (std::size_t c = 0; c < pre.per_class_f1.size(); ++c)
        csv += class_label(static_cast<int>(c)) + "," + g17(pre.per_class_f1[c].mean) + "," +
               se_cell(pre.per_class_f1[c]) + "," + g17(post.per_class_f1[c].mean) + "," +
               se_cell(post.per_class_f1[c]) + "\n";
    csv += "micro-average," + g17(pre.micro.mean) + "," + se_cell(pre.micro) + "," + g17(post.micro.mean) +
           "," + se_cell(post.micro) + "\n";
    return csv;
}

std::string csv_table3(const FoldReport& p1, const FoldReport& p2) {
    std::string csv = "class,f1_phase1,se_phase1,f1_phase2,se_phase2\n";
    for (std::size_t c = 0; c < p1.per_class.size(); ++c)
        csv += class_label(static_cast<int>(c)) + "," + g17(p1.per_class[c].f1) + ",," +
               g17(p2.per_class[c].f1) + ",\n";
    csv += "micro-average," + g17(p1.micro) + ",," + g17(p2.micro) + ",\n";
    return csv;
}

std::string csv_fig7(const ForgettingReport& f) {
    std::string csv = "class,f1_before,f1_after\n";
    for (std::size_t c = 0; c < f.f1_before.size(); ++c)
        csv += class_label(static_cast<int>(c)) + "," + g17(f.f1_before[c]) + "," + g17(f.f1_after[c]) + "\n";
    return csv;
}

MeanSe mean_se_of(const std::vector<double>& v) {
    MeanSe m;
    if (v.empty()) return m;
    double sum = 0.0;
    for (double x : v) sum += x;
    m.mean = sum / static_cast<double>(v.size());
    if (v.size() >= 2) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        m.se = sd / std::sqrt(static_cast<double>(v.size()));
        m.has_se = true;
    }
    return m;
}

MeanSe macro_f1_over_folds(const std::vector<FoldReport>& folds) {
    std::vector<double> macros;
    for (const FoldReport& f : folds) {
        double sum = 0.0;
        for (const ClassPRF& p : f.per_class) sum += p.f1;
        macros.push_back(sum / static_cast<double>(f.per_class.size()));
    }
    return mean_se_of(macros);
}

class RunDir {
public:
    RunDir(const RunConfig& cfg, std::string command)
        : cfg_(cfg), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
        fs::create_directories(cfg.out_dir);
        emit("config_effective.txt", render_config(cfg));
    }

    void emit(const std::string& name, const std::string& content) {
        write_text_file(fs::path(cfg_.out_dir) / name, content);
        files_.push_back(name);
    }

    // Record a file some other writer already produced in out_dir.
    void note(const std::string& name) { files_.push_back(name); }

    void emit_log(const std::string& name, const TrainLog& log) {
        std::ostringstream os;
        log.write_csv(os);
        emit(name, os.str());
    }

    void emit_checkpoint(const std::string& name, const ModelGraph& graph, const Standardizer& stdz,
                         int num_classes) {
        CheckpointMeta meta;
        meta.seed = cfg_.seed;
        meta.lambda = cfg_.csae.lambda;
        for (int c = 0; c < num_classes; ++c) meta.labels.push_back(class_label(c));
        save_checkpoint(graph, stdz, meta, (fs::path(cfg_.out_dir) / name).string());
        files_.push_back(name);
    }

    // The manifest carries wall-clock, so it is the one deliberately
    // non-reproducible file; every report listed in it is byte-stable.
    void finish() {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::string m;
        m += "command = " + command_ + "\n";
        m += "checkpoint_format = SEMGCKPT v1\n";
        m += "seed = " + std::to_string(cfg_.seed) + "\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", seconds);
        m += "wall_clock_seconds = " + std::string(buf) + "\n";
        m += "note = forest static_bytes are an as-serialized tree-size estimate, not a parameter payload; "
             "flagged non-comparable in table4\n";
        for (const std::string& f : files_) m += "file = " + f + "\n";
        write_text_file(fs::path(cfg_.out_dir) / "run_manifest.txt", m);
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> files_;
};

// ------------------------------------------------------------ fold runner --

FoldOutcome run_one_fold(const RunConfig& cfg, const SegmentSet& all, const SplitPlan& plan) {
    const int target = plan.target_subject;
    FoldData d = prepare_fold(all, plan, cfg.calib_fraction);

    CsaeConfig acfg = cfg.csae;
    acfg.train.seed = stage_seed(cfg, kSeedAeTrain, target);
    ModelGraph ae = build_csae(acfg, stage_seed(cfg, kSeedAeInit, target));

    FoldOutcome fo;
    fo.target_subject = target;
    fo.stdz = d.stdz;
    fo.ae_log = train_autoencoder(ae, d.train, d.val, acfg);
    fo.train_r2 = reconstruct_r2(ae, d.train);

    ClassifierConfig ccfg = cfg.clf;
    ccfg.num_classes = cfg.classes;
    ccfg.train.seed = stage_seed(cfg, kSeedClfTrain, target);
    ModelGraph clf = build_classifier(ae, ccfg, stage_seed(cfg, kSeedClfInit, target));
    fo.clf_log = train_classifier(clf, d.train, d.val, ccfg);

    fo.source_test = make_fold_report(d.test.labels, predict_labels(clf, d.test), cfg.classes, target);
    fo.pre_tune = make_fold_report(d.adapt_test.labels, predict_labels(clf, d.adapt_test), cfg.classes, target);
    fo.classifier = clf;

    ClassifierConfig tcfg = ccfg;
    tcfg.train = cfg.finetune;
    tcfg.train.seed = stage_seed(cfg, kSeedTune, target);
    fo.tune_log = finetune_user(clf, d.calib, d.calib_val, cfg.finetune_policy, tcfg);
    fo.post_tune = make_fold_report(d.adapt_test.labels, predict_labels(clf, d.adapt_test), cfg.classes, target);
    fo.tuned = std::move(clf);
    return fo;
}

} // namespace

// ---------------------------------------------------------------- config --

RunConfig::RunConfig() {
    finetune.learning_rate = 1e-4;  // 10x below the base rate
    phase1.learning_rate = 1e-3;
    phase2.learning_rate = 1e-5;  // "significantly lower" for the full-head pass
    phase2.min_lr = 1e-7;
    finetune.min_lr = 1e-6;
    phase1.min_lr = 1e-6;
}

void RunConfig::validate() const {
    if (classes != 6 && classes != 10)
        throw std::invalid_argument("config: classes must be 6 or 10, got " + std::to_string(classes));
    if (!synthetic && data_dir.empty())
        throw std::invalid_argument("config: a data directory is required when synthetic is off");
    if (subjects < 2) throw std::invalid_argument("config: subjects must be >= 2");
    if (trials < 2 || trials > 6) throw std::invalid_argument("config: trials must be in 2..6");
    if (samples_per_trial < 1000)
        throw std::invalid_argument("config: samples_per_trial must cover at least one window (1000)");
    if (snr_db <= 0.0) throw std::invalid_argument("config: snr_db must be > 0");
    if (calib_fraction <= 0.0 || calib_fraction > 1.0)
        throw std::invalid_argument("config: calib_fraction must be in (0, 1]");
    if (out_dir.empty()) throw std::invalid_argument("config: out directory must be set");
    if (sweep_lambdas.empty()) throw std::invalid_argument("config: sweep.lambdas must be non-empty");
    for (double l : sweep_lambdas)
        if (l < 0.0) throw std::invalid_argument("config: sweep lambdas must be >= 0");
    csae.validate();
    clf.validate();
    finetune.validate();
    phase1.validate();
    phase2.validate();
}

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    const std::size_t dot = key.find('.');
    const std::string section = dot == std::string::npos ? key : key.substr(0, dot);
    const std::string sub = dot == std::string::npos ? std::string() : key.substr(dot + 1);

    if (dot == std::string::npos) {
        if (key == "synthetic") cfg.synthetic = cfg_ll(value, key) != 0;
        else if (key == "data") cfg.data_dir = value;
        else if (key == "out") cfg.out_dir = value;
        else if (key == "classes") cfg.classes = static_cast<int>(cfg_ll(value, key));
        else if (key == "subjects") cfg.subjects = static_cast<int>(cfg_ll(value, key));
        else if (key == "trials") cfg.trials = static_cast<int>(cfg_ll(value, key));
        else if (key == "samples_per_trial") cfg.samples_per_trial = static_cast<int>(cfg_ll(value, key));
        else if (key == "snr_db") cfg.snr_db = cfg_f64(value, key);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(cfg_ll(value, key));
        else if (key == "calib_fraction") cfg.calib_fraction = cfg_f64(value, key);
        else if (key == "threads") cfg.threads = static_cast<int>(cfg_ll(value, key));
        else throw std::invalid_argument("config: unknown key '" + key + "'");
        return;
    }

    if (section == "csae") {
        if (sub == "filters") cfg.csae.filters = cfg_int_array<3>(value, key);
        else if (sub == "kernels") cfg.csae.kernel_sizes = cfg_int_array<3>(value, key);
        else if (sub == "strides") cfg.csae.strides = cfg_int_array<3>(value, key);
        else if (sub == "alpha") cfg.csae.alpha = cfg_f64(value, key);
        else if (sub == "lambda") cfg.csae.lambda = cfg_f64(value, key);
        else if (!apply_train_key(cfg.csae.train, sub, value, key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
        return;
    }
    if (section == "clf") {
        if (sub == "head_channels") cfg.clf.head_conv_channels = static_cast<int>(cfg_ll(value, key));
        else if (sub == "head_kernel") cfg.clf.head_conv_kernel = static_cast<int>(cfg_ll(value, key));
        else if (sub == "head_stride") cfg.clf.head_conv_stride = static_cast<int>(cfg_ll(value, key));
        else if (sub == "mlp") {
            const std::array<int, 2> widths = cfg_int_array<2>(value, key);
            cfg.clf.mlp_widths = widths;
        } else if (sub == "alpha") cfg.clf.alpha = cfg_f64(value, key);
        else if (!apply_train_key(cfg.clf.train, sub, value, key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
        return;
    }
    if (section == "finetune") {
        if (sub == "policy") cfg.finetune_policy = freeze_policy_from_name(value);
        else if (!apply_train_key(cfg.finetune, sub, value, key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
        return;
    }
    if (section == "phase1") {
        if (!apply_train_key(cfg.phase1, sub, value, key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
        return;
    }
    if (section == "phase2") {
        if (!apply_train_key(cfg.phase2, sub, value, key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
        return;
    }
    if (section == "sweep") {
        if (sub == "lambdas") cfg.sweep_lambdas = cfg_f64_list(value, key);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
        return;
    }
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        const std::size_t sep = line.find('=');
        if (sep == std::string::npos)
            throw std::invalid_argument("config: " + path + ":" + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + line + "'");
        std::string key = line.substr(0, sep);
        std::string value = line.substr(sep + 1);
        const auto trim = [](std::string& s) {
            const std::size_t b2 = s.find_first_not_of(" \t");
            const std::size_t e2 = s.find_last_not_of(" \t");
            s = b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
        };
        trim(key);
        trim(value);
        if (key.empty())
            throw std::invalid_argument("config: " + path + ":" + std::to_string(line_no) + ": empty key");
        apply_config_line(cfg, key, value);
    }
}

std::string render_config(const RunConfig& cfg) {
    std::string s;
    s += "synthetic = " + std::to_string(cfg.synthetic ? 1 : 0) + "\n";
    s += "data = " + cfg.data_dir + "\n";
    s += "out = " + cfg.out_dir + "\n";
    s += "classes = " + std::to_string(cfg.classes) + "\n";
    s += "subjects = " + std::to_string(cfg.subjects) + "\n";
    s += "trials = " + std::to_string(cfg.trials) + "\n";
    s += "samples_per_trial = " + std::to_string(cfg.samples_per_trial) + "\n";
    s += "snr_db = " + g17(cfg.snr_db) + "\n";
    s += "seed = " + std::to_string(cfg.seed) + "\n";
    s += "calib_fraction = " + g17(cfg.calib_fraction) + "\n";
    s += "threads = " + std::to_string(cfg.threads) + "\n";
    s += "csae.filters = " + std::to_string(cfg.csae.filters[0]) + "," + std::to_string(cfg.csae.filters[1]) +
         "," + std::to_string(cfg.csae.filters[2]) + "\n";
    s += "csae.kernels = " + std::to_string(cfg.csae.kernel_sizes[0]) + "," +
         std::to_string(cfg.csae.kernel_sizes[1]) + "," + std::to_string(cfg.csae.kernel_sizes[2]) + "\n";
    s += "csae.strides = " + std::to_string(cfg.csae.strides[0]) + "," + std::to_string(cfg.csae.strides[1]) +
         "," + std::to_string(cfg.csae.strides[2]) + "\n";
    s += "csae.alpha = " + g17(cfg.csae.alpha) + "\n";
    s += "csae.lambda = " + g17(cfg.csae.lambda) + "\n";
    s += render_train("csae", cfg.csae.train);
    s += "clf.head_channels = " + std::to_string(cfg.clf.head_conv_channels) + "\n";
    s += "clf.head_kernel = " + std::to_string(cfg.clf.head_conv_kernel) + "\n";
    s += "clf.head_stride = " + std::to_string(cfg.clf.head_conv_stride) + "\n";
    s += "clf.mlp = " + std::to_string(cfg.clf.mlp_widths[0]) + "," + std::to_string(cfg.clf.mlp_widths[1]) +
         "\n";
    s += "clf.alpha = " + g17(cfg.clf.alpha) + "\n";
    s += render_train("clf", cfg.clf.train);
    s += "finetune.policy = " + std::string(freeze_policy_name(cfg.finetune_policy)) + "\n";
    s += render_train("finetune", cfg.finetune);
    s += render_train("phase1", cfg.phase1);
    s += render_train("phase2", cfg.phase2);
    s += "sweep.lambdas = ";
    for (std::size_t i = 0; i < cfg.sweep_lambdas.size(); ++i)
        s += (i ? "," : "") + g17(cfg.sweep_lambdas[i]);
    s += "\n";
    return s;
}

// --------------------------------------------------------------- runners --

LosoOutcome run_loso(const RunConfig& cfg) {
    cfg.validate();
    RunDir dir(cfg, "loso");
    const std::vector<TrialRecording> recs = load_or_generate(cfg, cfg.classes);
    const SegmentSet all = segment_all(recs);
    const std::vector<SplitPlan> plans = plan_loso(subject_ids(recs));

    LosoOutcome out;
    out.folds.resize(plans.size());
    parallel_for(plans.size(), cfg.threads,
                 [&](std::size_t f) { out.folds[f] = run_one_fold(cfg, all, plans[f]); });

    std::vector<FoldReport> src, pre, post;
    for (const FoldOutcome& fo : out.folds) {
        src.push_back(fo.source_test);
        pre.push_back(fo.pre_tune);
        post.push_back(fo.post_tune);
    }
    out.source_summary = cv_aggregate(src);
    out.pre_summary = cv_aggregate(pre);
    out.post_summary = cv_aggregate(post);

    dir.emit("table1.csv", csv_table1(out.source_summary, macro_f1_over_folds(src)));
    dir.emit("table2.csv", csv_table2(out.pre_summary, out.post_summary));
    for (const FoldOutcome& fo : out.folds) {
        const std::string tag = "fold" + std::to_string(fo.target_subject);
        dir.emit_log(tag + "_ae_log.csv", fo.ae_log);
        dir.emit_log(tag + "_clf_log.csv", fo.clf_log);
        dir.emit_log(tag + "_tune_log.csv", fo.tune_log);
        dir.emit_checkpoint(tag + "_classifier.ckpt", fo.classifier, fo.stdz, cfg.classes);
        dir.emit_checkpoint(tag + "_tuned.ckpt", fo.tuned, fo.stdz, cfg.classes);
    }
    dir.finish();
    return out;
}

SweepOutcome run_sweep(const RunConfig& cfg) {
    cfg.validate();
    RunDir dir(cfg, "sweep-lambda");
    const std::vector<TrialRecording> recs = load_or_generate(cfg, cfg.classes);
    const PooledData d = prepare_pooled(segment_all(recs));
    if (d.test.empty()) throw DataError("sweep-lambda needs a test trial (3+ trials per class)");

    SweepOutcome out;
    out.points.resize(cfg.sweep_lambdas.size());
    // Same seeds and data at every point: lambda is the only moving part.
    parallel_for(out.points.size(), cfg.threads, [&](std::size_t i) {
        CsaeConfig acfg = cfg.csae;
        acfg.lambda = cfg.sweep_lambdas[i];
        acfg.train.seed = stage_seed(cfg, kSeedAeTrain);
        ModelGraph ae = build_csae(acfg, stage_seed(cfg, kSeedAeInit));
        train_autoencoder(ae, d.train, d.val, acfg);

        ClassifierConfig ccfg = cfg.clf;
        ccfg.num_classes = cfg.classes;
        ccfg.train.seed = stage_seed(cfg, kSeedClfTrain);
        ModelGraph clf = build_classifier(ae, ccfg, stage_seed(cfg, kSeedClfInit));
        train_classifier(clf, d.train, d.val, ccfg);

        SweepPoint& p = out.points[i];
        p.lambda = acfg.lambda;
        p.mean_abs_z = mean_abs_latent(ae, d.val);
        p.train_r2 = reconstruct_r2(ae, d.train);
        p.test_micro_f1 = micro_f1(confusion(d.test.labels, predict_labels(clf, d.test), cfg.classes));
    });

    std::string fig6 = "lambda,f1\n";
    std::string sparsity = "lambda,mean_abs_z,train_r2\n";
    for (const SweepPoint& p : out.points) {
        fig6 += g17(p.lambda) + "," + g17(p.test_micro_f1) + "\n";
        sparsity += g17(p.lambda) + "," + g17(p.mean_abs_z) + "," + g17(p.train_r2) + "\n";
    }
    dir.emit("fig6.csv", fig6);
    dir.emit("sparsity.csv", sparsity);
    dir.finish();
    return out;
}

ExpandOutcome run_expand(const RunConfig& cfg) {
    cfg.validate();
    RunDir dir(cfg, "expand");
    // Class streams are keyed by class id, so the 10-class cohort contains
    // the 6-class one verbatim: generate once, filter for the base phase.
    const std::vector<TrialRecording> recs = load_or_generate(cfg, 10);
    const SegmentSet all10 = segment_all(recs);
    const SegmentSet all6 = filter_set(all10, [](int label, const SegmentOrigin&) { return label < 6; });

    int tmax = 0;
    for (const SegmentOrigin& o : all10.provenance) tmax = std::max(tmax, o.trial);
    if (tmax < 3) throw DataError("expand needs 3+ trials per class");
    const auto in_train = [&](int, const SegmentOrigin& o) { return o.trial <= tmax - 2; };
    const auto in_val = [&](int, const SegmentOrigin& o) { return o.trial == tmax - 1; };
    const auto in_test = [&](int, const SegmentOrigin& o) { return o.trial == tmax; };

    // The deployed preprocessing is the base model's: fitted on the 6-class
    // train split and reused, unrefitted, for the 10-class continuation.
    const SegmentSet train6_raw = filter_set(all6, in_train);
    const Standardizer stdz = fit_standardizer(train6_raw, "6-class trials 1-" + std::to_string(tmax - 2));
    const SegmentSet train6 = apply_standardizer(stdz, train6_raw, SplitUse::Fit);
    const SegmentSet val6 = apply_standardizer(stdz, filter_set(all6, in_val), SplitUse::Evaluation);
    const SegmentSet test6 = apply_standardizer(stdz, filter_set(all6, in_test), SplitUse::Evaluation);
    // The 10-class train split shares (subject, trial) origins with the fit
    // split by construction — it extends it with new classes.
    const SegmentSet train10 = apply_standardizer(stdz, filter_set(all10, in_train), SplitUse::Fit);
    const SegmentSet val10 = apply_standardizer(stdz, filter_set(all10, in_val), SplitUse::Evaluation);
    const SegmentSet test10 = apply_standardizer(stdz, filter_set(all10, in_test), SplitUse::Evaluation);

    CsaeConfig acfg = cfg.csae;
    acfg.train.seed = stage_seed(cfg, kSeedAeTrain);
    ModelGraph ae = build_csae(acfg, stage_seed(cfg, kSeedAeInit));
    const TrainLog ae_log = train_autoencoder(ae, train6, val6, acfg);

    ClassifierConfig ccfg = cfg.clf;
    ccfg.num_classes = 6;
    ccfg.train.seed = stage_seed(cfg, kSeedClfTrain);
    ModelGraph clf6 = build_classifier(ae, ccfg, stage_seed(cfg, kSeedClfInit));
    const TrainLog clf_log = train_classifier(clf6, train6, val6, ccfg);

    ExpandOutcome out;
    out.base6_test = make_fold_report(test6.labels, predict_labels(clf6, test6), 6, 0);

    ModelGraph clf10 = expand_head(clf6, 10, stage_seed(cfg, kSeedExpand));
    ClassifierConfig p1 = ccfg;
    p1.num_classes = 10;
    p1.train = cfg.phase1;
    p1.train.seed = stage_seed(cfg, kSeedPhase1);
    ClassifierConfig p2 = p1;
    p2.train = cfg.phase2;
    p2.train.seed = stage_seed(cfg, kSeedPhase2);
    out.report = train_two_phase(clf10, train10, val10, test10, p1, p2);
    out.report.forgetting = forgetting_report(clf6, clf10, test6);

    dir.emit_log("ae_log.csv", ae_log);
    dir.emit_log("clf6_log.csv", clf_log);
    dir.emit_log("phase1_log.csv", out.report.phase1_log);
    dir.emit_log("phase2_log.csv", out.report.phase2_log);
    dir.emit("table3.csv", csv_table3(out.report.phase1_metrics, out.report.phase2_metrics));
    dir.emit("fig7.csv", csv_fig7(out.report.forgetting));
    dir.emit_checkpoint("classifier6.ckpt", clf6, stdz, 6);
    dir.emit_checkpoint("classifier10.ckpt", clf10, stdz, 10);
    dir.finish();
    return out;
}

BenchOutcome run_bench(const RunConfig& cfg) {
    cfg.validate();
    RunDir dir(cfg, "bench");
    const std::vector<TrialRecording> recs = load_or_generate(cfg, cfg.classes);
    const PooledData d = prepare_pooled(segment_all(recs));
    if (d.test.empty()) throw DataError("bench needs a test trial (3+ trials per class)");
    const int k = cfg.classes;

    const auto clf_micro = [&](const ModelGraph& clf) {
        return micro_f1(confusion(d.test.labels, predict_labels(clf, d.test), k));
    };

    BenchOutcome out;

    // Sparse convolutional pipeline (the deployed artifact is encoder+head;
    // the decoder never ships).
    CsaeConfig acfg = cfg.csae;
    acfg.train.seed = stage_seed(cfg, kSeedAeTrain);
    ModelGraph ae = build_csae(acfg, stage_seed(cfg, kSeedAeInit));
    train_autoencoder(ae, d.train, d.val, acfg);

    ClassifierConfig ccfg = cfg.clf;
    ccfg.num_classes = k;
    ccfg.train.seed = stage_seed(cfg, kSeedClfTrain);
    ModelGraph clf = build_classifier(ae, ccfg, stage_seed(cfg, kSeedClfInit));
    train_classifier(clf, d.train, d.val, ccfg);
    const ResourceReport clf_res = resource_report(clf);
    out.rules = clf_res.rules;
    out.attention_f1 = clf_micro(clf);
    out.rows.push_back({"csae", out.attention_f1, clf_res.static_bytes, clf_res.runtime_bytes, clf_res.flops, true});

    // Same pipeline without the activity penalty.
    CsaeConfig acfg0 = acfg;
    acfg0.lambda = 0.0;
    ModelGraph ae0 = build_csae(acfg0, stage_seed(cfg, kSeedAeInit));
    train_autoencoder(ae0, d.train, d.val, acfg0);
    ModelGraph clf0 = build_classifier(ae0, ccfg, stage_seed(cfg, kSeedClfInit));
    train_classifier(clf0, d.train, d.val, ccfg);
    out.rows.push_back({"cae-lambda0", clf_micro(clf0), clf_res.static_bytes, clf_res.runtime_bytes,
                        clf_res.flops, true});

    // Pooling ablation: identical draws, mean pooling instead of attention.
    ModelGraph gap = gap_head_variant(ae, ccfg, stage_seed(cfg, kSeedClfInit));
    train_classifier(gap, d.train, d.val, ccfg);
    out.gap_f1 = clf_micro(gap);
    out.rows.push_back({"csae-gap", out.gap_f1, clf_res.static_bytes, clf_res.runtime_bytes, clf_res.flops, true});

    // Classical features + forest.
    {
        const std::vector<std::vector<double>> ftrain = classical_feature_matrix(d.train);
        const std::vector<std::vector<double>> ftest = classical_feature_matrix(d.test);
        const ForestModel forest =
            forest_fit(ftrain, d.train.labels, 100, 12, stage_seed(cfg, kSeedForestClassical));
        const double f1 = micro_f1(confusion(d.test.labels, forest_predict(forest, ftest), k));
        BenchRow row;
        row.method = "classical-rf";
        row.micro_f1 = f1;
        row.static_bytes = forest_static_bytes(forest);
        row.runtime_bytes = 4LL * (static_cast<long long>(d.train.window) * 2 + static_cast<long long>(ftrain[0].size()));
        row.flops = classical_feature_flops(1000, 2) + forest_inference_flops(forest);
        row.static_comparable = false;
        out.rows.push_back(row);
    }

    // Fully-connected autoencoder features + forest.
    {
        const std::vector<Tensor> train_flat = flatten_segments(d.train);
        const std::vector<Tensor> val_flat = flatten_segments(d.val);
        const std::vector<Tensor> test_flat = flatten_segments(d.test);
        ModelGraph fcae = build_fcae({512}, 128, stage_seed(cfg, kSeedFcaeInit), 2000);
        TrainConfig ftrain_cfg = cfg.csae.train;
        ftrain_cfg.seed = stage_seed(cfg, kSeedFcaeTrain);
        train_fcae(fcae, train_flat, val_flat, cfg.csae.lambda, ftrain_cfg);

        const std::vector<std::vector<double>> ltrain = fcae_latents(fcae, train_flat);
        const std::vector<std::vector<double>> ltest = fcae_latents(fcae, test_flat);
        const ForestModel forest = forest_fit(ltrain, d.train.labels, 100, 12, stage_seed(cfg, kSeedForestFcae));
        const double f1 = micro_f1(confusion(d.test.labels, forest_predict(forest, ltest), k));

        // Static counts the stored model (both halves); runtime/flops count
        // the inference path (encoder + forest).
        const ResourceReport full = resource_report(fcae);
        ModelGraph enc;
        enc.specs.assign(fcae.specs.begin(), fcae.specs.begin() + fcae.encoder_layers);
        enc.params.assign(fcae.params.begin(), fcae.params.begin() + fcae.encoder_layers);
        enc.input_len = fcae.input_len;
        enc.input_ch = fcae.input_ch;
        enc.encoder_layers = fcae.encoder_layers;
        const ResourceReport enc_res = resource_report(enc);

        BenchRow row;
        row.method = "fcae-rf";
        row.micro_f1 = f1;
        row.static_bytes = full.static_bytes + forest_static_bytes(forest);
        row.runtime_bytes = enc_res.runtime_bytes;
        row.flops = enc_res.flops + forest_inference_flops(forest);
        row.static_comparable = false;
        out.rows.push_back(row);
    }

    std::string csv = "method,f1_mean,f1_se,static_bytes,runtime_bytes,flops\n";
    for (const BenchRow& r : out.rows)
        csv += r.method + "," + g17(r.micro_f1) + ",," + std::to_string(r.static_bytes) + "," +
               std::to_string(r.runtime_bytes) + "," + std::to_string(r.flops) + "\n";
    dir.emit("table4.csv", csv);
    dir.emit("resource_rules.txt", out.rules + "\n");
    dir.finish();
    return out;
}

TrainAeOutcome run_train_ae(const RunConfig& cfg) {
    cfg.validate();
    RunDir dir(cfg, "train-ae");
    const std::vector<TrialRecording> recs = load_or_generate(cfg, cfg.classes);
    SegmentSet all = segment_all(recs);

    // train-ae uses every trial: last = validation, the rest = train.
    int tmax = 0;
    for (const SegmentOrigin& o : all.provenance) tmax = std::max(tmax, o.trial);
    if (tmax < 2) throw DataError("train-ae needs at least 2 trials per class");
    const SegmentSet train_raw = filter_set(all, [&](int, const SegmentOrigin& o) { return o.trial < tmax; });
    const Standardizer stdz = fit_standardizer(train_raw, "trials 1-" + std::to_string(tmax - 1));
    const SegmentSet train = apply_standardizer(stdz, train_raw, SplitUse::Fit);
    const SegmentSet val = apply_standardizer(
        stdz, filter_set(all, [&](int, const SegmentOrigin& o) { return o.trial == tmax; }),
        SplitUse::Evaluation);

    CsaeConfig acfg = cfg.csae;
    acfg.train.seed = stage_seed(cfg, kSeedAeTrain);
    ModelGraph ae = build_csae(acfg, stage_seed(cfg, kSeedAeInit));

    TrainAeOutcome out;
    out.log = train_autoencoder(ae, train, val, acfg);
    out.train_r2 = reconstruct_r2(ae, train);
    out.val_r2 = reconstruct_r2(ae, val);
    out.val_mean_abs_z = mean_abs_latent(ae, val);

    dir.emit_log("ae_log.csv", out.log);
    dir.emit("ae_metrics.csv", "metric,value\ntrain_r2," + g17(out.train_r2) + "\nval_r2," + g17(out.val_r2) +
                                   "\nval_mean_abs_z," + g17(out.val_mean_abs_z) + "\n");
    dir.emit_checkpoint("autoencoder.ckpt", ae, stdz, 0);
    dir.finish();
    return out;
}

TrainClfOutcome run_train_clf(const RunConfig& cfg) {
    cfg.validate();
    RunDir dir(cfg, "train-clf");
    const std::vector<TrialRecording> recs = load_or_generate(cfg, cfg.classes);
    const PooledData d = prepare_pooled(segment_all(recs));

    CsaeConfig acfg = cfg.csae;
    acfg.train.seed = stage_seed(cfg, kSeedAeTrain);
    ModelGraph ae = build_csae(acfg, stage_seed(cfg, kSeedAeInit));

    TrainClfOutcome out;
    out.ae_log = train_autoencoder(ae, d.train, d.val, acfg);
    out.train_r2 = reconstruct_r2(ae, d.train);

    ClassifierConfig ccfg = cfg.clf;
    ccfg.num_classes = cfg.classes;
    ccfg.train.seed = stage_seed(cfg, kSeedClfTrain);
    ModelGraph clf = build_classifier(ae, ccfg, stage_seed(cfg, kSeedClfInit));
    out.clf_log = train_classifier(clf, d.train, d.val, ccfg);

    out.val_report = make_fold_report(d.val.labels, predict_labels(clf, d.val), cfg.classes, 0);
    std::string csv = "split,micro_f1\nval," + g17(out.val_report.micro) + "\n";
    if (!d.test.empty()) {
        out.test_report = make_fold_report(d.test.labels, predict_labels(clf, d.test), cfg.classes, 0);
        csv += "test," + g17(out.test_report.micro) + "\n";
    }

    dir.emit_log("ae_log.csv", out.ae_log);
    dir.emit_log("clf_log.csv", out.clf_log);
    dir.emit("clf_metrics.csv", csv);
    dir.emit_checkpoint("classifier.ckpt", clf, d.stdz, cfg.classes);
    dir.finish();
    return out;
}

FoldOutcome run_finetune(const RunConfig& cfg) {
    cfg.validate();
    RunDir dir(cfg, "finetune");
    const std::vector<TrialRecording> recs = load_or_generate(cfg, cfg.classes);
    const SegmentSet all = segment_all(recs);
    const std::vector<SplitPlan> plans = plan_loso(subject_ids(recs));

    FoldOutcome fo = run_one_fold(cfg, all, plans.front());

    std::vector<FoldReport> pre{fo.pre_tune}, post{fo.post_tune};
    dir.emit("table2.csv", csv_table2(cv_aggregate(pre), cv_aggregate(post)));
    dir.emit_log("ae_log.csv", fo.ae_log);
    dir.emit_log("clf_log.csv", fo.clf_log);
    dir.emit_log("tune_log.csv", fo.tune_log);
    dir.emit_checkpoint("classifier.ckpt", fo.classifier, fo.stdz, cfg.classes);
    dir.emit_checkpoint("tuned.ckpt", fo.tuned, fo.stdz, cfg.classes);
    dir.finish();
    return fo;
}

void run_gen_synthetic(const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.synthetic) throw std::invalid_argument("gen-synthetic only makes sense with synthetic data");
    RunDir dir(cfg, "gen-synthetic");
    SyntheticConfig sc;
    sc.samples_per_trial = cfg.samples_per_trial;
    sc.snr_db = cfg.snr_db;
    for (int s = 1; s <= cfg.subjects; ++s) {
        const std::vector<TrialRecording> recs =
            generate_synthetic_subject(s, cfg.classes, cfg.trials, cfg.seed, default_profile(s), sc);
        const std::string name = "subject" + std::to_string(s) + ".csv";
        save_trials_csv(recs, (fs::path(cfg.out_dir) / name).string());
        dir.note(name);
    }
    dir.finish();
}

// ---------------------------------------------------------------- report --

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream is(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_commas(line));
    }
    return rows;
}

// Tolerates ragged rows in hand-edited CSVs: a missing cell reads as empty.
std::string cell(const std::vector<std::vector<std::string>>& rows, std::size_t r, std::size_t c) {
    return c < rows[r].size() ? rows[r][c] : std::string();
}

std::string pct(const std::string& value) {
    if (value.empty()) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * std::strtod(value.c_str(), nullptr));
    return buf;
}

std::string pct_pm(const std::string& mean, const std::string& se) {
    if (se.empty()) return pct(mean);
    return pct(mean) + " ± " + pct(se);
}

void render_rows(std::ostream& os, const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::size_t> widths;
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c >= widths.size()) widths.push_back(0);
            widths[c] = std::max(widths[c], row[c].size());
        }
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) os << "  ";
            os << row[c];
            if (c + 1 < row.size()) os << std::string(widths[c] - row[c].size(), ' ');
        }
        os << "\n";
    }
}

} // namespace

void render_report_text(const std::string& dir, std::ostream& os) {
    const fs::path root(dir);
    bool printed = false;

    if (fs::exists(root / "table1.csv")) {
        const auto rows = read_csv(root / "table1.csv");
        os << "Source-fold F1 (cross-validation)\n";
        std::vector<std::vector<std::string>> cells{{"class", "F1"}};
        for (std::size_t i = 1; i < rows.size(); ++i)
            cells.push_back({cell(rows, i, 0), pct_pm(cell(rows, i, 1), cell(rows, i, 2))});
        render_rows(os, cells);
        os << "\n";
        printed = true;
    }
    if (fs::exists(root / "table2.csv")) {
        const auto rows = read_csv(root / "table2.csv");
        os << "User adaptation (before / after calibration)\n";
        std::vector<std::vector<std::string>> cells{{"class", "original", "finetuned"}};
        for (std::size_t i = 1; i < rows.size(); ++i)
            cells.push_back({cell(rows, i, 0), pct_pm(cell(rows, i, 1), cell(rows, i, 2)), pct_pm(cell(rows, i, 3), cell(rows, i, 4))});
        render_rows(os, cells);
        os << "\n";
        printed = true;
    }
    if (fs::exists(root / "table3.csv")) {
        const auto rows = read_csv(root / "table3.csv");
        os << "Class expansion (Phase I / Phase II)\n";
        std::vector<std::vector<std::string>> cells{{"class", "phase I", "phase II"}};
        for (std::size_t i = 1; i < rows.size(); ++i)
            cells.push_back({cell(rows, i, 0), pct_pm(cell(rows, i, 1), cell(rows, i, 2)), pct_pm(cell(rows, i, 3), cell(rows, i, 4))});
        render_rows(os, cells);
        os << "\n";
        printed = true;
    }
    if (fs::exists(root / "fig6.csv")) {
        const auto rows = read_csv(root / "fig6.csv");
        os << "Sparsity sweep (lambda vs F1)\n";
        std::vector<std::vector<std::string>> cells{{"lambda", "F1"}};
        for (std::size_t i = 1; i < rows.size(); ++i) cells.push_back({cell(rows, i, 0), pct(cell(rows, i, 1))});
        render_rows(os, cells);
        os << "\n";
        printed = true;
    }
    if (fs::exists(root / "sparsity.csv")) {
        const auto rows = read_csv(root / "sparsity.csv");
        os << "Sparsity sweep (latent activity)\n";
        std::vector<std::vector<std::string>> cells{{"lambda", "mean|Z|", "train R2"}};
        for (std::size_t i = 1; i < rows.size(); ++i) {
            char z[32], r2[32];
            std::snprintf(z, sizeof(z), "%.4g", std::strtod(cell(rows, i, 1).c_str(), nullptr));
            std::snprintf(r2, sizeof(r2), "%.3f", std::strtod(cell(rows, i, 2).c_str(), nullptr));
            cells.push_back({cell(rows, i, 0), z, r2});
        }
        render_rows(os, cells);
        os << "\n";
        printed = true;
    }
    if (fs::exists(root / "fig7.csv")) {
        const auto rows = read_csv(root / "fig7.csv");
        os << "Original-class F1 before/after expansion\n";
        std::vector<std::vector<std::string>> cells{{"class", "before", "after"}};
        for (std::size_t i = 1; i < rows.size(); ++i)
            cells.push_back({cell(rows, i, 0), pct(cell(rows, i, 1)), pct(cell(rows, i, 2))});
        render_rows(os, cells);
        os << "\n";
        printed = true;
    }
    if (fs::exists(root / "table4.csv")) {
        const auto rows = read_csv(root / "table4.csv");
        os << "Method comparison\n";
        std::vector<std::vector<std::string>> cells{{"method", "F1", "static B", "runtime B", "flops"}};
        for (std::size_t i = 1; i < rows.size(); ++i)
            cells.push_back({cell(rows, i, 0), pct_pm(cell(rows, i, 1), cell(rows, i, 2)), cell(rows, i, 3), cell(rows, i, 4), cell(rows, i, 5)});
        render_rows(os, cells);
        os << "\n";
        printed = true;
    }
    if (!printed) os << "no report CSVs found in " << dir << "\n";
}

} // namespace semg
