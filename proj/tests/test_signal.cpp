#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "semg/rng.hpp"
#include "semg/signal.hpp"
#include "semg/synthetic.hpp"

using namespace semg;

namespace {

TrialRecording make_trial(int subject, int movement, int trial, int len, std::uint64_t seed) {
    TrialRecording r;
    r.subject = subject;
    r.movement = movement;
    r.trial = trial;
    r.samples = Tensor({len, 2});
    Rng rng(seed);
    for (double& v : r.samples.data) v = rng.normal();
    return r;
}

// Scratch directory wiped on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("semg_test_" + tag);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

double channel_rms(const TrialRecording& r, int c) {
    double ss = 0.0;
    for (int t = 0; t < r.samples.dim(0); ++t) ss += r.samples.at(t, c) * r.samples.at(t, c);
    return std::sqrt(ss / r.samples.dim(0));
}

} // namespace

TEST_CASE("segmentation window count follows floor((L - window)/stride) + 1") {
    const TrialRecording five_sec = make_trial(1, 0, 1, 20000, 7);
    CHECK(segment(five_sec).size() == 39);  // default 1000/500

    CHECK(segment(make_trial(1, 0, 1, 1000, 8)).size() == 1);
    CHECK(segment(make_trial(1, 0, 1, 1499, 9)).size() == 1);  // tail below stride is dropped
    CHECK_THROWS_AS(segment(make_trial(1, 0, 1, 999, 10)), DataError);

    const TrialRecording r = make_trial(1, 0, 1, 200, 11);
    CHECK_THROWS_AS(segment(r, 0, 10), DataError);
    CHECK_THROWS_AS(segment(r, 100, 0), DataError);
}

TEST_CASE("segments are verbatim slices at offsets 0, stride, 2*stride, ...") {
    const TrialRecording r = make_trial(3, 2, 4, 200, 21);
    const SegmentSet set = segment(r, 100, 30);
    REQUIRE(set.size() == 4);
    CHECK(set.window == 100);
    for (std::size_t s = 0; s < set.size(); ++s) {
        const int off = static_cast<int>(s) * 30;
        for (int t = 0; t < 100; ++t)
            for (int c = 0; c < 2; ++c)
                CHECK(set.segments[s].at(t, c) == r.samples.at(off + t, c));
        CHECK(set.labels[s] == 2);
        CHECK(set.provenance[s].subject == 3);
        CHECK(set.provenance[s].trial == 4);
    }
}

TEST_CASE("segment_all concatenates trials and bookkeeping stays aligned") {
    std::vector<TrialRecording> recs;
    recs.push_back(make_trial(1, 0, 1, 1500, 31));  // 2 windows
    recs.push_back(make_trial(2, 5, 3, 1000, 32));  // 1 window
    const SegmentSet set = segment_all(recs);
    REQUIRE(set.size() == 3);
    set.validate();
    CHECK(set.labels == std::vector<int>{0, 0, 5});
    CHECK(set.provenance[0].subject == 1);
    CHECK(set.provenance[2].subject == 2);
    CHECK(set.origins().size() == 2);
    CHECK(set.subjects() == std::vector<int>{1, 2});
}

TEST_CASE("segment sets reject mismatched windows and inconsistent bookkeeping") {
    SegmentSet a = segment(make_trial(1, 0, 1, 1000, 41), 1000, 500);
    const SegmentSet b = segment(make_trial(1, 0, 2, 1000, 42), 500, 500);
    CHECK_THROWS_AS(a.append(b), DataError);

    SegmentSet broken = a;
    broken.labels.push_back(3);
    CHECK_THROWS_AS(broken.validate(), DataError);

    SegmentSet wrong_shape = a;
    wrong_shape.window = 999;
    CHECK_THROWS_AS(wrong_shape.validate(), DataError);
}

TEST_CASE("recording validation rejects malformed metadata") {
    auto reject = [](auto mutate) {
        TrialRecording r = make_trial(1, 0, 1, 10, 51);
        mutate(r);
        CHECK_THROWS_AS(r.validate(), DataError);
    };
    reject([](TrialRecording& r) { r.subject = 0; });
    reject([](TrialRecording& r) { r.movement = -1; });
    reject([](TrialRecording& r) { r.trial = 0; });
    reject([](TrialRecording& r) { r.trial = 7; });
    reject([](TrialRecording& r) { r.samples = Tensor({10, 3}); });
    reject([](TrialRecording& r) { r.samples = Tensor({20}); });
}

TEST_CASE("standardizer statistics match the hand-computed fixture") {
    // ch1 samples 1,3,5,7 -> mean 4, population std sqrt(5); ch2 constant.
    SegmentSet set;
    set.window = 2;
    set.segments.push_back(Tensor({2, 2}, {1.0, 2.0, 3.0, 2.0}));
    set.segments.push_back(Tensor({2, 2}, {5.0, 2.0, 7.0, 2.0}));
    set.labels = {0, 0};
    set.provenance = {{1, 1}, {1, 2}};

    const Standardizer s = fit_standardizer(set, "unit fixture");
    CHECK(s.fitted);
    CHECK(s.fitted_on == "unit fixture");
    CHECK(s.mean[0] == doctest::Approx(4.0));
    CHECK(s.std[0] == doctest::Approx(std::sqrt(5.0)));
    CHECK(s.mean[1] == doctest::Approx(2.0));
    CHECK(s.std[1] == 1e-8);  // constant channel hits the floor
    REQUIRE(s.fit_origins.size() == 2);
    CHECK(s.fit_origins[0].trial == 1);
    CHECK(s.fit_origins[1].trial == 2);

    const SegmentSet out = apply_standardizer(s, set, SplitUse::Fit);
    CHECK(out.segments[0].at(0, 0) == doctest::Approx((1.0 - 4.0) / std::sqrt(5.0)));
    CHECK(out.segments[1].at(1, 0) == doctest::Approx((7.0 - 4.0) / std::sqrt(5.0)));
    CHECK(out.segments[0].at(0, 1) == doctest::Approx(0.0));  // (2-2)/1e-8
    CHECK(out.labels == set.labels);

    Standardizer unfitted;
    CHECK_THROWS_AS(apply_standardizer(unfitted, set, SplitUse::Fit), DataError);
    CHECK_THROWS_AS(fit_standardizer(SegmentSet{}, "empty"), DataError);
}

TEST_CASE("the leakage guard rejects evaluation splits that share a fit trial") {
    SegmentSet fit_set = segment(make_trial(1, 0, 1, 1000, 61), 1000, 500);
    fit_set.append(segment(make_trial(1, 0, 2, 1000, 62), 1000, 500));
    const Standardizer s = fit_standardizer(fit_set, "subject 1, trials 1-2");

    SegmentSet overlap = segment(make_trial(1, 0, 2, 1000, 63), 1000, 500);
    overlap.append(segment(make_trial(2, 0, 1, 1000, 64), 1000, 500));
    CHECK_THROWS_AS(apply_standardizer(s, overlap, SplitUse::Evaluation), DataError);
    try {
        apply_standardizer(s, overlap, SplitUse::Evaluation);
        FAIL("expected the leakage guard to throw");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("subject 1, trial 2") != std::string::npos);
    }

    // The same set is fine when declared as the fit split, and a properly
    // disjoint evaluation split passes.
    CHECK_NOTHROW(apply_standardizer(s, overlap, SplitUse::Fit));
    const SegmentSet disjoint = segment(make_trial(2, 0, 5, 1000, 65), 1000, 500);
    CHECK_NOTHROW(apply_standardizer(s, disjoint, SplitUse::Evaluation));
}

TEST_CASE("trial CSV files round-trip") {
    TempDir dir("csv_roundtrip");

    // Values representable in 9 significant digits survive exactly.
    TrialRecording a;
    a.subject = 1;
    a.movement = 0;
    a.trial = 1;
    a.samples = Tensor({3, 2}, {0.125, -3.25, 0.001, 42.0, -0.5, 0.001953125});
    TrialRecording b = make_trial(2, 4, 6, 50, 71);
    save_trials_csv({a, b}, dir.file("round.csv"));

    const std::vector<TrialRecording> back = load_trials_csv(dir.file("round.csv"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].subject == 1);
    CHECK(back[0].movement == 0);
    CHECK(back[0].trial == 1);
    REQUIRE(back[0].samples.shape == a.samples.shape);
    for (std::size_t i = 0; i < a.samples.data.size(); ++i) CHECK(back[0].samples[i] == a.samples[i]);

    CHECK(back[1].subject == 2);
    CHECK(back[1].movement == 4);
    REQUIRE(back[1].samples.shape == b.samples.shape);
    for (std::size_t i = 0; i < b.samples.data.size(); ++i)
        CHECK(back[1].samples[i] == doctest::Approx(b.samples[i]).epsilon(1e-8));
}

TEST_CASE("malformed CSV input is rejected with the offending line") {
    TempDir dir("csv_malformed");
    const std::string header = "subject,movement,trial,sample_index,ch1,ch2\n";

    const auto expect_reject = [&](const std::string& name, const std::string& body) {
        write_file(dir.file(name), body);
        CHECK_THROWS_AS(load_trials_csv(dir.file(name)), DataError);
    };
    expect_reject("empty.csv", "");
    expect_reject("header_only.csv", header);
    expect_reject("bad_header.csv", "subject,movement,trial,index,ch1,ch2\n1,0,1,0,0.1,0.2\n");
    expect_reject("short_row.csv", header + "1,0,1,0,0.1\n");
    expect_reject("long_row.csv", header + "1,0,1,0,0.1,0.2,0.3\n");
    expect_reject("non_numeric.csv", header + "1,0,1,0,0.1,abc\n");
    expect_reject("index_gap.csv", header + "1,0,1,0,0.1,0.2\n1,0,1,2,0.1,0.2\n");
    expect_reject("bad_trial.csv", header + "1,0,7,0,0.1,0.2\n");

    // CRLF endings and blank lines are tolerated.
    write_file(dir.file("crlf.csv"), header + "1,0,1,0,0.5,0.25\r\n\r\n1,0,1,1,1.5,0.75\r\n");
    const std::vector<TrialRecording> recs = load_trials_csv(dir.file("crlf.csv"));
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].samples.dim(0) == 2);
    CHECK(recs[0].samples.at(1, 1) == 0.75);
}

TEST_CASE("dataset directories load every CSV in lexicographic order") {
    TempDir dir("dataset_dir");
    save_trials_csv({make_trial(2, 0, 1, 10, 81)}, dir.file("b.csv"));
    save_trials_csv({make_trial(1, 0, 1, 10, 82)}, dir.file("a.csv"));
    write_file(dir.file("notes.txt"), "ignored");

    const std::vector<TrialRecording> recs = load_dataset_dir(dir.path.string());
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].subject == 1);  // a.csv first
    CHECK(recs[1].subject == 2);

    TempDir empty("dataset_dir_empty");
    CHECK_THROWS_AS(load_dataset_dir(empty.path.string()), DataError);
    CHECK_THROWS_AS(load_dataset_dir(dir.file("a.csv")), DataError);  // file, not dir
}

TEST_CASE("the cross-validation plan assigns every trial role as documented") {
    const std::vector<SplitPlan> plans = plan_loso({3, 1, 2});
    REQUIRE(plans.size() == 3);
    CHECK(plans[0].target_subject == 1);  // ordered by id
    CHECK(plans[1].target_subject == 2);
    CHECK(plans[2].target_subject == 3);
    CHECK(plans[0].source_subjects == std::vector<int>{2, 3});

    const SplitPlan& p = plans[0];
    for (int trial = 1; trial <= 4; ++trial) CHECK(p.role(2, trial) == TrialRole::Train);
    CHECK(p.role(2, 5) == TrialRole::Val);
    CHECK(p.role(2, 6) == TrialRole::Test);
    CHECK(p.role(1, 1) == TrialRole::Calib);
    CHECK(p.role(1, 2) == TrialRole::CalibVal);
    for (int trial = 3; trial <= 6; ++trial) CHECK(p.role(1, trial) == TrialRole::AdaptTest);
    CHECK(p.role(9, 1) == TrialRole::Unused);  // unknown subject
    CHECK(p.role(1, 7) == TrialRole::Unused);
    CHECK(p.role(2, 0) == TrialRole::Unused);

    CHECK_THROWS_AS(plan_loso({1, 1}), DataError);
    CHECK_THROWS_AS(plan_loso({5}), DataError);
}

TEST_CASE("plan selection filters segments by role") {
    std::vector<TrialRecording> recs;
    for (int subject : {1, 2})
        for (int trial = 1; trial <= 6; ++trial)
            recs.push_back(make_trial(subject, trial % 3, trial, 1000, mix_seed(91, subject, trial)));
    const SegmentSet all = segment_all(recs);  // one window per trial
    REQUIRE(all.size() == 12);

    SplitPlan p;
    p.target_subject = 1;
    p.source_subjects = {2};
    CHECK(p.select(all, TrialRole::Train).size() == 4);
    CHECK(p.select(all, TrialRole::Val).size() == 1);
    CHECK(p.select(all, TrialRole::Test).size() == 1);
    CHECK(p.select(all, TrialRole::Calib).size() == 1);
    CHECK(p.select(all, TrialRole::CalibVal).size() == 1);
    CHECK(p.select(all, TrialRole::AdaptTest).size() == 4);

    const SegmentSet val = p.select(all, TrialRole::Val);
    CHECK(val.provenance[0].subject == 2);
    CHECK(val.provenance[0].trial == 5);
    CHECK(val.labels[0] == 5 % 3);
}

TEST_CASE("synthetic generation is deterministic and profile-stable") {
    SyntheticConfig cfg;
    cfg.samples_per_trial = 2000;  // keep the test quick

    const SubjectProfile neutral{};  // unit gains, no shift
    const auto a = generate_synthetic_subject(1, 3, 2, 99, neutral, cfg);
    const auto b = generate_synthetic_subject(1, 3, 2, 99, neutral, cfg);
    REQUIRE(a.size() == 6);
    REQUIRE(b.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].movement == b[i].movement);
        CHECK(a[i].trial == b[i].trial);
        bool same = a[i].samples.data == b[i].samples.data;
        CHECK(same);
    }

    // Gains rescale the finished channels without re-rolling any draw.
    SubjectProfile scaled;
    scaled.gain = {2.0, 0.5};
    const auto c = generate_synthetic_subject(1, 3, 2, 99, scaled, cfg);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int t = 0; t < cfg.samples_per_trial; ++t) {
            CHECK(c[i].samples.at(t, 0) == 2.0 * a[i].samples.at(t, 0));
            CHECK(c[i].samples.at(t, 1) == 0.5 * a[i].samples.at(t, 1));
        }

    // A frequency shift changes the signal content.
    SubjectProfile shifted;
    shifted.freq_shift_hz = 10.0;
    const auto d = generate_synthetic_subject(1, 1, 1, 99, shifted, cfg);
    bool differs = d[0].samples.data != a[0].samples.data;
    CHECK(differs);
}

TEST_CASE("a class keeps its recordings when the class count grows") {
    SyntheticConfig cfg;
    cfg.samples_per_trial = 1000;
    const SubjectProfile prof = default_profile(2);
    const auto six = generate_synthetic_subject(2, 6, 2, 123, prof, cfg);
    const auto ten = generate_synthetic_subject(2, 10, 2, 123, prof, cfg);
    REQUIRE(six.size() == 12);
    REQUIRE(ten.size() == 20);
    for (std::size_t i = 0; i < six.size(); ++i) {
        CHECK(ten[i].movement == six[i].movement);
        CHECK(ten[i].trial == six[i].trial);
        bool same = ten[i].samples.data == six[i].samples.data;
        CHECK(same);
    }
}

TEST_CASE("synthetic amplitudes track the class ratio cycle and noise level") {
    SyntheticConfig cfg;  // full-length trials for tight RMS estimates
    const SubjectProfile neutral{};
    const auto recs = generate_synthetic_subject(1, 3, 1, 7, neutral, cfg);

    for (std::size_t k = 0; k < 3; ++k) {
        const double r1 = channel_rms(recs[k], 0);
        const double r2 = channel_rms(recs[k], 1);
        // Channel 1 carries a unit-RMS carrier, its envelope, and the
        // measurement noise; channel 2 is the same scaled by the class ratio.
        CHECK(r1 > 0.85);
        CHECK(r1 < 1.25);
        CHECK(r2 / r1 == doctest::Approx(cfg.ratio_cycle[k % 3]).epsilon(0.08));
    }

    // Less signal-to-noise means a larger finished channel.
    SyntheticConfig noisy = cfg;
    noisy.snr_db = 0.0;
    const auto loud = generate_synthetic_subject(1, 1, 1, 7, neutral, noisy);
    CHECK(channel_rms(loud[0], 0) > channel_rms(recs[0], 0));
}

TEST_CASE("default subject profiles are pairwise distinct") {
    for (int i = 1; i <= 8; ++i) {
        const SubjectProfile a = default_profile(i);
        CHECK(a.gain[0] >= 0.60);
        CHECK(a.gain[0] <= 1.44 + 1e-12);
        CHECK(a.gain[1] >= 0.60);
        CHECK(a.gain[1] <= 1.44 + 1e-12);
        CHECK(std::fabs(a.freq_shift_hz) <= 35.0);
        for (int j = i + 1; j <= 8; ++j) {
            const SubjectProfile b = default_profile(j);
            const bool distinct =
                a.gain[0] != b.gain[0] || a.gain[1] != b.gain[1] || a.freq_shift_hz != b.freq_shift_hz;
            CHECK(distinct);
        }
    }
    CHECK_THROWS_AS(default_profile(0), DataError);
}

TEST_CASE("synthetic generation rejects out-of-range requests") {
    CHECK_THROWS_AS(generate_synthetic_subject(0, 6, 2, 1, SubjectProfile{}), DataError);
    CHECK_THROWS_AS(generate_synthetic_subject(1, 0, 2, 1, SubjectProfile{}), DataError);
    CHECK_THROWS_AS(generate_synthetic_subject(1, 6, 7, 1, SubjectProfile{}), DataError);
    CHECK_THROWS_AS(generate_synthetic_dataset(0, 6, 2, 1), DataError);
}
