#pragma once

// Data plumbing: trial recordings (CSV in/out), sliding-window segmentation,
// leakage-guarded standardization, and the leave-one-subject-out split plan.

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "semg/tensor.hpp"

namespace semg {

// One 5-second contraction recording: 2-channel sEMG at 4 kHz.
struct TrialRecording {
    int subject = 0;   // >= 1
    int movement = 0;  // class label index, >= 0
    int trial = 0;     // 1..6
    Tensor samples;    // [L x 2]

    static constexpr int kSampleRateHz = 4000;

    void validate() const;
};

// Where a segment came from; the standardizer's leakage guard compares these.
struct SegmentOrigin {
    int subject = 0;
    int trial = 0;
    auto operator<=>(const SegmentOrigin&) const = default;
};

struct SegmentSet {
    std::vector<Tensor> segments;  // each [window x 2]
    std::vector<int> labels;
    std::vector<SegmentOrigin> provenance;
    int window = 1000;

    std::size_t size() const { return segments.size(); }
    bool empty() const { return segments.empty(); }
    void append(const SegmentSet& other);
    // Sorted distinct (subject, trial) pairs present in the set.
    std::vector<SegmentOrigin> origins() const;
    // Sorted distinct subject ids present in the set.
    std::vector<int> subjects() const;
    void validate() const;
};

// Windows at offsets 0, stride, 2*stride, ...; a window never crosses the
// trial boundary, so count = floor((L - window)/stride) + 1.
SegmentSet segment(const TrialRecording& rec, int window = 1000, int stride = 500);
SegmentSet segment_all(const std::vector<TrialRecording>& recs, int window = 1000, int stride = 500);

// Distinguishes "transforming the split I was fitted on" from "transforming
// data the model will be judged on" — the latter must be provenance-disjoint
// from the fit split.
enum class SplitUse { Fit, Evaluation };

struct Standardizer {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> std{1.0, 1.0};
    bool fitted = false;
    std::string fitted_on;                    // e.g. "train(src subjects 1-7, trials 1-4)"
    std::vector<SegmentOrigin> fit_origins;   // sorted, for the leakage guard
};

// Per-channel mean and population (divide-by-N) standard deviation over every
// sample of the set; std floored at 1e-8 so constant channels stay usable.
Standardizer fit_standardizer(const SegmentSet& train, const std::string& fitted_on);

// (x - mean)/std per channel; labels and provenance pass through.  With
// SplitUse::Evaluation the fit split and this set must share no
// (subject, trial) origin, enforced by DataError.
SegmentSet apply_standardizer(const Standardizer& s, const SegmentSet& set, SplitUse use);

// How each (subject, trial) is used in one cross-validation fold.
enum class TrialRole { Train, Val, Test, Calib, CalibVal, AdaptTest, Unused };
const char* trial_role_name(TrialRole r);

// One fold: sources donate trials 1-4 for training, 5 for validation and 6
// for testing; the target subject contributes trial 1 for calibration, 2 for
// calibration-validation, and 3-6 as the unseen adaptation test.
struct SplitPlan {
    int target_subject = 0;
    std::vector<int> source_subjects;

    TrialRole role(int subject, int trial) const;
    // All segments of `all` whose (subject, trial) maps to `r`.
    SegmentSet select(const SegmentSet& all, TrialRole r) const;
};

// One plan per subject, each serving as target exactly once, ordered by
// subject id.  Throws on duplicates or fewer than 2 subjects.
std::vector<SplitPlan> plan_loso(const std::vector<int>& subject_ids);

// CSV schema: header `subject,movement,trial,sample_index,ch1,ch2`; rows
// grouped per trial with sample_index counting 0,1,2,... within the group.
std::vector<TrialRecording> load_trials_csv(const std::string& path);
void save_trials_csv(const std::vector<TrialRecording>& recs, const std::string& path);

// Reads every *.csv file directly under dir (lexicographic order) and
// concatenates the recordings.  DataError if none found.
std::vector<TrialRecording> load_dataset_dir(const std::string& dir);

} // namespace semg
