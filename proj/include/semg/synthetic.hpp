#pragma once

// Synthetic 2-channel sEMG stand-in: each movement class is a band-limited
// noise carrier (sum of random-phase sinusoids) with a class-specific center
// frequency and channel-amplitude ratio, shaped by a slow envelope and white
// measurement noise.  Per-subject gain and frequency-shift parameters create
// the inter-subject domain gap the adaptation experiments rely on.

#include <array>
#include <cstdint>
#include <vector>

#include "semg/signal.hpp"

namespace semg {

struct SubjectProfile {
    std::array<double, 2> gain{1.0, 1.0};  // multiplies the finished channel, noise included
    double freq_shift_hz = 0.0;            // added to every class center frequency
};

struct SyntheticConfig {
    int samples_per_trial = 20000;  // 5 s at 4 kHz
    int num_sinusoids = 48;         // carrier components per channel
    double base_freq_hz = 60.0;     // class 0 center
    double freq_step_hz = 40.0;     // center spacing between consecutive classes
    double band_hz = 30.0;          // carrier band width (center ± band/2)
    double envelope_depth = 0.3;    // slow amplitude modulation depth
    double snr_db = 10.0;           // carrier-to-measurement-noise ratio
    // Channel-2 : channel-1 amplitude ratio, cycled by class index mod 3.
    std::array<double, 3> ratio_cycle{0.6, 1.0, 5.0 / 3.0};
};

// Deterministic per-subject gain/shift grid: shifts spread over ±17.5 Hz in
// subject order while the two channel gains walk 0.75..1.10 in two different
// strides, so no two subjects share a (gain ratio, shift) combination.
SubjectProfile default_profile(int subject_id);

// trials 1..trials_per_class for classes 0..num_classes-1.  Draw streams are
// keyed by (seed, subject, class, trial) only, so the same class produces the
// same recording whether it is generated as part of a 6- or 10-class set, and
// gain changes rescale samples without re-rolling them.
std::vector<TrialRecording> generate_synthetic_subject(int subject_id, int num_classes, int trials_per_class,
                                                       std::uint64_t seed, const SubjectProfile& profile,
                                                       const SyntheticConfig& cfg = {});

// Subjects 1..num_subjects under default_profile.
std::vector<TrialRecording> generate_synthetic_dataset(int num_subjects, int num_classes, int trials_per_class,
                                                       std::uint64_t seed, const SyntheticConfig& cfg = {});

} // namespace semg
