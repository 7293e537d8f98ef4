#pragma once

// User calibration and class expansion: few-shot fine-tuning under a named
// freeze policy, output-head widening with verbatim weight copy for the old
// classes, the two-phase expansion schedule, and the forgetting analysis.

#include <cstdint>

#include "semg/classifier.hpp"
#include "semg/metrics.hpp"

namespace semg {

// Which layer groups may move during fine-tuning.  The encoder is frozen
// under every policy.
enum class FreezePolicy {
    FinalDenseOnly,  // the two MLP denses + the output dense
    FullHead,        // everything above the encoder
    NewOutputOnly,   // the output dense alone (expansion Phase I)
};
const char* freeze_policy_name(FreezePolicy p);
FreezePolicy freeze_policy_from_name(const std::string& name);

// Rewrites the trainable flags of a classifier graph to match the policy.
void apply_freeze_policy(ModelGraph& graph, FreezePolicy policy);

// Fine-tunes on the target subject's calibration trial with its second trial
// as validation.  Asserts the few-shot contract: both sets belong to one
// subject and only trials 1-2; calib must cover every class.  Batch size is
// clamped to the calibration set size.
TrainLog finetune_user(ModelGraph& graph, const SegmentSet& calib, const SegmentSet& calib_val,
                       FreezePolicy policy, const ClassifierConfig& cfg);

// Widens the output dense from K_old to new_k: columns/biases for the old
// classes are copied verbatim (old-class logits preserved exactly), new
// columns are He-Normal draws from `seed`, new biases zero.
ModelGraph expand_head(const ModelGraph& graph6, int new_k, std::uint64_t seed);

struct ForgettingReport {
    std::vector<double> f1_before;  // per original class, pre-expansion graph
    std::vector<double> f1_after;   // same classes, post-expansion graph
    ConfusionMatrix after_matrix;   // new-K confusion on the original-class test set
};

// Per-class F1 of the 6-class graph vs the widened graph on a test set
// labeled with the original classes, plus the widened confusion matrix whose
// off-diagonal rows expose single -> combined gesture confusions.
ForgettingReport forgetting_report(const ModelGraph& graph6, const ModelGraph& graph10,
                                   const SegmentSet& test6);

struct ExpansionReport {
    FoldReport phase1_metrics;  // widened-class test metrics after Phase I
    FoldReport phase2_metrics;  // after Phase II
    double phase1_val_micro = 0.0;
    double phase2_val_micro = 0.0;
    TrainLog phase1_log;
    TrainLog phase2_log;
    ForgettingReport forgetting;
};

// Phase I: only the new output dense trains.  Phase II: continues from
// Phase I's best parameters with the full head unfrozen at a (lower) Phase II
// learning rate.  Metrics are filled by the caller-supplied test set.
ExpansionReport train_two_phase(ModelGraph& graph10, const SegmentSet& train10, const SegmentSet& val10,
                                const SegmentSet& test10, const ClassifierConfig& cfg_phase1,
                                const ClassifierConfig& cfg_phase2);

} // namespace semg
