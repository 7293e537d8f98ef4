#include "semg/adaptation.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include "semg/rng.hpp"

namespace semg {

namespace {

// The adaptation procedures only make sense on a dense -> softmax head.
int output_dense_index(const ModelGraph& g) {
    const int n = g.layer_count();
    if (n < 2 || g.specs[n - 1].kind != LayerKind::Softmax || g.specs[n - 2].kind != LayerKind::Dense)
        throw std::invalid_argument("adaptation: expected a dense -> softmax classification head");
    return n - 2;
}

} // namespace

const char* freeze_policy_name(FreezePolicy p) {
    switch (p) {
        case FreezePolicy::FinalDenseOnly: return "final_dense_only";
        case FreezePolicy::FullHead: return "full_head";
        case FreezePolicy::NewOutputOnly: return "new_output_only";
    }
    return "?";
}

FreezePolicy freeze_policy_from_name(const std::string& name) {
    if (name == "final_dense_only") return FreezePolicy::FinalDenseOnly;
    if (name == "full_head") return FreezePolicy::FullHead;
    if (name == "new_output_only") return FreezePolicy::NewOutputOnly;
    throw std::invalid_argument("unknown freeze policy '" + name +
                                "' (expected final_dense_only, full_head, or new_output_only)");
}

void apply_freeze_policy(ModelGraph& graph, FreezePolicy policy) {
    const int n = graph.layer_count();
    const int out = output_dense_index(graph);
    if (graph.encoder_layers <= 0 || graph.encoder_layers >= n)
        throw std::invalid_argument("apply_freeze_policy: graph has no head above its encoder");

    for (int i = 0; i < n; ++i) {
        LayerSpec& sp = graph.specs[i];
        bool on = false;
        if (i >= graph.encoder_layers && sp.has_params()) {
            switch (policy) {
                case FreezePolicy::FullHead: on = true; break;
                // The only denses above the encoder are the MLP pair and the
                // output layer, which is exactly this policy's trainable set.
                case FreezePolicy::FinalDenseOnly: on = sp.kind == LayerKind::Dense; break;
                case FreezePolicy::NewOutputOnly: on = i == out; break;
            }
        }
        sp.trainable = on;
    }
}

TrainLog finetune_user(ModelGraph& graph, const SegmentSet& calib, const SegmentSet& calib_val,
                       FreezePolicy policy, const ClassifierConfig& cfg) {
    calib.validate();
    calib_val.validate();
    if (calib.segments.empty() || calib_val.segments.empty())
        throw DataError("finetune_user: calibration and calibration-validation sets must be non-empty");

    // Few-shot budget: everything must come from one subject's trials 1-2.
    std::set<int> subjects;
    for (const SegmentSet* set : {&calib, &calib_val})
        for (const SegmentOrigin& o : set->provenance) {
            subjects.insert(o.subject);
            if (o.trial != 1 && o.trial != 2)
                throw DataError("finetune_user: segment from subject " + std::to_string(o.subject) +
                                " trial " + std::to_string(o.trial) +
                                "; calibration may only use trials 1-2");
        }
    if (subjects.size() != 1)
        throw DataError("finetune_user: calibration data spans " + std::to_string(subjects.size()) +
                        " subjects; expected exactly the one target subject");

    const int k = graph_num_classes(graph);
    std::vector<char> seen(static_cast<std::size_t>(k), 0);
    for (int label : calib.labels) {
        if (label < 0 || label >= k)
            throw DataError("finetune_user: calibration label " + std::to_string(label) +
                            " outside [0, " + std::to_string(k) + ")");
        seen[static_cast<std::size_t>(label)] = 1;
    }
    for (int c = 0; c < k; ++c)
        if (!seen[static_cast<std::size_t>(c)])
            throw DataError("finetune_user: calibration set has no example of class " + std::to_string(c) +
                            " (" + class_label(c) + "); record at least one trial of every movement");

    apply_freeze_policy(graph, policy);

    // Few-shot sets can be smaller than the configured batch.
    ClassifierConfig tuned = cfg;
    tuned.train.batch_size =
        std::min(tuned.train.batch_size, static_cast<int>(calib.segments.size()));
    return train_classifier(graph, calib, calib_val, tuned);
}

ModelGraph expand_head(const ModelGraph& graph6, int new_k, std::uint64_t seed) {
    const int out = output_dense_index(graph6);
    const int old_k = graph6.specs[out].out_channels;
    if (new_k <= old_k)
        throw std::invalid_argument("expand_head: new class count " + std::to_string(new_k) +
                                    " must exceed the current " + std::to_string(old_k));

    ModelGraph g = graph6;
    const int f_in = g.specs[out].in_channels;
    const int extra = new_k - old_k;

    const Tensor& old_w = graph6.params[out].w;  // [F_in x old_k]
    const Tensor& old_b = graph6.params[out].b;
    // Same stream family as init_params_range would use for this layer, so a
    // rebuild at 10 classes and an expansion from 6 stay distinguishable only
    // by the copied columns.
    Tensor fresh = he_normal_init({f_in, extra}, f_in, mix_seed(seed, static_cast<std::uint64_t>(out)));

    Tensor w({f_in, new_k});
    Tensor b({new_k});
    for (int i = 0; i < f_in; ++i) {
        for (int j = 0; j < old_k; ++j)
            w.data[static_cast<std::size_t>(i) * new_k + j] = old_w.data[static_cast<std::size_t>(i) * old_k + j];
        for (int e = 0; e < extra; ++e)
            w.data[static_cast<std::size_t>(i) * new_k + old_k + e] = fresh.data[static_cast<std::size_t>(i) * extra + e];
    }
    for (int j = 0; j < old_k; ++j) b.data[static_cast<std::size_t>(j)] = old_b.data[static_cast<std::size_t>(j)];
    // New-class biases stay zero: an untrained class should not outrank a
    // trained one before Phase I has run.

    g.params[out].w = std::move(w);
    g.params[out].b = std::move(b);
    g.specs[out].out_channels = new_k;
    g.specs[out + 1].in_channels = new_k;
    g.specs[out + 1].out_channels = new_k;
    g.validate();
    return g;
}

ForgettingReport forgetting_report(const ModelGraph& graph6, const ModelGraph& graph10,
                                   const SegmentSet& test6) {
    test6.validate();
    const int k6 = graph_num_classes(graph6);
    const int k10 = graph_num_classes(graph10);
    if (k10 < k6)
        throw std::invalid_argument("forgetting_report: expanded graph emits fewer classes than the original");
    for (int label : test6.labels)
        if (label < 0 || label >= k6)
            throw DataError("forgetting_report: test label " + std::to_string(label) +
                            " outside the original " + std::to_string(k6) + " classes");

    const ConfusionMatrix m6 = confusion(test6.labels, predict_labels(graph6, test6), k6);
    // Truth stays in 0..k6-1; predictions may land on the new classes, which
    // shows up as recall loss on the original rows.
    const ConfusionMatrix m10 = confusion(test6.labels, predict_labels(graph10, test6), k10);
    const std::vector<ClassPRF> prf6 = per_class_prf(m6);
    const std::vector<ClassPRF> prf10 = per_class_prf(m10);

    ForgettingReport rep;
    rep.f1_before.reserve(static_cast<std::size_t>(k6));
    rep.f1_after.reserve(static_cast<std::size_t>(k6));
    for (int c = 0; c < k6; ++c) {
        rep.f1_before.push_back(prf6[static_cast<std::size_t>(c)].f1);
        rep.f1_after.push_back(prf10[static_cast<std::size_t>(c)].f1);
    }
    rep.after_matrix = m10;
    return rep;
}

ExpansionReport train_two_phase(ModelGraph& graph10, const SegmentSet& train10, const SegmentSet& val10,
                                const SegmentSet& test10, const ClassifierConfig& cfg_phase1,
                                const ClassifierConfig& cfg_phase2) {
    if (cfg_phase2.train.learning_rate >= cfg_phase1.train.learning_rate)
        throw std::invalid_argument("train_two_phase: Phase II learning rate must be below Phase I's");
    const int k = graph_num_classes(graph10);

    ExpansionReport rep;

    apply_freeze_policy(graph10, FreezePolicy::NewOutputOnly);
    rep.phase1_log = train_classifier(graph10, train10, val10, cfg_phase1);
    // train_classifier leaves the best-validation parameters in the graph, so
    // Phase II departs from Phase I's best epoch rather than its last.
    rep.phase1_metrics = make_fold_report(test10.labels, predict_labels(graph10, test10), k, 0);
    rep.phase1_val_micro = micro_f1(confusion(val10.labels, predict_labels(graph10, val10), k));

    apply_freeze_policy(graph10, FreezePolicy::FullHead);
    rep.phase2_log = train_classifier(graph10, train10, val10, cfg_phase2);
    rep.phase2_metrics = make_fold_report(test10.labels, predict_labels(graph10, test10), k, 0);
    rep.phase2_val_micro = micro_f1(confusion(val10.labels, predict_labels(graph10, val10), k));
    return rep;
}

} // namespace semg
