#pragma once

// Confusion-matrix metrics: per-class precision/recall/F1, micro-averaged F1,
// and fold aggregation as mean ± standard error.

#include <string>
#include <vector>

#include "semg/tensor.hpp"

namespace semg {

struct ConfusionMatrix {
    int k = 0;
    std::vector<long long> counts;  // k*k, rows = true class, cols = predicted

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int classes) : k(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

    long long& at(int t, int p) { return counts[static_cast<std::size_t>(t) * k + p]; }
    long long at(int t, int p) const { return counts[static_cast<std::size_t>(t) * k + p]; }
    long long total() const;
    long long row_sum(int t) const;
    long long col_sum(int p) const;
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred, int k);

struct ClassPRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// TP = diagonal, FP = column minus TP, FN = row minus TP; any 0/0 is 0.
std::vector<ClassPRF> per_class_prf(const ConfusionMatrix& m);

// Pooled TP/FP/FN across classes; for single-label data this equals accuracy.
double micro_f1(const ConfusionMatrix& m);

struct FoldReport {
    int fold_id = 0;  // target subject of the fold
    std::vector<ClassPRF> per_class;
    double micro = 0.0;
    ConfusionMatrix matrix;
};

FoldReport make_fold_report(const std::vector<int>& truth, const std::vector<int>& pred, int k, int fold_id);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    bool has_se = false;  // absent with a single fold
};

struct CvSummary {
    std::vector<MeanSe> per_class_f1;
    MeanSe micro;
    int fold_count = 0;
};

// Mean and standard error (sample std over sqrt(n)) across folds, per class
// and for micro-F1.  One fold yields means with has_se = false.
CvSummary cv_aggregate(const std::vector<FoldReport>& folds);

// Fixed label order used by every report (first 6 for the base gesture set,
// all 10 after class expansion).
const std::vector<std::string>& class_label_names();
std::string class_label(int index);

} // namespace semg
