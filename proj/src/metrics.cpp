#include "semg/metrics.hpp"

#include <cmath>
#include <numeric>

namespace semg {

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

long long ConfusionMatrix::row_sum(int t) const {
    long long s = 0;
    for (int p = 0; p < k; ++p) s += at(t, p);
    return s;
}

long long ConfusionMatrix::col_sum(int p) const {
    long long s = 0;
    for (int t = 0; t < k; ++t) s += at(t, p);
    return s;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
    if (truth.size() != pred.size())
        throw std::invalid_argument("confusion: " + std::to_string(truth.size()) + " labels vs " +
                                    std::to_string(pred.size()) + " predictions");
    if (k < 1) throw std::invalid_argument("confusion: class count must be >= 1");
    ConfusionMatrix m(k);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= k || pred[i] < 0 || pred[i] >= k)
            throw std::invalid_argument("confusion: label out of range at sample " + std::to_string(i));
        ++m.at(truth[i], pred[i]);
    }
    return m;
}

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

ClassPRF prf_from_counts(double tp, double fp, double fn) {
    ClassPRF r;
    r.precision = safe_div(tp, tp + fp);
    r.recall = safe_div(tp, tp + fn);
    r.f1 = safe_div(2.0 * r.precision * r.recall, r.precision + r.recall);
    return r;
}

} // namespace

std::vector<ClassPRF> per_class_prf(const ConfusionMatrix& m) {
    std::vector<ClassPRF> out(static_cast<std::size_t>(m.k));
    for (int c = 0; c < m.k; ++c) {
        const double tp = static_cast<double>(m.at(c, c));
        const double fp = static_cast<double>(m.col_sum(c)) - tp;
        const double fn = static_cast<double>(m.row_sum(c)) - tp;
        out[static_cast<std::size_t>(c)] = prf_from_counts(tp, fp, fn);
    }
    return out;
}

double micro_f1(const ConfusionMatrix& m) {
    if (m.total() == 0) throw std::invalid_argument("micro_f1: empty confusion matrix");
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (int c = 0; c < m.k; ++c) {
        const double d = static_cast<double>(m.at(c, c));
        tp += d;
        fp += static_cast<double>(m.col_sum(c)) - d;
        fn += static_cast<double>(m.row_sum(c)) - d;
    }
    return prf_from_counts(tp, fp, fn).f1;
}

FoldReport make_fold_report(const std::vector<int>& truth, const std::vector<int>& pred, int k, int fold_id) {
    FoldReport r;
    r.fold_id = fold_id;
    r.matrix = confusion(truth, pred, k);
    r.per_class = per_class_prf(r.matrix);
    r.micro = micro_f1(r.matrix);
    return r;
}

namespace {

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe m;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) m.mean += x;
    m.mean /= n;
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        m.has_se = true;
    }
    return m;
}

} // namespace

CvSummary cv_aggregate(const std::vector<FoldReport>& folds) {
    if (folds.empty()) throw std::invalid_argument("cv_aggregate: no folds");
    const std::size_t k = folds[0].per_class.size();
    for (const FoldReport& f : folds)
        if (f.per_class.size() != k)
            throw std::invalid_argument("cv_aggregate: fold " + std::to_string(f.fold_id) +
                                        " has a different class count");

    CvSummary s;
    s.fold_count = static_cast<int>(folds.size());
    std::vector<double> xs(folds.size());
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t f = 0; f < folds.size(); ++f) xs[f] = folds[f].per_class[c].f1;
        s.per_class_f1.push_back(mean_se(xs));
    }
    for (std::size_t f = 0; f < folds.size(); ++f) xs[f] = folds[f].micro;
    s.micro = mean_se(xs);
    return s;
}

const std::vector<std::string>& class_label_names() {
    static const std::vector<std::string> names = {
        "hand-close", "thumb",       "index",        "middle",     "ring",
        "little",     "thumb-index", "thumb-middle", "thumb-ring", "thumb-little",
    };
    return names;
}

std::string class_label(int index) {
    const auto& names = class_label_names();
    if (index >= 0 && index < static_cast<int>(names.size())) return names[static_cast<std::size_t>(index)];
    return "class-" + std::to_string(index);
}

} // namespace semg
