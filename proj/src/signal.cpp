#include "semg/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace semg {

void TrialRecording::validate() const {
    if (subject < 1) throw DataError("recording: subject id must be >= 1, got " + std::to_string(subject));
    if (movement < 0) throw DataError("recording: movement class must be >= 0");
    if (trial < 1 || trial > 6) throw DataError("recording: trial index must be 1..6, got " + std::to_string(trial));
    if (samples.ndim() != 2 || samples.dim(1) != 2)
        throw DataError("recording: samples must be [L x 2], got " + samples.shape_str());
    if (samples.dim(0) < 1) throw DataError("recording: empty sample block");
}

void SegmentSet::append(const SegmentSet& other) {
    if (!empty() && !other.empty() && window != other.window)
        throw DataError("segment sets with window " + std::to_string(window) + " and " +
                        std::to_string(other.window) + " cannot be merged");
    if (empty()) window = other.window;
    segments.insert(segments.end(), other.segments.begin(), other.segments.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    provenance.insert(provenance.end(), other.provenance.begin(), other.provenance.end());
}

std::vector<SegmentOrigin> SegmentSet::origins() const {
    std::set<SegmentOrigin> s(provenance.begin(), provenance.end());
    return {s.begin(), s.end()};
}

std::vector<int> SegmentSet::subjects() const {
    std::set<int> s;
    for (const SegmentOrigin& o : provenance) s.insert(o.subject);
    return {s.begin(), s.end()};
}

void SegmentSet::validate() const {
    if (segments.size() != labels.size() || segments.size() != provenance.size())
        throw DataError("segment set: segment/label/provenance counts disagree");
    for (const Tensor& t : segments)
        if (t.ndim() != 2 || t.dim(0) != window || t.dim(1) != 2)
            throw DataError("segment set: segment shape " + t.shape_str() + " != [" +
                            std::to_string(window) + " x 2]");
}

SegmentSet segment(const TrialRecording& rec, int window, int stride) {
    rec.validate();
    if (window < 1 || stride < 1) throw DataError("segment: window and stride must be >= 1");
    const int len = rec.samples.dim(0);
    if (len < window)
        throw DataError("segment: trial has " + std::to_string(len) + " samples, window needs " +
                        std::to_string(window));
    const int count = (len - window) / stride + 1;

    SegmentSet out;
    out.window = window;
    out.segments.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        const int off = s * stride;
        Tensor seg({window, 2});
        std::copy_n(rec.samples.data.begin() + static_cast<std::ptrdiff_t>(off) * 2,
                    static_cast<std::size_t>(window) * 2, seg.data.begin());
        out.segments.push_back(std::move(seg));
        out.labels.push_back(rec.movement);
        out.provenance.push_back({rec.subject, rec.trial});
    }
    return out;
}

SegmentSet segment_all(const std::vector<TrialRecording>& recs, int window, int stride) {
    SegmentSet out;
    out.window = window;
    for (const TrialRecording& r : recs) out.append(segment(r, window, stride));
    return out;
}

Standardizer fit_standardizer(const SegmentSet& train, const std::string& fitted_on) {
    train.validate();
    if (train.empty()) throw DataError("standardizer: cannot fit on an empty set");

    Standardizer s;
    s.fitted_on = fitted_on;
    s.fit_origins = train.origins();

    std::array<double, 2> sum{0.0, 0.0};
    std::size_t n = 0;
    for (const Tensor& seg : train.segments) {
        for (int t = 0; t < seg.dim(0); ++t)
            for (int c = 0; c < 2; ++c) sum[static_cast<std::size_t>(c)] += seg.at(t, c);
        n += static_cast<std::size_t>(seg.dim(0));
    }
    for (int c = 0; c < 2; ++c) s.mean[static_cast<std::size_t>(c)] = sum[static_cast<std::size_t>(c)] / static_cast<double>(n);

    std::array<double, 2> ss{0.0, 0.0};
    for (const Tensor& seg : train.segments)
        for (int t = 0; t < seg.dim(0); ++t)
            for (int c = 0; c < 2; ++c) {
                const double d = seg.at(t, c) - s.mean[static_cast<std::size_t>(c)];
                ss[static_cast<std::size_t>(c)] += d * d;
            }
    for (int c = 0; c < 2; ++c)
        s.std[static_cast<std::size_t>(c)] =
            std::max(std::sqrt(ss[static_cast<std::size_t>(c)] / static_cast<double>(n)), 1e-8);

    s.fitted = true;
    return s;
}

SegmentSet apply_standardizer(const Standardizer& s, const SegmentSet& set, SplitUse use) {
    if (!s.fitted) throw DataError("standardizer: not fitted");
    if (use == SplitUse::Evaluation) {
        // Leakage guard: an evaluation split must not contain any trial that
        // contributed to the fit statistics.
        const std::vector<SegmentOrigin> eval_origins = set.origins();
        std::vector<SegmentOrigin> overlap;
        std::set_intersection(s.fit_origins.begin(), s.fit_origins.end(),
                              eval_origins.begin(), eval_origins.end(), std::back_inserter(overlap));
        if (!overlap.empty())
            throw DataError("leakage: evaluation split shares (subject " + std::to_string(overlap[0].subject) +
                            ", trial " + std::to_string(overlap[0].trial) + ") with the standardizer fit split [" +
                            s.fitted_on + "]");
    }
    SegmentSet out = set;
    for (Tensor& seg : out.segments)
        for (int t = 0; t < seg.dim(0); ++t)
            for (int c = 0; c < 2; ++c)
                seg.at(t, c) = (seg.at(t, c) - s.mean[static_cast<std::size_t>(c)]) / s.std[static_cast<std::size_t>(c)];
    return out;
}

const char* trial_role_name(TrialRole r) {
    switch (r) {
        case TrialRole::Train: return "train";
        case TrialRole::Val: return "val";
        case TrialRole::Test: return "test";
        case TrialRole::Calib: return "calib";
        case TrialRole::CalibVal: return "calib_val";
        case TrialRole::AdaptTest: return "adapt_test";
        case TrialRole::Unused: return "unused";
    }
    return "?";
}

TrialRole SplitPlan::role(int subject, int trial) const {
    if (subject == target_subject) {
        if (trial == 1) return TrialRole::Calib;
        if (trial == 2) return TrialRole::CalibVal;
        if (trial >= 3 && trial <= 6) return TrialRole::AdaptTest;
        return TrialRole::Unused;
    }
    const bool is_source = std::find(source_subjects.begin(), source_subjects.end(), subject) != source_subjects.end();
    if (!is_source) return TrialRole::Unused;
    if (trial >= 1 && trial <= 4) return TrialRole::Train;
    if (trial == 5) return TrialRole::Val;
    if (trial == 6) return TrialRole::Test;
    return TrialRole::Unused;
}

SegmentSet SplitPlan::select(const SegmentSet& all, TrialRole r) const {
    SegmentSet out;
    out.window = all.window;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const SegmentOrigin& o = all.provenance[i];
        if (role(o.subject, o.trial) != r) continue;
        out.segments.push_back(all.segments[i]);
        out.labels.push_back(all.labels[i]);
        out.provenance.push_back(o);
    }
    return out;
}

std::vector<SplitPlan> plan_loso(const std::vector<int>& subject_ids) {
    if (subject_ids.size() < 2) throw DataError("loso: need at least 2 subjects");
    std::vector<int> ids = subject_ids;
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw DataError("loso: duplicate subject id");

    std::vector<SplitPlan> plans;
    plans.reserve(ids.size());
    for (int target : ids) {
        SplitPlan p;
        p.target_subject = target;
        for (int s : ids)
            if (s != target) p.source_subjects.push_back(s);
        plans.push_back(std::move(p));
    }
    return plans;
}

// --- CSV -------------------------------------------------------------------

namespace {

constexpr const char* kHeader = "subject,movement,trial,sample_index,ch1,ch2";

// std::from_chars keeps parsing locale-independent and flags trailing junk.
long parse_long(std::string_view field, const char* what, std::size_t line_no) {
    long v = 0;
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
        throw DataError("csv line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" +
                        std::string(field) + "'");
    return v;
}

double parse_double(std::string_view field, const char* what, std::size_t line_no) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
        throw DataError("csv line " + std::to_string(line_no) + ": non-numeric " + std::string(what) + " '" +
                        std::string(field) + "'");
    return v;
}

} // namespace

std::vector<TrialRecording> load_trials_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw DataError(path + ": malformed header '" + line + "', expected '" + kHeader + "'");

    std::vector<TrialRecording> recs;
    TrialRecording cur;
    std::vector<double> samples;  // interleaved ch1, ch2
    long expect_index = 0;
    bool open = false;

    const auto flush = [&] {
        if (!open) return;
        cur.samples = Tensor({static_cast<int>(samples.size() / 2), 2}, samples);
        cur.validate();
        recs.push_back(std::move(cur));
        samples.clear();
        open = false;
    };

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::array<std::string_view, 6> f;
        std::string_view rest = line;
        for (int i = 0; i < 6; ++i) {
            const std::size_t comma = rest.find(',');
            if (i < 5) {
                if (comma == std::string_view::npos)
                    throw DataError("csv line " + std::to_string(line_no) + ": expected 6 columns, got " +
                                    std::to_string(i + 1));
                f[static_cast<std::size_t>(i)] = rest.substr(0, comma);
                rest.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos)
                    throw DataError("csv line " + std::to_string(line_no) + ": expected 6 columns, got more");
                f[static_cast<std::size_t>(i)] = rest;
            }
        }

        const int subject = static_cast<int>(parse_long(f[0], "subject", line_no));
        const int movement = static_cast<int>(parse_long(f[1], "movement", line_no));
        const int trial = static_cast<int>(parse_long(f[2], "trial", line_no));
        const long sample_index = parse_long(f[3], "sample_index", line_no);
        const double ch1 = parse_double(f[4], "ch1", line_no);
        const double ch2 = parse_double(f[5], "ch2", line_no);

        const bool same_trial = open && subject == cur.subject && movement == cur.movement && trial == cur.trial;
        if (!same_trial) {
            flush();
            cur.subject = subject;
            cur.movement = movement;
            cur.trial = trial;
            expect_index = 0;
            open = true;
        }
        if (sample_index != expect_index)
            throw DataError("csv line " + std::to_string(line_no) + ": sample_index " +
                            std::to_string(sample_index) + " out of order (expected " +
                            std::to_string(expect_index) + ")");
        ++expect_index;
        samples.push_back(ch1);
        samples.push_back(ch2);
    }
    flush();
    if (recs.empty()) throw DataError(path + ": no data rows");
    return recs;
}

void save_trials_csv(const std::vector<TrialRecording>& recs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << kHeader << '\n';
    char buf[160];
    for (const TrialRecording& r : recs) {
        r.validate();
        for (int t = 0; t < r.samples.dim(0); ++t) {
            std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.9g,%.9g\n", r.subject, r.movement, r.trial, t,
                          r.samples.at(t, 0), r.samples.at(t, 1));
            out << buf;
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<TrialRecording> load_dataset_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("not a dataset directory: " + dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .csv files under " + dir);

    std::vector<TrialRecording> all;
    for (const std::string& f : files) {
        std::vector<TrialRecording> part = load_trials_csv(f);
        all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return all;
}

} // namespace semg
