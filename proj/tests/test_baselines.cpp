#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "semg/baselines.hpp"
#include "semg/csae.hpp"
#include "semg/rng.hpp"
#include "semg/synthetic.hpp"

using namespace semg;

namespace {

// Single-channel [T x 1] segment from a value list.
Tensor column(const std::vector<double>& values) {
    Tensor t({static_cast<int>(values.size()), 1}, values);
    return t;
}

// The six per-channel features for `values` at the given deadband.
std::vector<double> features_of(const std::vector<double>& values, double eps) {
    return classical_features(column(values), eps).values;
}

ClassifierConfig head_cfg(int classes) {
    ClassifierConfig c;
    c.head_conv_channels = 3;
    c.head_conv_kernel = 2;
    c.head_conv_stride = 1;
    c.mlp_widths = {5, 4};
    c.num_classes = classes;
    return c;
}

// The shrunken autoencoder geometry shared with the other model tests.
ModelGraph small_encoder(std::uint64_t seed) {
    CsaeConfig cfg;
    cfg.input_len = 60;
    cfg.filters = {4, 5, 3};
    cfg.kernel_sizes = {5, 3, 2};
    cfg.strides = {4, 3, 1};
    return build_csae(cfg, seed);
}

bool same_bits(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] != b.data[i]) return false;
    return true;
}

// Flat structural fingerprint of a fitted forest, for equality checks.
std::vector<double> forest_fingerprint(const ForestModel& m) {
    std::vector<double> out;
    for (const DecisionTree& tree : m.trees)
        for (const TreeNode& node : tree.nodes) {
            out.push_back(node.feature);
            out.push_back(node.threshold);
            out.push_back(node.left);
            out.push_back(node.right);
            for (long long c : node.histogram) out.push_back(static_cast<double>(c));
        }
    return out;
}

// Two gaussian blobs in `dim` dimensions, centers 0 and `gap` on every axis.
void make_blobs(int per_class, int dim, double gap, std::uint64_t seed,
                std::vector<std::vector<double>>& x, std::vector<int>& y) {
    Rng rng(seed);
    for (int cls = 0; cls < 2; ++cls)
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> row(static_cast<std::size_t>(dim));
            for (double& v : row) v = cls * gap + 0.5 * rng.normal();
            x.push_back(std::move(row));
            y.push_back(cls);
        }
}

TreeNode leaf(std::vector<long long> histogram) {
    TreeNode n;
    n.histogram = std::move(histogram);
    return n;
}

TreeNode split(int feature, double threshold, int left, int right) {
    TreeNode n;
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return n;
}

} // namespace

TEST_CASE("classical features match hand-computed values on a square wave") {
    // x = [1,-1,1,-1]: mean 0, every |step| = 2, three sign flips, two slope
    // reversals at the interior points.
    const std::vector<double> sq = features_of({1.0, -1.0, 1.0, -1.0}, 0.0);
    REQUIRE(sq.size() == 6);
    CHECK(sq[0] == 1.0);  // MAV
    CHECK(sq[1] == 1.0);  // VAR
    CHECK(sq[2] == 3.0);  // ZC
    CHECK(sq[3] == 2.0);  // SSC
    CHECK(sq[4] == 6.0);  // WL
    CHECK(sq[5] == 1.0);  // RMS

    // A constant trace has amplitude but no variation of any kind.
    const std::vector<double> flat = features_of({2.0, 2.0, 2.0, 2.0}, 0.0);
    CHECK(flat == std::vector<double>{2.0, 0.0, 0.0, 0.0, 0.0, 2.0});

    // Variance is the population form (divide by T), matching the
    // standardizer: {1,3,5,7} -> mean 4, var 5 (the sample form would be 20/3).
    CHECK(features_of({1.0, 3.0, 5.0, 7.0}, 0.0)[1] == 5.0);

    // Channels are independent and concatenated in channel order.
    Tensor two({4, 2});
    const double ch1[] = {1.0, -1.0, 1.0, -1.0};
    for (int t = 0; t < 4; ++t) {
        two.at(t, 0) = ch1[t];
        two.at(t, 1) = 2.0;
    }
    const FeatureVector fv = classical_features(two, 0.0);
    REQUIRE(fv.values.size() == 12);
    for (int i = 0; i < 6; ++i) {
        CHECK(fv.values[static_cast<std::size_t>(i)] == sq[static_cast<std::size_t>(i)]);
        CHECK(fv.values[static_cast<std::size_t>(i + 6)] == flat[static_cast<std::size_t>(i)]);
    }

    const std::vector<std::string> names = classical_feature_names(2);
    CHECK(names == std::vector<std::string>{"ch1_mav", "ch1_var", "ch1_zc", "ch1_ssc", "ch1_wl", "ch1_rms",
                                            "ch2_mav", "ch2_var", "ch2_zc", "ch2_ssc", "ch2_wl", "ch2_rms"});
}

TEST_CASE("zero crossings and slope sign changes honor the amplitude deadband") {
    // Three sign flips, but the first swing (0.3 to -0.3) is only 0.6 tall.
    const std::vector<double> zx = {0.3, -0.3, 2.0, -2.0};
    CHECK(features_of(zx, 0.0)[2] == 3.0);
    CHECK(features_of(zx, 1.0)[2] == 2.0);

    // Exact zeros never cross: the sign product must be strictly negative.
    CHECK(features_of({1.0, 0.0, -1.0}, 0.0)[2] == 0.0);

    // Slope reversals at t=1 (tiny bump), t=2 and t=3 (tall spike).  The
    // deadband drops a reversal only when BOTH adjacent slopes are tiny.
    const std::vector<double> sx = {0.0, 0.1, 0.0, 5.0, 0.0};
    CHECK(features_of(sx, 0.0)[3] == 3.0);
    CHECK(features_of(sx, 0.2)[3] == 2.0);

    // A monotone ramp has no reversals; a single peak has exactly one.
    CHECK(features_of({0.0, 1.0, 2.0, 3.0}, 0.0)[3] == 0.0);
    CHECK(features_of({0.0, 2.0, 0.0}, 0.0)[3] == 1.0);
}

TEST_CASE("classical feature extraction rejects malformed input") {
    CHECK_THROWS_AS(classical_features(Tensor({4}, {1.0, 2.0, 3.0, 4.0}), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(classical_features(column({1.0, 2.0}), -0.1), std::invalid_argument);

    Tensor bad = column({1.0, 2.0, 3.0});
    bad.data[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(classical_features(bad, 0.0), NumericError);

    // The matrix helper is exactly the per-segment extraction, row per segment.
    SegmentSet set;
    set.window = 4;
    set.segments.push_back(column({1.0, -1.0, 1.0, -1.0}));
    set.segments.push_back(column({2.0, 2.0, 2.0, 2.0}));
    const auto rows = classical_feature_matrix(set, 0.0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == classical_features(set.segments[0], 0.0).values);
    CHECK(rows[1] == classical_features(set.segments[1], 0.0).values);
}

TEST_CASE("segment flattening preserves row-major sample order") {
    Tensor seg({3, 2});
    for (int t = 0; t < 3; ++t)
        for (int c = 0; c < 2; ++c) seg.at(t, c) = 10.0 * t + c;

    const Tensor flat = flatten_segment(seg);
    CHECK(flat.shape == std::vector<int>{6});
    CHECK(flat.data == std::vector<double>{0.0, 1.0, 10.0, 11.0, 20.0, 21.0});
    CHECK_THROWS_AS(flatten_segment(Tensor({6}, flat.data)), std::invalid_argument);

    SegmentSet set;
    set.window = 3;
    set.segments.push_back(seg);
    set.segments.push_back(seg);
    CHECK(flatten_segments(set).size() == 2);
    CHECK(same_bits(flatten_segments(set)[1], flat));
}

TEST_CASE("dense autoencoder mirrors its hidden widths around a linear bottleneck") {
    const ModelGraph g = build_fcae();
    REQUIRE(g.layer_count() == 6);
    const char* names[] = {"enc1", "enc1_act", "code", "dec1", "dec1_act", "recon"};
    for (int i = 0; i < 6; ++i) CHECK(g.specs[static_cast<std::size_t>(i)].name == names[i]);
    CHECK(g.specs[0].kind == LayerKind::Dense);
    CHECK(g.specs[1].kind == LayerKind::LeakyRelu);
    CHECK(g.specs[2].kind == LayerKind::Dense);

    // 2000 -> 512 -> 128 -> 512 -> 2000, bottleneck and output linear.
    CHECK(g.specs[0].in_channels == 2000);
    CHECK(g.specs[0].out_channels == 512);
    CHECK(g.specs[2].in_channels == 512);
    CHECK(g.specs[2].out_channels == 128);
    CHECK(g.specs[3].out_channels == 512);
    CHECK(g.specs[5].out_channels == 2000);
    CHECK(g.latent_layer == 2);
    CHECK(g.encoder_layers == 3);
    CHECK(g.param_count() == 2182224);  // 2000*512+512 + 512*128+128 + 128*512+512 + 512*2000+2000
    CHECK(g.infer_shapes().back() == std::vector<int>{2000});

    // Two hidden stages mirror in reverse order on the decoder side.
    const ModelGraph h = build_fcae({8, 6}, 4, 1, 20);
    REQUIRE(h.layer_count() == 10);
    CHECK(h.specs[4].name == "code");
    CHECK(h.latent_layer == 4);
    CHECK(h.encoder_layers == 5);
    CHECK(h.specs[5].out_channels == 6);  // dec1 undoes enc2
    CHECK(h.specs[7].out_channels == 8);  // dec2 undoes enc1
    CHECK(h.specs[9].out_channels == 20);

    CHECK_THROWS_AS(build_fcae({8}, 0, 1, 20), std::invalid_argument);
    CHECK_THROWS_AS(build_fcae({8}, 4, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_fcae({0}, 4, 1, 20), std::invalid_argument);
}

TEST_CASE("dense autoencoder training shrinks reconstruction error on planar data") {
    // Inputs live on a 2-D plane inside R^8, so a 3-wide bottleneck can
    // represent them exactly; training should get close.
    Rng rng(17);
    std::vector<double> v1(8), v2(8);
    for (double& v : v1) v = rng.normal();
    for (double& v : v2) v = rng.normal();
    const auto sample = [&](Rng& r) {
        const double a = r.normal(), b = r.normal();
        std::vector<double> row(8);
        for (int i = 0; i < 8; ++i)
            row[static_cast<std::size_t>(i)] =
                a * v1[static_cast<std::size_t>(i)] + b * v2[static_cast<std::size_t>(i)];
        return Tensor({8}, row);
    };
    std::vector<Tensor> train, val;
    for (int i = 0; i < 60; ++i) train.push_back(sample(rng));
    for (int i = 0; i < 20; ++i) val.push_back(sample(rng));

    ModelGraph g = build_fcae({6}, 3, 5, 8);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 8;
    cfg.max_epochs = 80;
    cfg.seed = 9;
    const TrainLog log = train_fcae(g, train, val, 0.0, cfg);
    REQUIRE(!log.epochs.empty());
    CHECK(log.best_val < 0.2 * log.epochs.front().val_loss);

    CHECK_THROWS_AS(train_fcae(g, {}, val, 0.0, cfg), DataError);
    CHECK_THROWS_AS(train_fcae(g, train, val, -1.0, cfg), std::invalid_argument);
    ModelGraph frozen = build_fcae({6}, 3, 5, 8);
    frozen.specs[0].trainable = false;
    CHECK_THROWS_AS(train_fcae(frozen, train, val, 0.0, cfg), std::invalid_argument);
}

TEST_CASE("dense autoencoder latents come from the encoder half") {
    const ModelGraph g = build_fcae({6}, 3, 5, 8);
    Rng rng(23);
    std::vector<Tensor> flat;
    for (int i = 0; i < 4; ++i) {
        Tensor x({8});
        for (double& v : x.data) v = rng.normal();
        flat.push_back(std::move(x));
    }
    flat.push_back(flat[0]);  // duplicate input -> duplicate code

    const auto rows = fcae_latents(g, flat);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].size() == 3);
        CHECK(rows[i] == g.forward_range(0, g.encoder_layers, flat[i]).data);
    }
    CHECK(rows[4] == rows[0]);
    CHECK(rows[1] != rows[0]);
}

TEST_CASE("mean-pooling ablation zeroes only the attention scores") {
    const ModelGraph enc = small_encoder(41);
    const ClassifierConfig cfg = head_cfg(3);
    const ModelGraph attn = build_classifier(enc, cfg, 31);
    ModelGraph gap = gap_head_variant(enc, cfg, 31);
    REQUIRE(gap.layer_count() == attn.layer_count());

    int pool = -1;
    for (int i = 0; i < attn.layer_count(); ++i)
        if (attn.specs[static_cast<std::size_t>(i)].kind == LayerKind::AttentionPool) pool = i;
    REQUIRE(pool >= 0);

    CHECK(gap.specs[static_cast<std::size_t>(pool)].name == "gap");
    CHECK(!gap.specs[static_cast<std::size_t>(pool)].trainable);
    for (double v : gap.params[static_cast<std::size_t>(pool)].w.data) CHECK(v == 0.0);
    for (double v : gap.params[static_cast<std::size_t>(pool)].b.data) CHECK(v == 0.0);

    // Every other layer keeps the exact draws of the attention variant, so a
    // score difference between the two models is the pooling and nothing else.
    for (int i = 0; i < gap.layer_count(); ++i) {
        if (i == pool) continue;
        CHECK(gap.specs[static_cast<std::size_t>(i)].name == attn.specs[static_cast<std::size_t>(i)].name);
        CHECK(same_bits(gap.params[static_cast<std::size_t>(i)].w, attn.params[static_cast<std::size_t>(i)].w));
        CHECK(same_bits(gap.params[static_cast<std::size_t>(i)].b, attn.params[static_cast<std::size_t>(i)].b));
    }

    // Constant (zero) scores make the softmax weights uniform, so the pooled
    // vector is exactly the unweighted time mean.
    Rng rng(77);
    Tensor x({60, 2});
    for (double& v : x.data) v = rng.normal();
    const Tensor pre = gap.forward_range(0, pool, x);
    const Tensor pooled = gap.forward_range(0, pool + 1, x);
    REQUIRE(pre.ndim() == 2);
    REQUIRE(pooled.size() == static_cast<std::size_t>(pre.dim(1)));
    for (int d = 0; d < pre.dim(1); ++d) {
        double mean = 0.0;
        for (int t = 0; t < pre.dim(0); ++t) mean += pre.at(t, d);
        mean /= pre.dim(0);
        CHECK(pooled.data[static_cast<std::size_t>(d)] == doctest::Approx(mean).epsilon(1e-12));
    }

    // Still a working classifier end to end.
    const Tensor probs = gap.forward(x);
    double total = 0.0;
    for (double p : probs.data) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("resource accounting follows the stated counting rules") {
    // Lone convolution, worked by hand: T_out = (12-5)/1+1... no — kernel 3:
    // T_out = (12-3)/1+1 = 10, so 10*4 outputs each costing 2*3*2 MAC flops
    // plus one bias add; 28 parameters; peak footprint in+out = 24+40 floats.
    ModelGraph conv;
    conv.input_len = 12;
    conv.input_ch = 2;
    LayerSpec cs;
    cs.kind = LayerKind::Conv1d;
    cs.name = "probe";
    cs.in_channels = 2;
    cs.out_channels = 4;
    cs.kernel_size = 3;
    cs.stride = 1;
    conv.specs.push_back(cs);
    conv.init_params(1);
    conv.validate();
    const ResourceReport cr = resource_report(conv);
    CHECK(cr.flops == 520);
    CHECK(cr.static_bytes == 112);
    CHECK(cr.runtime_bytes == 256);

    // Dense 10->10 with leaky and softmax on top: 2*100+10, +10, +5*10.
    ModelGraph mlp;
    mlp.input_len = 10;
    mlp.input_ch = 1;
    LayerSpec ds;
    ds.kind = LayerKind::Dense;
    ds.name = "fc";
    ds.in_channels = 10;
    ds.out_channels = 10;
    mlp.specs.push_back(ds);
    LayerSpec as;
    as.kind = LayerKind::LeakyRelu;
    as.name = "fc_act";
    as.in_channels = 10;
    as.out_channels = 10;
    mlp.specs.push_back(as);
    LayerSpec ss;
    ss.kind = LayerKind::Softmax;
    ss.name = "probs";
    ss.in_channels = 10;
    ss.out_channels = 10;
    mlp.specs.push_back(ss);
    mlp.init_params(1);
    mlp.validate();
    const ResourceReport mr = resource_report(mlp);
    CHECK(mr.flops == 270);
    CHECK(mr.static_bytes == 440);
    CHECK(mr.runtime_bytes == 80);

    // The whole shrunken autoencoder, summed layer by layer on paper:
    // conv 1176+500+189, tconv 200+528+3192, activations 56+20+20+48,
    // peak at the first layer (120+56 floats), 371 parameters.
    const ResourceReport ar = resource_report(small_encoder(3));
    CHECK(ar.flops == 5929);
    CHECK(ar.runtime_bytes == 704);
    CHECK(ar.static_bytes == 1484);

    // Full-size model: the parameter count is pinned elsewhere; the static
    // rule is exactly four bytes each.
    CHECK(resource_report(build_csae(CsaeConfig{}, 1)).static_bytes == 4 * 10698);

    CHECK(!ar.rules.empty());
    CHECK(ar.rules.find("4 B/parameter") != std::string::npos);
    CHECK(ar.rules.find("MAC = 2") != std::string::npos);
}

TEST_CASE("forest training is deterministic and separates distinct clusters") {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    make_blobs(40, 5, 4.0, 101, x, y);

    const ForestModel a = forest_fit(x, y, 15, 5, 3);
    CHECK(a.num_classes == 2);
    CHECK(a.num_features == 5);
    CHECK(a.max_depth == 5);
    CHECK(a.seed == 3);
    REQUIRE(a.trees.size() == 15);

    // Same data, same seed: bit-identical trees.  A different seed reshuffles
    // bootstraps and feature draws, so the structure diverges.
    const ForestModel b = forest_fit(x, y, 15, 5, 3);
    CHECK(forest_fingerprint(a) == forest_fingerprint(b));
    const ForestModel c = forest_fit(x, y, 15, 5, 4);
    CHECK(forest_fingerprint(a) != forest_fingerprint(c));

    // Fresh points from the same blobs, far from the decision boundary.
    std::vector<std::vector<double>> held;
    std::vector<int> truth;
    make_blobs(10, 5, 4.0, 555, held, truth);
    CHECK(forest_predict(a, held) == truth);
}

TEST_CASE("forest votes break ties toward the lower class index") {
    ForestModel m;
    m.num_classes = 3;
    m.num_features = 1;
    m.max_depth = 4;

    // Leaf-only trees voting 0 and 1: the 1-1 tie resolves to class 0.
    m.trees.push_back({{leaf({1, 0, 0})}});
    m.trees.push_back({{leaf({0, 1, 0})}});
    CHECK(forest_predict_one(m, {0.0}) == 0);

    // Within a leaf, an equal histogram also takes the lower index.
    ForestModel tied;
    tied.num_classes = 3;
    tied.num_features = 1;
    tied.trees.push_back({{leaf({0, 2, 2})}});
    CHECK(forest_predict_one(tied, {0.0}) == 1);

    // Routing: x <= threshold goes left, strictly greater goes right.
    ForestModel routed;
    routed.num_classes = 2;
    routed.num_features = 1;
    routed.trees.push_back({{split(0, 0.5, 1, 2), leaf({5, 0}), leaf({0, 5})}});
    CHECK(forest_predict_one(routed, {0.5}) == 0);
    CHECK(forest_predict_one(routed, {0.6}) == 1);
    CHECK(forest_predict(routed, {{-1.0}, {1.0}}) == std::vector<int>{0, 1});

    CHECK_THROWS_AS(forest_predict_one(routed, {1.0, 2.0}), DataError);
}

TEST_CASE("stump forests and label edge cases behave as documented") {
    std::vector<std::vector<double>> x = {{0.0, 1.0}, {1.0, 0.0}, {2.0, 2.0}, {3.0, 1.0}};
    std::vector<int> y = {0, 0, 0, 2};  // class 1 never appears

    // Depth 0 gives histogram stumps: one leaf per tree, input ignored.
    const ForestModel stump = forest_fit(x, y, 4, 0, 7);
    CHECK(stump.num_classes == 3);  // max label + 1, gaps included
    for (const DecisionTree& tree : stump.trees) {
        REQUIRE(tree.nodes.size() == 1);
        CHECK(tree.nodes[0].feature == -1);
        CHECK(tree.nodes[0].histogram.size() == 3);
    }
    CHECK(forest_predict_one(stump, {9.0, 9.0}) == forest_predict_one(stump, {-9.0, -9.0}));

    CHECK_THROWS_AS(forest_fit({}, {}, 1, 2, 0), DataError);
    CHECK_THROWS_AS(forest_fit(x, {0, 1}, 1, 2, 0), DataError);
    CHECK_THROWS_AS(forest_fit(x, y, 0, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(forest_fit(x, y, 1, -1, 0), std::invalid_argument);
    CHECK_THROWS_AS(forest_fit({{1.0}, {1.0, 2.0}, {1.0}, {1.0}}, y, 1, 2, 0), DataError);
    CHECK_THROWS_AS(forest_fit(x, {0, 0, 0, -1}, 1, 2, 0), DataError);
    CHECK_THROWS_AS(forest_fit({{}, {}}, {0, 1}, 1, 2, 0), DataError);
}

TEST_CASE("forest and classical cost formulas match hand arithmetic") {
    ForestModel m;
    m.num_classes = 3;
    m.num_features = 1;
    m.max_depth = 4;
    m.trees.push_back({{split(0, 0.5, 1, 2), leaf({5, 0, 0}), leaf({0, 5, 0})}});
    m.trees.push_back({{leaf({1, 1, 1})}});

    // One internal node at 20 bytes, three leaves at 4 + 8*3 = 28 each.
    CHECK(forest_static_bytes(m) == 20 + 3 * 28);
    // Worst-case path: 2 trees * depth 4 comparisons + 3 vote adds.
    CHECK(forest_inference_flops(m) == 11);

    CHECK(classical_feature_flops(1000, 2) == 32000);
    CHECK(classical_feature_flops(60, 2) == 1920);
}

TEST_CASE("classical features feed a forest well enough to fit its training set") {
    SyntheticConfig sc;
    sc.samples_per_trial = 600;
    const auto recs = generate_synthetic_subject(1, 3, 2, 42, SubjectProfile{}, sc);
    SegmentSet set;
    set.window = 60;
    for (const TrialRecording& r : recs) set.append(segment(r, 60, 60));
    REQUIRE(set.size() == 60);  // 3 classes * 2 trials * 10 windows

    const auto rows = classical_feature_matrix(set);
    const ForestModel model = forest_fit(rows, set.labels, 12, 8, 5);
    const std::vector<int> pred = forest_predict(model, rows);
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == set.labels[i]) ++hits;
    // In-bag accuracy of a deep forest should be near-perfect; well above
    // the 1/3 chance level at any rate.
    CHECK(hits >= 51);  // 85%
}
