#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "semg/graph.hpp"
#include "semg/rng.hpp"
#include "semg/train.hpp"

using namespace semg;

namespace {

// Small feed-forward stack for exercising the loop itself: dense -> leaky ->
// dense, with an optional softmax so the same helper serves both objectives.
ModelGraph dense_stack(int f_in, int hidden, int f_out, bool with_softmax, std::uint64_t seed) {
    ModelGraph g;
    g.input_len = f_in;
    g.input_ch = 1;
    const auto dense = [&](const std::string& name, int in, int out) {
        LayerSpec sp;
        sp.kind = LayerKind::Dense;
        sp.name = name;
        sp.in_channels = in;
        sp.out_channels = out;
        g.specs.push_back(sp);
    };
    dense("fc1", f_in, hidden);
    LayerSpec act;
    act.kind = LayerKind::LeakyRelu;
    act.name = "fc1_act";
    act.in_channels = hidden;
    act.out_channels = hidden;
    g.specs.push_back(act);
    dense("out", hidden, f_out);
    if (with_softmax) {
        LayerSpec sm;
        sm.kind = LayerKind::Softmax;
        sm.name = "probs";
        sm.in_channels = f_out;
        sm.out_channels = f_out;
        g.specs.push_back(sm);
    }
    g.init_params(seed);
    g.validate();
    return g;
}

std::vector<Tensor> random_inputs(std::size_t n, int f, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // 1-D like the dense output, so reconstruction targets line up.
        Tensor x({f});
        for (double& v : x.data) v = rng.normal();
        out.push_back(std::move(x));
    }
    return out;
}

double mean_val_mse(const ModelGraph& g, const std::vector<Tensor>& val) {
    double sum = 0.0;
    for (const Tensor& x : val) sum += mse_loss(g.forward(x), x);
    return sum / static_cast<double>(val.size());
}

double mean_val_ce(const ModelGraph& g, const std::vector<Tensor>& val, const std::vector<int>& labels) {
    double sum = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) sum += cross_entropy(g.forward(val[i]), labels[i]);
    return sum / static_cast<double>(val.size());
}

// Training on all-class-0 labels while validating against all-class-1 labels
// makes the validation loss rise monotonically after the first epoch, which
// pins down best_epoch and lets the early-stop/plateau arithmetic be checked
// exactly.
struct ConflictSetup {
    ModelGraph graph;
    std::vector<Tensor> train, val;
    std::vector<int> train_labels, val_labels;

    explicit ConflictSetup(std::uint64_t seed)
        : graph(dense_stack(4, 6, 3, true, seed)),
          train(random_inputs(12, 4, mix_seed(seed, 1))),
          val(random_inputs(6, 4, mix_seed(seed, 2))),
          train_labels(12, 0),
          val_labels(6, 1) {}
};

} // namespace

TEST_CASE("the loop drives a learnable identity regression toward zero loss") {
    ModelGraph g = dense_stack(4, 8, 4, false, 11);
    g.latent_layer = 0;
    // Enough samples that memorizing cannot beat the identity map itself.
    const std::vector<Tensor> train = random_inputs(200, 4, 21);
    const std::vector<Tensor> val = random_inputs(40, 4, 22);
    ReconstructionObjective obj(train, val, 0.0, 1, 0);

    TrainConfig cfg;
    cfg.learning_rate = 2e-2;
    cfg.batch_size = 16;
    cfg.max_epochs = 200;
    cfg.early_stop_patience = 60;
    cfg.plateau_patience = 20;
    cfg.min_lr = 1e-5;
    cfg.seed = 5;
    const TrainLog log = train_loop(g, obj, cfg);

    REQUIRE(!log.epochs.empty());
    CHECK(log.epochs.size() <= static_cast<std::size_t>(cfg.max_epochs));
    for (std::size_t i = 0; i < log.epochs.size(); ++i) {
        CHECK(log.epochs[i].epoch == static_cast<int>(i) + 1);
        CHECK(log.epochs[i].lr > 0.0);
        CHECK(log.epochs[i].seconds >= 0.0);
    }
    CHECK((log.stop_reason == "early_stop" || log.stop_reason == "max_epochs"));
    CHECK(log.best_val < log.epochs.front().val_loss);
    CHECK(log.best_val < 0.05);

    // Best-epoch parameters were restored: re-evaluating the validation set
    // must land exactly on the recorded best.
    CHECK(mean_val_mse(g, val) == doctest::Approx(log.best_val).epsilon(1e-12));
}

TEST_CASE("early stopping fires when validation stops improving and restores the best epoch") {
    ConflictSetup s(31);
    ClassificationObjective obj(s.train, s.train_labels, s.val, s.val_labels);

    TrainConfig cfg;
    cfg.learning_rate = 5e-2;
    cfg.batch_size = 4;
    cfg.max_epochs = 100;
    cfg.early_stop_patience = 4;
    cfg.plateau_patience = 50;  // never cuts within this run
    cfg.min_lr = 1e-6;
    cfg.seed = 9;
    const TrainLog log = train_loop(s.graph, obj, cfg);

    REQUIRE(log.best_epoch == 1);
    CHECK(log.stop_reason == "early_stop");
    // best epoch + exactly `patience` stale epochs, then stop.
    CHECK(log.epochs.size() == static_cast<std::size_t>(log.best_epoch + cfg.early_stop_patience));
    CHECK(log.epochs.back().val_loss > log.best_val);
    CHECK(mean_val_ce(s.graph, s.val, s.val_labels) == doctest::Approx(log.best_val).epsilon(1e-12));
}

TEST_CASE("the plateau schedule halves the learning rate and respects the floor") {
    ConflictSetup s(47);
    ClassificationObjective obj(s.train, s.train_labels, s.val, s.val_labels);

    TrainConfig cfg;
    cfg.learning_rate = 4e-3;
    cfg.batch_size = 4;
    cfg.max_epochs = 50;
    cfg.early_stop_patience = 9;
    cfg.plateau_patience = 2;
    cfg.plateau_factor = 0.5;
    cfg.min_lr = 1e-3;
    cfg.seed = 13;
    const TrainLog log = train_loop(s.graph, obj, cfg);

    REQUIRE(log.best_epoch == 1);
    REQUIRE(log.epochs.size() == 10);  // best + 9 stale
    // Each row records the rate the epoch ran at; cuts land after epochs 3,
    // 5, 7, 9 and the floor absorbs everything past 1e-3.
    for (int e = 0; e < 3; ++e) CHECK(log.epochs[static_cast<std::size_t>(e)].lr == 4e-3);
    for (int e = 3; e < 5; ++e) CHECK(log.epochs[static_cast<std::size_t>(e)].lr == 2e-3);
    for (int e = 5; e < 10; ++e) CHECK(log.epochs[static_cast<std::size_t>(e)].lr == 1e-3);
    for (std::size_t i = 1; i < log.epochs.size(); ++i) {
        CHECK(log.epochs[i].lr <= log.epochs[i - 1].lr);
        CHECK(log.epochs[i].lr >= cfg.min_lr);
    }
}

TEST_CASE("identical seeds reproduce the run bit for bit") {
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 4;
    cfg.max_epochs = 12;
    cfg.early_stop_patience = 12;
    cfg.plateau_patience = 4;
    cfg.min_lr = 1e-4;
    cfg.seed = 77;

    const auto run = [&](std::uint64_t seed) {
        ConflictSetup s(101);
        ClassificationObjective obj(s.train, s.train_labels, s.val, s.val_labels);
        TrainConfig c = cfg;
        c.seed = seed;
        const TrainLog log = train_loop(s.graph, obj, c);
        return std::make_pair(log, s.graph.snapshot());
    };

    const auto [log_a, snap_a] = run(77);
    const auto [log_b, snap_b] = run(77);
    REQUIRE(log_a.epochs.size() == log_b.epochs.size());
    for (std::size_t i = 0; i < log_a.epochs.size(); ++i) {
        CHECK(log_a.epochs[i].train_loss == log_b.epochs[i].train_loss);
        CHECK(log_a.epochs[i].val_loss == log_b.epochs[i].val_loss);
        CHECK(log_a.epochs[i].lr == log_b.epochs[i].lr);
    }
    REQUIRE(snap_a.size() == snap_b.size());
    bool identical = true;
    for (std::size_t i = 0; i < snap_a.size(); ++i) identical = identical && snap_a[i] == snap_b[i];
    CHECK(identical);

    // A different shuffle seed visits batches in another order and must leave
    // a different model behind.
    const auto [log_c, snap_c] = run(78);
    bool same_as_a = snap_c.size() == snap_a.size();
    if (same_as_a)
        for (std::size_t i = 0; i < snap_a.size(); ++i) same_as_a = same_as_a && snap_a[i] == snap_c[i];
    CHECK(!same_as_a);
}

TEST_CASE("training touches only layers above the frozen prefix") {
    ModelGraph g = dense_stack(4, 8, 3, true, 55);
    g.specs[0].trainable = false;
    const int lo = g.frozen_prefix();
    REQUIRE(lo == 2);  // dense (frozen) + paramless leaky

    // The loop runs the graph from the boundary, so hand it boundary inputs.
    const std::vector<Tensor> raw_train = random_inputs(10, 4, 56);
    const std::vector<Tensor> raw_val = random_inputs(5, 4, 57);
    std::vector<Tensor> train, val;
    for (const Tensor& x : raw_train) train.push_back(g.forward_range(0, lo, x));
    for (const Tensor& x : raw_val) val.push_back(g.forward_range(0, lo, x));
    std::vector<int> train_labels, val_labels;
    for (std::size_t i = 0; i < train.size(); ++i) train_labels.push_back(static_cast<int>(i) % 3);
    for (std::size_t i = 0; i < val.size(); ++i) val_labels.push_back(static_cast<int>(i) % 3);

    const Tensor frozen_w = g.params[0].w;
    const Tensor head_w = g.params[2].w;

    ClassificationObjective obj(train, train_labels, val, val_labels);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 4;
    cfg.max_epochs = 5;
    cfg.seed = 3;
    train_loop(g, obj, cfg);

    bool frozen_intact = true;
    for (std::size_t i = 0; i < frozen_w.data.size(); ++i)
        frozen_intact = frozen_intact && g.params[0].w[i] == frozen_w[i];
    CHECK(frozen_intact);
    bool head_moved = false;
    for (std::size_t i = 0; i < head_w.data.size(); ++i)
        head_moved = head_moved || g.params[2].w[i] != head_w[i];
    CHECK(head_moved);
}

TEST_CASE("zero max_epochs performs no updates") {
    ConflictSetup s(61);
    ClassificationObjective obj(s.train, s.train_labels, s.val, s.val_labels);
    const std::vector<double> before = s.graph.snapshot();

    TrainConfig cfg;
    cfg.max_epochs = 0;
    const TrainLog log = train_loop(s.graph, obj, cfg);

    CHECK(log.epochs.empty());
    CHECK(log.best_epoch == -1);
    CHECK(log.stop_reason == "max_epochs");
    const std::vector<double> after = s.graph.snapshot();
    REQUIRE(before.size() == after.size());
    bool unchanged = true;
    for (std::size_t i = 0; i < before.size(); ++i) unchanged = unchanged && before[i] == after[i];
    CHECK(unchanged);
}

TEST_CASE("empty datasets and fully frozen graphs are rejected") {
    ConflictSetup s(71);
    const std::vector<Tensor> none;
    const std::vector<int> no_labels;
    TrainConfig cfg;

    ClassificationObjective no_train(none, no_labels, s.val, s.val_labels);
    CHECK_THROWS_AS(train_loop(s.graph, no_train, cfg), std::invalid_argument);
    ClassificationObjective no_val(s.train, s.train_labels, none, no_labels);
    CHECK_THROWS_AS(train_loop(s.graph, no_val, cfg), std::invalid_argument);

    for (LayerSpec& sp : s.graph.specs) sp.trainable = false;
    ClassificationObjective obj(s.train, s.train_labels, s.val, s.val_labels);
    CHECK_THROWS_AS(train_loop(s.graph, obj, cfg), std::invalid_argument);
}

TEST_CASE("non-finite losses abort with a numeric error") {
    ConflictSetup s(81);
    s.train[3].data[1] = std::numeric_limits<double>::quiet_NaN();
    ClassificationObjective obj(s.train, s.train_labels, s.val, s.val_labels);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.max_epochs = 2;
    CHECK_THROWS_AS(train_loop(s.graph, obj, cfg), NumericError);
}

TEST_CASE("configuration validation rejects out-of-range values") {
    const TrainConfig good;
    good.validate();  // defaults must pass

    auto reject = [](auto mutate) {
        TrainConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    reject([](TrainConfig& c) { c.learning_rate = 0.0; });
    reject([](TrainConfig& c) { c.batch_size = 0; });
    reject([](TrainConfig& c) { c.max_epochs = -1; });
    reject([](TrainConfig& c) { c.early_stop_patience = 0; });
    reject([](TrainConfig& c) { c.plateau_patience = 0; });
    reject([](TrainConfig& c) { c.plateau_factor = 1.0; });
    reject([](TrainConfig& c) { c.plateau_factor = 0.0; });
    reject([](TrainConfig& c) { c.min_lr = 0.0; });
    reject([](TrainConfig& c) { c.min_lr = 2e-3; });  // above learning_rate
}

TEST_CASE("the epoch log serializes without wall-clock noise") {
    TrainLog log;
    log.epochs.push_back({1, 0.5, 0.25, 0.001, 99.9});
    log.epochs.push_back({2, 1.0 / 3.0, 2.0 / 3.0, 0.0625, 12.3});
    std::ostringstream os;
    log.write_csv(os);
    CHECK(os.str() ==
          "epoch,train_loss,val_loss,lr\n"
          "1,0.5,0.25,0.001\n"
          "2,0.33333333333333331,0.66666666666666663,0.0625\n");
}
