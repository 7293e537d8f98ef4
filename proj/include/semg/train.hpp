#pragma once

// Mini-batch AdamW training loop shared by the autoencoder, the classifier,
// and both adaptation procedures.  The loop trains only the layer range at
// and above the frozen prefix, so callers feed it inputs pre-computed at that
// boundary (the whole point of freezing is to never re-run the frozen part).

#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "semg/graph.hpp"
#include "semg/losses.hpp"
#include "semg/optim.hpp"
#include "semg/rng.hpp"

namespace semg {

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 300;
    int early_stop_patience = 20;  // epochs without val improvement before stopping
    int plateau_patience = 8;      // epochs without val improvement before lr cut
    double plateau_factor = 0.5;
    double min_lr = 1e-6;
    std::uint64_t seed = 0;

    void validate() const {
        if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
        if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
        if (max_epochs < 0) throw std::invalid_argument("train: max_epochs must be >= 0");
        if (early_stop_patience < 1) throw std::invalid_argument("train: early_stop_patience must be >= 1");
        if (plateau_patience < 1) throw std::invalid_argument("train: plateau_patience must be >= 1");
        if (plateau_factor <= 0.0 || plateau_factor >= 1.0)
            throw std::invalid_argument("train: plateau_factor must be in (0,1)");
        if (min_lr <= 0.0 || min_lr > learning_rate)
            throw std::invalid_argument("train: min_lr must be in (0, learning_rate]");
    }
};

struct EpochRow {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochRow> epochs;
    int best_epoch = -1;  // 1-based; -1 when no epoch ran
    double best_val = 0.0;
    std::string stop_reason;  // "early_stop" or "max_epochs"

    // epoch,train_loss,val_loss,lr — wall-clock deliberately excluded so the
    // file is byte-stable across runs.
    void write_csv(std::ostream& os) const;
};

// An objective binds one dataset to one differentiable loss.  Requirements:
//   size_t train_size() / val_size()
//   const Tensor& train_input(i) / val_input(i)   — inputs at the frozen-prefix boundary
//   double train_loss_grad(i, trace, d_out, d_extra, extra_at)
//        — loss of train sample i; assigns d_out (gradient at the trace
//          output); may assign d_extra and set extra_at to an absolute layer
//          index to inject a mid-graph gradient (extra_at = -1 otherwise)
//   double val_loss(i, trace)

// Reconstruction objective: target == input, loss = mean squared error plus
// lambda * sum|Z| with Z read from the trace at latent_pos (trace index, i.e.
// latent layer − range start + 1).
class ReconstructionObjective {
public:
    ReconstructionObjective(const std::vector<Tensor>& train, const std::vector<Tensor>& val,
                            double lambda, int latent_pos, int latent_layer)
        : train_(&train), val_(&val), lambda_(lambda), latent_pos_(latent_pos), latent_layer_(latent_layer) {}

    std::size_t train_size() const { return train_->size(); }
    std::size_t val_size() const { return val_->size(); }
    const Tensor& train_input(std::size_t i) const { return (*train_)[i]; }
    const Tensor& val_input(std::size_t i) const { return (*val_)[i]; }

    double train_loss_grad(std::size_t i, const ForwardTrace& tr, Tensor& d_out,
                           Tensor& d_extra, int& extra_at) const {
        const Tensor& z = tr.x[static_cast<std::size_t>(latent_pos_)];
        double loss = mse_loss_grad(tr.output(), (*train_)[i], d_out);
        if (lambda_ != 0.0) {
            d_extra.shape = z.shape;
            d_extra.data.assign(z.size(), 0.0);
            loss += lambda_ * l1_activity_grad(z, lambda_, d_extra);
            extra_at = latent_layer_;
        } else {
            extra_at = -1;
        }
        return loss;
    }

    double val_loss(std::size_t i, const ForwardTrace& tr) const {
        const Tensor& z = tr.x[static_cast<std::size_t>(latent_pos_)];
        return mse_loss(tr.output(), (*val_)[i]) + lambda_ * l1_activity(z);
    }

private:
    const std::vector<Tensor>* train_;
    const std::vector<Tensor>* val_;
    double lambda_;
    int latent_pos_;
    int latent_layer_;
};

// Cross-entropy objective over a graph range ending in softmax.
class ClassificationObjective {
public:
    ClassificationObjective(const std::vector<Tensor>& train, const std::vector<int>& train_labels,
                            const std::vector<Tensor>& val, const std::vector<int>& val_labels)
        : train_(&train), train_labels_(&train_labels), val_(&val), val_labels_(&val_labels) {
        if (train.size() != train_labels.size() || val.size() != val_labels.size())
            throw std::invalid_argument("classification objective: input/label count mismatch");
    }

    std::size_t train_size() const { return train_->size(); }
    std::size_t val_size() const { return val_->size(); }
    const Tensor& train_input(std::size_t i) const { return (*train_)[i]; }
    const Tensor& val_input(std::size_t i) const { return (*val_)[i]; }

    double train_loss_grad(std::size_t i, const ForwardTrace& tr, Tensor& d_out,
                           Tensor& /*d_extra*/, int& extra_at) const {
        extra_at = -1;
        return cross_entropy_grad(tr.output(), (*train_labels_)[i], d_out);
    }

    double val_loss(std::size_t i, const ForwardTrace& tr) const {
        return cross_entropy(tr.output(), (*val_labels_)[i]);
    }

private:
    const std::vector<Tensor>* train_;
    const std::vector<int>* train_labels_;
    const std::vector<Tensor>* val_;
    const std::vector<int>* val_labels_;
};

// Runs the full loop: shuffled mini-batches, AdamW on the trainable layers,
// strict-improvement early stopping (best parameters restored on exit), and
// a reduce-on-plateau schedule bounded below by min_lr.  Aborts with
// NumericError if any epoch loss goes non-finite.
template <class Objective>
TrainLog train_loop(ModelGraph& graph, Objective& obj, const TrainConfig& cfg) {
    cfg.validate();
    if (obj.train_size() == 0 || obj.val_size() == 0)
        throw std::invalid_argument("train: empty training or validation set");

    const int lo = graph.frozen_prefix();
    const int hi = graph.layer_count();
    const std::vector<int> trainable = graph.trainable_layers();
    if (trainable.empty()) throw std::invalid_argument("train: no trainable parameters");

    std::vector<LayerParams> grads = graph.zero_grads();
    std::vector<Tensor*> params = graph.collect_params(trainable);
    std::vector<Tensor*> grad_ptrs = ModelGraph::collect_slots(grads, trainable);

    AdamWConfig ocfg;
    ocfg.lr = cfg.learning_rate;
    AdamW opt(ocfg);

    Rng shuffle_rng(mix_seed(cfg.seed, 0x5348554646ULL));
    std::vector<std::size_t> order(obj.train_size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainLog log;
    std::vector<double> best_params;
    int epochs_since_best = 0;
    int plateau_count = 0;

    Tensor d_out, d_extra;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(order);

        double train_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            for (int li = lo; li < hi; ++li) {
                grads[static_cast<std::size_t>(li)].w.fill(0.0);
                grads[static_cast<std::size_t>(li)].b.fill(0.0);
            }
            for (std::size_t s = start; s < stop; ++s) {
                const std::size_t i = order[s];
                const ForwardTrace tr = graph.forward_trace_range(lo, hi, obj.train_input(i));
                int extra_at = -1;
                train_sum += obj.train_loss_grad(i, tr, d_out, d_extra, extra_at);
                graph.backward_range(lo, hi, tr, d_out, grads,
                                     extra_at >= 0 ? &d_extra : nullptr, extra_at);
            }
            const double inv_b = 1.0 / static_cast<double>(stop - start);
            for (Tensor* g : grad_ptrs)
                for (double& v : g->data) v *= inv_b;
            opt.step(params, grad_ptrs);
        }
        const double train_loss = train_sum / static_cast<double>(obj.train_size());
        require_finite(train_loss, "training loss");

        double val_sum = 0.0;
        for (std::size_t i = 0; i < obj.val_size(); ++i)
            val_sum += obj.val_loss(i, graph.forward_trace_range(lo, hi, obj.val_input(i)));
        const double val_loss = val_sum / static_cast<double>(obj.val_size());
        require_finite(val_loss, "validation loss");

        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log.epochs.push_back({epoch, train_loss, val_loss, opt.lr(), secs});

        if (log.best_epoch < 0 || val_loss < log.best_val) {
            log.best_epoch = epoch;
            log.best_val = val_loss;
            best_params = graph.snapshot();
            epochs_since_best = 0;
            plateau_count = 0;
        } else {
            ++epochs_since_best;
            ++plateau_count;
            if (plateau_count >= cfg.plateau_patience) {
                opt.set_lr(std::max(opt.lr() * cfg.plateau_factor, cfg.min_lr));
                plateau_count = 0;
            }
            if (epochs_since_best >= cfg.early_stop_patience) {
                log.stop_reason = "early_stop";
                break;
            }
        }
    }
    if (log.stop_reason.empty()) log.stop_reason = "max_epochs";
    if (log.best_epoch >= 0) graph.restore(best_params);
    return log;
}

} // namespace semg
