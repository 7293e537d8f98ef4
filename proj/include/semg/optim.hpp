#pragma once

// AdamW with decoupled weight decay:
//   m <- b1*m + (1-b1)*g          v <- b2*v + (1-b2)*g^2
//   mhat = m/(1-b1^t)             vhat = v/(1-b2^t)
//   w <- w - lr * (mhat/(sqrt(vhat)+eps) + wd*w)
// The decay term multiplies the raw weight, not the adapted gradient, so it
// acts as true L2 shrinkage independent of the gradient scale.

#include <cmath>
#include <vector>

#include "semg/tensor.hpp"

namespace semg {

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
};

class AdamW {
public:
    explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

    // Applies one update to every (param, grad) pair.  The pair list may
    // change between calls only if reset() is called first; moment slots are
    // keyed by position.
    void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads) {
        if (params.size() != grads.size())
            throw std::invalid_argument("AdamW::step: param/grad count mismatch");
        if (m_.size() != params.size()) {
            if (!m_.empty()) throw std::invalid_argument("AdamW::step: param set changed; call reset()");
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t p = 0; p < params.size(); ++p) {
                m_[p].assign(params[p]->size(), 0.0);
                v_[p].assign(params[p]->size(), 0.0);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor& w = *params[p];
            const Tensor& g = *grads[p];
            if (g.size() != w.size())
                throw std::invalid_argument("AdamW::step: grad shape mismatch at slot " + std::to_string(p));
            std::vector<double>& m = m_[p];
            std::vector<double>& v = v_[p];
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                w[i] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * w[i]);
            }
        }
    }

    void reset() {
        m_.clear();
        v_.clear();
        t_ = 0;
    }

    double lr() const { return cfg_.lr; }
    void set_lr(double lr) { cfg_.lr = lr; }
    long long step_count() const { return t_; }
    const AdamWConfig& config() const { return cfg_; }

private:
    AdamWConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    long long t_ = 0;
};

} // namespace semg
