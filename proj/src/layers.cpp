#include "semg/layers.hpp"

#include <cmath>
#include <cstring>

namespace semg {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv1d: return "conv1d";
        case LayerKind::TConv1d: return "tconv1d";
        case LayerKind::Dense: return "dense";
        case LayerKind::LayerNorm: return "layer_norm";
        case LayerKind::LeakyRelu: return "leaky_relu";
        case LayerKind::AttentionPool: return "attention_pool";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "conv1d") return LayerKind::Conv1d;
    if (name == "tconv1d") return LayerKind::TConv1d;
    if (name == "dense") return LayerKind::Dense;
    if (name == "layer_norm") return LayerKind::LayerNorm;
    if (name == "leaky_relu") return LayerKind::LeakyRelu;
    if (name == "attention_pool") return LayerKind::AttentionPool;
    if (name == "softmax") return LayerKind::Softmax;
    throw std::invalid_argument("unknown layer kind: " + name);
}

void LayerSpec::validate() const {
    if (stride < 1) throw std::invalid_argument(name + ": stride must be >= 1");
    if (kernel_size < 1) throw std::invalid_argument(name + ": kernel_size must be >= 1");
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument(name + ": alpha must be in (0,1)");
}

static void check_2d(const Tensor& t, const char* what) {
    if (t.ndim() != 2) throw std::invalid_argument(std::string(what) + ": expected 2-D tensor, got " + t.shape_str());
}

Tensor conv1d_forward(const Tensor& in, const Tensor& w, const Tensor& b, int stride) {
    check_2d(in, "conv1d input");
    if (w.ndim() != 3) throw std::invalid_argument("conv1d: weight must be [K x C_in x C_out]");
    const int t_in = in.dim(0), c_in = in.dim(1);
    const int k = w.dim(0), c_out = w.dim(2);
    if (w.dim(1) != c_in) throw std::invalid_argument("conv1d: weight C_in " + std::to_string(w.dim(1)) +
                                                      " != input channels " + std::to_string(c_in));
    if (static_cast<int>(b.size()) != c_out) throw std::invalid_argument("conv1d: bias size mismatch");
    if (t_in < k) throw std::invalid_argument("conv1d: input length " + std::to_string(t_in) +
                                              " shorter than kernel " + std::to_string(k));
    const int t_out = conv_out_len(t_in, k, stride);

    Tensor out({t_out, c_out});
    const int kc = k * c_in;
    const double* wd = w.data.data();
    const double* id = in.data.data();
    for (int t = 0; t < t_out; ++t) {
        double* orow = &out.data[static_cast<std::size_t>(t) * c_out];
        for (int o = 0; o < c_out; ++o) orow[o] = b[static_cast<std::size_t>(o)];
        // windows are contiguous spans of length K*C_in in the [T x C] layout
        const double* win = id + static_cast<std::size_t>(t) * stride * c_in;
        for (int i = 0; i < kc; ++i) {
            const double a = win[i];
            const double* wrow = wd + static_cast<std::size_t>(i) * c_out;
            for (int o = 0; o < c_out; ++o) orow[o] += a * wrow[o];
        }
    }
    return out;
}

void conv1d_backward(const Tensor& in, const Tensor& w, int stride, const Tensor& d_out,
                     Tensor& d_in, Tensor& d_w, Tensor& d_b) {
    const int t_in = in.dim(0), c_in = in.dim(1);
    const int k = w.dim(0), c_out = w.dim(2);
    const int t_out = conv_out_len(t_in, k, stride);
    const int kc = k * c_in;

    d_in.shape = {t_in, c_in};
    d_in.data.assign(static_cast<std::size_t>(t_in) * c_in, 0.0);

    const double* wd = w.data.data();
    const double* id = in.data.data();
    for (int t = 0; t < t_out; ++t) {
        const double* grow = &d_out.data[static_cast<std::size_t>(t) * c_out];
        for (int o = 0; o < c_out; ++o) d_b[static_cast<std::size_t>(o)] += grow[o];
        double* din_win = d_in.data.data() + static_cast<std::size_t>(t) * stride * c_in;
        double* dw = d_w.data.data();
        const double* win = id + static_cast<std::size_t>(t) * stride * c_in;
        for (int i = 0; i < kc; ++i) {
            const double* wrow = wd + static_cast<std::size_t>(i) * c_out;
            double* dwrow = dw + static_cast<std::size_t>(i) * c_out;
            const double a = win[i];
            double acc = 0.0;
            for (int o = 0; o < c_out; ++o) {
                acc += grow[o] * wrow[o];
                dwrow[o] += a * grow[o];
            }
            din_win[i] += acc;
        }
    }
}

Tensor tconv1d_forward(const Tensor& in, const Tensor& w, const Tensor& b, int stride) {
    check_2d(in, "tconv1d input");
    if (w.ndim() != 3) throw std::invalid_argument("tconv1d: weight must be [K x C_out x C_in]");
    const int t_in = in.dim(0), c_in = in.dim(1);
    const int k = w.dim(0), c_out = w.dim(1);
    if (w.dim(2) != c_in) throw std::invalid_argument("tconv1d: weight C_in " + std::to_string(w.dim(2)) +
                                                      " != input channels " + std::to_string(c_in));
    if (static_cast<int>(b.size()) != c_out) throw std::invalid_argument("tconv1d: bias size mismatch");
    const int t_out = tconv_out_len(t_in, k, stride);

    Tensor out({t_out, c_out});
    for (int t = 0; t < t_out; ++t)
        for (int o = 0; o < c_out; ++o) out.at(t, o) = b[static_cast<std::size_t>(o)];

    const double* wd = w.data.data();
    for (int t = 0; t < t_in; ++t) {
        const double* irow = &in.data[static_cast<std::size_t>(t) * c_in];
        for (int kk = 0; kk < k; ++kk) {
            double* orow = &out.data[static_cast<std::size_t>(t * stride + kk) * c_out];
            const double* wk = wd + static_cast<std::size_t>(kk) * c_out * c_in;
            for (int o = 0; o < c_out; ++o) {
                const double* wrow = wk + static_cast<std::size_t>(o) * c_in;
                double acc = 0.0;
                for (int c = 0; c < c_in; ++c) acc += irow[c] * wrow[c];
                orow[o] += acc;
            }
        }
    }
    return out;
}

void tconv1d_backward(const Tensor& in, const Tensor& w, int stride, const Tensor& d_out,
                      Tensor& d_in, Tensor& d_w, Tensor& d_b) {
    const int t_in = in.dim(0), c_in = in.dim(1);
    const int k = w.dim(0), c_out = w.dim(1);
    const int t_out = tconv_out_len(t_in, k, stride);

    d_in.shape = {t_in, c_in};
    d_in.data.assign(static_cast<std::size_t>(t_in) * c_in, 0.0);

    for (int t = 0; t < t_out; ++t) {
        const double* grow = &d_out.data[static_cast<std::size_t>(t) * c_out];
        for (int o = 0; o < c_out; ++o) d_b[static_cast<std::size_t>(o)] += grow[o];
    }

    const double* wd = w.data.data();
    double* dw = d_w.data.data();
    for (int t = 0; t < t_in; ++t) {
        const double* irow = &in.data[static_cast<std::size_t>(t) * c_in];
        double* dirow = &d_in.data[static_cast<std::size_t>(t) * c_in];
        for (int kk = 0; kk < k; ++kk) {
            const double* grow = &d_out.data[static_cast<std::size_t>(t * stride + kk) * c_out];
            const double* wk = wd + static_cast<std::size_t>(kk) * c_out * c_in;
            double* dwk = dw + static_cast<std::size_t>(kk) * c_out * c_in;
            for (int o = 0; o < c_out; ++o) {
                const double g = grow[o];
                const double* wrow = wk + static_cast<std::size_t>(o) * c_in;
                double* dwrow = dwk + static_cast<std::size_t>(o) * c_in;
                for (int c = 0; c < c_in; ++c) {
                    dirow[c] += g * wrow[c];
                    dwrow[c] += g * irow[c];
                }
            }
        }
    }
}

Tensor dense_forward(const Tensor& in, const Tensor& w, const Tensor& b) {
    if (w.ndim() != 2) throw std::invalid_argument("dense: weight must be [F_in x F_out]");
    const int f_in = w.dim(0), f_out = w.dim(1);
    if (static_cast<int>(in.size()) != f_in)
        throw std::invalid_argument("dense: input size " + std::to_string(in.size()) +
                                    " != F_in " + std::to_string(f_in));
    if (static_cast<int>(b.size()) != f_out) throw std::invalid_argument("dense: bias size mismatch");

    Tensor out({f_out});
    for (int o = 0; o < f_out; ++o) out[static_cast<std::size_t>(o)] = b[static_cast<std::size_t>(o)];
    const double* wd = w.data.data();
    for (int i = 0; i < f_in; ++i) {
        const double a = in[static_cast<std::size_t>(i)];
        const double* wrow = wd + static_cast<std::size_t>(i) * f_out;
        for (int o = 0; o < f_out; ++o) out[static_cast<std::size_t>(o)] += a * wrow[o];
    }
    return out;
}

void dense_backward(const Tensor& in, const Tensor& w, const Tensor& d_out,
                    Tensor& d_in, Tensor& d_w, Tensor& d_b) {
    const int f_in = w.dim(0), f_out = w.dim(1);
    d_in.shape = in.shape;
    d_in.data.assign(in.size(), 0.0);

    for (int o = 0; o < f_out; ++o) d_b[static_cast<std::size_t>(o)] += d_out[static_cast<std::size_t>(o)];
    const double* wd = w.data.data();
    double* dw = d_w.data.data();
    const double* g = d_out.data.data();
    for (int i = 0; i < f_in; ++i) {
        const double a = in[static_cast<std::size_t>(i)];
        const double* wrow = wd + static_cast<std::size_t>(i) * f_out;
        double* dwrow = dw + static_cast<std::size_t>(i) * f_out;
        double acc = 0.0;
        for (int o = 0; o < f_out; ++o) {
            acc += g[o] * wrow[o];
            dwrow[o] += a * g[o];
        }
        d_in[static_cast<std::size_t>(i)] = acc;
    }
}

Tensor layer_norm_forward(const Tensor& in, const Tensor& gamma, const Tensor& beta, double eps) {
    check_2d(in, "layer_norm input");
    const int t_len = in.dim(0), d = in.dim(1);
    if (static_cast<int>(gamma.size()) != d || static_cast<int>(beta.size()) != d)
        throw std::invalid_argument("layer_norm: gamma/beta size mismatch");

    Tensor out({t_len, d});
    for (int t = 0; t < t_len; ++t) {
        const double* row = &in.data[static_cast<std::size_t>(t) * d];
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += row[j];
        mean /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            const double c = row[j] - mean;
            var += c * c;
        }
        var /= d;  // biased variance
        const double inv = 1.0 / std::sqrt(var + eps);
        double* orow = &out.data[static_cast<std::size_t>(t) * d];
        for (int j = 0; j < d; ++j)
            orow[j] = gamma[static_cast<std::size_t>(j)] * (row[j] - mean) * inv + beta[static_cast<std::size_t>(j)];
    }
    return out;
}

void layer_norm_backward(const Tensor& in, const Tensor& gamma, double eps, const Tensor& d_out,
                         Tensor& d_in, Tensor& d_gamma, Tensor& d_beta) {
    const int t_len = in.dim(0), d = in.dim(1);
    d_in.shape = {t_len, d};
    d_in.data.assign(in.size(), 0.0);

    for (int t = 0; t < t_len; ++t) {
        const double* row = &in.data[static_cast<std::size_t>(t) * d];
        const double* grow = &d_out.data[static_cast<std::size_t>(t) * d];
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += row[j];
        mean /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            const double c = row[j] - mean;
            var += c * c;
        }
        var /= d;
        const double inv = 1.0 / std::sqrt(var + eps);

        // dL/dxhat, with two row means folded into the standard form
        double sum_g = 0.0, sum_gx = 0.0;
        for (int j = 0; j < d; ++j) {
            const double xhat = (row[j] - mean) * inv;
            const double gh = grow[j] * gamma[static_cast<std::size_t>(j)];
            sum_g += gh;
            sum_gx += gh * xhat;
            d_gamma[static_cast<std::size_t>(j)] += grow[j] * xhat;
            d_beta[static_cast<std::size_t>(j)] += grow[j];
        }
        double* dirow = &d_in.data[static_cast<std::size_t>(t) * d];
        for (int j = 0; j < d; ++j) {
            const double xhat = (row[j] - mean) * inv;
            const double gh = grow[j] * gamma[static_cast<std::size_t>(j)];
            dirow[j] = inv * (gh - sum_g / d - xhat * sum_gx / d);
        }
    }
}

Tensor leaky_relu_forward(const Tensor& in, double alpha) {
    Tensor out;
    out.shape = in.shape;
    out.data.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double x = in[i];
        out[i] = x > 0.0 ? x : alpha * x;
    }
    return out;
}

void leaky_relu_backward(const Tensor& in, double alpha, const Tensor& d_out, Tensor& d_in) {
    d_in.shape = in.shape;
    d_in.data.resize(in.size());
    // subgradient at exactly 0 is alpha
    for (std::size_t i = 0; i < in.size(); ++i)
        d_in[i] = d_out[i] * (in[i] > 0.0 ? 1.0 : alpha);
}

Tensor attention_pool_forward(const Tensor& in, const Tensor& score_w, const Tensor& score_b) {
    check_2d(in, "attention_pool input");
    const int t_len = in.dim(0), d = in.dim(1);
    if (static_cast<int>(score_w.size()) != d)
        throw std::invalid_argument("attention_pool: score weight size mismatch");

    // s_t = x_t . w + b, a = softmax(s), out = sum_t a_t x_t
    std::vector<double> scores(static_cast<std::size_t>(t_len));
    double smax = -1e300;
    for (int t = 0; t < t_len; ++t) {
        const double* row = &in.data[static_cast<std::size_t>(t) * d];
        double s = score_b[0];
        for (int j = 0; j < d; ++j) s += row[j] * score_w[static_cast<std::size_t>(j)];
        scores[static_cast<std::size_t>(t)] = s;
        if (s > smax) smax = s;
    }
    double z = 0.0;
    for (double& s : scores) {
        s = std::exp(s - smax);
        z += s;
    }
    Tensor out({d});
    for (int t = 0; t < t_len; ++t) {
        const double a = scores[static_cast<std::size_t>(t)] / z;
        const double* row = &in.data[static_cast<std::size_t>(t) * d];
        for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] += a * row[j];
    }
    return out;
}

void attention_pool_backward(const Tensor& in, const Tensor& score_w, const Tensor& score_b,
                             const Tensor& d_out, Tensor& d_in, Tensor& d_w, Tensor& d_b) {
    const int t_len = in.dim(0), d = in.dim(1);
    d_in.shape = {t_len, d};
    d_in.data.assign(in.size(), 0.0);

    std::vector<double> attn(static_cast<std::size_t>(t_len));
    double smax = -1e300;
    for (int t = 0; t < t_len; ++t) {
        const double* row = &in.data[static_cast<std::size_t>(t) * d];
        double s = score_b[0];
        for (int j = 0; j < d; ++j) s += row[j] * score_w[static_cast<std::size_t>(j)];
        attn[static_cast<std::size_t>(t)] = s;
        if (s > smax) smax = s;
    }
    double z = 0.0;
    for (double& s : attn) {
        s = std::exp(s - smax);
        z += s;
    }
    for (double& s : attn) s /= z;

    // dL/da_t = x_t . g ; softmax backward gives dL/ds
    std::vector<double> da(static_cast<std::size_t>(t_len));
    double dot_a_da = 0.0;
    for (int t = 0; t < t_len; ++t) {
        const double* row = &in.data[static_cast<std::size_t>(t) * d];
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += row[j] * d_out[static_cast<std::size_t>(j)];
        da[static_cast<std::size_t>(t)] = acc;
        dot_a_da += attn[static_cast<std::size_t>(t)] * acc;
    }
    for (int t = 0; t < t_len; ++t) {
        const double a = attn[static_cast<std::size_t>(t)];
        const double ds = a * (da[static_cast<std::size_t>(t)] - dot_a_da);
        const double* row = &in.data[static_cast<std::size_t>(t) * d];
        double* dirow = &d_in.data[static_cast<std::size_t>(t) * d];
        for (int j = 0; j < d; ++j) {
            dirow[j] = a * d_out[static_cast<std::size_t>(j)] + ds * score_w[static_cast<std::size_t>(j)];
            d_w[static_cast<std::size_t>(j)] += ds * row[j];
        }
        d_b[0] += ds;
    }
}

Tensor softmax_forward(const Tensor& in) {
    Tensor out;
    out.shape = in.shape;
    out.data.resize(in.size());
    double m = -1e300;
    for (double v : in.data)
        if (v > m) m = v;
    double z = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i] - m);
        z += out[i];
    }
    for (double& v : out.data) v /= z;
    return out;
}

void softmax_backward(const Tensor& out, const Tensor& d_out, Tensor& d_in) {
    d_in.shape = out.shape;
    d_in.data.resize(out.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) dot += out[i] * d_out[i];
    for (std::size_t i = 0; i < out.size(); ++i) d_in[i] = out[i] * (d_out[i] - dot);
}

} // namespace semg
