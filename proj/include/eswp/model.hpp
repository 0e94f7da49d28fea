#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "eswp/rng.hpp"

namespace eswp {

enum class ModelKind { Linear, Logistic, Mlp };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Linear: return "linear";
        case ModelKind::Logistic: return "logistic";
        case ModelKind::Mlp: return "mlp";
    }
    return "?";
}

// Architecture descriptor: input dim d, hidden dim h (0 unless MLP),
// output count C (class count, or target dim for the linear model).
struct ModelDescriptor {
    ModelKind kind = ModelKind::Logistic;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t outputs = 1;

    std::size_t param_count() const {
        if (kind == ModelKind::Mlp) {
            return hidden_dim * input_dim + hidden_dim + outputs * hidden_dim + outputs;
        }
        return outputs * input_dim + outputs;
    }
};

struct ModelParams {
    ModelDescriptor desc;
    std::vector<double> values;  // flat, layout per model kind
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], per layer.
inline ModelParams init_params(const ModelDescriptor& desc, Rng& rng) {
    ModelParams p;
    p.desc = desc;
    p.values.resize(desc.param_count());
    auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
        for (std::size_t i = 0; i < count; ++i) {
            p.values[begin + i] = (2.0 * rng.u01() - 1.0) * bound;
        }
    };
    if (desc.kind == ModelKind::Mlp) {
        const std::size_t w1 = desc.hidden_dim * desc.input_dim;
        const std::size_t layer1 = w1 + desc.hidden_dim;
        fill(0, layer1, desc.input_dim);
        fill(layer1, desc.outputs * desc.hidden_dim + desc.outputs, desc.hidden_dim);
    } else {
        fill(0, p.values.size(), desc.input_dim);
    }
    return p;
}

inline ModelParams zero_params(const ModelDescriptor& desc) {
    return ModelParams{desc, std::vector<double>(desc.param_count(), 0.0)};
}

// A view of samples handed to forward/backward. `labels` is used by the
// classification models, `targets` (rows x outputs) by the linear model.
struct Batch {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> features;  // rows x dim, row-major
    std::vector<int> labels;
    std::vector<double> targets;
    std::vector<std::size_t> ids;
};

namespace detail {

inline void check_batch(const ModelParams& params, const Batch& batch) {
    const auto& d = params.desc;
    if (batch.dim != d.input_dim || batch.features.size() != batch.rows * batch.dim) {
        throw std::invalid_argument("batch does not conform to model architecture");
    }
    if (d.kind == ModelKind::Linear) {
        if (batch.targets.size() != batch.rows * d.outputs) {
            throw std::invalid_argument("linear model expects real targets (rows x outputs)");
        }
    } else if (batch.labels.size() != batch.rows) {
        throw std::invalid_argument("classification model expects one class id per row");
    }
    if (params.values.size() != d.param_count()) {
        throw std::invalid_argument("parameter count inconsistent with descriptor");
    }
}

// logits = W x + b for one row; W is outputs x dim row-major at `w`,
// followed by biases at `b`.
inline void affine(const double* w, const double* b, const double* x,
                   std::size_t dim, std::size_t outputs, double* out) {
    for (std::size_t c = 0; c < outputs; ++c) {
        double acc = b[c];
        const double* row = w + c * dim;
        for (std::size_t j = 0; j < dim; ++j) acc += row[j] * x[j];
        out[c] = acc;
    }
}

// Stable log-softmax cross-entropy; returns loss, writes softmax probs.
inline double softmax_xent(const double* logits, std::size_t c_count, int label,
                           double* probs) {
    double mx = logits[0];
    for (std::size_t c = 1; c < c_count; ++c) mx = std::max(mx, logits[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) {
        probs[c] = std::exp(logits[c] - mx);
        sum += probs[c];
    }
    for (std::size_t c = 0; c < c_count; ++c) probs[c] /= sum;
    return std::log(sum) + mx - logits[static_cast<std::size_t>(label)];
}

struct MlpScratch {
    std::vector<double> hidden;
    std::vector<double> logits;
    std::vector<double> probs;
};

inline void mlp_forward(const ModelParams& p, const double* x, MlpScratch& s) {
    const auto& d = p.desc;
    const double* w1 = p.values.data();
    const double* b1 = w1 + d.hidden_dim * d.input_dim;
    const double* w2 = b1 + d.hidden_dim;
    const double* b2 = w2 + d.outputs * d.hidden_dim;
    s.hidden.resize(d.hidden_dim);
    s.logits.resize(d.outputs);
    s.probs.resize(d.outputs);
    affine(w1, b1, x, d.input_dim, d.hidden_dim, s.hidden.data());
    for (double& h : s.hidden) h = std::max(h, 0.0);
    affine(w2, b2, s.hidden.data(), d.hidden_dim, d.outputs, s.logits.data());
}

}  // namespace detail

// Per-sample losses at the given parameters. Squared loss is
// 0.5 * mean over output dims of (f(x) - y)^2; cross-entropy uses the
// log-sum-exp stabilization.
inline std::vector<double> forward_losses(const ModelParams& params, const Batch& batch) {
    detail::check_batch(params, batch);
    const auto& d = params.desc;
    std::vector<double> losses(batch.rows);
    std::vector<double> logits(d.outputs), probs(d.outputs);
    detail::MlpScratch scratch;
    for (std::size_t r = 0; r < batch.rows; ++r) {
        const double* x = batch.features.data() + r * batch.dim;
        double loss = 0.0;
        if (d.kind == ModelKind::Linear) {
            detail::affine(params.values.data(), params.values.data() + d.outputs * d.input_dim,
                           x, d.input_dim, d.outputs, logits.data());
            const double* y = batch.targets.data() + r * d.outputs;
            double acc = 0.0;
            for (std::size_t c = 0; c < d.outputs; ++c) {
                const double e = logits[c] - y[c];
                acc += e * e;
            }
            loss = 0.5 * acc / static_cast<double>(d.outputs);
        } else if (d.kind == ModelKind::Logistic) {
            detail::affine(params.values.data(), params.values.data() + d.outputs * d.input_dim,
                           x, d.input_dim, d.outputs, logits.data());
            loss = detail::softmax_xent(logits.data(), d.outputs, batch.labels[r], probs.data());
        } else {
            detail::mlp_forward(params, x, scratch);
            loss = detail::softmax_xent(scratch.logits.data(), d.outputs, batch.labels[r],
                                        scratch.probs.data());
        }
        if (!std::isfinite(loss)) {
            const std::size_t id = r < batch.ids.size() ? batch.ids[r] : r;
            throw std::domain_error("forward_losses: non-finite loss for sample " +
                                    std::to_string(id));
        }
        losses[r] = loss;
    }
    return losses;
}

// Gradient of the mean loss over the batch, accumulated in ascending
// sample-id order so reductions are reproducible.
inline std::vector<double> backward(const ModelParams& params, const Batch& batch) {
    detail::check_batch(params, batch);
    const auto& d = params.desc;
    std::vector<double> grad(params.values.size(), 0.0);
    if (batch.rows == 0) return grad;

    std::vector<std::size_t> order(batch.rows);
    std::iota(order.begin(), order.end(), 0);
    if (batch.ids.size() == batch.rows) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return batch.ids[a] < batch.ids[b];
        });
    }

    const double inv_rows = 1.0 / static_cast<double>(batch.rows);
    std::vector<double> logits(d.outputs), probs(d.outputs), delta(d.outputs);
    detail::MlpScratch scratch;
    for (std::size_t r : order) {
        const double* x = batch.features.data() + r * batch.dim;
        if (d.kind == ModelKind::Mlp) {
            detail::mlp_forward(params, x, scratch);
            const double loss = detail::softmax_xent(scratch.logits.data(), d.outputs,
                                                     batch.labels[r], scratch.probs.data());
            if (!std::isfinite(loss)) {
                const std::size_t id = r < batch.ids.size() ? batch.ids[r] : r;
                throw std::domain_error("backward: non-finite loss for sample " +
                                        std::to_string(id));
            }
            for (std::size_t c = 0; c < d.outputs; ++c) {
                delta[c] = scratch.probs[c] -
                           (c == static_cast<std::size_t>(batch.labels[r]) ? 1.0 : 0.0);
            }
            const std::size_t w1n = d.hidden_dim * d.input_dim;
            const double* w2 = params.values.data() + w1n + d.hidden_dim;
            double* gw1 = grad.data();
            double* gb1 = grad.data() + w1n;
            double* gw2 = grad.data() + w1n + d.hidden_dim;
            double* gb2 = gw2 + d.outputs * d.hidden_dim;
            for (std::size_t c = 0; c < d.outputs; ++c) {
                const double dc = delta[c] * inv_rows;
                gb2[c] += dc;
                double* grow = gw2 + c * d.hidden_dim;
                for (std::size_t h = 0; h < d.hidden_dim; ++h) {
                    grow[h] += dc * scratch.hidden[h];
                }
            }
            for (std::size_t h = 0; h < d.hidden_dim; ++h) {
                if (scratch.hidden[h] <= 0.0) continue;  // ReLU gate
                double dh = 0.0;
                for (std::size_t c = 0; c < d.outputs; ++c) {
                    dh += delta[c] * w2[c * d.hidden_dim + h];
                }
                dh *= inv_rows;
                gb1[h] += dh;
                double* grow = gw1 + h * d.input_dim;
                for (std::size_t j = 0; j < d.input_dim; ++j) {
                    grow[j] += dh * x[j];
                }
            }
        } else {
            detail::affine(params.values.data(), params.values.data() + d.outputs * d.input_dim,
                           x, d.input_dim, d.outputs, logits.data());
            if (d.kind == ModelKind::Linear) {
                const double* y = batch.targets.data() + r * d.outputs;
                const double scale = inv_rows / static_cast<double>(d.outputs);
                for (std::size_t c = 0; c < d.outputs; ++c) {
                    delta[c] = (logits[c] - y[c]) * scale;
                }
            } else {
                const double loss = detail::softmax_xent(logits.data(), d.outputs,
                                                         batch.labels[r], probs.data());
                if (!std::isfinite(loss)) {
                    const std::size_t id = r < batch.ids.size() ? batch.ids[r] : r;
                    throw std::domain_error("backward: non-finite loss for sample " +
                                            std::to_string(id));
                }
                for (std::size_t c = 0; c < d.outputs; ++c) {
                    delta[c] = (probs[c] -
                                (c == static_cast<std::size_t>(batch.labels[r]) ? 1.0 : 0.0)) *
                               inv_rows;
                }
            }
            double* gw = grad.data();
            double* gb = grad.data() + d.outputs * d.input_dim;
            for (std::size_t c = 0; c < d.outputs; ++c) {
                gb[c] += delta[c];
                double* grow = gw + c * d.input_dim;
                for (std::size_t j = 0; j < d.input_dim; ++j) {
                    grow[j] += delta[c] * x[j];
                }
            }
        }
    }
    return grad;
}

// Argmax of model outputs per row; ties break toward the lower class id.
inline std::vector<int> predict(const ModelParams& params, const std::vector<double>& features,
                                std::size_t rows) {
    const auto& d = params.desc;
    if (features.size() != rows * d.input_dim) {
        throw std::invalid_argument("predict: feature matrix shape mismatch");
    }
    std::vector<int> out(rows);
    std::vector<double> logits(d.outputs);
    detail::MlpScratch scratch;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = features.data() + r * d.input_dim;
        const double* scores = logits.data();
        if (d.kind == ModelKind::Mlp) {
            detail::mlp_forward(params, x, scratch);
            scores = scratch.logits.data();
        } else {
            detail::affine(params.values.data(), params.values.data() + d.outputs * d.input_dim,
                           x, d.input_dim, d.outputs, logits.data());
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < d.outputs; ++c) {
            if (scores[c] > scores[best]) best = c;
        }
        out[r] = static_cast<int>(best);
    }
    return out;
}

inline double accuracy(const ModelParams& params, const std::vector<double>& features,
                       const std::vector<int>& labels) {
    const std::size_t rows = labels.size();
    const std::vector<int> pred = predict(params, features, rows);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (pred[r] == labels[r]) ++hits;
    }
    return rows == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(rows);
}

}  // namespace eswp
