#pragma once

// Fully connected ReLU Q-network with hand-written backpropagation, Huber loss,
// global-norm gradient clipping, and Adam. Templated on the scalar type so the
// same code runs in float for training and in double for gradient checks.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "jetrl/errors.hpp"

namespace jetrl {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Affine layer y = x W + b, with W stored fan_in x fan_out.
template <typename Scalar>
struct Layer {
    Matrix<Scalar> weight;
    RowVector<Scalar> bias;

    friend bool operator==(const Layer& a, const Layer& b) {
        return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
               a.bias.size() == b.bias.size() && a.weight == b.weight && a.bias == b.bias;
    }
};

/// Layer widths from input to output, e.g. {13, 256, 256, 256, 6}.
using Topology = std::vector<std::size_t>;

inline const Topology& default_topology() {
    static const Topology t{13, 256, 256, 256, 6};
    return t;
}

template <typename Scalar>
struct NetworkParams {
    std::vector<Layer<Scalar>> layers;

    std::size_t input_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.rows()); }
    std::size_t output_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.cols()); }

    Topology topology() const {
        Topology t;
        if (!layers.empty()) {
            t.push_back(input_size());
        }
        for (const auto& l : layers) {
            t.push_back(static_cast<std::size_t>(l.weight.cols()));
        }
        return t;
    }

    /// Same shapes, every entry zero.
    NetworkParams zeros_like() const {
        NetworkParams z;
        for (const auto& l : layers) {
            z.layers.push_back({Matrix<Scalar>::Zero(l.weight.rows(), l.weight.cols()),
                                RowVector<Scalar>::Zero(l.bias.size())});
        }
        return z;
    }

    template <typename Other>
    NetworkParams<Other> cast() const {
        NetworkParams<Other> out;
        for (const auto& l : layers) {
            out.layers.push_back({l.weight.template cast<Other>(), l.bias.template cast<Other>()});
        }
        return out;
    }

    bool all_finite() const {
        for (const auto& l : layers) {
            if (!l.weight.allFinite() || !l.bias.allFinite()) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

template <typename Scalar>
using Gradients = NetworkParams<Scalar>;

/// Fan-in scaled uniform weights in [-sqrt(6/fan_in), sqrt(6/fan_in)], zero biases.
template <typename Scalar = float>
NetworkParams<Scalar> init_params(std::uint64_t seed, const Topology& topology = default_topology()) {
    if (topology.size() < 2) {
        throw UsageError("topology needs at least an input and an output width");
    }
    std::mt19937_64 rng(seed);
    NetworkParams<Scalar> p;
    for (std::size_t i = 0; i + 1 < topology.size(); ++i) {
        const auto fan_in = static_cast<Eigen::Index>(topology[i]);
        const auto fan_out = static_cast<Eigen::Index>(topology[i + 1]);
        if (fan_in == 0 || fan_out == 0) {
            throw UsageError("layer widths must be positive");
        }
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        Layer<Scalar> layer{Matrix<Scalar>(fan_in, fan_out), RowVector<Scalar>::Zero(fan_out)};
        for (Eigen::Index r = 0; r < fan_in; ++r) {
            for (Eigen::Index c = 0; c < fan_out; ++c) {
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                layer.weight(r, c) = static_cast<Scalar>((2.0 * u - 1.0) * bound);
            }
        }
        p.layers.push_back(std::move(layer));
    }
    return p;
}

namespace detail {
template <typename Scalar>
void check_input(const NetworkParams<Scalar>& params, const Matrix<Scalar>& batch) {
    if (params.layers.empty()) {
        throw UsageError("network has no layers");
    }
    if (static_cast<std::size_t>(batch.cols()) != params.input_size()) {
        throw UsageError("input width " + std::to_string(batch.cols()) + " does not match network input " +
                         std::to_string(params.input_size()));
    }
}

/// Forward pass keeping every layer's post-activation (index 0 is the input).
template <typename Scalar>
std::vector<Matrix<Scalar>> forward_cached(const NetworkParams<Scalar>& params, const Matrix<Scalar>& batch) {
    check_input(params, batch);
    std::vector<Matrix<Scalar>> acts;
    acts.reserve(params.layers.size() + 1);
    acts.push_back(batch);
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& l = params.layers[i];
        Matrix<Scalar> z = acts.back() * l.weight;
        z.rowwise() += l.bias;
        if (i + 1 < params.layers.size()) {
            z = z.cwiseMax(Scalar(0));
        }
        acts.push_back(std::move(z));
    }
    return acts;
}
} // namespace detail

/// Q-values for a batch of observations (one row per observation).
template <typename Scalar>
Matrix<Scalar> forward(const NetworkParams<Scalar>& params, const Matrix<Scalar>& batch) {
    detail::check_input(params, batch);
    Matrix<Scalar> h = batch;
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& l = params.layers[i];
        Matrix<Scalar> z = h * l.weight;
        z.rowwise() += l.bias;
        if (i + 1 < params.layers.size()) {
            z = z.cwiseMax(Scalar(0));
        }
        h = std::move(z);
    }
    return h;
}

template <typename Scalar>
struct HuberResult {
    Scalar loss;
    Scalar grad; // d loss / d pred
};

/// Huber loss with delta = 1 on e = pred - target.
template <typename Scalar>
HuberResult<Scalar> huber_loss(Scalar pred, Scalar target) {
    const Scalar e = pred - target;
    const Scalar a = std::abs(e);
    if (a <= Scalar(1)) {
        return {Scalar(0.5) * e * e, e};
    }
    return {a - Scalar(0.5), e > Scalar(0) ? Scalar(1) : Scalar(-1)};
}

template <typename Scalar>
struct BackwardResult {
    Scalar mean_loss;
    Gradients<Scalar> grads;
};

/// Mean Huber loss between Q(s, a_i) and targets_i, and its gradient with
/// respect to every parameter. Only the taken action's output receives gradient.
template <typename Scalar>
BackwardResult<Scalar> backward(const NetworkParams<Scalar>& params, const Matrix<Scalar>& batch,
                                std::span<const std::uint8_t> actions, std::span<const Scalar> targets) {
    const auto n = batch.rows();
    if (static_cast<std::size_t>(n) != actions.size() || static_cast<std::size_t>(n) != targets.size()) {
        throw UsageError("batch, actions and targets must have the same length");
    }
    if (n == 0) {
        throw UsageError("backward needs a non-empty batch");
    }
    const auto acts = detail::forward_cached(params, batch);
    const Matrix<Scalar>& q = acts.back();

    Matrix<Scalar> delta = Matrix<Scalar>::Zero(n, q.cols());
    double loss_sum = 0.0;
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(i)]);
        if (a >= q.cols()) {
            throw UsageError("action index out of range in backward");
        }
        const auto h = huber_loss<Scalar>(q(i, a), targets[static_cast<std::size_t>(i)]);
        loss_sum += static_cast<double>(h.loss);
        delta(i, a) = h.grad * inv_n;
    }

    Gradients<Scalar> g = params.zeros_like();
    for (std::size_t k = params.layers.size(); k-- > 0;) {
        const Matrix<Scalar>& input = acts[k];
        g.layers[k].weight.noalias() = input.transpose() * delta;
        g.layers[k].bias = delta.colwise().sum();
        if (k > 0) {
            Matrix<Scalar> upstream = delta * params.layers[k].weight.transpose();
            // ReLU derivative: pass gradient where the activation was positive.
            delta = (input.array() > Scalar(0)).select(upstream, Scalar(0));
        }
    }
    return {static_cast<Scalar>(loss_sum / static_cast<double>(n)), std::move(g)};
}

template <typename Scalar>
double global_norm(const Gradients<Scalar>& g) {
    double sq = 0.0;
    for (const auto& l : g.layers) {
        sq += l.weight.template cast<double>().squaredNorm() + l.bias.template cast<double>().squaredNorm();
    }
    return std::sqrt(sq);
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
template <typename Scalar>
Gradients<Scalar> clip_global_norm(Gradients<Scalar> g, double max_norm = 10.0) {
    const double norm = global_norm(g);
    if (norm > max_norm && norm > 0.0) {
        const auto scale = static_cast<Scalar>(max_norm / norm);
        for (auto& l : g.layers) {
            l.weight *= scale;
            l.bias *= scale;
        }
    }
    return g;
}

template <typename Scalar>
struct AdamState {
    Gradients<Scalar> m;
    Gradients<Scalar> v;
    std::uint64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_params(const NetworkParams<Scalar>& p) { return {p.zeros_like(), p.zeros_like()}; }

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update of `params` in place.
template <typename Scalar>
void adam_step(NetworkParams<Scalar>& params, AdamState<Scalar>& adam, const Gradients<Scalar>& grads,
               double lr = 5e-5) {
    if (grads.layers.size() != params.layers.size() || adam.m.layers.size() != params.layers.size()) {
        throw UsageError("adam_step: shape mismatch");
    }
    ++adam.t;
    const double t = static_cast<double>(adam.t);
    const auto b1 = static_cast<Scalar>(adam.beta1);
    const auto b2 = static_cast<Scalar>(adam.beta2);
    const auto c1 = static_cast<Scalar>(1.0 / (1.0 - std::pow(adam.beta1, t)));
    const auto c2 = static_cast<Scalar>(1.0 / (1.0 - std::pow(adam.beta2, t)));
    const auto step = static_cast<Scalar>(lr);
    const auto eps = static_cast<Scalar>(adam.epsilon);

    auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
        if (p.rows() != g.rows() || p.cols() != g.cols()) {
            throw UsageError("adam_step: shape mismatch");
        }
        m = b1 * m + (Scalar(1) - b1) * g;
        v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
        p.array() -= step * (m.array() * c1) / ((v.array() * c2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        update(params.layers[i].weight, adam.m.layers[i].weight, adam.v.layers[i].weight, grads.layers[i].weight);
        update(params.layers[i].bias, adam.m.layers[i].bias, adam.v.layers[i].bias, grads.layers[i].bias);
    }
}

/// Index of the largest Q-value; ties go to the lowest index.
template <typename Derived>
std::size_t argmax_row(const Eigen::MatrixBase<Derived>& row) {
    std::size_t best = 0;
    for (Eigen::Index j = 1; j < row.size(); ++j) {
        if (row(j) > row(static_cast<Eigen::Index>(best))) {
            best = static_cast<std::size_t>(j);
        }
    }
    return best;
}

} // namespace jetrl
