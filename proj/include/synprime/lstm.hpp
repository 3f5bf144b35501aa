#pragma once

// Word-level multi-layer LSTM language model over Eigen dense types.
//
// Columns are batch entries; an `IdMatrix` holds token ids as time x batch.
// Gate blocks in every 4*nhid weight matrix are ordered input, forget, cell,
// output:
//
//   z = W x + U h_prev + b
//   i = sigmoid(z_i), f = sigmoid(z_f), g = tanh(z_g), o = sigmoid(z_o)
//   c = f * c_prev + i * g,  h = o * tanh(c)
//   p(next) = softmax(W_out h_top + b_out)

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synprime/error.hpp"

namespace synprime {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using IdMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct LstmLayer {
  Matrix<Scalar> input_weights;      // 4*nhid x input size
  Matrix<Scalar> recurrent_weights;  // 4*nhid x nhid
  Vector<Scalar> bias;               // 4*nhid
};

template <typename Scalar>
struct LstmParams {
  Matrix<Scalar> embedding;  // emb_dim x vocab
  std::vector<LstmLayer<Scalar>> layers;
  Matrix<Scalar> output_weights;  // vocab x nhid
  Vector<Scalar> output_bias;     // vocab

  static LstmParams zeros(int vocab, int emb_dim, int nhid, int nlayers) {
    LstmParams p;
    p.embedding = Matrix<Scalar>::Zero(emb_dim, vocab);
    for (int l = 0; l < nlayers; ++l) {
      const int in = l == 0 ? emb_dim : nhid;
      p.layers.push_back({Matrix<Scalar>::Zero(4 * nhid, in), Matrix<Scalar>::Zero(4 * nhid, nhid),
                          Vector<Scalar>::Zero(4 * nhid)});
    }
    p.output_weights = Matrix<Scalar>::Zero(vocab, nhid);
    p.output_bias = Vector<Scalar>::Zero(vocab);
    return p;
  }

  int vocab_size() const { return static_cast<int>(output_bias.size()); }
  int embedding_size() const { return static_cast<int>(embedding.rows()); }
  int hidden_size() const { return static_cast<int>(output_weights.cols()); }
  int num_layers() const { return static_cast<int>(layers.size()); }

  template <typename To>
  LstmParams<To> cast() const {
    LstmParams<To> out;
    out.embedding = embedding.template cast<To>();
    for (const auto& l : layers) {
      out.layers.push_back({l.input_weights.template cast<To>(),
                            l.recurrent_weights.template cast<To>(), l.bias.template cast<To>()});
    }
    out.output_weights = output_weights.template cast<To>();
    out.output_bias = output_bias.template cast<To>();
    return out;
  }
};

// Calls f(name, tensor) for every tensor in a fixed order; this order is also the
// checkpoint order.
template <typename Params, typename F>
void for_each_tensor(Params& p, F&& f) {
  f(std::string("embedding"), p.embedding);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    f(prefix + "input_weights", p.layers[l].input_weights);
    f(prefix + "recurrent_weights", p.layers[l].recurrent_weights);
    f(prefix + "bias", p.layers[l].bias);
  }
  f(std::string("output.weights"), p.output_weights);
  f(std::string("output.bias"), p.output_bias);
}

template <typename Scalar>
void set_zero(LstmParams<Scalar>& p) {
  for_each_tensor(p, [](const std::string&, auto& t) { t.setZero(); });
}

template <typename Scalar>
Scalar squared_norm(const LstmParams<Scalar>& p) {
  Scalar total(0);
  for_each_tensor(p, [&](const std::string&, const auto& t) { total += t.squaredNorm(); });
  return total;
}

template <typename Scalar>
void scale(LstmParams<Scalar>& p, Scalar factor) {
  for_each_tensor(p, [&](const std::string&, auto& t) { t *= factor; });
}

// target += alpha * delta; both must share shapes.
template <typename Scalar>
void add_scaled(LstmParams<Scalar>& target, const LstmParams<Scalar>& delta, Scalar alpha) {
  target.embedding += alpha * delta.embedding;
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].input_weights += alpha * delta.layers[l].input_weights;
    target.layers[l].recurrent_weights += alpha * delta.layers[l].recurrent_weights;
    target.layers[l].bias += alpha * delta.layers[l].bias;
  }
  target.output_weights += alpha * delta.output_weights;
  target.output_bias += alpha * delta.output_bias;
}

// Rescales p so that its global norm is at most max_norm. Returns the norm before clipping.
template <typename Scalar>
Scalar clip_global_norm(LstmParams<Scalar>& p, Scalar max_norm) {
  const Scalar norm = std::sqrt(squared_norm(p));
  if (norm > max_norm && norm > Scalar(0)) scale(p, max_norm / norm);
  return norm;
}

// Throws NumericalError unless all tensor shapes agree with each other.
template <typename Scalar>
void check_shapes(const LstmParams<Scalar>& p) {
  const auto V = p.vocab_size();
  const auto E = p.embedding_size();
  const auto H = p.hidden_size();
  bool ok = p.embedding.cols() == V && p.output_weights.rows() == V && !p.layers.empty();
  for (std::size_t l = 0; ok && l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    const auto in = l == 0 ? E : H;
    ok = layer.input_weights.rows() == 4 * H && layer.input_weights.cols() == in &&
         layer.recurrent_weights.rows() == 4 * H && layer.recurrent_weights.cols() == H &&
         layer.bias.size() == 4 * H;
  }
  if (!ok) throw NumericalError("LSTM parameter shapes are inconsistent");
}

template <typename Scalar>
struct LstmState {
  std::vector<Matrix<Scalar>> hidden;  // per layer, nhid x batch
  std::vector<Matrix<Scalar>> cell;
};

template <typename Scalar>
LstmState<Scalar> zero_state(const LstmParams<Scalar>& p, int batch) {
  LstmState<Scalar> s;
  for (int l = 0; l < p.num_layers(); ++l) {
    s.hidden.push_back(Matrix<Scalar>::Zero(p.hidden_size(), batch));
    s.cell.push_back(Matrix<Scalar>::Zero(p.hidden_size(), batch));
  }
  return s;
}

namespace detail {

template <typename Scalar>
struct StepCache {
  Matrix<Scalar> input;  // layer input x
  Matrix<Scalar> gates;  // activated i, f, g, o stacked
  Matrix<Scalar> cell;
  Matrix<Scalar> cell_tanh;
  Matrix<Scalar> hidden;
};

template <typename Scalar>
Matrix<Scalar> embed(const LstmParams<Scalar>& p, const IdMatrix& ids, Eigen::Index t) {
  Matrix<Scalar> x(p.embedding_size(), ids.cols());
  for (Eigen::Index b = 0; b < ids.cols(); ++b) x.col(b) = p.embedding.col(ids(t, b));
  return x;
}

template <typename Scalar>
void step(const LstmLayer<Scalar>& layer, Matrix<Scalar> x, const Matrix<Scalar>& h_prev,
          const Matrix<Scalar>& c_prev, StepCache<Scalar>& out) {
  const Eigen::Index n = h_prev.rows();
  out.gates.noalias() = layer.input_weights * x;
  out.gates.noalias() += layer.recurrent_weights * h_prev;
  out.gates.colwise() += layer.bias;
  auto sigmoid = [](auto block) { block = (Scalar(1) + (-block.array()).exp()).inverse().matrix(); };
  sigmoid(out.gates.middleRows(0, 2 * n));
  sigmoid(out.gates.middleRows(3 * n, n));
  out.gates.middleRows(2 * n, n) = out.gates.middleRows(2 * n, n).array().tanh().matrix();
  out.cell = out.gates.middleRows(n, n).cwiseProduct(c_prev) +
             out.gates.middleRows(0, n).cwiseProduct(out.gates.middleRows(2 * n, n));
  out.cell_tanh = out.cell.array().tanh().matrix();
  out.hidden = out.gates.middleRows(3 * n, n).cwiseProduct(out.cell_tanh);
  out.input = std::move(x);
}

// Column-wise log-sum-exp of logits.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> log_normalizer(const Matrix<Scalar>& logits) {
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> max = logits.colwise().maxCoeff();
  const Matrix<Scalar> shifted = logits.rowwise() - max;
  return max.array() + shifted.array().exp().colwise().sum().log();
}

template <typename Scalar>
Matrix<Scalar> logits(const LstmParams<Scalar>& p, const Matrix<Scalar>& top) {
  Matrix<Scalar> out = p.output_weights * top;
  out.colwise() += p.output_bias;
  return out;
}

}  // namespace detail

// Next-token distributions for a single sequence: column t is p(. | ids[0..t]).
template <typename Scalar>
Matrix<Scalar> forward_distributions(const LstmParams<Scalar>& p, const std::vector<int>& ids) {
  check_shapes(p);
  IdMatrix seq(static_cast<Eigen::Index>(ids.size()), 1);
  for (std::size_t t = 0; t < ids.size(); ++t) seq(static_cast<Eigen::Index>(t), 0) = ids[t];
  auto state = zero_state(p, 1);
  Matrix<Scalar> out(p.vocab_size(), seq.rows());
  detail::StepCache<Scalar> cache;
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    Matrix<Scalar> x = detail::embed(p, seq, t);
    for (int l = 0; l < p.num_layers(); ++l) {
      detail::step(p.layers[l], std::move(x), state.hidden[l], state.cell[l], cache);
      state.hidden[l] = cache.hidden;
      state.cell[l] = cache.cell;
      x = cache.hidden;
    }
    const Matrix<Scalar> z = detail::logits(p, x);
    const auto norm = detail::log_normalizer(z);
    out.col(t) = (z.col(0).array() - norm(0)).exp().matrix();
  }
  return out;
}

// Natural-log probability of targets(t, b) after reading inputs up to (t, b).
// Entries with a negative target are returned as 0. `state` is advanced.
template <typename Scalar>
Matrix<Scalar> target_log_probs(const LstmParams<Scalar>& p, const IdMatrix& inputs,
                                const IdMatrix& targets, LstmState<Scalar>& state) {
  Matrix<Scalar> out = Matrix<Scalar>::Zero(inputs.rows(), inputs.cols());
  detail::StepCache<Scalar> cache;
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    Matrix<Scalar> x = detail::embed(p, inputs, t);
    for (int l = 0; l < p.num_layers(); ++l) {
      detail::step(p.layers[l], std::move(x), state.hidden[l], state.cell[l], cache);
      state.hidden[l] = cache.hidden;
      state.cell[l] = cache.cell;
      x = cache.hidden;
    }
    const Matrix<Scalar> z = detail::logits(p, x);
    const auto norm = detail::log_normalizer(z);
    for (Eigen::Index b = 0; b < inputs.cols(); ++b) {
      const int target = targets(t, b);
      if (target >= 0) out(t, b) = z(target, b) - norm(b);
    }
  }
  return out;
}

// Summed negative log-likelihood (nats) over entries with a non-negative target.
// Accumulates d(loss)/d(params) into `grad` (which must be shaped like `p`) and
// advances `state`; gradients do not flow into the initial state.
template <typename Scalar>
Scalar loss_and_gradient(const LstmParams<Scalar>& p, const IdMatrix& inputs,
                         const IdMatrix& targets, LstmState<Scalar>& state,
                         LstmParams<Scalar>& grad) {
  const Eigen::Index T = inputs.rows();
  const Eigen::Index B = inputs.cols();
  const int L = p.num_layers();
  const Eigen::Index n = p.hidden_size();

  const LstmState<Scalar> initial = state;
  std::vector<std::vector<detail::StepCache<Scalar>>> cache(
      static_cast<std::size_t>(T), std::vector<detail::StepCache<Scalar>>(L));
  std::vector<Matrix<Scalar>> probs(static_cast<std::size_t>(T));

  Scalar loss(0);
  for (Eigen::Index t = 0; t < T; ++t) {
    Matrix<Scalar> x = detail::embed(p, inputs, t);
    for (int l = 0; l < L; ++l) {
      auto& c = cache[t][l];
      const auto& h_prev = t == 0 ? initial.hidden[l] : cache[t - 1][l].hidden;
      const auto& c_prev = t == 0 ? initial.cell[l] : cache[t - 1][l].cell;
      detail::step(p.layers[l], std::move(x), h_prev, c_prev, c);
      x = c.hidden;
    }
    const Matrix<Scalar> z = detail::logits(p, x);
    const auto norm = detail::log_normalizer(z);
    probs[t] = (z.rowwise() - norm).array().exp().matrix();
    for (Eigen::Index b = 0; b < B; ++b) {
      const int target = targets(t, b);
      if (target >= 0) loss -= z(target, b) - norm(b);
    }
  }

  std::vector<Matrix<Scalar>> dh_next(L, Matrix<Scalar>::Zero(n, B));
  std::vector<Matrix<Scalar>> dc_next(L, Matrix<Scalar>::Zero(n, B));
  Matrix<Scalar> dz(4 * n, B);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    Matrix<Scalar>& dlogits = probs[t];
    for (Eigen::Index b = 0; b < B; ++b) {
      const int target = targets(t, b);
      if (target >= 0) {
        dlogits(target, b) -= Scalar(1);
      } else {
        dlogits.col(b).setZero();
      }
    }
    const Matrix<Scalar>& top = cache[t][L - 1].hidden;
    grad.output_weights.noalias() += dlogits * top.transpose();
    grad.output_bias += dlogits.rowwise().sum();
    Matrix<Scalar> dh = p.output_weights.transpose() * dlogits + dh_next[L - 1];

    for (int l = L - 1; l >= 0; --l) {
      const auto& c = cache[t][l];
      const auto& h_prev = t == 0 ? initial.hidden[l] : cache[t - 1][l].hidden;
      const auto& c_prev = t == 0 ? initial.cell[l] : cache[t - 1][l].cell;
      const auto i = c.gates.middleRows(0, n).array();
      const auto f = c.gates.middleRows(n, n).array();
      const auto g = c.gates.middleRows(2 * n, n).array();
      const auto o = c.gates.middleRows(3 * n, n).array();
      const auto tc = c.cell_tanh.array();

      const Matrix<Scalar> dc =
          (dh.array() * o * (Scalar(1) - tc.square()) + dc_next[l].array()).matrix();
      dz.middleRows(0, n) = (dc.array() * g * i * (Scalar(1) - i)).matrix();
      dz.middleRows(n, n) = (dc.array() * c_prev.array() * f * (Scalar(1) - f)).matrix();
      dz.middleRows(2 * n, n) = (dc.array() * i * (Scalar(1) - g.square())).matrix();
      dz.middleRows(3 * n, n) = (dh.array() * tc * o * (Scalar(1) - o)).matrix();
      dc_next[l] = (dc.array() * f).matrix();

      auto& gl = grad.layers[l];
      gl.input_weights.noalias() += dz * c.input.transpose();
      gl.recurrent_weights.noalias() += dz * h_prev.transpose();
      gl.bias += dz.rowwise().sum();
      dh_next[l].noalias() = p.layers[l].recurrent_weights.transpose() * dz;
      Matrix<Scalar> dx = p.layers[l].input_weights.transpose() * dz;
      if (l > 0) {
        dh = dx + dh_next[l - 1];
      } else {
        for (Eigen::Index b = 0; b < B; ++b) grad.embedding.col(inputs(t, b)) += dx.col(b);
      }
    }
  }

  if (T > 0) {
    for (int l = 0; l < L; ++l) {
      state.hidden[l] = cache[T - 1][l].hidden;
      state.cell[l] = cache[T - 1][l].cell;
    }
  }
  return loss;
}

}  // namespace synprime
