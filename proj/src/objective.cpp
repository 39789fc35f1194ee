/*
 * Copyright 2026 The rrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rrl/objective.hpp"

#include <stdexcept>

#include "rrl/analytic.hpp"

namespace rrl {

namespace {

struct BatchForward {
  std::vector<Matrix> activations;  // a_0 .. a_{d-1}, B x n_j
  std::vector<Matrix> patterns;     // hidden layers, B x n_j multipliers
  Matrix logits;                    // B x K
};

void add_bias_rows(Matrix& h, const Vector& b) {
  for (std::size_t r = 0; r < h.rows(); ++r) {
    auto row = h.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
}

BatchForward forward_batch(const Network& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) throw DimensionError("batch: input width mismatch");
  if (!all_finite(x.flat())) throw std::invalid_argument("batch: non-finite input");
  const double slope = net.activation().negative_slope();
  BatchForward f;
  f.activations.push_back(x);
  for (std::size_t j = 0; j + 1 < net.depth(); ++j) {
    Matrix h = matmul(f.activations.back(), net.weight(j));
    if (net.has_biases()) add_bias_rows(h, net.bias(j));
    Matrix s(h.rows(), h.cols());
    auto hf = h.flat();
    auto sf = s.flat();
    for (std::size_t i = 0; i < hf.size(); ++i) {
      if (hf[i] > 0.0) {
        sf[i] = 1.0;
      } else {
        sf[i] = slope;
        hf[i] *= slope;
      }
    }
    f.patterns.push_back(std::move(s));
    f.activations.push_back(std::move(h));
  }
  f.logits = matmul(f.activations.back(), net.weight(net.depth() - 1));
  if (net.has_biases()) add_bias_rows(f.logits, net.bias(net.depth() - 1));
  return f;
}

void add_column_sums(const Matrix& d, Vector& out) {
  for (std::size_t r = 0; r < d.rows(); ++r) {
    auto row = d.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
}

// Backprop an upstream logit gradient through the weights and biases.
void backprop_logits(const Network& net, const BatchForward& f, Matrix delta,
                     ParamGradients& g) {
  const std::size_t d = net.depth();
  for (std::size_t j = d; j-- > 0;) {
    gemm_tn_acc(f.activations[j], delta, g.weights[j]);
    if (net.has_biases()) add_column_sums(delta, g.biases[j]);
    if (j == 0) break;
    Matrix next = matmul_nt(delta, net.weight(j));
    auto nf = next.flat();
    auto sf = f.patterns[j - 1].flat();
    for (std::size_t i = 0; i < nf.size(); ++i) nf[i] *= sf[i];
    delta = std::move(next);
  }
}

// Multiply row i of block b (columns b*K .. b*K+K-1) by pattern(b, i).
void scale_blocks(Matrix& m, const Matrix& pattern, std::size_t k_count) {
  const std::size_t batch = pattern.rows();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t b = 0; b < batch; ++b) {
      const double s = pattern(b, i);
      if (s == 1.0) continue;
      for (std::size_t k = 0; k < k_count; ++k) row[b * k_count + k] *= s;
    }
  }
}

void add_block_sum(const Matrix& u, std::size_t batch, std::size_t k_count, Matrix& out) {
  for (std::size_t i = 0; i < u.rows(); ++i) {
    auto row = u.row(i);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t k = 0; k < k_count; ++k) out(i, k) += row[b * k_count + k];
  }
}

}  // namespace

BatchResult batch_objective(const Network& net, const Matrix& x,
                            std::span<const std::size_t> labels, const RegularizerSpec& reg,
                            ObjectiveOptions opt) {
  if (labels.size() != x.rows()) throw DimensionError("batch: label count differs from rows");
  reg.validate();
  const std::size_t batch = x.rows();
  const std::size_t k_count = net.num_classes();
  const std::size_t n0 = net.input_dim();
  const std::size_t d = net.depth();
  const bool use_reg = reg.active();
  if (use_reg && !supports(reg.kind, k_count))
    throw std::invalid_argument(to_string(reg.kind) + " has no closed form for K = " +
                                std::to_string(k_count));

  const BatchForward f = forward_batch(net, x);
  BatchResult res;
  res.count = batch;
  if (opt.gradients) res.grad = ParamGradients::zeros_like(net);

  std::vector<PredictionRecord> recs;
  recs.reserve(batch);
  Matrix gz(batch, k_count);
  bool gz_nonzero = false;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto row = f.logits.row(b);
    recs.push_back(softmax_ce(Vector(row), labels[b]));
    const PredictionRecord& rec = recs.back();
    if (opt.cross_entropy) {
      res.ce_sum += rec.loss;
      for (std::size_t k = 0; k < k_count; ++k) gz(b, k) = rec.probs[k];
      gz(b, labels[b]) = -rec.one_minus_py;
      gz_nonzero = true;
    }
    if (rec.correctly_classified()) ++res.correct;
  }

  if (use_reg) {
    // Stacked local maps: column b*K + k of `v` is v_k for sample b.
    std::vector<Matrix> chain(d > 1 ? d - 1 : 0);  // chain[h]: n_{h+1} x BK
    Matrix v;
    if (d == 1) {
      v = Matrix(n0, batch * k_count);
      const Matrix& w = net.weight(0);
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t k = 0; k < k_count; ++k) v(i, b * k_count + k) = w(i, k);
    } else {
      const Matrix& wl = net.weight(d - 1);
      Matrix n_top(wl.rows(), batch * k_count);
      for (std::size_t i = 0; i < wl.rows(); ++i)
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t k = 0; k < k_count; ++k)
            n_top(i, b * k_count + k) = f.patterns[d - 2](b, i) * wl(i, k);
      chain[d - 2] = std::move(n_top);
      for (std::size_t h = d - 2; h >= 1; --h) {
        Matrix m = matmul(net.weight(h), chain[h]);
        scale_blocks(m, f.patterns[h - 1], k_count);
        chain[h - 1] = std::move(m);
      }
      v = matmul(net.weight(0), chain[0]);
    }

    Matrix gv(n0, batch * k_count);
    const double lam = reg.lambda;
    const double kd = static_cast<double>(k_count);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t c0 = b * k_count;
      const PredictionRecord& rec = recs[b];
      switch (reg.kind) {
        case RegularizerKind::jacobian: {
          double q = 0.0;
          for (std::size_t i = 0; i < n0; ++i)
            for (std::size_t k = 0; k < k_count; ++k) {
              const double val = v(i, c0 + k);
              q += val * val;
              gv(i, c0 + k) = 2.0 * lam * val;
            }
          res.reg_sum += lam * q;
          break;
        }
        case RegularizerKind::cross_lipschitz: {
          if (k_count == 2) {
            double nu2 = 0.0;
            for (std::size_t i = 0; i < n0; ++i) {
              const double u = v(i, c0) - v(i, c0 + 1);
              nu2 += u * u;
              gv(i, c0) = lam * u;
              gv(i, c0 + 1) = -lam * u;
            }
            res.reg_sum += lam * nu2 / 2.0;
          } else {
            // nu^2 / 2 = ||V P||_F^2 / K with P the centering projector.
            double q = 0.0;
            for (std::size_t i = 0; i < n0; ++i) {
              double mean = 0.0;
              for (std::size_t k = 0; k < k_count; ++k) mean += v(i, c0 + k);
              mean /= kd;
              for (std::size_t k = 0; k < k_count; ++k) {
                const double c = v(i, c0 + k) - mean;
                q += c * c;
                gv(i, c0 + k) = 2.0 * lam / kd * c;
              }
            }
            res.reg_sum += lam * q / kd;
          }
          break;
        }
        case RegularizerKind::input_gradient:
        case RegularizerKind::curvature: {
          const double p = rec.p_y();
          const double qy = rec.one_minus_py;
          double nu2 = 0.0;
          for (std::size_t i = 0; i < n0; ++i) {
            const double u = v(i, c0) - v(i, c0 + 1);
            nu2 += u * u;
          }
          const bool ig = reg.kind == RegularizerKind::input_gradient;
          const double factor = ig ? qy * qy : p * qy;
          const double dfactor_dp = ig ? -2.0 * qy : qy - p;
          res.reg_sum += lam * factor * nu2;
          const double coeff = 2.0 * lam * factor;
          for (std::size_t i = 0; i < n0; ++i) {
            const double u = v(i, c0) - v(i, c0 + 1);
            gv(i, c0) = coeff * u;
            gv(i, c0 + 1) = -coeff * u;
          }
          // d p_y / d z = p_y (e_y - p)
          const double up = lam * dfactor_dp * nu2;
          const std::size_t y = rec.label;
          for (std::size_t k = 0; k < k_count; ++k)
            gz(b, k) += up * (k == y ? p * qy : -p * rec.probs[k]);
          gz_nonzero = true;
          break;
        }
        case RegularizerKind::none:
          break;
      }
    }

    if (opt.gradients) {
      Matrix u = std::move(gv);
      if (d == 1) {
        add_block_sum(u, batch, k_count, res.grad.weights[0]);
      } else {
        for (std::size_t h = 0; h + 1 < d; ++h) {
          gemm_nt_acc(u, chain[h], res.grad.weights[h]);
          Matrix dn = matmul_tn(net.weight(h), u);
          scale_blocks(dn, f.patterns[h], k_count);
          u = std::move(dn);
        }
        add_block_sum(u, batch, k_count, res.grad.weights[d - 1]);
      }
    }
  }

  if (opt.gradients && gz_nonzero) backprop_logits(net, f, std::move(gz), res.grad);
  return res;
}

InputGradients loss_input_gradients(const Network& net, const Matrix& x,
                                    std::span<const std::size_t> labels) {
  if (labels.size() != x.rows()) throw DimensionError("batch: label count differs from rows");
  const BatchForward f = forward_batch(net, x);
  const std::size_t batch = x.rows();
  const std::size_t k_count = net.num_classes();
  InputGradients out;
  Matrix delta(batch, k_count);
  for (std::size_t b = 0; b < batch; ++b) {
    const PredictionRecord rec = softmax_ce(Vector(f.logits.row(b)), labels[b]);
    out.losses.push_back(rec.loss);
    out.predictions.push_back(argmax(rec.logits));
    for (std::size_t k = 0; k < k_count; ++k) delta(b, k) = rec.probs[k];
    delta(b, labels[b]) = -rec.one_minus_py;
  }
  for (std::size_t j = net.depth(); j-- > 0;) {
    Matrix next = matmul_nt(delta, net.weight(j));
    if (j > 0) {
      auto nf = next.flat();
      auto sf = f.patterns[j - 1].flat();
      for (std::size_t i = 0; i < nf.size(); ++i) nf[i] *= sf[i];
    }
    delta = std::move(next);
  }
  out.gradients = std::move(delta);
  return out;
}

ParamGradients param_gradients(const Network& net, const Vector& x, std::size_t y,
                               const RegularizerSpec* reg) {
  if (x.size() != net.input_dim()) throw DimensionError("param_gradients: input width");
  Matrix batch(1, x.size(), x.values());
  const std::size_t labels[1] = {y};
  const RegularizerSpec none{};
  return batch_objective(net, batch, labels, reg ? *reg : none).grad;
}

}  // namespace rrl
