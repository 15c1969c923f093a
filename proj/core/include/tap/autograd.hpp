#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tap/rng.hpp"

// Reverse-mode automatic differentiation on dense matrices. A Graph records
// operations onto a tape; backward() walks the tape in reverse. Templated on
// the scalar so training can run in float while gradient checks and bitwise
// comparisons run in double.
namespace tap::ag {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
struct Node {
  Mat<S> value;
  Mat<S> grad;  // lazily sized on first accumulation
  std::vector<std::shared_ptr<Node<S>>> parents;
  std::function<void(Node<S>&)> backward_fn;
  bool requires_grad = false;

  void accumulate(const Mat<S>& g) {
    if (grad.size() == 0) grad = Mat<S>::Zero(value.rows(), value.cols());
    grad += g;
  }
  void zero_grad() { grad.resize(0, 0); }
};

template <typename S>
using VarPtr = std::shared_ptr<Node<S>>;

// A trainable leaf; its gradient persists across backward calls until the
// optimizer consumes it.
template <typename S>
VarPtr<S> make_param(Mat<S> value) {
  auto node = std::make_shared<Node<S>>();
  node->value = std::move(value);
  node->requires_grad = true;
  return node;
}

template <typename S>
class Graph {
 public:
  // Constant input; no gradient flows into it.
  VarPtr<S> input(Mat<S> value) {
    auto node = std::make_shared<Node<S>>();
    node->value = std::move(value);
    return node;
  }

  VarPtr<S> matmul(const VarPtr<S>& a, const VarPtr<S>& b) {
    return emit(a->value * b->value, {a, b}, [](Node<S>& n) {
      const auto& a = n.parents[0];
      const auto& b = n.parents[1];
      if (a->requires_grad) a->accumulate(n.grad * b->value.transpose());
      if (b->requires_grad) b->accumulate(a->value.transpose() * n.grad);
    });
  }

  // a * b^T without materializing the transpose in the recorded value.
  VarPtr<S> matmul_nt(const VarPtr<S>& a, const VarPtr<S>& b) {
    return emit(a->value * b->value.transpose(), {a, b}, [](Node<S>& n) {
      const auto& a = n.parents[0];
      const auto& b = n.parents[1];
      if (a->requires_grad) a->accumulate(n.grad * b->value);
      if (b->requires_grad) b->accumulate(n.grad.transpose() * a->value);
    });
  }

  VarPtr<S> add(const VarPtr<S>& a, const VarPtr<S>& b) {
    return emit(a->value + b->value, {a, b}, [](Node<S>& n) {
      if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad);
      if (n.parents[1]->requires_grad) n.parents[1]->accumulate(n.grad);
    });
  }

  VarPtr<S> sub(const VarPtr<S>& a, const VarPtr<S>& b) {
    return emit(a->value - b->value, {a, b}, [](Node<S>& n) {
      if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad);
      if (n.parents[1]->requires_grad) n.parents[1]->accumulate(-n.grad);
    });
  }

  // Adds a 1 x d row vector to every row of a.
  VarPtr<S> add_rowvec(const VarPtr<S>& a, const VarPtr<S>& row) {
    if (row->value.rows() != 1 || row->value.cols() != a->value.cols()) {
      throw std::invalid_argument("add_rowvec: shape mismatch");
    }
    Mat<S> out = a->value.rowwise() + row->value.row(0);
    return emit(std::move(out), {a, row}, [](Node<S>& n) {
      if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad);
      if (n.parents[1]->requires_grad) {
        n.parents[1]->accumulate(n.grad.colwise().sum());
      }
    });
  }

  VarPtr<S> hadamard(const VarPtr<S>& a, const VarPtr<S>& b) {
    return emit(a->value.cwiseProduct(b->value), {a, b}, [](Node<S>& n) {
      const auto& a = n.parents[0];
      const auto& b = n.parents[1];
      if (a->requires_grad) a->accumulate(n.grad.cwiseProduct(b->value));
      if (b->requires_grad) b->accumulate(n.grad.cwiseProduct(a->value));
    });
  }

  VarPtr<S> scale(const VarPtr<S>& a, S c) {
    return emit(a->value * c, {a}, [c](Node<S>& n) {
      if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad * c);
    });
  }

  VarPtr<S> relu(const VarPtr<S>& a) {
    return emit(a->value.cwiseMax(S(0)), {a}, [](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      Mat<S> g = n.grad;
      const auto& x = n.parents[0]->value;
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
          if (x(i, j) <= S(0)) g(i, j) = S(0);
        }
      }
      n.parents[0]->accumulate(g);
    });
  }

  // Exact gaussian-error-function form; smooth, so numeric gradient checks
  // converge cleanly.
  VarPtr<S> gelu(const VarPtr<S>& a) {
    const S inv_sqrt2 = S(0.70710678118654752440);
    Mat<S> out = a->value.unaryExpr([inv_sqrt2](S x) {
      return S(0.5) * x * (S(1) + std::erf(x * inv_sqrt2));
    });
    return emit(std::move(out), {a}, [inv_sqrt2](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      const S inv_sqrt_2pi = S(0.39894228040143267794);
      Mat<S> d = n.parents[0]->value.unaryExpr([&](S x) {
        const S cdf = S(0.5) * (S(1) + std::erf(x * inv_sqrt2));
        const S pdf = inv_sqrt_2pi * std::exp(S(-0.5) * x * x);
        return cdf + x * pdf;
      });
      n.parents[0]->accumulate(n.grad.cwiseProduct(d));
    });
  }

  // Row-wise softmax with an optional additive mask (0 = allowed,
  // -inf = blocked). Every row must keep at least one allowed entry.
  VarPtr<S> softmax_rows(const VarPtr<S>& a, const Mat<S>* additive_mask = nullptr) {
    Mat<S> z = a->value;
    if (additive_mask) {
      if (additive_mask->rows() != z.rows() || additive_mask->cols() != z.cols()) {
        throw std::invalid_argument("softmax_rows: mask shape mismatch");
      }
      z += *additive_mask;
    }
    Mat<S> y(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const S m = z.row(i).maxCoeff();
      if (!(m > -std::numeric_limits<S>::infinity())) {
        throw std::runtime_error("softmax_rows: fully masked row");
      }
      Eigen::Array<S, 1, Eigen::Dynamic> e = (z.row(i).array() - m).exp();
      y.row(i) = e / e.sum();
    }
    return emit(std::move(y), {a}, [](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      const Mat<S>& y = n.value;
      Mat<S> dx(y.rows(), y.cols());
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const S dot = n.grad.row(i).dot(y.row(i));
        dx.row(i) = (y.row(i).array() * (n.grad.row(i).array() - dot)).matrix();
      }
      n.parents[0]->accumulate(dx);
    });
  }

  // Row-wise layer normalization with learned gain/bias (1 x d each).
  VarPtr<S> layer_norm(const VarPtr<S>& x, const VarPtr<S>& gamma,
                       const VarPtr<S>& beta, S eps = S(1e-5)) {
    const Eigen::Index d = x->value.cols();
    if (gamma->value.cols() != d || beta->value.cols() != d) {
      throw std::invalid_argument("layer_norm: gain/bias shape mismatch");
    }
    Mat<S> xhat(x->value.rows(), d);
    Mat<S> inv_std(x->value.rows(), 1);
    for (Eigen::Index i = 0; i < x->value.rows(); ++i) {
      const S mean = x->value.row(i).mean();
      Eigen::Array<S, 1, Eigen::Dynamic> centered = x->value.row(i).array() - mean;
      const S var = centered.square().mean();
      const S inv = S(1) / std::sqrt(var + eps);
      inv_std(i, 0) = inv;
      xhat.row(i) = (centered * inv).matrix();
    }
    Mat<S> out = (xhat.array().rowwise() * gamma->value.row(0).array()).matrix();
    out.rowwise() += beta->value.row(0);
    auto xhat_copy = std::make_shared<Mat<S>>(std::move(xhat));
    auto inv_copy = std::make_shared<Mat<S>>(std::move(inv_std));
    return emit(std::move(out), {x, gamma, beta}, [xhat_copy, inv_copy](Node<S>& n) {
      const auto& x = n.parents[0];
      const auto& gamma = n.parents[1];
      const auto& beta = n.parents[2];
      const Mat<S>& xh = *xhat_copy;
      if (beta->requires_grad) beta->accumulate(n.grad.colwise().sum());
      if (gamma->requires_grad) {
        gamma->accumulate(n.grad.cwiseProduct(xh).colwise().sum());
      }
      if (!x->requires_grad) return;
      const Eigen::Index d = xh.cols();
      Mat<S> dx(xh.rows(), d);
      for (Eigen::Index i = 0; i < xh.rows(); ++i) {
        Eigen::Array<S, 1, Eigen::Dynamic> dxhat =
            n.grad.row(i).array() * gamma->value.row(0).array();
        const S mean_dxhat = dxhat.mean();
        const S mean_dxhat_xhat = (dxhat * xh.row(i).array()).mean();
        dx.row(i) = ((dxhat - mean_dxhat - xh.row(i).array() * mean_dxhat_xhat) *
                     (*inv_copy)(i, 0))
                        .matrix();
      }
      x->accumulate(dx);
    });
  }

  // Selects rows of `table` by index; repeated indices accumulate gradient.
  VarPtr<S> gather_rows(const VarPtr<S>& table, std::vector<int> indices) {
    Mat<S> out(static_cast<Eigen::Index>(indices.size()), table->value.cols());
    for (size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] < 0 || indices[i] >= table->value.rows()) {
        throw std::out_of_range("gather_rows: index " + std::to_string(indices[i]));
      }
      out.row(static_cast<Eigen::Index>(i)) = table->value.row(indices[i]);
    }
    return emit(std::move(out), {table}, [idx = std::move(indices)](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      Mat<S> g = Mat<S>::Zero(n.parents[0]->value.rows(), n.parents[0]->value.cols());
      for (size_t i = 0; i < idx.size(); ++i) {
        g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
      }
      n.parents[0]->accumulate(g);
    });
  }

  VarPtr<S> slice_rows(const VarPtr<S>& a, int start, int count) {
    if (start < 0 || count < 0 || start + count > a->value.rows()) {
      throw std::out_of_range("slice_rows: bad range");
    }
    Mat<S> out = a->value.middleRows(start, count);
    return emit(std::move(out), {a}, [start, count](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      Mat<S> g = Mat<S>::Zero(n.parents[0]->value.rows(), n.parents[0]->value.cols());
      g.middleRows(start, count) = n.grad;
      n.parents[0]->accumulate(g);
    });
  }

  VarPtr<S> slice_cols(const VarPtr<S>& a, int start, int count) {
    if (start < 0 || count < 0 || start + count > a->value.cols()) {
      throw std::out_of_range("slice_cols: bad range");
    }
    Mat<S> out = a->value.middleCols(start, count);
    return emit(std::move(out), {a}, [start, count](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      Mat<S> g = Mat<S>::Zero(n.parents[0]->value.rows(), n.parents[0]->value.cols());
      g.middleCols(start, count) = n.grad;
      n.parents[0]->accumulate(g);
    });
  }

  VarPtr<S> concat_rows(const std::vector<VarPtr<S>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    Eigen::Index rows = 0;
    const Eigen::Index cols = parts[0]->value.cols();
    for (const auto& p : parts) {
      if (p->value.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
      rows += p->value.rows();
    }
    Mat<S> out(rows, cols);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
      out.middleRows(at, p->value.rows()) = p->value;
      at += p->value.rows();
    }
    return emit(std::move(out), parts, [](Node<S>& n) {
      Eigen::Index at = 0;
      for (auto& p : n.parents) {
        if (p->requires_grad) p->accumulate(n.grad.middleRows(at, p->value.rows()));
        at += p->value.rows();
      }
    });
  }

  VarPtr<S> concat_cols(const std::vector<VarPtr<S>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
    Eigen::Index cols = 0;
    const Eigen::Index rows = parts[0]->value.rows();
    for (const auto& p : parts) {
      if (p->value.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
      cols += p->value.cols();
    }
    Mat<S> out(rows, cols);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
      out.middleCols(at, p->value.cols()) = p->value;
      at += p->value.cols();
    }
    return emit(std::move(out), parts, [](Node<S>& n) {
      Eigen::Index at = 0;
      for (auto& p : n.parents) {
        if (p->requires_grad) p->accumulate(n.grad.middleCols(at, p->value.cols()));
        at += p->value.cols();
      }
    });
  }

  VarPtr<S> mean_all(const VarPtr<S>& a) {
    Mat<S> out(1, 1);
    out(0, 0) = a->value.mean();
    return emit(std::move(out), {a}, [](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      const S g = n.grad(0, 0) / static_cast<S>(n.parents[0]->value.size());
      n.parents[0]->accumulate(Mat<S>::Constant(n.parents[0]->value.rows(),
                                                n.parents[0]->value.cols(), g));
    });
  }

  // Inverted dropout; identity when not training or p == 0. The mask is drawn
  // in a fixed element order from the supplied generator.
  VarPtr<S> dropout(const VarPtr<S>& a, double p, bool training, std::mt19937_64* rng) {
    if (!training || p <= 0.0) return a;
    if (p >= 1.0) throw std::invalid_argument("dropout: p must be < 1");
    if (!rng) throw std::invalid_argument("dropout: missing generator in training mode");
    auto mask = std::make_shared<Mat<S>>(a->value.rows(), a->value.cols());
    const S keep_scale = S(1.0 / (1.0 - p));
    for (Eigen::Index i = 0; i < a->value.rows(); ++i) {
      for (Eigen::Index j = 0; j < a->value.cols(); ++j) {
        (*mask)(i, j) = (uniform_double(*rng) < p) ? S(0) : keep_scale;
      }
    }
    return emit(a->value.cwiseProduct(*mask), {a}, [mask](Node<S>& n) {
      if (n.parents[0]->requires_grad) {
        n.parents[0]->accumulate(n.grad.cwiseProduct(*mask));
      }
    });
  }

  // Mean cross-entropy between rows of logits and integer targets. Returns a
  // 1 x 1 node.
  VarPtr<S> softmax_xent_mean(const VarPtr<S>& logits, std::vector<int> targets) {
    if (static_cast<Eigen::Index>(targets.size()) != logits->value.rows()) {
      throw std::invalid_argument("softmax_xent_mean: target count mismatch");
    }
    const Eigen::Index rows = logits->value.rows();
    auto probs = std::make_shared<Mat<S>>(rows, logits->value.cols());
    S loss = S(0);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const int t = targets[static_cast<size_t>(i)];
      if (t < 0 || t >= logits->value.cols()) {
        throw std::out_of_range("softmax_xent_mean: target out of range");
      }
      const S m = logits->value.row(i).maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (logits->value.row(i).array() - m).exp();
      const S z = e.sum();
      probs->row(i) = (e / z).matrix();
      loss -= std::log((*probs)(i, t));
    }
    loss /= static_cast<S>(rows);
    Mat<S> out(1, 1);
    out(0, 0) = loss;
    return emit(std::move(out), {logits},
                [probs, tg = std::move(targets)](Node<S>& n) {
                  if (!n.parents[0]->requires_grad) return;
                  Mat<S> g = *probs;
                  for (Eigen::Index i = 0; i < g.rows(); ++i) {
                    g(i, tg[static_cast<size_t>(i)]) -= S(1);
                  }
                  g *= n.grad(0, 0) / static_cast<S>(g.rows());
                  n.parents[0]->accumulate(g);
                });
  }

  // Mean element-wise binary cross-entropy on logits against {0,1} targets.
  VarPtr<S> bce_logits_mean(const VarPtr<S>& logits, Mat<S> targets) {
    if (targets.rows() != logits->value.rows() || targets.cols() != logits->value.cols()) {
      throw std::invalid_argument("bce_logits_mean: target shape mismatch");
    }
    const Mat<S>& x = logits->value;
    S loss = S(0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const S v = x(i, j);
        loss += std::max(v, S(0)) - v * targets(i, j) + std::log1p(std::exp(-std::abs(v)));
      }
    }
    loss /= static_cast<S>(x.size());
    Mat<S> out(1, 1);
    out(0, 0) = loss;
    auto t = std::make_shared<Mat<S>>(std::move(targets));
    return emit(std::move(out), {logits}, [t](Node<S>& n) {
      if (!n.parents[0]->requires_grad) return;
      const Mat<S>& x = n.parents[0]->value;
      Mat<S> g(x.rows(), x.cols());
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const S sigmoid = S(1) / (S(1) + std::exp(-x(i, j)));
          g(i, j) = (sigmoid - (*t)(i, j)) / static_cast<S>(x.size());
        }
      }
      g *= n.grad(0, 0);
      n.parents[0]->accumulate(g);
    });
  }

  void backward(const VarPtr<S>& root) {
    if (root->value.size() != 1) {
      throw std::invalid_argument("backward: root must be scalar");
    }
    root->accumulate(Mat<S>::Ones(1, 1));
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      Node<S>& node = **it;
      if (!node.backward_fn || node.grad.size() == 0) continue;
      node.backward_fn(node);
    }
    // Tape nodes are intermediates; only off-tape parameter leaves keep their
    // accumulated gradients.
    for (auto& node : tape_) node->zero_grad();
  }

  size_t size() const { return tape_.size(); }

 private:
  VarPtr<S> emit(Mat<S> value, std::vector<VarPtr<S>> parents,
                 std::function<void(Node<S>&)> backward_fn) {
    auto node = std::make_shared<Node<S>>();
    node->value = std::move(value);
    node->parents = std::move(parents);
    for (const auto& p : node->parents) {
      if (p->requires_grad) {
        node->requires_grad = true;
        break;
      }
    }
    if (node->requires_grad) node->backward_fn = std::move(backward_fn);
    tape_.push_back(node);
    return node;
  }

  std::vector<VarPtr<S>> tape_;
};

}  // namespace tap::ag
