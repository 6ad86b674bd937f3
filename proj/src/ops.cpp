#include "umt/nn/ops.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <utility>

#include "umt/core/error.hpp"

namespace umt::nn {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<Mat>;
using CMapM = Eigen::Map<const Mat>;

MapM as_mat(Tensor& t, int rows, int cols) { return MapM(t.data.data(), rows, cols); }
CMapM as_mat(const Tensor& t, int rows, int cols) {
  return CMapM(t.data.data(), rows, cols);
}
MapM as_mat2(Tensor& t) { return MapM(t.data.data(), t.rows(), t.cols()); }
CMapM as_mat2(const Tensor& t) { return CMapM(t.data.data(), t.rows(), t.cols()); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

void require_2d(const Var& v, const char* who) {
  require(v && v->value.ndim() == 2, std::string(who) + ": expected 2-D tensor");
}

void require_same(const Var& a, const Var& b, const char* who) {
  require(a->value.same_shape(b->value), std::string(who) + ": shape mismatch " +
                                             a->value.shape_str() + " vs " +
                                             b->value.shape_str());
}

// Elementwise unary: dfun(x, y) is dy/dx.
Var unary_op(const Var& a, double (*fwd)(double), double (*dfun)(double, double)) {
  Tensor y = a->value;
  for (double& v : y.data) v = fwd(v);
  return make_op(std::move(y), {a}, [a, dfun](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    const std::size_t n = g.data.size();
    for (std::size_t i = 0; i < n; ++i)
      g.data[i] += out.grad.data[i] * dfun(a->value.data[i], out.value.data[i]);
  });
}

double sigmoid_s(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  Tensor y = a->value;
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += b->value.data[i];
  return make_op(std::move(y), {a, b}, [a, b](Node& out) {
    if (a->requires_grad) {
      Tensor& g = a->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += out.grad.data[i];
    }
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += out.grad.data[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  Tensor y = a->value;
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] -= b->value.data[i];
  return make_op(std::move(y), {a, b}, [a, b](Node& out) {
    if (a->requires_grad) {
      Tensor& g = a->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += out.grad.data[i];
    }
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] -= out.grad.data[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  Tensor y = a->value;
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= b->value.data[i];
  return make_op(std::move(y), {a, b}, [a, b](Node& out) {
    if (a->requires_grad) {
      Tensor& g = a->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += out.grad.data[i] * b->value.data[i];
    }
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += out.grad.data[i] * a->value.data[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor y = a->value;
  for (double& v : y.data) v *= s;
  return make_op(std::move(y), {a}, [a, s](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += s * out.grad.data[i];
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor y = a->value;
  for (double& v : y.data) v += s;
  return make_op(std::move(y), {a}, [a](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += out.grad.data[i];
  });
}

Var square(const Var& a) {
  return unary_op(
      a, +[](double x) { return x * x; },
      +[](double x, double) { return 2.0 * x; });
}

Var sqrt_eps(const Var& a, double eps) {
  Tensor y = a->value;
  for (double& v : y.data) v = std::sqrt(v + eps);
  return make_op(std::move(y), {a}, [a](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i)
      g.data[i] += out.grad.data[i] * 0.5 / out.value.data[i];
  });
}

Var relu(const Var& a) {
  return unary_op(
      a, +[](double x) { return x > 0.0 ? x : 0.0; },
      +[](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(const Var& a) {
  return unary_op(
      a, +[](double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); },
      +[](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        return cdf + x * pdf;
      });
}

Var silu(const Var& a) {
  return unary_op(
      a, +[](double x) { return x * sigmoid_s(x); },
      +[](double x, double) {
        const double s = sigmoid_s(x);
        return s * (1.0 + x * (1.0 - s));
      });
}

Var sigmoid(const Var& a) {
  return unary_op(
      a, +[](double x) { return sigmoid_s(x); },
      +[](double, double y) { return y * (1.0 - y); });
}

Var tanh_op(const Var& a) {
  return unary_op(
      a, +[](double x) { return std::tanh(x); },
      +[](double, double y) { return 1.0 - y * y; });
}

Var exp_op(const Var& a) {
  return unary_op(
      a, +[](double x) { return std::exp(x); },
      +[](double, double y) { return y; });
}

Var mul_const(const Var& a, const Tensor& m) {
  require(a->value.same_shape(m), "mul_const: shape mismatch");
  Tensor y = a->value;
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= m.data[i];
  return make_op(std::move(y), {a}, [a, m](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i)
      g.data[i] += out.grad.data[i] * m.data[i];
  });
}

Var matmul(const Var& a, const Var& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  require(a->value.cols() == b->value.rows(),
          "matmul: inner dims " + a->value.shape_str() + " x " + b->value.shape_str());
  const int m = a->value.rows(), k = a->value.cols(), n = b->value.cols();
  Tensor y({m, n});
  as_mat(y, m, n).noalias() = as_mat2(a->value) * as_mat2(b->value);
  return make_op(std::move(y), {a, b}, [a, b, m, k, n](Node& out) {
    CMapM g(out.grad.data.data(), m, n);
    if (a->requires_grad)
      as_mat(a->ensure_grad(), m, k).noalias() += g * as_mat2(b->value).transpose();
    if (b->requires_grad)
      as_mat(b->ensure_grad(), k, n).noalias() += as_mat2(a->value).transpose() * g;
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  require_2d(x, "linear");
  require_2d(w, "linear");
  require(x->value.cols() == w->value.cols(),
          "linear: in dim " + x->value.shape_str() + " vs " + w->value.shape_str());
  const int r = x->value.rows(), in = x->value.cols(), outd = w->value.rows();
  if (b) require(static_cast<int>(b->value.numel()) == outd, "linear: bias size");
  Tensor y({r, outd});
  as_mat(y, r, outd).noalias() = as_mat2(x->value) * as_mat2(w->value).transpose();
  if (b) {
    MapM ym(y.data.data(), r, outd);
    Eigen::Map<const Eigen::RowVectorXd> bv(b->value.data.data(), outd);
    ym.rowwise() += bv;
  }
  return make_op(std::move(y), {x, w, b}, [x, w, b, r, in, outd](Node& out) {
    CMapM g(out.grad.data.data(), r, outd);
    if (x->requires_grad)
      as_mat(x->ensure_grad(), r, in).noalias() += g * as_mat2(w->value);
    if (w->requires_grad)
      as_mat(w->ensure_grad(), outd, in).noalias() +=
          g.transpose() * as_mat2(x->value);
    if (b && b->requires_grad) {
      Eigen::Map<Eigen::RowVectorXd> bg(b->ensure_grad().data.data(), outd);
      bg += g.colwise().sum();
    }
  });
}

Var reshape(const Var& a, std::vector<int> shape) {
  Tensor y(shape);
  require(y.numel() == a->value.numel(), "reshape: element count mismatch");
  y.data = a->value.data;
  return make_op(std::move(y), {a}, [a](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += out.grad.data[i];
  });
}

Var slice_cols(const Var& a, int c0, int c1) {
  require_2d(a, "slice_cols");
  const int r = a->value.rows(), c = a->value.cols();
  require(0 <= c0 && c0 < c1 && c1 <= c, "slice_cols: bad range");
  Tensor y({r, c1 - c0});
  as_mat2(y) = as_mat2(a->value).middleCols(c0, c1 - c0);
  return make_op(std::move(y), {a}, [a, r, c, c0, c1](Node& out) {
    if (!a->requires_grad) return;
    as_mat(a->ensure_grad(), r, c).middleCols(c0, c1 - c0) +=
        CMapM(out.grad.data.data(), r, c1 - c0);
  });
}

Var concat_cols(const Var& a, const Var& b) {
  require_2d(a, "concat_cols");
  require_2d(b, "concat_cols");
  require(a->value.rows() == b->value.rows(), "concat_cols: row mismatch");
  const int r = a->value.rows(), ca = a->value.cols(), cb = b->value.cols();
  Tensor y({r, ca + cb});
  MapM ym = as_mat2(y);
  ym.leftCols(ca) = as_mat2(a->value);
  ym.rightCols(cb) = as_mat2(b->value);
  return make_op(std::move(y), {a, b}, [a, b, r, ca, cb](Node& out) {
    CMapM g(out.grad.data.data(), r, ca + cb);
    if (a->requires_grad) as_mat(a->ensure_grad(), r, ca) += g.leftCols(ca);
    if (b->requires_grad) as_mat(b->ensure_grad(), r, cb) += g.rightCols(cb);
  });
}

Var slice_rows(const Var& a, int r0, int r1) {
  require_2d(a, "slice_rows");
  const int r = a->value.rows(), c = a->value.cols();
  require(0 <= r0 && r0 < r1 && r1 <= r, "slice_rows: bad range");
  Tensor y({r1 - r0, c});
  as_mat2(y) = as_mat2(a->value).middleRows(r0, r1 - r0);
  return make_op(std::move(y), {a}, [a, r, c, r0, r1](Node& out) {
    if (!a->requires_grad) return;
    as_mat(a->ensure_grad(), r, c).middleRows(r0, r1 - r0) +=
        CMapM(out.grad.data.data(), r1 - r0, c);
  });
}

Var rows_from_table(const Var& table, const std::vector<int>& ids) {
  require_2d(table, "rows_from_table");
  const int v = table->value.rows(), d = table->value.cols();
  Tensor y({static_cast<int>(ids.size()), d});
  MapM ym = as_mat2(y);
  const auto tm = as_mat2(table->value);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(0 <= ids[i] && ids[i] < v, "rows_from_table: id out of range");
    ym.row(static_cast<int>(i)) = tm.row(ids[i]);
  }
  return make_op(std::move(y), {table}, [table, ids, v, d](Node& out) {
    if (!table->requires_grad) return;
    MapM tg = as_mat(table->ensure_grad(), v, d);
    CMapM g(out.grad.data.data(), static_cast<int>(ids.size()), d);
    for (std::size_t i = 0; i < ids.size(); ++i)
      tg.row(ids[i]) += g.row(static_cast<int>(i));
  });
}

Var add_rows_by_index(const Var& x, const Var& table, const std::vector<int>& ids) {
  require_2d(x, "add_rows_by_index");
  require_2d(table, "add_rows_by_index");
  const int r = x->value.rows(), d = x->value.cols();
  require(static_cast<int>(ids.size()) == r, "add_rows_by_index: ids size");
  require(table->value.cols() == d, "add_rows_by_index: width mismatch");
  const int v = table->value.rows();
  Tensor y = x->value;
  MapM ym = as_mat2(y);
  const auto tm = as_mat2(table->value);
  for (int i = 0; i < r; ++i) {
    require(0 <= ids[i] && ids[i] < v, "add_rows_by_index: id out of range");
    ym.row(i) += tm.row(ids[i]);
  }
  return make_op(std::move(y), {x, table}, [x, table, ids, r, d, v](Node& out) {
    CMapM g(out.grad.data.data(), r, d);
    if (x->requires_grad) as_mat(x->ensure_grad(), r, d) += g;
    if (table->requires_grad) {
      MapM tg = as_mat(table->ensure_grad(), v, d);
      for (int i = 0; i < r; ++i) tg.row(ids[i]) += g.row(i);
    }
  });
}

Var add_rowvec(const Var& x, const Var& v) {
  require_2d(x, "add_rowvec");
  const int r = x->value.rows(), c = x->value.cols();
  require(static_cast<int>(v->value.numel()) == c, "add_rowvec: width mismatch");
  Tensor y = x->value;
  MapM ym = as_mat2(y);
  Eigen::Map<const Eigen::RowVectorXd> vv(v->value.data.data(), c);
  ym.rowwise() += vv;
  return make_op(std::move(y), {x, v}, [x, v, r, c](Node& out) {
    CMapM g(out.grad.data.data(), r, c);
    if (x->requires_grad) as_mat(x->ensure_grad(), r, c) += g;
    if (v->requires_grad) {
      Eigen::Map<Eigen::RowVectorXd> vg(v->ensure_grad().data.data(), c);
      vg += g.colwise().sum();
    }
  });
}

Var add_periodic(const Var& x, const Var& p, int period) {
  require_2d(x, "add_periodic");
  require_2d(p, "add_periodic");
  const int r = x->value.rows(), c = x->value.cols();
  require(p->value.rows() == period && p->value.cols() == c,
          "add_periodic: table must be (period, cols)");
  require(r % period == 0, "add_periodic: rows not a multiple of period");
  Tensor y = x->value;
  MapM ym = as_mat2(y);
  const auto pm = as_mat2(p->value);
  for (int i = 0; i < r; ++i) ym.row(i) += pm.row(i % period);
  return make_op(std::move(y), {x, p}, [x, p, r, c, period](Node& out) {
    CMapM g(out.grad.data.data(), r, c);
    if (x->requires_grad) as_mat(x->ensure_grad(), r, c) += g;
    if (p->requires_grad) {
      MapM pg = as_mat(p->ensure_grad(), period, c);
      for (int i = 0; i < r; ++i) pg.row(i % period) += g.row(i);
    }
  });
}

Var assemble_rows(const std::vector<Var>& srcs,
                  const std::vector<std::pair<int, int>>& picks, int cols) {
  const int r = static_cast<int>(picks.size());
  Tensor y({r, cols});
  MapM ym = as_mat2(y);
  for (int i = 0; i < r; ++i) {
    const auto [si, sr] = picks[i];
    if (si < 0) continue;  // zero padding row
    require(si < static_cast<int>(srcs.size()), "assemble_rows: source index");
    const Tensor& s = srcs[si]->value;
    require(s.ndim() == 2 && s.cols() == cols && 0 <= sr && sr < s.rows(),
            "assemble_rows: bad pick");
    ym.row(i) = as_mat2(s).row(sr);
  }
  std::vector<Var> parents(srcs.begin(), srcs.end());
  return make_op(std::move(y), std::move(parents), [srcs, picks, r, cols](Node& out) {
    CMapM g(out.grad.data.data(), r, cols);
    for (int i = 0; i < r; ++i) {
      const auto [si, sr] = picks[i];
      if (si < 0 || !srcs[si]->requires_grad) continue;
      as_mat2(srcs[si]->ensure_grad()).row(sr) += g.row(i);
    }
  });
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (double v : a->value.data) s += v;
  return make_op(Tensor::scalar(s), {a}, [a](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    const double go = out.grad.data[0];
    for (double& v : g.data) v += go;
  });
}

Var mean_all(const Var& a) {
  const double n = static_cast<double>(a->value.numel());
  double s = 0.0;
  for (double v : a->value.data) s += v;
  return make_op(Tensor::scalar(s / n), {a}, [a, n](Node& out) {
    if (!a->requires_grad) return;
    Tensor& g = a->ensure_grad();
    const double go = out.grad.data[0] / n;
    for (double& v : g.data) v += go;
  });
}

Var mse(const Var& a, const Var& b) {
  require_same(a, b, "mse");
  const double n = static_cast<double>(a->value.numel());
  double s = 0.0;
  for (std::size_t i = 0; i < a->value.data.size(); ++i) {
    const double d = a->value.data[i] - b->value.data[i];
    s += d * d;
  }
  return make_op(Tensor::scalar(s / n), {a, b}, [a, b, n](Node& out) {
    const double go = out.grad.data[0] * 2.0 / n;
    for (std::size_t i = 0; i < a->value.data.size(); ++i) {
      const double d = go * (a->value.data[i] - b->value.data[i]);
      if (a->requires_grad) a->ensure_grad().data[i] += d;
      if (b->requires_grad) b->ensure_grad().data[i] -= d;
    }
  });
}

Var masked_sq_sum(const Var& a, const Var& b, const Tensor& mask, double denom) {
  require_same(a, b, "masked_sq_sum");
  require(a->value.same_shape(mask), "masked_sq_sum: mask shape");
  require(denom > 0.0, "masked_sq_sum: denom must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < a->value.data.size(); ++i) {
    const double d = a->value.data[i] - b->value.data[i];
    s += mask.data[i] * d * d;
  }
  return make_op(Tensor::scalar(s / denom), {a, b}, [a, b, mask, denom](Node& out) {
    const double go = out.grad.data[0] * 2.0 / denom;
    for (std::size_t i = 0; i < a->value.data.size(); ++i) {
      const double d = go * mask.data[i] * (a->value.data[i] - b->value.data[i]);
      if (a->requires_grad) a->ensure_grad().data[i] += d;
      if (b->requires_grad) b->ensure_grad().data[i] -= d;
    }
  });
}

Var cross_entropy_logits(const Var& logits, const std::vector<int>& labels) {
  require_2d(logits, "cross_entropy_logits");
  const int r = logits->value.rows(), c = logits->value.cols();
  require(static_cast<int>(labels.size()) == r, "cross_entropy_logits: labels size");
  auto probs = std::make_shared<Tensor>(std::vector<int>{r, c});
  const auto zm = as_mat2(logits->value);
  MapM pm = as_mat2(*probs);
  double loss = 0.0;
  for (int i = 0; i < r; ++i) {
    require(0 <= labels[i] && labels[i] < c, "cross_entropy_logits: label range");
    const double mx = zm.row(i).maxCoeff();
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      const double e = std::exp(zm(i, j) - mx);
      pm(i, j) = e;
      sum += e;
    }
    pm.row(i) /= sum;
    loss += std::log(sum) + mx - zm(i, labels[i]);
  }
  loss /= r;
  return make_op(Tensor::scalar(loss), {logits},
                 [logits, labels, probs, r, c](Node& out) {
                   if (!logits->requires_grad) return;
                   const double go = out.grad.data[0] / r;
                   MapM lg = as_mat(logits->ensure_grad(), r, c);
                   const auto pm = as_mat2(*probs);
                   for (int i = 0; i < r; ++i) {
                     lg.row(i) += go * pm.row(i);
                     lg(i, labels[i]) -= go;
                   }
                 });
}

Var layernorm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_2d(x, "layernorm");
  const int r = x->value.rows(), c = x->value.cols();
  if (gamma) require(static_cast<int>(gamma->value.numel()) == c, "layernorm: gamma size");
  if (beta) require(static_cast<int>(beta->value.numel()) == c, "layernorm: beta size");
  auto xhat = std::make_shared<Tensor>(std::vector<int>{r, c});
  auto inv_std = std::make_shared<Tensor>(std::vector<int>{r, 1});
  Tensor y({r, c});
  const auto xm = as_mat2(x->value);
  MapM hm = as_mat2(*xhat);
  MapM ym = as_mat2(y);
  for (int i = 0; i < r; ++i) {
    const double mu = xm.row(i).mean();
    const double var = (xm.row(i).array() - mu).square().sum() / c;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std->data[i] = is;
    hm.row(i) = (xm.row(i).array() - mu) * is;
  }
  if (gamma) {
    Eigen::Map<const Eigen::RowVectorXd> gv(gamma->value.data.data(), c);
    ym = hm.array().rowwise() * gv.array();
  } else {
    ym = hm;
  }
  if (beta) {
    Eigen::Map<const Eigen::RowVectorXd> bv(beta->value.data.data(), c);
    ym.rowwise() += bv;
  }
  return make_op(std::move(y), {x, gamma, beta},
                 [x, gamma, beta, xhat, inv_std, r, c](Node& out) {
                   CMapM g(out.grad.data.data(), r, c);
                   const auto hm = as_mat2(*xhat);
                   if (beta && beta->requires_grad) {
                     Eigen::Map<Eigen::RowVectorXd> bg(beta->ensure_grad().data.data(), c);
                     bg += g.colwise().sum();
                   }
                   if (gamma && gamma->requires_grad) {
                     Eigen::Map<Eigen::RowVectorXd> gg(gamma->ensure_grad().data.data(), c);
                     gg += (g.array() * hm.array()).colwise().sum().matrix();
                   }
                   if (!x->requires_grad) return;
                   MapM xg = as_mat(x->ensure_grad(), r, c);
                   Eigen::RowVectorXd h(c);
                   for (int i = 0; i < r; ++i) {
                     if (gamma) {
                       Eigen::Map<const Eigen::RowVectorXd> gv(gamma->value.data.data(), c);
                       h = (g.row(i).array() * gv.array()).matrix();
                     } else {
                       h = g.row(i);
                     }
                     const double mh = h.mean();
                     const double mhx = (h.array() * hm.row(i).array()).mean();
                     xg.row(i).array() +=
                         (h.array() - mh - hm.row(i).array() * mhx) * inv_std->data[i];
                   }
                 });
}

Var softmax_rows(const Var& x) {
  require_2d(x, "softmax_rows");
  const int r = x->value.rows(), c = x->value.cols();
  Tensor y({r, c});
  const auto xm = as_mat2(x->value);
  MapM ym = as_mat2(y);
  for (int i = 0; i < r; ++i) {
    const double mx = xm.row(i).maxCoeff();
    ym.row(i) = (xm.row(i).array() - mx).exp();
    ym.row(i) /= ym.row(i).sum();
  }
  return make_op(std::move(y), {x}, [x, r, c](Node& out) {
    if (!x->requires_grad) return;
    CMapM g(out.grad.data.data(), r, c);
    CMapM ym(out.value.data.data(), r, c);
    MapM xg = as_mat(x->ensure_grad(), r, c);
    for (int i = 0; i < r; ++i) {
      const double dot = (g.row(i).array() * ym.row(i).array()).sum();
      xg.row(i).array() += ym.row(i).array() * (g.row(i).array() - dot);
    }
  });
}

Var attention(const Var& q, const Var& k, const Var& v, int batch, int lq, int lk,
              int heads, const Tensor* key_valid) {
  require_2d(q, "attention");
  require_2d(k, "attention");
  require_2d(v, "attention");
  const int d = q->value.cols();
  require(k->value.cols() == d && v->value.cols() == d, "attention: width mismatch");
  require(q->value.rows() == batch * lq, "attention: q rows");
  require(k->value.rows() == batch * lk && v->value.rows() == batch * lk,
          "attention: k/v rows");
  require(heads > 0 && d % heads == 0, "attention: heads must divide width");
  if (key_valid)
    require(static_cast<int>(key_valid->numel()) == batch * lk, "attention: key_valid size");
  const int dh = d / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));

  // Softmax weights are saved for backward: (batch*heads*lq, lk).
  auto probs = std::make_shared<Tensor>(std::vector<int>{batch * heads * lq, lk});
  Tensor y({batch * lq, d});
  const auto qm = as_mat2(q->value);
  const auto km = as_mat2(k->value);
  const auto vm = as_mat2(v->value);
  MapM ym = as_mat2(y);
  ym.setZero();
  Mat s(lq, lk);
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      auto qb = qm.block(b * lq, h * dh, lq, dh);
      auto kb = km.block(b * lk, h * dh, lk, dh);
      auto vb = vm.block(b * lk, h * dh, lk, dh);
      s.noalias() = sc * (qb * kb.transpose());
      MapM pb(probs->data.data() + static_cast<std::size_t>((b * heads + h)) * lq * lk,
              lq, lk);
      for (int i = 0; i < lq; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < lk; ++j)
          if (!key_valid || key_valid->data[b * lk + j] != 0.0)
            mx = std::max(mx, s(i, j));
        if (!std::isfinite(mx)) {
          pb.row(i).setZero();  // no valid key: zero output row
          continue;
        }
        double sum = 0.0;
        for (int j = 0; j < lk; ++j) {
          const bool ok = !key_valid || key_valid->data[b * lk + j] != 0.0;
          const double e = ok ? std::exp(s(i, j) - mx) : 0.0;
          pb(i, j) = e;
          sum += e;
        }
        pb.row(i) /= sum;
      }
      ym.block(b * lq, h * dh, lq, dh).noalias() = pb * vb;
    }
  }
  return make_op(std::move(y), {q, k, v},
                 [q, k, v, probs, batch, lq, lk, heads, dh, sc](Node& out) {
                   const int d = heads * dh;
                   CMapM g(out.grad.data.data(), batch * lq, d);
                   const auto qm = as_mat2(q->value);
                   const auto km = as_mat2(k->value);
                   const auto vm = as_mat2(v->value);
                   Mat dp(lq, lk), ds(lq, lk);
                   for (int b = 0; b < batch; ++b) {
                     for (int h = 0; h < heads; ++h) {
                       CMapM pb(probs->data.data() +
                                    static_cast<std::size_t>((b * heads + h)) * lq * lk,
                                lq, lk);
                       auto gb = g.block(b * lq, h * dh, lq, dh);
                       auto qb = qm.block(b * lq, h * dh, lq, dh);
                       auto kb = km.block(b * lk, h * dh, lk, dh);
                       auto vb = vm.block(b * lk, h * dh, lk, dh);
                       if (v->requires_grad)
                         as_mat2(v->ensure_grad()).block(b * lk, h * dh, lk, dh).noalias() +=
                             pb.transpose() * gb;
                       if (!q->requires_grad && !k->requires_grad) continue;
                       dp.noalias() = gb * vb.transpose();
                       for (int i = 0; i < lq; ++i) {
                         const double dot = (dp.row(i).array() * pb.row(i).array()).sum();
                         ds.row(i).array() =
                             pb.row(i).array() * (dp.row(i).array() - dot);
                       }
                       if (q->requires_grad)
                         as_mat2(q->ensure_grad()).block(b * lq, h * dh, lq, dh).noalias() +=
                             sc * (ds * kb);
                       if (k->requires_grad)
                         as_mat2(k->ensure_grad()).block(b * lk, h * dh, lk, dh).noalias() +=
                             sc * (ds.transpose() * qb);
                     }
                   }
                 });
}

namespace {

struct ConvDims {
  int n, c, h, w, oc, kh, kw, oh, ow;
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, int stride, int pad) {
  require(x.ndim() == 4 && w.ndim() == 4, "conv2d: expected 4-D tensors");
  ConvDims d{};
  d.n = x.dim(0);
  d.c = x.dim(1);
  d.h = x.dim(2);
  d.w = x.dim(3);
  d.oc = w.dim(0);
  d.kh = w.dim(2);
  d.kw = w.dim(3);
  require(w.dim(1) == d.c, "conv2d: channel mismatch");
  require(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");
  d.oh = (d.h + 2 * pad - d.kh) / stride + 1;
  d.ow = (d.w + 2 * pad - d.kw) / stride + 1;
  require(d.oh >= 1 && d.ow >= 1, "conv2d: output would be empty");
  require((d.h + 2 * pad - d.kh) % stride == 0 && (d.w + 2 * pad - d.kw) % stride == 0,
          "conv2d: size not divisible by stride");
  return d;
}

// col is (C*kh*kw, OH*OW); row = c*kh*kw + ky*kw + kx, column = oy*OW + ox.
void im2col(const double* x, const ConvDims& d, int stride, int pad, Mat& col) {
  col.resize(d.c * d.kh * d.kw, d.oh * d.ow);
  for (int c = 0; c < d.c; ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * d.h * d.w;
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        const int row = (c * d.kh + ky) * d.kw + kx;
        for (int oy = 0; oy < d.oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          for (int ox = 0; ox < d.ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            col(row, oy * d.ow + ox) =
                (iy >= 0 && iy < d.h && ix >= 0 && ix < d.w)
                    ? xc[static_cast<std::size_t>(iy) * d.w + ix]
                    : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const Mat& col, const ConvDims& d, int stride, int pad, double* gx) {
  for (int c = 0; c < d.c; ++c) {
    double* xc = gx + static_cast<std::size_t>(c) * d.h * d.w;
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        const int row = (c * d.kh + ky) * d.kw + kx;
        for (int oy = 0; oy < d.oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= d.h) continue;
          for (int ox = 0; ox < d.ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= d.w) continue;
            xc[static_cast<std::size_t>(iy) * d.w + ix] += col(row, oy * d.ow + ox);
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const ConvDims dm = conv_dims(x->value, w->value, stride, pad);
  if (b) require(static_cast<int>(b->value.numel()) == dm.oc, "conv2d: bias size");
  Tensor y({dm.n, dm.oc, dm.oh, dm.ow});
  const std::size_t xsz = static_cast<std::size_t>(dm.c) * dm.h * dm.w;
  const std::size_t ysz = static_cast<std::size_t>(dm.oc) * dm.oh * dm.ow;
  CMapM wm(w->value.data.data(), dm.oc, dm.c * dm.kh * dm.kw);
  Mat col;
  for (int n = 0; n < dm.n; ++n) {
    im2col(x->value.data.data() + n * xsz, dm, stride, pad, col);
    MapM ym(y.data.data() + n * ysz, dm.oc, dm.oh * dm.ow);
    ym.noalias() = wm * col;
    if (b)
      for (int oc = 0; oc < dm.oc; ++oc) ym.row(oc).array() += b->value.data[oc];
  }
  return make_op(std::move(y), {x, w, b}, [x, w, b, dm, stride, pad, xsz, ysz](Node& out) {
    CMapM wm(w->value.data.data(), dm.oc, dm.c * dm.kh * dm.kw);
    Mat col, dcol;
    for (int n = 0; n < dm.n; ++n) {
      CMapM gy(out.grad.data.data() + n * ysz, dm.oc, dm.oh * dm.ow);
      if (b && b->requires_grad)
        for (int oc = 0; oc < dm.oc; ++oc)
          b->ensure_grad().data[oc] += gy.row(oc).sum();
      if (w->requires_grad || x->requires_grad)
        im2col(x->value.data.data() + n * xsz, dm, stride, pad, col);
      if (w->requires_grad) {
        MapM wg(w->ensure_grad().data.data(), dm.oc, dm.c * dm.kh * dm.kw);
        wg.noalias() += gy * col.transpose();
      }
      if (x->requires_grad) {
        dcol.noalias() = wm.transpose() * gy;
        col2im_add(dcol, dm, stride, pad, x->ensure_grad().data.data() + n * xsz);
      }
    }
  });
}

Var global_avg_pool(const Var& x) {
  require(x->value.ndim() == 4, "global_avg_pool: expected 4-D");
  const int n = x->value.dim(0), c = x->value.dim(1);
  const int hw = x->value.dim(2) * x->value.dim(3);
  Tensor y({n, c});
  for (int i = 0; i < n * c; ++i) {
    double s = 0.0;
    const double* p = x->value.data.data() + static_cast<std::size_t>(i) * hw;
    for (int j = 0; j < hw; ++j) s += p[j];
    y.data[i] = s / hw;
  }
  return make_op(std::move(y), {x}, [x, n, c, hw](Node& out) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int i = 0; i < n * c; ++i) {
      const double go = out.grad.data[i] / hw;
      double* p = g.data.data() + static_cast<std::size_t>(i) * hw;
      for (int j = 0; j < hw; ++j) p[j] += go;
    }
  });
}

Var upsample_nearest2x(const Var& x) {
  require(x->value.ndim() == 4, "upsample_nearest2x: expected 4-D");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2),
            w = x->value.dim(3);
  Tensor y({n, c, 2 * h, 2 * w});
  for (int nc = 0; nc < n * c; ++nc) {
    const double* src = x->value.data.data() + static_cast<std::size_t>(nc) * h * w;
    double* dst = y.data.data() + static_cast<std::size_t>(nc) * 4 * h * w;
    for (int i = 0; i < 2 * h; ++i)
      for (int j = 0; j < 2 * w; ++j)
        dst[static_cast<std::size_t>(i) * 2 * w + j] =
            src[static_cast<std::size_t>(i / 2) * w + j / 2];
  }
  return make_op(std::move(y), {x}, [x, n, c, h, w](Node& out) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int nc = 0; nc < n * c; ++nc) {
      double* dst = g.data.data() + static_cast<std::size_t>(nc) * h * w;
      const double* src = out.grad.data.data() + static_cast<std::size_t>(nc) * 4 * h * w;
      for (int i = 0; i < 2 * h; ++i)
        for (int j = 0; j < 2 * w; ++j)
          dst[static_cast<std::size_t>(i / 2) * w + j / 2] +=
              src[static_cast<std::size_t>(i) * 2 * w + j];
    }
  });
}

Var avg_pool2d(const Var& x, int k) {
  require(x->value.ndim() == 4, "avg_pool2d: expected 4-D");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2),
            w = x->value.dim(3);
  require(k >= 1 && h % k == 0 && w % k == 0, "avg_pool2d: size not divisible");
  const int oh = h / k, ow = w / k;
  Tensor y({n, c, oh, ow});
  const double inv = 1.0 / (k * k);
  for (int nc = 0; nc < n * c; ++nc) {
    const double* src = x->value.data.data() + static_cast<std::size_t>(nc) * h * w;
    double* dst = y.data.data() + static_cast<std::size_t>(nc) * oh * ow;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double s = 0.0;
        for (int dy = 0; dy < k; ++dy)
          for (int dx = 0; dx < k; ++dx)
            s += src[static_cast<std::size_t>(oy * k + dy) * w + ox * k + dx];
        dst[static_cast<std::size_t>(oy) * ow + ox] = s * inv;
      }
  }
  return make_op(std::move(y), {x}, [x, n, c, h, w, k](Node& out) {
    if (!x->requires_grad) return;
    const int oh = h / k, ow = w / k;
    const double inv = 1.0 / (k * k);
    Tensor& g = x->ensure_grad();
    for (int nc = 0; nc < n * c; ++nc) {
      double* dst = g.data.data() + static_cast<std::size_t>(nc) * h * w;
      const double* src = out.grad.data.data() + static_cast<std::size_t>(nc) * oh * ow;
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const double go = src[static_cast<std::size_t>(oy) * ow + ox] * inv;
          for (int dy = 0; dy < k; ++dy)
            for (int dx = 0; dx < k; ++dx)
              dst[static_cast<std::size_t>(oy * k + dy) * w + ox * k + dx] += go;
        }
    }
  });
}

namespace {
// Mirror index into [0,n) without repeating the border sample.
inline int mirror(int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); }
}  // namespace

Var reflect_pad2d(const Var& x, int pad) {
  require(x->value.ndim() == 4, "reflect_pad2d: expected 4-D");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2),
            w = x->value.dim(3);
  require(pad >= 0 && pad < h && pad < w, "reflect_pad2d: pad too large");
  const int oh = h + 2 * pad, ow = w + 2 * pad;
  Tensor y({n, c, oh, ow});
  for (int nc = 0; nc < n * c; ++nc) {
    const double* src = x->value.data.data() + static_cast<std::size_t>(nc) * h * w;
    double* dst = y.data.data() + static_cast<std::size_t>(nc) * oh * ow;
    for (int i = 0; i < oh; ++i) {
      const int sy = mirror(i - pad, h);
      for (int j = 0; j < ow; ++j)
        dst[static_cast<std::size_t>(i) * ow + j] =
            src[static_cast<std::size_t>(sy) * w + mirror(j - pad, w)];
    }
  }
  return make_op(std::move(y), {x}, [x, n, c, h, w, pad, oh, ow](Node& out) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int nc = 0; nc < n * c; ++nc) {
      double* dst = g.data.data() + static_cast<std::size_t>(nc) * h * w;
      const double* src = out.grad.data.data() + static_cast<std::size_t>(nc) * oh * ow;
      for (int i = 0; i < oh; ++i) {
        const int sy = mirror(i - pad, h);
        for (int j = 0; j < ow; ++j)
          dst[static_cast<std::size_t>(sy) * w + mirror(j - pad, w)] +=
              src[static_cast<std::size_t>(i) * ow + j];
      }
    }
  });
}

namespace {

// out row = n*L + gy*gw + gx; out col = (c*p + py)*p + px.
inline std::size_t patch_src_index(int n, int c, int h, int w, int p, int gw, int r,
                                   int col) {
  const int l = r;  // row within image
  const int gy = l / gw, gx = l % gw;
  const int cc = col / (p * p);
  const int py = (col / p) % p, px = col % p;
  const int y = gy * p + py, x = gx * p + px;
  return ((static_cast<std::size_t>(n) * c + cc) * h + y) * w + x;
}

}  // namespace

Var patchify(const Var& x, int p) {
  require(x->value.ndim() == 4, "patchify: expected 4-D");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2),
            w = x->value.dim(3);
  require(p >= 1 && h % p == 0 && w % p == 0, "patchify: size not divisible by patch");
  const int gh = h / p, gw = w / p, l = gh * gw, f = c * p * p;
  Tensor y({n * l, f});
  for (int ni = 0; ni < n; ++ni)
    for (int r = 0; r < l; ++r)
      for (int col = 0; col < f; ++col)
        y.data[static_cast<std::size_t>(ni * l + r) * f + col] =
            x->value.data[patch_src_index(ni, c, h, w, p, gw, r, col)];
  return make_op(std::move(y), {x}, [x, p, n, c, h, w, gw, l, f](Node& out) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int ni = 0; ni < n; ++ni)
      for (int r = 0; r < l; ++r)
        for (int col = 0; col < f; ++col)
          g.data[patch_src_index(ni, c, h, w, p, gw, r, col)] +=
              out.grad.data[static_cast<std::size_t>(ni * l + r) * f + col];
  });
}

Var unpatchify(const Var& x, int p, int n, int c, int h, int w) {
  require_2d(x, "unpatchify");
  require(p >= 1 && h % p == 0 && w % p == 0, "unpatchify: size not divisible");
  const int gh = h / p, gw = w / p, l = gh * gw, f = c * p * p;
  require(x->value.rows() == n * l && x->value.cols() == f,
          "unpatchify: token shape mismatch");
  Tensor y({n, c, h, w});
  for (int ni = 0; ni < n; ++ni)
    for (int r = 0; r < l; ++r)
      for (int col = 0; col < f; ++col)
        y.data[patch_src_index(ni, c, h, w, p, gw, r, col)] =
            x->value.data[static_cast<std::size_t>(ni * l + r) * f + col];
  return make_op(std::move(y), {x}, [x, p, n, c, h, w, gw, l, f](Node& out) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int ni = 0; ni < n; ++ni)
      for (int r = 0; r < l; ++r)
        for (int col = 0; col < f; ++col)
          g.data[static_cast<std::size_t>(ni * l + r) * f + col] +=
              out.grad.data[patch_src_index(ni, c, h, w, p, gw, r, col)];
  });
}

Var modulate(const Var& x, const Var& shift, const Var& scl, int tokens) {
  require_2d(x, "modulate");
  require_2d(shift, "modulate");
  require_2d(scl, "modulate");
  const int r = x->value.rows(), d = x->value.cols();
  require(r % tokens == 0, "modulate: rows not a multiple of tokens");
  const int bsz = r / tokens;
  require(shift->value.rows() == bsz && shift->value.cols() == d &&
              scl->value.rows() == bsz && scl->value.cols() == d,
          "modulate: per-sample vectors must be (batch, d)");
  Tensor y({r, d});
  const auto xm = as_mat2(x->value);
  const auto sm = as_mat2(shift->value);
  const auto cm = as_mat2(scl->value);
  MapM ym = as_mat2(y);
  for (int i = 0; i < r; ++i) {
    const int b = i / tokens;
    ym.row(i).array() = xm.row(i).array() * (1.0 + cm.row(b).array()) + sm.row(b).array();
  }
  return make_op(std::move(y), {x, shift, scl}, [x, shift, scl, r, d, tokens](Node& out) {
    CMapM g(out.grad.data.data(), r, d);
    const auto xm = as_mat2(x->value);
    const auto cm = as_mat2(scl->value);
    for (int i = 0; i < r; ++i) {
      const int b = i / tokens;
      if (x->requires_grad)
        as_mat2(x->ensure_grad()).row(i).array() +=
            g.row(i).array() * (1.0 + cm.row(b).array());
      if (shift->requires_grad) as_mat2(shift->ensure_grad()).row(b) += g.row(i);
      if (scl->requires_grad)
        as_mat2(scl->ensure_grad()).row(b).array() += g.row(i).array() * xm.row(i).array();
    }
  });
}

Var gate_residual(const Var& x, const Var& y, const Var& gate, int tokens) {
  require_2d(x, "gate_residual");
  require_2d(y, "gate_residual");
  require_2d(gate, "gate_residual");
  require_same(x, y, "gate_residual");
  const int r = x->value.rows(), d = x->value.cols();
  require(r % tokens == 0, "gate_residual: rows not a multiple of tokens");
  const int bsz = r / tokens;
  require(gate->value.rows() == bsz && gate->value.cols() == d,
          "gate_residual: gate must be (batch, d)");
  Tensor o({r, d});
  const auto xm = as_mat2(x->value);
  const auto ym = as_mat2(y->value);
  const auto gm = as_mat2(gate->value);
  MapM om = as_mat2(o);
  for (int i = 0; i < r; ++i)
    om.row(i).array() = xm.row(i).array() + gm.row(i / tokens).array() * ym.row(i).array();
  return make_op(std::move(o), {x, y, gate}, [x, y, gate, r, d, tokens](Node& out) {
    CMapM g(out.grad.data.data(), r, d);
    const auto ym = as_mat2(y->value);
    const auto gm = as_mat2(gate->value);
    for (int i = 0; i < r; ++i) {
      const int b = i / tokens;
      if (x->requires_grad) as_mat2(x->ensure_grad()).row(i) += g.row(i);
      if (y->requires_grad)
        as_mat2(y->ensure_grad()).row(i).array() += g.row(i).array() * gm.row(b).array();
      if (gate->requires_grad)
        as_mat2(gate->ensure_grad()).row(b).array() += g.row(i).array() * ym.row(i).array();
    }
  });
}

Tensor sinusoidal_positions(int length, int dim) {
  if (dim % 2 != 0) throw ShapeError("sinusoidal_positions: dim must be even");
  Tensor t({length, dim});
  const int half = dim / 2;
  for (int pos = 0; pos < length; ++pos)
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      t.data[static_cast<std::size_t>(pos) * dim + i] = std::sin(pos * freq);
      t.data[static_cast<std::size_t>(pos) * dim + half + i] = std::cos(pos * freq);
    }
  return t;
}

Tensor sinusoidal_timestep(const std::vector<double>& t, int dim) {
  if (dim % 2 != 0) throw ShapeError("sinusoidal_timestep: dim must be even");
  Tensor e({static_cast<int>(t.size()), dim});
  const int half = dim / 2;
  for (std::size_t r = 0; r < t.size(); ++r)
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      const double a = 1000.0 * t[r] * freq;
      e.data[r * dim + i] = std::sin(a);
      e.data[r * dim + half + i] = std::cos(a);
    }
  return e;
}

Tensor fourier_features(const std::vector<double>& vals, int n_freq) {
  Tensor t({static_cast<int>(vals.size()), 2 * n_freq});
  for (std::size_t r = 0; r < vals.size(); ++r)
    for (int j = 0; j < n_freq; ++j) {
      const double a = std::ldexp(M_PI * vals[r], j);  // 2^j * pi * v
      t.data[r * 2 * n_freq + 2 * j] = std::sin(a);
      t.data[r * 2 * n_freq + 2 * j + 1] = std::cos(a);
    }
  return t;
}

}  // namespace umt::nn
