#pragma once
#include <optional>
#include <vector>

#include "umt/nn/graph.hpp"

namespace umt::nn {

// ---- elementwise ----
Var add(const Var& a, const Var& b);            // same shape
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);            // Hadamard
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var square(const Var& a);
Var sqrt_eps(const Var& a, double eps);         // sqrt(a + eps)
Var relu(const Var& a);
Var gelu(const Var& a);                         // erf form
Var silu(const Var& a);
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var exp_op(const Var& a);

/// Hadamard with a constant (no gradient into the mask).
Var mul_const(const Var& a, const Tensor& m);

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);         // (m,k)x(k,n)
/// y = x·Wᵀ + b, x:(R,in), W:(out,in), b:(out) or null.
Var linear(const Var& x, const Var& w, const Var& b);

// ---- shape ----
Var reshape(const Var& a, std::vector<int> shape);
Var slice_cols(const Var& a, int c0, int c1);   // 2-D
Var concat_cols(const Var& a, const Var& b);    // 2-D
Var slice_rows(const Var& a, int r0, int r1);   // 2-D

// ---- rows / tables ----
/// Gather rows of `table` (V,d) at `ids`; backward scatter-adds.
Var rows_from_table(const Var& table, const std::vector<int>& ids);
/// x + table[idx[r]] per row.
Var add_rows_by_index(const Var& x, const Var& table, const std::vector<int>& ids);
/// x:(R,C) + v:(C) broadcast over rows.
Var add_rowvec(const Var& x, const Var& v);
/// x:(B*L,C) + p:(L,C), row r gets p[r % L].
Var add_periodic(const Var& x, const Var& p, int period);
/// Build (rows, cols) from (src,row) picks; (-1,_) rows are zero padding.
Var assemble_rows(const std::vector<Var>& srcs,
                  const std::vector<std::pair<int, int>>& picks, int cols);

// ---- reductions / losses ----
Var sum_all(const Var& a);
Var mean_all(const Var& a);
Var mse(const Var& a, const Var& b);            // mean((a-b)^2)
/// sum(mask ⊙ (a-b)^2) / denom with a constant mask.
Var masked_sq_sum(const Var& a, const Var& b, const Tensor& mask, double denom);
/// Mean cross-entropy of row logits vs integer labels.
Var cross_entropy_logits(const Var& logits, const std::vector<int>& labels);

// ---- normalization / attention ----
Var layernorm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
Var softmax_rows(const Var& x);

/// Fused multi-head attention. q:(B*Lq,d), k,v:(B*Lk,d), d = heads*dh.
/// key_valid, when given, is (B,Lk) in {0,1}; invalid keys get -1e30 logits
/// so their weight underflows to exactly zero. A row with no valid key
/// yields a zero output row.
Var attention(const Var& q, const Var& k, const Var& v, int batch, int lq,
              int lk, int heads, const Tensor* key_valid);

// ---- conv / pooling (NCHW) ----
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var global_avg_pool(const Var& x);              // (N,C,H,W) -> (N,C)
Var upsample_nearest2x(const Var& x);
Var avg_pool2d(const Var& x, int k);            // stride k, H,W divisible by k
/// Mirror the border without repeating the edge pixel (pad < min(H,W)).
Var reflect_pad2d(const Var& x, int pad);

// ---- patch embedding ----
/// (N,C,H,W) -> (N*L, p*p*C), L=(H/p)*(W/p), token-major rows, feature order
/// (c, py, px).
Var patchify(const Var& x, int p);
/// (N*L, p*p*C) -> (N,C,H,W); exact inverse of patchify.
Var unpatchify(const Var& x, int p, int n, int c, int h, int w);

/// x:(B*L,d) ⊙ (1+scale_b) + shift_b with per-sample vectors (B,d).
Var modulate(const Var& x, const Var& shift, const Var& scl, int tokens);
/// x + gate_b ⊙ y with per-sample gate (B,d).
Var gate_residual(const Var& x, const Var& y, const Var& gate, int tokens);

// ---- fixed feature maps (constants) ----
Tensor sinusoidal_positions(int length, int dim);
Tensor sinusoidal_timestep(const std::vector<double>& t, int dim);
Tensor fourier_features(const std::vector<double>& vals, int n_freq);

}  // namespace umt::nn
