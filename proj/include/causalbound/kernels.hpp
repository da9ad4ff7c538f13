#pragma once

#include <cstddef>

// Data-parallel inner loops behind everything numeric. Two backends share the
// exact same per-element arithmetic and reduction order (serial within a row,
// rows combined in index order), so a fixed input gives bit-identical results
// on both; the OpenMP backend only distributes independent rows/blocks.

namespace causalbound::kernels {

enum class Backend { serial, openmp };

void set_backend(Backend b);
Backend backend();

/// exp with ~2 ulp accuracy, deterministic across backends and much cheaper
/// than libm inside the Sinkhorn inner loops. Underflows to 0 below -745.
double fast_exp(double x);

// elementwise, n = element count
void ew_add(double* out, const double* a, const double* b, size_t n);
void ew_sub(double* out, const double* a, const double* b, size_t n);
void ew_mul(double* out, const double* a, const double* b, size_t n);
void ew_scale(double* out, const double* a, double s, size_t n);
void ew_axpy(double* out, const double* a, double s, size_t n);  // out += s*a
void ew_tanh(double* out, const double* a, size_t n);
void ew_relu(double* out, const double* a, size_t n);
void ew_exp(double* out, const double* a, size_t n);
void ew_log(double* out, const double* a, size_t n);
void ew_clamp(double* out, const double* a, double lo, double hi, size_t n);
void ew_sigmoid(double* out, const double* a, size_t n);
void ew_sqrt(double* out, const double* a, size_t n);

/// C[n x m] (+)= A[n x k] * B[k x m]; set accumulate=false to overwrite.
void matmul(double* c, const double* a, const double* b, int n, int k, int m,
            bool accumulate = false);
/// C[n x m] (+)= A^T[k x n]^T... i.e. A is stored k x n, logical op A^T * B.
void matmul_at_b(double* c, const double* a, const double* b, int n, int k, int m,
                 bool accumulate = false);
/// C[n x m] (+)= A[n x k] * B^T where B is stored m x k.
void matmul_a_bt(double* c, const double* a, const double* b, int n, int k, int m,
                 bool accumulate = false);

/// out[i] = log sum_j exp(M[i,j]) with max-shift; M is n x m row-major.
void row_logsumexp(double* out, const double* m, int n, int cols);

/// Deterministic full reduction: serial partial per row, rows combined in order.
double reduce_sum(const double* m, int n, int cols);

/// Pairwise cost C[i,j] = |x_i - y_j|_2^p for p in {1,2}; X n x d, Y m x d.
void cost_matrix(double* c, const double* x, const double* y, int n, int m, int d, int p);

/// f_out[i] = -eps * LSE_j(ln_w[j] + (g[j] - C[i,j]) / eps)   (row direction)
void potential_update_rows(double* f_out, const double* c, const double* g,
                           const double* ln_w, double eps, int n, int m);
/// g_out[j] = -eps * LSE_i(ln_w[i] + (f[i] - C[i,j]) / eps)   (column direction)
void potential_update_cols(double* g_out, const double* c, const double* f,
                           const double* ln_w, double eps, int n, int m);

/// plan[i,j] = a[i] * b[j] * exp((f[i] + g[j] - C[i,j]) / eps); returns sum_ij plan*C.
/// plan may be null if only the value is needed.
double plan_cost(double* plan, const double* c, const double* f, const double* g,
                 const double* a, const double* b, double eps, int n, int m);

}  // namespace causalbound::kernels
