#include "causalbound/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace causalbound::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::openmp};

constexpr double kLog2E = 1.4426950408889634;
constexpr double kLn2Hi = 0.6931471805599453;
constexpr double kLn2Lo = 2.3190468138462996e-17;

inline double exp2i(int e) {
    // 2^e for e in [-1021, 1023], assembled from the exponent bits
    return std::bit_cast<double>(static_cast<uint64_t>(e + 1023) << 52);
}

// Parallelize only when the loop is worth a fork.
inline bool par(size_t work) { return g_backend.load() == Backend::openmp && work >= 4096; }

}  // namespace

void set_backend(Backend b) { g_backend.store(b); }
Backend backend() { return g_backend.load(); }

double fast_exp(double x) {
    if (x < -745.0) return 0.0;
    if (x > 709.0) return std::numeric_limits<double>::infinity();
    double t = x * kLog2E;
    double k = std::nearbyint(t);
    double r = (x - k * kLn2Hi) - k * kLn2Lo;
    // degree-13 Taylor, |r| <= 0.3466 -> below 1 ulp
    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    int ki = static_cast<int>(k);
    if (ki < -1021) return p * exp2i(-1021) * exp2i(ki + 1021);
    return p * exp2i(ki);
}

#define CB_EW_LOOP(expr)                                              \
    if (par(n)) {                                                     \
        _Pragma("omp parallel for schedule(static)")                  \
        for (size_t i = 0; i < n; ++i) out[i] = (expr);               \
    } else {                                                          \
        for (size_t i = 0; i < n; ++i) out[i] = (expr);               \
    }

void ew_add(double* out, const double* a, const double* b, size_t n) { CB_EW_LOOP(a[i] + b[i]) }
void ew_sub(double* out, const double* a, const double* b, size_t n) { CB_EW_LOOP(a[i] - b[i]) }
void ew_mul(double* out, const double* a, const double* b, size_t n) { CB_EW_LOOP(a[i] * b[i]) }
void ew_scale(double* out, const double* a, double s, size_t n) { CB_EW_LOOP(a[i] * s) }
void ew_axpy(double* out, const double* a, double s, size_t n) { CB_EW_LOOP(out[i] + s * a[i]) }
void ew_tanh(double* out, const double* a, size_t n) { CB_EW_LOOP(std::tanh(a[i])) }
void ew_relu(double* out, const double* a, size_t n) { CB_EW_LOOP(a[i] > 0.0 ? a[i] : 0.0) }
void ew_exp(double* out, const double* a, size_t n) { CB_EW_LOOP(fast_exp(a[i])) }
void ew_log(double* out, const double* a, size_t n) { CB_EW_LOOP(std::log(a[i])) }
void ew_sqrt(double* out, const double* a, size_t n) { CB_EW_LOOP(std::sqrt(a[i])) }
void ew_clamp(double* out, const double* a, double lo, double hi, size_t n) {
    CB_EW_LOOP(std::min(std::max(a[i], lo), hi))
}
void ew_sigmoid(double* out, const double* a, size_t n) {
    CB_EW_LOOP(1.0 / (1.0 + fast_exp(-a[i])))
}

#undef CB_EW_LOOP

namespace {

inline void matmul_row(double* crow, const double* arow, const double* b, int k, int m,
                       bool accumulate) {
    if (!accumulate) std::fill(crow, crow + m, 0.0);
    for (int kk = 0; kk < k; ++kk) {
        double av = arow[kk];
        if (av == 0.0) continue;
        const double* brow = b + static_cast<size_t>(kk) * m;
        for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
}

}  // namespace

void matmul(double* c, const double* a, const double* b, int n, int k, int m, bool accumulate) {
    size_t work = static_cast<size_t>(n) * k * m;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i)
            matmul_row(c + static_cast<size_t>(i) * m, a + static_cast<size_t>(i) * k, b, k, m,
                       accumulate);
    } else {
        for (int i = 0; i < n; ++i)
            matmul_row(c + static_cast<size_t>(i) * m, a + static_cast<size_t>(i) * k, b, k, m,
                       accumulate);
    }
}

void matmul_at_b(double* c, const double* a, const double* b, int n, int k, int m,
                 bool accumulate) {
    // A stored k x n; C[i,j] = sum_kk A[kk,i] * B[kk,j]
    size_t work = static_cast<size_t>(n) * k * m;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            double* crow = c + static_cast<size_t>(i) * m;
            if (!accumulate) std::fill(crow, crow + m, 0.0);
            for (int kk = 0; kk < k; ++kk) {
                double av = a[static_cast<size_t>(kk) * n + i];
                if (av == 0.0) continue;
                const double* brow = b + static_cast<size_t>(kk) * m;
                for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
            }
        }
    } else {
        for (int i = 0; i < n; ++i) {
            double* crow = c + static_cast<size_t>(i) * m;
            if (!accumulate) std::fill(crow, crow + m, 0.0);
            for (int kk = 0; kk < k; ++kk) {
                double av = a[static_cast<size_t>(kk) * n + i];
                if (av == 0.0) continue;
                const double* brow = b + static_cast<size_t>(kk) * m;
                for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
            }
        }
    }
}

void matmul_a_bt(double* c, const double* a, const double* b, int n, int k, int m,
                 bool accumulate) {
    // B stored m x k; C[i,j] = dot(A row i, B row j)
    size_t work = static_cast<size_t>(n) * k * m;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* arow = a + static_cast<size_t>(i) * k;
            double* crow = c + static_cast<size_t>(i) * m;
            for (int j = 0; j < m; ++j) {
                const double* brow = b + static_cast<size_t>(j) * k;
                double s = 0.0;
                for (int kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
                crow[j] = accumulate ? crow[j] + s : s;
            }
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double* arow = a + static_cast<size_t>(i) * k;
            double* crow = c + static_cast<size_t>(i) * m;
            for (int j = 0; j < m; ++j) {
                const double* brow = b + static_cast<size_t>(j) * k;
                double s = 0.0;
                for (int kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
                crow[j] = accumulate ? crow[j] + s : s;
            }
        }
    }
}

namespace {

inline double row_lse(const double* row, int m) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) mx = std::max(mx, row[j]);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += fast_exp(row[j] - mx);
    return mx + std::log(s);
}

}  // namespace

void row_logsumexp(double* out, const double* m, int n, int cols) {
    size_t work = static_cast<size_t>(n) * cols;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) out[i] = row_lse(m + static_cast<size_t>(i) * cols, cols);
    } else {
        for (int i = 0; i < n; ++i) out[i] = row_lse(m + static_cast<size_t>(i) * cols, cols);
    }
}

double reduce_sum(const double* m, int n, int cols) {
    std::vector<double> partial(static_cast<size_t>(n));
    size_t work = static_cast<size_t>(n) * cols;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* row = m + static_cast<size_t>(i) * cols;
            double s = 0.0;
            for (int j = 0; j < cols; ++j) s += row[j];
            partial[i] = s;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double* row = m + static_cast<size_t>(i) * cols;
            double s = 0.0;
            for (int j = 0; j < cols; ++j) s += row[j];
            partial[i] = s;
        }
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += partial[i];
    return total;
}

namespace {

inline void cost_row(double* crow, const double* xi, const double* y, int m, int d, int p) {
    for (int j = 0; j < m; ++j) {
        const double* yj = y + static_cast<size_t>(j) * d;
        double sq = 0.0;
        for (int kk = 0; kk < d; ++kk) {
            double diff = xi[kk] - yj[kk];
            sq += diff * diff;
        }
        crow[j] = (p == 2) ? sq : std::sqrt(sq);
    }
}

}  // namespace

void cost_matrix(double* c, const double* x, const double* y, int n, int m, int d, int p) {
    size_t work = static_cast<size_t>(n) * m * d;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i)
            cost_row(c + static_cast<size_t>(i) * m, x + static_cast<size_t>(i) * d, y, m, d, p);
    } else {
        for (int i = 0; i < n; ++i)
            cost_row(c + static_cast<size_t>(i) * m, x + static_cast<size_t>(i) * d, y, m, d, p);
    }
}

void potential_update_rows(double* f_out, const double* c, const double* g, const double* ln_w,
                           double eps, int n, int m) {
    double inv_eps = 1.0 / eps;
    size_t work = static_cast<size_t>(n) * m;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* crow = c + static_cast<size_t>(i) * m;
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < m; ++j) mx = std::max(mx, ln_w[j] + (g[j] - crow[j]) * inv_eps);
            double s = 0.0;
            for (int j = 0; j < m; ++j) s += fast_exp(ln_w[j] + (g[j] - crow[j]) * inv_eps - mx);
            f_out[i] = -eps * (mx + std::log(s));
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double* crow = c + static_cast<size_t>(i) * m;
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < m; ++j) mx = std::max(mx, ln_w[j] + (g[j] - crow[j]) * inv_eps);
            double s = 0.0;
            for (int j = 0; j < m; ++j) s += fast_exp(ln_w[j] + (g[j] - crow[j]) * inv_eps - mx);
            f_out[i] = -eps * (mx + std::log(s));
        }
    }
}

namespace {

// Column LSE streams rows in index order within a block of columns, so the
// accumulation order per column is the same in both backends.
void potential_cols_block(double* g_out, const double* c, const double* f, const double* ln_w,
                          double inv_eps, double eps, int n, int m, int j0, int j1) {
    int w = j1 - j0;
    std::vector<double> mx(static_cast<size_t>(w), -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        const double* crow = c + static_cast<size_t>(i) * m;
        double base = ln_w[i] + f[i] * inv_eps;
        for (int j = j0; j < j1; ++j)
            mx[j - j0] = std::max(mx[j - j0], base - crow[j] * inv_eps);
    }
    std::vector<double> s(static_cast<size_t>(w), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* crow = c + static_cast<size_t>(i) * m;
        double base = ln_w[i] + f[i] * inv_eps;
        for (int j = j0; j < j1; ++j)
            s[j - j0] += fast_exp(base - crow[j] * inv_eps - mx[j - j0]);
    }
    for (int j = j0; j < j1; ++j) g_out[j] = -eps * (mx[j - j0] + std::log(s[j - j0]));
}

}  // namespace

void potential_update_cols(double* g_out, const double* c, const double* f, const double* ln_w,
                           double eps, int n, int m) {
    double inv_eps = 1.0 / eps;
    constexpr int kBlock = 256;
    int nblocks = (m + kBlock - 1) / kBlock;
    size_t work = static_cast<size_t>(n) * m;
    if (par(work) && nblocks > 1) {
#pragma omp parallel for schedule(static)
        for (int b = 0; b < nblocks; ++b)
            potential_cols_block(g_out, c, f, ln_w, inv_eps, eps, n, m, b * kBlock,
                                 std::min(m, (b + 1) * kBlock));
    } else {
        for (int b = 0; b < nblocks; ++b)
            potential_cols_block(g_out, c, f, ln_w, inv_eps, eps, n, m, b * kBlock,
                                 std::min(m, (b + 1) * kBlock));
    }
}

double plan_cost(double* plan, const double* c, const double* f, const double* g, const double* a,
                 const double* b, double eps, int n, int m) {
    double inv_eps = 1.0 / eps;
    std::vector<double> partial(static_cast<size_t>(n));
    size_t work = static_cast<size_t>(n) * m;
    if (par(work)) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* crow = c + static_cast<size_t>(i) * m;
            double* prow = plan ? plan + static_cast<size_t>(i) * m : nullptr;
            double s = 0.0;
            for (int j = 0; j < m; ++j) {
                double pij = a[i] * b[j] * fast_exp((f[i] + g[j] - crow[j]) * inv_eps);
                if (prow) prow[j] = pij;
                s += pij * crow[j];
            }
            partial[i] = s;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double* crow = c + static_cast<size_t>(i) * m;
            double* prow = plan ? plan + static_cast<size_t>(i) * m : nullptr;
            double s = 0.0;
            for (int j = 0; j < m; ++j) {
                double pij = a[i] * b[j] * fast_exp((f[i] + g[j] - crow[j]) * inv_eps);
                if (prow) prow[j] = pij;
                s += pij * crow[j];
            }
            partial[i] = s;
        }
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += partial[i];
    return total;
}

}  // namespace causalbound::kernels
