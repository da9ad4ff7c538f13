#include "causalbound/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "causalbound/kernels.hpp"

namespace causalbound {

namespace ks = kernels;

void PointCloud::validate() const {
    if (points.rows() < 1) throw InvalidWeights("empty point cloud");
    for (size_t i = 0; i < points.size(); ++i)
        if (!std::isfinite(points[i])) throw InvalidWeights("non-finite point coordinate");
    if (!weights.empty()) {
        if (static_cast<int>(weights.size()) != points.rows())
            throw InvalidWeights("weight count != point count");
        double s = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw InvalidWeights("negative weight");
            s += w;
        }
        if (std::abs(s - 1.0) > 1e-12) throw InvalidWeights("weights must sum to 1");
    }
}

PointCloud compress_duplicates(const PointCloud& cloud) {
    const int n = cloud.size(), d = cloud.dim();
    std::map<std::vector<double>, double> atoms;
    std::vector<double> key(d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) key[k] = cloud.points(i, k);
        atoms[key] += cloud.weight(i);
    }
    PointCloud out;
    out.points = Matrix(static_cast<int>(atoms.size()), d);
    out.weights.reserve(atoms.size());
    int r = 0;
    for (const auto& [pt, w] : atoms) {
        for (int k = 0; k < d; ++k) out.points(r, k) = pt[k];
        out.weights.push_back(w);
        ++r;
    }
    return out;
}

void feature_moments(const PointCloud& cloud, std::vector<double>& mu, std::vector<double>& sd) {
    const int n = cloud.size(), d = cloud.dim();
    mu.assign(d, 0.0);
    sd.assign(d, 0.0);
    for (int i = 0; i < n; ++i) {
        double w = cloud.weight(i);
        for (int k = 0; k < d; ++k) mu[k] += w * cloud.points(i, k);
    }
    for (int i = 0; i < n; ++i) {
        double w = cloud.weight(i);
        for (int k = 0; k < d; ++k) {
            double c = cloud.points(i, k) - mu[k];
            sd[k] += w * c * c;
        }
    }
    for (int k = 0; k < d; ++k) {
        sd[k] = std::sqrt(sd[k]);
        if (sd[k] < 1e-12) sd[k] = 1.0;
    }
}

double median_pairwise_cost(const Matrix& points, int cost_power, int max_points) {
    const int n = points.rows(), d = points.cols();
    int k = std::min(n, max_points);
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = static_cast<int>(static_cast<int64_t>(i) * n / k);
    std::vector<double> costs;
    costs.reserve(static_cast<size_t>(k) * (k - 1) / 2);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            double sq = 0.0;
            for (int c = 0; c < d; ++c) {
                double diff = points(idx[i], c) - points(idx[j], c);
                sq += diff * diff;
            }
            costs.push_back(cost_power == 2 ? sq : std::sqrt(sq));
        }
    if (costs.empty()) return 1.0;
    auto mid = costs.begin() + costs.size() / 2;
    std::nth_element(costs.begin(), mid, costs.end());
    return std::max(*mid, 1e-9);
}

namespace {

Matrix scale_matrix(const Matrix& pts, const std::vector<double>& mu,
                    const std::vector<double>& sd) {
    Matrix out(pts.rows(), pts.cols());
    for (int i = 0; i < pts.rows(); ++i)
        for (int k = 0; k < pts.cols(); ++k) out(i, k) = (pts(i, k) - mu[k]) / sd[k];
    return out;
}

std::vector<double> log_weights(const PointCloud& c) {
    std::vector<double> ln(c.size());
    for (int i = 0; i < c.size(); ++i) {
        double w = c.weight(i);
        ln[i] = w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity();
    }
    return ln;
}

std::vector<double> plain_weights(const PointCloud& c) {
    std::vector<double> w(c.size());
    for (int i = 0; i < c.size(); ++i) w[i] = c.weight(i);
    return w;
}

struct IterLog {
    std::vector<std::vector<double>> fs;  // f after iteration l, l = 1..L
    std::vector<std::vector<double>> gs;  // g before/after: gs[0] = init, gs[l] = after l
};

/// Alternating log-domain updates; returns iterations executed and whether
/// the tol criterion was met. f/g are updated in place.
std::pair<int, bool> run_sinkhorn(const Matrix& c, const std::vector<double>& lna,
                                  const std::vector<double>& lnb, double eps, int max_iters,
                                  double tol, std::vector<double>& f, std::vector<double>& g,
                                  IterLog* log) {
    const int n = c.rows(), m = c.cols();
    std::vector<double> f_new(n), g_new(m);
    if (log) log->gs.push_back(g);
    int it = 0;
    bool converged = false;
    while (it < max_iters) {
        ks::potential_update_rows(f_new.data(), c.data(), g.data(), lnb.data(), eps, n, m);
        ks::potential_update_cols(g_new.data(), c.data(), f_new.data(), lna.data(), eps, n, m);
        double delta = 0.0;
        for (int i = 0; i < n; ++i) delta = std::max(delta, std::abs(f_new[i] - f[i]));
        for (int j = 0; j < m; ++j) delta = std::max(delta, std::abs(g_new[j] - g[j]));
        f = f_new;
        g = g_new;
        ++it;
        if (log) {
            log->fs.push_back(f);
            log->gs.push_back(g);
        }
        if (tol > 0.0 && delta <= tol) {
            converged = true;
            break;
        }
    }
    return {it, converged};
}

double resolve_epsilon(const SinkhornConfig& cfg, const Matrix& scaled_ref) {
    if (cfg.epsilon > 0.0) return cfg.epsilon;
    return 0.05 * median_pairwise_cost(scaled_ref, cfg.cost_power);
}

}  // namespace

OtResult ot_eps(const PointCloud& a, const PointCloud& b, const SinkhornConfig& cfg,
                const std::vector<double>* warm_f, const std::vector<double>* warm_g) {
    a.validate();
    b.validate();
    if (a.dim() != b.dim()) throw DimensionMismatch("point clouds have different dimensions");
    if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

    std::vector<double> mu(a.dim(), 0.0), sd(a.dim(), 1.0);
    if (cfg.scaling) feature_moments(b, mu, sd);
    Matrix xs = scale_matrix(a.points, mu, sd);
    Matrix ys = scale_matrix(b.points, mu, sd);
    double eps = resolve_epsilon(cfg, ys);

    const int n = a.size(), m = b.size();
    Matrix c(n, m);
    ks::cost_matrix(c.data(), xs.data(), ys.data(), n, m, a.dim(), cfg.cost_power);

    OtResult res;
    res.f.assign(n, 0.0);
    res.g.assign(m, 0.0);
    if (warm_f && static_cast<int>(warm_f->size()) == n) res.f = *warm_f;
    if (warm_g && static_cast<int>(warm_g->size()) == m) res.g = *warm_g;

    auto lna = log_weights(a);
    auto lnb = log_weights(b);
    auto [iters, conv] =
        run_sinkhorn(c, lna, lnb, eps, cfg.max_iters, cfg.tol, res.f, res.g, nullptr);
    res.iterations = iters;
    res.converged = conv;

    auto wa = plain_weights(a);
    auto wb = plain_weights(b);
    res.value = ks::plan_cost(nullptr, c.data(), res.f.data(), res.g.data(), wa.data(), wb.data(),
                              eps, n, m);
    return res;
}

double sinkhorn_divergence(const PointCloud& a, const PointCloud& b, const SinkhornConfig& cfg) {
    a.validate();
    b.validate();
    if (a.dim() != b.dim()) throw DimensionMismatch("point clouds have different dimensions");
    // All three terms share the reference cloud's standardization and epsilon.
    std::vector<double> mu(a.dim(), 0.0), sd(a.dim(), 1.0);
    if (cfg.scaling) feature_moments(b, mu, sd);
    PointCloud as{scale_matrix(a.points, mu, sd), a.weights};
    PointCloud bs{scale_matrix(b.points, mu, sd), b.weights};
    SinkhornConfig c = cfg;
    c.scaling = false;
    c.epsilon = cfg.epsilon > 0.0 ? cfg.epsilon : resolve_epsilon(cfg, bs.points);
    double ab = ot_eps(as, bs, c).value;
    double aa = ot_eps(as, as, c).value;
    double bb = ot_eps(bs, bs, c).value;
    return ab - 0.5 * aa - 0.5 * bb;
}

// ---------------------------------------------------------------------------
// Differentiable path
// ---------------------------------------------------------------------------

namespace {

/// One entropic OT term with everything the adjoint sweep needs. The gradient
/// differentiates the computation exactly as executed (the unrolled
/// iterations); per-iteration softmax matrices are rebuilt from the stored
/// potentials instead of being kept, so memory stays O(n L + n m).
struct FusedOt {
    Matrix c;        // scaled cost matrix
    Matrix xs, ys;   // scaled clouds
    std::vector<double> wa, wb, lna, lnb;
    IterLog log;
    std::vector<double> f, g;  // converged potentials
    double eps = 0.0;
    int p = 1;
    bool self = false;
    std::vector<double> inv_sd;  // d(raw)/d(scaled) chain per feature
    int levels = 0;
    bool detached = false;

    int n() const { return c.rows(); }
    int m() const { return c.cols(); }
    int d() const { return xs.cols(); }

    double forward(int max_iters, double tol, std::vector<double> f0, std::vector<double> g0,
                   bool* converged) {
        f = std::move(f0);
        g = std::move(g0);
        if (static_cast<int>(f.size()) != n()) f.assign(n(), 0.0);
        if (static_cast<int>(g.size()) != m()) g.assign(m(), 0.0);
        auto [iters, conv] = run_sinkhorn(c, lna, lnb, eps, max_iters, tol, f, g,
                                          detached ? nullptr : &log);
        levels = iters;
        if (converged) *converged = conv;
        return ks::plan_cost(nullptr, c.data(), f.data(), g.data(), wa.data(), wb.data(), eps,
                             n(), m());
    }

    /// Accumulates vbar * dV/d(raw a points) into xbar_raw.
    void backward(double vbar, Matrix& xbar_raw) const {
        const int N = n(), M = m();
        const double inv_eps = 1.0 / eps;
        Matrix cbar(N, M, 0.0);
        Matrix scratch(N, M, 0.0);
        std::vector<double> fbar(N, 0.0), gbar(M, 0.0);

        const std::vector<double>& fL = f;
        const std::vector<double>& gL = g;

        const bool par = ks::backend() == ks::Backend::openmp;
        // seed from V = sum_ij pi_ij C_ij at the final potentials
#pragma omp parallel for schedule(static) if (par)
        for (int i = 0; i < N; ++i) {
            const double* crow = c.row(i);
            double* srow = scratch.row(i);
            double* brow = cbar.row(i);
            double racc = 0.0;
            for (int j = 0; j < M; ++j) {
                double pij = wa[i] * wb[j] * ks::fast_exp((fL[i] + gL[j] - crow[j]) * inv_eps);
                double pc = pij * crow[j];
                srow[j] = pc;
                brow[j] += vbar * (pij - pc * inv_eps);
                racc += pc;
            }
            fbar[i] = vbar * racc * inv_eps;
        }
        col_sums(scratch, gbar);
        for (int j = 0; j < M; ++j) gbar[j] *= vbar * inv_eps;

        if (!detached) {
            std::vector<double> fbar_lvl(N);
            for (int l = levels; l >= 1; --l) {
                const std::vector<double>& fl = log.fs[l - 1];
                const std::vector<double>& gl = log.gs[l];
                const std::vector<double>& glm1 = log.gs[l - 1];
                // pass A: g^l = -eps LSE_i(lna + (f^l - C)/eps)
#pragma omp parallel for schedule(static) if (par)
                for (int i = 0; i < N; ++i) {
                    const double* crow = c.row(i);
                    double* brow = cbar.row(i);
                    double acc = 0.0;
                    for (int j = 0; j < M; ++j) {
                        double sig = wa[i] * ks::fast_exp((fl[i] + gl[j] - crow[j]) * inv_eps);
                        brow[j] += gbar[j] * sig;
                        acc += gbar[j] * sig;
                    }
                    fbar_lvl[i] = (l == levels ? fbar[i] : 0.0) - acc;
                }
                // pass B: f^l = -eps LSE_j(lnb + (g^{l-1} - C)/eps)
#pragma omp parallel for schedule(static) if (par)
                for (int i = 0; i < N; ++i) {
                    const double* crow = c.row(i);
                    double* brow = cbar.row(i);
                    double* srow = scratch.row(i);
                    for (int j = 0; j < M; ++j) {
                        double tau = wb[j] * ks::fast_exp((glm1[j] + fl[i] - crow[j]) * inv_eps);
                        double fb = fbar_lvl[i] * tau;
                        brow[j] += fb;
                        srow[j] = fb;
                    }
                }
                col_sums(scratch, gbar);
                for (int j = 0; j < M; ++j) gbar[j] = -gbar[j];
            }
        }

        chain_to_points(cbar, xbar_raw);
    }

  private:
    static void col_sums(const Matrix& m, std::vector<double>& out) {
        const int N = m.rows(), M = m.cols();
        out.assign(M, 0.0);
        // deterministic: row-major streaming, serial combine
        for (int i = 0; i < N; ++i) {
            const double* row = m.row(i);
            for (int j = 0; j < M; ++j) out[j] += row[j];
        }
    }

    void chain_to_points(const Matrix& cbar, Matrix& xbar_raw) const {
        const int N = n(), M = m(), D = d();
        const bool par = ks::backend() == ks::Backend::openmp;
#pragma omp parallel for schedule(static) if (par)
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < M; ++j) {
                double cb = cbar(i, j);
                if (cb == 0.0) continue;
                for (int k = 0; k < D; ++k) {
                    double diff = xs(i, k) - ys(j, k);
                    double w = (p == 2) ? 2.0 * diff : diff / std::max(c(i, j), 1e-15);
                    xbar_raw(i, k) += cb * w * inv_sd[k];
                }
            }
        }
        if (self) {
            // column role: x_j appears as the second argument of C_ij
#pragma omp parallel for schedule(static) if (par)
            for (int j = 0; j < M; ++j) {
                for (int i = 0; i < N; ++i) {
                    double cb = cbar(i, j);
                    if (cb == 0.0) continue;
                    for (int k = 0; k < D; ++k) {
                        double diff = xs(i, k) - ys(j, k);
                        double w = (p == 2) ? 2.0 * diff : diff / std::max(c(i, j), 1e-15);
                        xbar_raw(j, k) -= cb * w * inv_sd[k];
                    }
                }
            }
        }
    }
};

std::shared_ptr<FusedOt> make_fused(const Matrix& a_pts, const std::vector<double>& a_w,
                                    const PointCloud& b, const std::vector<double>& mu,
                                    const std::vector<double>& sd, double eps,
                                    const SinkhornConfig& cfg, bool self) {
    auto ctx = std::make_shared<FusedOt>();
    ctx->xs = scale_matrix(a_pts, mu, sd);
    PointCloud a{a_pts, a_w};
    if (self) {
        ctx->ys = ctx->xs;
        ctx->wb = plain_weights(a);
    } else {
        ctx->ys = scale_matrix(b.points, mu, sd);
        ctx->wb = plain_weights(b);
    }
    ctx->wa = plain_weights(a);
    ctx->lna.resize(ctx->wa.size());
    ctx->lnb.resize(ctx->wb.size());
    for (size_t i = 0; i < ctx->wa.size(); ++i)
        ctx->lna[i] = ctx->wa[i] > 0 ? std::log(ctx->wa[i])
                                     : -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < ctx->wb.size(); ++j)
        ctx->lnb[j] = ctx->wb[j] > 0 ? std::log(ctx->wb[j])
                                     : -std::numeric_limits<double>::infinity();
    ctx->eps = eps;
    ctx->p = cfg.cost_power;
    ctx->self = self;
    ctx->detached = cfg.grad == SinkhornGrad::detached;
    ctx->inv_sd.resize(sd.size());
    for (size_t k = 0; k < sd.size(); ++k) ctx->inv_sd[k] = 1.0 / sd[k];
    ctx->c = Matrix(ctx->xs.rows(), ctx->ys.rows());
    ks::cost_matrix(ctx->c.data(), ctx->xs.data(), ctx->ys.data(), ctx->xs.rows(),
                    ctx->ys.rows(), ctx->xs.cols(), cfg.cost_power);
    return ctx;
}

ad::Var fused_ot_node(ad::Tape& tape, ad::Var a_points, std::shared_ptr<FusedOt> ctx,
                      double value) {
    Matrix v(1, 1);
    v(0, 0) = value;
    int aid = a_points.id;
    return tape.make_node(std::move(v), {aid}, [aid, ctx](ad::Tape& t, int self_id) {
        double vbar = t.grad(self_id)(0, 0);
        if (vbar == 0.0) return;
        ctx->backward(vbar, t.grad(aid));
    });
}

// Plain tape-op route: identical math, memory-heavy; used to cross-check the
// fused adjoint on small clouds.
ad::Var unrolled_tape_ot(ad::Tape& tape, ad::Var xs, const Matrix& ys_or_empty,
                         const std::vector<double>& wa, const std::vector<double>& wb,
                         double eps, int p, int max_iters, bool self) {
    using namespace ad;
    const int n = xs.rows(), m = self ? xs.rows() : ys_or_empty.rows();
    const int d = xs.cols();

    Matrix ones_1m(1, m, 1.0);
    Var ones_row = tape.leaf(ones_1m);
    Matrix ones_n1(n, 1, 1.0);
    Var ones_col = tape.leaf(ones_n1);

    Var sq{};
    for (int k = 0; k < d; ++k) {
        Var xk = slice_cols(xs, k, k + 1);
        Var xrep = matmul(xk, ones_row);
        Var diff{};
        if (self) {
            Var xrow = transpose(xk);
            diff = sub(xrep, xrow);  // broadcast row
        } else {
            Matrix yrow(1, m);
            for (int j = 0; j < m; ++j) yrow(0, j) = ys_or_empty(j, k);
            diff = sub(xrep, tape.leaf(yrow));
        }
        Var d2 = mul(diff, diff);
        sq = (k == 0) ? d2 : add(sq, d2);
    }
    Var c = (p == 2) ? sq : sqrt_op(clamp(sq, 1e-30, std::numeric_limits<double>::max()));

    Matrix lna_col(n, 1), lnb_row(1, m);
    for (int i = 0; i < n; ++i) lna_col(i, 0) = std::log(wa[i]);
    for (int j = 0; j < m; ++j) lnb_row(0, j) = std::log(wb[j]);
    Var lna_v = tape.leaf(lna_col);
    Var lnb_v = tape.leaf(lnb_row);

    Var f = tape.leaf(Matrix(n, 1, 0.0));
    Var g = tape.leaf(Matrix(1, m, 0.0));
    Var neg_c_eps = scalar_mul(c, -1.0 / eps);
    for (int it = 0; it < max_iters; ++it) {
        // f update: rows of lnb + (g - C)/eps
        Var rowv = add(lnb_v, scalar_mul(g, 1.0 / eps));  // 1 x m
        Var mrow = add(neg_c_eps, rowv);                  // broadcast row
        f = scalar_mul(logsumexp_rows(mrow), -eps);
        // g update: cols of lna + (f - C)/eps
        Var colv = add(lna_v, scalar_mul(f, 1.0 / eps));  // n x 1
        Var mcol = add(neg_c_eps, colv);                  // broadcast col
        g = scalar_mul(logsumexp_cols(mcol), -eps);
    }
    // V = sum_ij wa_i wb_j exp((f_i + g_j - C_ij)/eps) C_ij
    Var fg = add(matmul(f, ones_row), matmul(ones_col, g));
    Var expo = exp_op(scalar_mul(sub(fg, c), 1.0 / eps));
    Matrix ab(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) ab(i, j) = wa[i] * wb[j];
    Var plan = mul(tape.leaf(ab), expo);
    return sum(mul(plan, c));
}

}  // namespace

ad::Var sinkhorn_divergence_ad(ad::Tape& tape, ad::Var a_points,
                               const std::vector<double>& a_weights, const PointCloud& b,
                               const SinkhornConfig& cfg, SinkhornWarm* warm) {
    b.validate();
    if (a_points.cols() != b.dim())
        throw DimensionMismatch("generated cloud dimension != reference dimension");

    SinkhornWarm local;
    SinkhornWarm& w = warm ? *warm : local;
    if (!w.has_scale) {
        if (cfg.scaling) {
            feature_moments(b, w.mu, w.sd);
        } else {
            w.mu.assign(b.dim(), 0.0);
            w.sd.assign(b.dim(), 1.0);
        }
        w.has_scale = true;
    }
    if (w.epsilon <= 0.0)
        w.epsilon = cfg.epsilon > 0.0
                        ? cfg.epsilon
                        : resolve_epsilon(cfg, scale_matrix(b.points, w.mu, w.sd));
    const double eps = w.epsilon;

    if (!w.has_bb) {
        PointCloud bs{scale_matrix(b.points, w.mu, w.sd), b.weights};
        SinkhornConfig cb = cfg;
        cb.scaling = false;
        cb.epsilon = eps;
        w.ot_bb = ot_eps(bs, bs, cb).value;
        w.has_bb = true;
    }

    if (cfg.grad == SinkhornGrad::unrolled_tape) {
        std::vector<double> wa(a_points.rows()), wb(b.size());
        for (int i = 0; i < a_points.rows(); ++i)
            wa[i] = a_weights.empty() ? 1.0 / a_points.rows() : a_weights[i];
        for (int j = 0; j < b.size(); ++j) wb[j] = b.weight(j);
        // scale the generated points on-tape so gradients flow through
        Matrix murow(1, b.dim()), sdrep(a_points.rows(), b.dim());
        for (int k = 0; k < b.dim(); ++k) murow(0, k) = w.mu[k];
        for (int i = 0; i < a_points.rows(); ++i)
            for (int k = 0; k < b.dim(); ++k) sdrep(i, k) = 1.0 / w.sd[k];
        ad::Var xs = ad::mul(ad::sub(a_points, tape.leaf(murow)), tape.leaf(sdrep));
        Matrix ys = scale_matrix(b.points, w.mu, w.sd);
        ad::Var ab = unrolled_tape_ot(tape, xs, ys, wa, wb, eps, cfg.cost_power,
                                      cfg.max_iters, false);
        ad::Var aa = unrolled_tape_ot(tape, xs, Matrix(), wa, wa, eps, cfg.cost_power,
                                      cfg.max_iters, true);
        return ad::add_scalar(ad::sub(ab, ad::scalar_mul(aa, 0.5)), -0.5 * w.ot_bb);
    }

    auto ab_ctx = make_fused(a_points.value(), a_weights, b, w.mu, w.sd, eps, cfg, false);
    bool conv_ab = false;
    double v_ab = ab_ctx->forward(cfg.max_iters, cfg.tol, w.f_ab, w.g_ab, &conv_ab);
    w.f_ab = ab_ctx->f;
    w.g_ab = ab_ctx->g;

    auto aa_ctx = make_fused(a_points.value(), a_weights, b, w.mu, w.sd, eps, cfg, true);
    bool conv_aa = false;
    double v_aa = aa_ctx->forward(cfg.max_iters, cfg.tol, w.f_aa, w.g_aa, &conv_aa);
    w.f_aa = aa_ctx->f;
    w.g_aa = aa_ctx->g;

    w.last_iterations = ab_ctx->levels + aa_ctx->levels;
    w.last_converged = conv_ab && conv_aa;

    ad::Var ab = fused_ot_node(tape, a_points, ab_ctx, v_ab);
    ad::Var aa = fused_ot_node(tape, a_points, aa_ctx, v_aa);
    return ad::add_scalar(ad::sub(ab, ad::scalar_mul(aa, 0.5)), -0.5 * w.ot_bb);
}

double w1_exact_1d(const std::vector<double>& a_vals, const std::vector<double>& a_weights,
                   const std::vector<double>& b_vals, const std::vector<double>& b_weights) {
    struct Event {
        double x;
        double da, db;
    };
    auto norm = [](const std::vector<double>& w, size_t n) {
        std::vector<double> out(n, 1.0 / n);
        if (!w.empty()) {
            double s = 0.0;
            for (double v : w) s += v;
            for (size_t i = 0; i < n; ++i) out[i] = w[i] / s;
        }
        return out;
    };
    auto wa = norm(a_weights, a_vals.size());
    auto wb = norm(b_weights, b_vals.size());
    std::vector<Event> ev;
    ev.reserve(a_vals.size() + b_vals.size());
    for (size_t i = 0; i < a_vals.size(); ++i) ev.push_back({a_vals[i], wa[i], 0.0});
    for (size_t j = 0; j < b_vals.size(); ++j) ev.push_back({b_vals[j], 0.0, wb[j]});
    std::sort(ev.begin(), ev.end(), [](const Event& l, const Event& r) { return l.x < r.x; });

    double total = 0.0, fa = 0.0, fb = 0.0, prev = ev.empty() ? 0.0 : ev[0].x;
    for (const Event& e : ev) {
        total += std::abs(fa - fb) * (e.x - prev);
        fa += e.da;
        fb += e.db;
        prev = e.x;
    }
    return total;
}

}  // namespace causalbound
