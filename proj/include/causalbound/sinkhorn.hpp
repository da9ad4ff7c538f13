#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "causalbound/matrix.hpp"
#include "causalbound/tape.hpp"

namespace causalbound {

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidWeights : std::runtime_error {
    explicit InvalidWeights(const std::string& what) : std::runtime_error(what) {}
};

/// Weighted point cloud; empty weights mean uniform 1/n.
struct PointCloud {
    Matrix points;                 // n x d
    std::vector<double> weights;   // simplex; empty = uniform

    int size() const { return points.rows(); }
    int dim() const { return points.cols(); }
    double weight(int i) const {
        return weights.empty() ? 1.0 / points.rows() : weights[i];
    }
    void validate() const;
};

/// Merges exactly-identical rows, summing their weights. Lossless for the
/// empirical measure; a large win for discrete data.
PointCloud compress_duplicates(const PointCloud& cloud);

enum class SinkhornGrad {
    unrolled_fused,  // adjoint through the unrolled iterations, O(n L) memory
    unrolled_tape,   // same math built from plain tape ops (small clouds only)
    detached         // envelope gradient: potentials treated as constants
};

struct SinkhornConfig {
    double epsilon = 0.0;   // entropic blur in cost units; <= 0 resolves to
                            // 0.05 x median pairwise cost of the reference cloud
    int cost_power = 1;     // p in {1, 2}
    int max_iters = 100;
    double tol = 1e-9;      // sup-norm of potential updates; 0 = always max_iters
    bool scaling = true;    // standardize features by the reference cloud moments
    SinkhornGrad grad = SinkhornGrad::unrolled_fused;
};

struct OtResult {
    double value = 0.0;        // sum_ij plan_ij * C_ij at the fixed point
    std::vector<double> f, g;  // potentials, reusable as warm starts
    int iterations = 0;
    bool converged = false;
};

/// Entropic OT between weighted clouds via log-domain Sinkhorn iterations.
/// Non-convergence is reported through the flag, never an exception.
OtResult ot_eps(const PointCloud& a, const PointCloud& b, const SinkhornConfig& cfg,
                const std::vector<double>* warm_f = nullptr,
                const std::vector<double>* warm_g = nullptr);

/// Debiased divergence S(a,b) = OT(a,b) - OT(a,a)/2 - OT(b,b)/2, value only.
double sinkhorn_divergence(const PointCloud& a, const PointCloud& b, const SinkhornConfig& cfg);

/// Carries potentials, the resolved epsilon and the constant OT(b,b) term
/// across repeated calls against the same reference cloud.
struct SinkhornWarm {
    std::vector<double> f_ab, g_ab, f_aa, g_aa;
    double ot_bb = 0.0;
    bool has_bb = false;
    double epsilon = 0.0;  // resolved once; 0 = not resolved yet
    std::vector<double> mu, sd;  // feature standardization of the reference cloud
    bool has_scale = false;
    int last_iterations = 0;
    bool last_converged = true;
};

/// Differentiable divergence w.r.t. the generated points (a side); the
/// reference cloud b is constant. a_weights empty = uniform.
ad::Var sinkhorn_divergence_ad(ad::Tape& tape, ad::Var a_points,
                               const std::vector<double>& a_weights, const PointCloud& b,
                               const SinkhornConfig& cfg, SinkhornWarm* warm = nullptr);

/// Exact 1-D 1-Wasserstein via the CDF-difference integral.
double w1_exact_1d(const std::vector<double>& a_vals, const std::vector<double>& a_weights,
                   const std::vector<double>& b_vals, const std::vector<double>& b_weights);

/// Median pairwise cost |x_i - x_j|^p over a deterministic subsample.
double median_pairwise_cost(const Matrix& points, int cost_power, int max_points = 1024);

/// Per-feature mean/std of a cloud; std floors at 1 for constant features.
void feature_moments(const PointCloud& cloud, std::vector<double>& mu, std::vector<double>& sd);

}  // namespace causalbound
