#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "causalbound/gcm.hpp"
#include "causalbound/tape.hpp"

namespace causalbound {

enum class EffectKind { atd, uatd, ate, outcome_mean };

const char* to_string(EffectKind k);
EffectKind effect_kind_from(const std::string& s);

/// What to bound. `d` is the target treatment; `t0` the baseline (unused for
/// atd and outcome_mean). `fd_step` = 0 resolves to 0.01 x std of the
/// observed treatment at the call site that owns the data.
struct EffectQuery {
    EffectKind kind = EffectKind::atd;
    double t0 = 0.0;
    double d = 1.0;
    double fd_step = 0.0;
    int n_mc = 0;  // 0 = caller default
    double tail_sigma_scale = 1.0;
    bool tilde_tails = true;  // false: draw exactly Unif[t0, d] (identity checks)

    void validate() const;
    std::string describe() const;
};

/// Mean finite-difference slope of the response at per-sample treatments,
/// everything on shared latents: (1/n) sum_i [Y(t_i + h) - Y(t_i)] / h.
double estimate_atd(const GenerativeSCM& m, const LatentBatch& latents,
                    const std::vector<double>& treatments, double fd_step,
                    EvalMode mode = EvalMode::evaluation);

/// Same estimator over an arbitrary response evaluator (t column -> Y column);
/// the test oracles and true-model checks reuse it.
double estimate_atd_fn(const std::function<Matrix(const Matrix&)>& y_of_t,
                       const std::vector<double>& treatments, double fd_step);

/// Gaussian with uniform body: draws N(mu, sigma*scale) with mu=(t0+d)/2,
/// sigma=(d-t0)/2; draws landing inside [t0,d] are replaced by fresh
/// Unif[t0,d] draws. tilde_tails=false gives plain Unif[t0,d].
std::vector<double> sample_treatment_tilde(double t0, double d, int n, double tail_sigma_scale,
                                           uint64_t seed, bool tilde_tails = true);

double estimate_uatd(const GenerativeSCM& m, const LatentBatch& latents, double t0, double d,
                     double fd_step, double tail_sigma_scale, uint64_t seed,
                     EvalMode mode = EvalMode::evaluation, bool tilde_tails = true);

double estimate_ate(const GenerativeSCM& m, const LatentBatch& latents, double t0, double d,
                    EvalMode mode = EvalMode::evaluation);

double estimate_outcome_mean(const GenerativeSCM& m, const LatentBatch& latents, double t,
                             EvalMode mode = EvalMode::evaluation);

// Differentiable (training-mode) versions; gradients flow through both
// intervened passes, treatments are constants.
ad::Var estimate_atd_tape(ad::Tape& tape, GenerativeSCM& m, const LatentBatch& latents,
                          const std::vector<double>& treatments, double fd_step);
ad::Var estimate_ate_tape(ad::Tape& tape, GenerativeSCM& m, const LatentBatch& latents,
                          double t0, double d);
ad::Var estimate_outcome_mean_tape(ad::Tape& tape, GenerativeSCM& m, const LatentBatch& latents,
                                   double t);

/// Plain (recorded) value of a query on a frozen model.
double effect_value(const GenerativeSCM& m, const LatentBatch& latents, const EffectQuery& q,
                    const std::vector<double>& treatments_for_atd, uint64_t draw_seed,
                    EvalMode mode = EvalMode::evaluation);

/// Differentiable objective for the solver; treatments_for_atd only read when
/// kind == atd.
ad::Var effect_objective_tape(ad::Tape& tape, GenerativeSCM& m, const LatentBatch& latents,
                              const EffectQuery& q, const std::vector<double>& treatments_for_atd,
                              uint64_t draw_seed);

}  // namespace causalbound
