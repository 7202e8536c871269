#pragma once

#include <vector>

#include "eqflow/energy.hpp"
#include "eqflow/unroll.hpp"

namespace eqflow {

// ML/KL loss bookkeeping for one evaluation.
struct LossValue {
  double total = 0.0;
  double ml = 0.0;  // negative log-likelihood part
  double kl = 0.0;  // energy-based part
};

struct LossDiagnostics {
  int clamped_energies = 0;
  bool all_clamped = false;
};

// Everything a loss evaluation needs besides the field itself. `lambda` mixes
// (1-lambda)*ML + lambda*KL; the KL side needs `energy`.
struct LossSpec {
  double lambda = 0.0;
  const std::vector<Configuration>* batch = nullptr;  // data for the ML part
  const EnergyModel* energy = nullptr;
  int kl_samples = 64;
  double energy_clamp = 1000.0;
  int hutchinson_probes = 1;  // MLP training estimator
  IntegratorConfig integrator;
  Prior prior;
  int n_threads = 1;
};

// --- evaluation-only losses --------------------------------------------------

// Mean of -pushforward_logp over the batch, inverse integration with the exact
// divergence.
double nll_loss(const KernelField& f, const std::vector<Configuration>& batch,
                const IntegratorConfig& cfg, const Prior& prior, int n_threads = 1);

// MLP evaluation uses the brute-force (dual-sweep) trace, so reported
// likelihoods are exact for the baseline as well.
double nll_loss(const MlpField& f, const std::vector<Configuration>& batch,
                const IntegratorConfig& cfg, const Prior& prior, int n_threads = 1);

// Monte-Carlo estimate of E_prior[u(flow(z))] - E[log-det]; energies above the
// clamp are truncated and counted.
double kl_loss(const KernelField& f, const EnergyModel& energy, int n_samples,
               const IntegratorConfig& cfg, const Prior& prior, const Rng& rng_base,
               double energy_clamp, LossDiagnostics* diag = nullptr, int n_threads = 1);
double kl_loss(const MlpField& f, const EnergyModel& energy, int n_samples,
               const IntegratorConfig& cfg, const Prior& prior, const Rng& rng_base,
               double energy_clamp, LossDiagnostics* diag = nullptr, int n_threads = 1);

template <class FieldT>
LossValue mixed_loss(const FieldT& f, const LossSpec& spec, const Rng& rng_base,
                     LossDiagnostics* diag = nullptr) {
  if (spec.lambda < 0.0 || spec.lambda > 1.0)
    throw std::invalid_argument("mixed_loss: lambda must lie in [0,1]");
  LossValue out;
  if (spec.lambda < 1.0)
    out.ml = nll_loss(f, *spec.batch, spec.integrator, spec.prior, spec.n_threads);
  if (spec.lambda > 0.0)
    out.kl = kl_loss(f, *spec.energy, spec.kl_samples, spec.integrator, spec.prior, rng_base,
                     spec.energy_clamp, diag, spec.n_threads);
  out.total = (1.0 - spec.lambda) * out.ml + spec.lambda * out.kl;
  return out;
}

// --- loss with gradients -------------------------------------------------------

// Reverse-mode gradients of the mixed loss through the unrolled solver.
// Gradients are accumulated per sample and reduced in sample order, so results
// do not depend on the thread count. Throws std::runtime_error naming the
// offending block if any gradient entry is non-finite.
LossValue loss_gradients(const KernelField& f, const LossSpec& spec, const Rng& rng_base,
                         KernelFieldGrads& grads, LossDiagnostics* diag = nullptr);
LossValue loss_gradients(const MlpField& f, const LossSpec& spec, const Rng& rng_base,
                         MlpGrads& grads, LossDiagnostics* diag = nullptr);

}  // namespace eqflow
