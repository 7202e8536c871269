#include "eqflow/losses.hpp"

#include <cmath>

#include "eqflow/parallel.hpp"

namespace eqflow {

namespace {

// per-sample probe matrix for the MLP estimator, seeded off the sample index
Mat draw_probes(int n, int n_probes, const Rng& base, std::uint64_t stream) {
  Rng rng = base.spawn(stream);
  Mat probes(n, n_probes);
  for (int p = 0; p < n_probes; ++p) probes.col(p) = draw_probe(n, ProbeLaw::rademacher, rng);
  return probes;
}

void check_finite(const Vec& flat_block, const char* name) {
  if (!flat_block.allFinite())
    throw std::runtime_error(std::string("non-finite gradient in parameter block ") + name);
}

}  // namespace

double nll_loss(const KernelField& f, const std::vector<Configuration>& batch,
                const IntegratorConfig& cfg, const Prior& prior, int n_threads) {
  std::vector<double> vals(batch.size());
  parallel_for(static_cast<int>(batch.size()), n_threads, [&](int i) {
    vals[i] = -pushforward_logp(batch[i], f, cfg, prior);
  });
  double acc = 0.0;
  for (double v : vals) acc += v;
  return acc / batch.size();
}

double nll_loss(const MlpField& f, const std::vector<Configuration>& batch,
                const IntegratorConfig& cfg, const Prior& prior, int n_threads) {
  std::vector<double> vals(batch.size());
  parallel_for(static_cast<int>(batch.size()), n_threads, [&](int i) {
    vals[i] = -pushforward_logp(batch[i], f, cfg, prior, DivergenceMode::brute_force());
  });
  double acc = 0.0;
  for (double v : vals) acc += v;
  return acc / batch.size();
}

namespace {

template <class FieldT>
double kl_loss_impl(const FieldT& f, const EnergyModel& energy, int n_samples,
                    const IntegratorConfig& cfg, const Prior& prior, const Rng& rng_base,
                    double clamp, int hutch_probes, LossDiagnostics* diag, int n_threads) {
  std::vector<double> vals(n_samples);
  std::vector<int> clamped(n_samples, 0);
  parallel_for(n_samples, n_threads, [&](int i) {
    Rng rng = rng_base.spawn(i);
    const Configuration z = prior.sample(f.shape, rng);
    FlowResult fwd;
    if constexpr (std::is_same_v<FieldT, KernelField>) {
      fwd = integrate_forward(z, f, cfg);
    } else {
      Rng probe_rng = rng_base.spawn(0x10000u + i);
      fwd = integrate_forward(z, f, cfg, DivergenceMode::hutchinson(hutch_probes), &probe_rng);
    }
    double u = eqflow::energy(fwd.x, energy);
    if (u > clamp) {
      u = clamp;
      clamped[i] = 1;
    }
    vals[i] = u + fwd.delta_logp;
  });
  double acc = 0.0;
  int n_clamped = 0;
  for (int i = 0; i < n_samples; ++i) {
    acc += vals[i];
    n_clamped += clamped[i];
  }
  if (diag) {
    diag->clamped_energies += n_clamped;
    diag->all_clamped = n_clamped == n_samples;
  }
  return acc / n_samples;
}

}  // namespace

double kl_loss(const KernelField& f, const EnergyModel& energy, int n_samples,
               const IntegratorConfig& cfg, const Prior& prior, const Rng& rng_base,
               double clamp, LossDiagnostics* diag, int n_threads) {
  return kl_loss_impl(f, energy, n_samples, cfg, prior, rng_base, clamp, 1, diag, n_threads);
}

double kl_loss(const MlpField& f, const EnergyModel& energy, int n_samples,
               const IntegratorConfig& cfg, const Prior& prior, const Rng& rng_base,
               double clamp, LossDiagnostics* diag, int n_threads) {
  return kl_loss_impl(f, energy, n_samples, cfg, prior, rng_base, clamp, 1, diag, n_threads);
}

namespace {

// Shared driver: ML part backpropagates -prior_logp(z) + ell through the
// inverse unroll; KL part backpropagates u(x) + ell through the forward unroll,
// chaining through the analytic energy gradient.
template <class FieldT, class GradsT, class MakeFwd, class MakeInv>
LossValue loss_gradients_impl(const FieldT& f, const LossSpec& spec, const Rng& rng_base,
                              GradsT& grads, LossDiagnostics* diag, MakeFwd make_fwd,
                              MakeInv make_inv) {
  LossValue out;
  const double lam = spec.lambda;
  if (lam < 0.0 || lam > 1.0) throw std::invalid_argument("loss_gradients: lambda outside [0,1]");

  if (lam < 1.0) {
    const auto& batch = *spec.batch;
    const int b = static_cast<int>(batch.size());
    if (b == 0) throw std::invalid_argument("loss_gradients: empty batch");
    std::vector<GradsT> slot(b, GradsT::zeros_like(f.params));
    std::vector<double> vals(b);
    const double wt = (1.0 - lam) / b;
    parallel_for(b, spec.n_threads, [&](int i) {
      auto dyn = make_inv(i);
      UnrollTape tape;
      unroll_forward(dyn, batch[i].coords, spec.integrator, tape);
      const Configuration z(f.shape, tape.x_final);
      vals[i] = -spec.prior.logp(z) + tape.ell_final;
      // d(-prior_logp)/dz = z for the Gaussian prior
      unroll_backward(dyn, tape, Vec(wt * tape.x_final), wt, slot[i]);
    });
    for (int i = 0; i < b; ++i) {
      grads += slot[i];
      out.ml += vals[i];
    }
    out.ml /= b;
  }

  if (lam > 0.0) {
    if (!spec.energy) throw std::invalid_argument("loss_gradients: KL part needs an energy model");
    const int m = spec.kl_samples;
    std::vector<GradsT> slot(m, GradsT::zeros_like(f.params));
    std::vector<double> vals(m);
    std::vector<int> clamped(m, 0);
    const double wt = lam / m;
    parallel_for(m, spec.n_threads, [&](int i) {
      Rng rng = rng_base.spawn(i);
      const Configuration z = spec.prior.sample(f.shape, rng);
      auto dyn = make_fwd(i);
      UnrollTape tape;
      unroll_forward(dyn, z.coords, spec.integrator, tape);
      const Configuration x(f.shape, tape.x_final);
      const double u = energy(x, *spec.energy);
      Vec xbar;
      if (u > spec.energy_clamp) {
        vals[i] = spec.energy_clamp + tape.ell_final;
        clamped[i] = 1;
        xbar = Vec::Zero(x.coords.size());  // clamp freezes the energy term
      } else {
        vals[i] = u + tape.ell_final;
        xbar = wt * energy_gradient(x, *spec.energy);
      }
      unroll_backward(dyn, tape, xbar, wt, slot[i]);
    });
    int n_clamped = 0;
    for (int i = 0; i < m; ++i) {
      grads += slot[i];
      out.kl += vals[i];
      n_clamped += clamped[i];
    }
    out.kl /= m;
    if (diag) {
      diag->clamped_energies += n_clamped;
      diag->all_clamped = n_clamped == m;
    }
  }

  out.total = (1.0 - lam) * out.ml + lam * out.kl;
  return out;
}

}  // namespace

LossValue loss_gradients(const KernelField& f, const LossSpec& spec, const Rng& rng_base,
                         KernelFieldGrads& grads, LossDiagnostics* diag) {
  auto make_fwd = [&](int) { return KernelForwardDynamics{f}; };
  auto make_inv = [&](int) {
    return KernelInverseDynamics{f, spec.integrator.t_start, spec.integrator.t_end};
  };
  LossValue v = loss_gradients_impl(f, spec, rng_base, grads, diag, make_fwd, make_inv);
  check_finite(grads.weights.reshaped(), "weights");
  check_finite(grads.dist_means.matrix(), "dist_means");
  check_finite(grads.dist_log_bw.matrix(), "dist_log_bw");
  check_finite(grads.time_means.matrix(), "time_means");
  check_finite(grads.time_log_bw.matrix(), "time_log_bw");
  return v;
}

LossValue loss_gradients(const MlpField& f, const LossSpec& spec, const Rng& rng_base,
                         MlpGrads& grads, LossDiagnostics* diag) {
  const int n = f.shape.n();
  // probe matrices are drawn per sample up front so the loss is a deterministic
  // function of (params, rng_base), which the finite-difference checks rely on
  std::vector<Mat> inv_probes, fwd_probes;
  if (spec.lambda < 1.0)
    for (std::size_t i = 0; i < spec.batch->size(); ++i)
      inv_probes.push_back(draw_probes(n, spec.hutchinson_probes, rng_base, 0x20000u + i));
  if (spec.lambda > 0.0)
    for (int i = 0; i < spec.kl_samples; ++i)
      fwd_probes.push_back(draw_probes(n, spec.hutchinson_probes, rng_base, 0x10000u + i));

  auto make_fwd = [&](int i) { return MlpForwardDynamics{f, fwd_probes[i]}; };
  auto make_inv = [&](int i) {
    return MlpInverseDynamics{f, inv_probes[i], spec.integrator.t_start, spec.integrator.t_end};
  };
  LossValue v = loss_gradients_impl(f, spec, rng_base, grads, diag, make_fwd, make_inv);
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    check_finite(grads.weights[l].reshaped(), "mlp weights");
    check_finite(grads.biases[l], "mlp biases");
  }
  return v;
}

}  // namespace eqflow
