#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "eqflow/divergence.hpp"
#include "eqflow/fields.hpp"
#include "eqflow/prior.hpp"

namespace eqflow {

enum class Scheme { rk4, euler };

struct IntegratorConfig {
  int n_steps = 20;
  Scheme scheme = Scheme::rk4;
  double t_start = 0.0;
  double t_end = 1.0;
};

// Transformed configuration plus the accumulated log-density change along the
// integration direction: -int div dt forward, +int div dt on the inverse pass.
struct FlowResult {
  Configuration x;
  double delta_logp = 0.0;
};

// How the divergence entering the log-density accumulator is obtained.
struct DivergenceMode {
  enum class Kind { exact, brute_force, hutchinson };
  Kind kind = Kind::exact;
  int n_probes = 1;
  ProbeLaw probe = ProbeLaw::rademacher;
  DerivKind deriv = DerivKind::dual;

  static DivergenceMode exact() { return {}; }
  static DivergenceMode brute_force(DerivKind d = DerivKind::dual) {
    return {Kind::brute_force, 1, ProbeLaw::rademacher, d};
  }
  static DivergenceMode hutchinson(int probes, ProbeLaw law = ProbeLaw::rademacher) {
    return {Kind::hutchinson, probes, law, DerivKind::dual};
  }
};

namespace detail {

// velocity and divergence at one stage point, per the requested mode
template <class Field>
std::pair<Vec, double> velocity_and_div(const Field& f, const Vec& x, double t,
                                        const DivergenceMode& mode, const Mat* probes) {
  switch (mode.kind) {
    case DivergenceMode::Kind::exact: {
      const FieldEval e = field_eval(f, x, t);
      if (!e.div)
        throw std::invalid_argument("exact divergence requested for a field without one");
      return {e.v, *e.div};
    }
    case DivergenceMode::Kind::brute_force: {
      if (mode.deriv == DerivKind::dual) {
        double trace = 0.0;
        Vec v;
        Vec dir = Vec::Zero(x.size());
        for (int k = 0; k < x.size(); ++k) {
          dir[k] = 1.0;
          JvpResult r = field_jvp_dual(f, x, t, dir);
          if (k == 0) v = std::move(r.v);
          trace += r.dv[k];
          dir[k] = 0.0;
        }
        return {std::move(v), trace};
      }
      return {field_velocity_only(f, x, t), divergence_brute_force(f, x, t, mode.deriv)};
    }
    case DivergenceMode::Kind::hutchinson: {
      double est = 0.0;
      Vec v;
      for (int p = 0; p < probes->cols(); ++p) {
        JvpResult r = field_jvp_dual(f, x, t, probes->col(p));
        if (p == 0) v = std::move(r.v);
        est += probes->col(p).dot(r.dv);
      }
      return {std::move(v), est / probes->cols()};
    }
  }
  throw std::logic_error("unreachable");
}

template <class Field>
FlowResult integrate_core(const Configuration& start, const Field& f,
                          const IntegratorConfig& cfg, const DivergenceMode& mode,
                          bool inverse, Rng* rng) {
  if (cfg.n_steps < 1) throw std::invalid_argument("IntegratorConfig: n_steps must be >= 1");
  Mat probes;
  if (mode.kind == DivergenceMode::Kind::hutchinson) {
    if (!rng) throw std::invalid_argument("hutchinson divergence needs an RNG");
    probes.resize(start.coords.size(), mode.n_probes);
    // probe vectors are fixed for the whole trajectory
    for (int p = 0; p < mode.n_probes; ++p) probes.col(p) = draw_probe(
        static_cast<int>(start.coords.size()), mode.probe, *rng);
  }

  // The inverse pass runs the time-reversed field w(y,s) = -v(y, t_hi+t_lo-s) on
  // the same grid and accumulates +div, so that
  //   pushforward_logp(x) = prior_logp(z) - delta_logp_inverse.
  auto stage = [&](const Vec& y, double s) -> std::pair<Vec, double> {
    if (!inverse) {
      auto [v, div] = velocity_and_div(f, y, s, mode, &probes);
      return {std::move(v), -div};
    }
    const double t = cfg.t_end + cfg.t_start - s;
    auto [v, div] = velocity_and_div(f, y, t, mode, &probes);
    return {-v, div};
  };

  const double h = (cfg.t_end - cfg.t_start) / cfg.n_steps;
  Vec x = start.coords;
  double ell = 0.0;
  for (int k = 0; k < cfg.n_steps; ++k) {
    const double s = cfg.t_start + k * h;
    if (cfg.scheme == Scheme::euler) {
      auto [v1, g1] = stage(x, s);
      x += h * v1;
      ell += h * g1;
    } else {
      auto [v1, g1] = stage(x, s);
      auto [v2, g2] = stage(x + 0.5 * h * v1, s + 0.5 * h);
      auto [v3, g3] = stage(x + 0.5 * h * v2, s + 0.5 * h);
      auto [v4, g4] = stage(x + h * v3, s + h);
      x += (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
      ell += (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
    }
    if (!x.allFinite() || !std::isfinite(ell)) throw IntegrationError(k);
  }
  return {Configuration(start.shape, std::move(x)), ell};
}

}  // namespace detail

template <class Field>
FlowResult integrate_forward(const Configuration& z, const Field& f, const IntegratorConfig& cfg,
                             const DivergenceMode& mode = DivergenceMode::exact(),
                             Rng* rng = nullptr) {
  return detail::integrate_core(z, f, cfg, mode, false, rng);
}

template <class Field>
FlowResult integrate_inverse(const Configuration& x, const Field& f, const IntegratorConfig& cfg,
                             const DivergenceMode& mode = DivergenceMode::exact(),
                             Rng* rng = nullptr) {
  return detail::integrate_core(x, f, cfg, mode, true, rng);
}

// log-density of the flow's push-forward at x, via the inverse integration
template <class Field>
double pushforward_logp(const Configuration& x, const Field& f, const IntegratorConfig& cfg,
                        const Prior& prior, const DivergenceMode& mode = DivergenceMode::exact(),
                        Rng* rng = nullptr) {
  const FlowResult inv = integrate_inverse(x, f, cfg, mode, rng);
  return prior.logp(inv.x) - inv.delta_logp;
}

}  // namespace eqflow
