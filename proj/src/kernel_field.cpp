#include "eqflow/kernel_field.hpp"

#include <cmath>
#include <numbers>

namespace eqflow {

KernelFieldGrads KernelFieldGrads::zeros_like(const KernelFieldParams& p) {
  KernelFieldGrads g;
  g.weights = Mat::Zero(p.weights.rows(), p.weights.cols());
  g.dist_means = Arr::Zero(p.n_dist());
  g.dist_log_bw = Arr::Zero(p.n_dist());
  g.time_means = Arr::Zero(p.n_time());
  g.time_log_bw = Arr::Zero(p.n_time());
  return g;
}

KernelFieldGrads& KernelFieldGrads::operator+=(const KernelFieldGrads& o) {
  weights += o.weights;
  dist_means += o.dist_means;
  dist_log_bw += o.dist_log_bw;
  time_means += o.time_means;
  time_log_bw += o.time_log_bw;
  return *this;
}

Arr equispaced_means(int m, double lo, double hi) {
  return Arr::LinSpaced(m, lo, hi);
}

Arr geometric_gap_means(int m, double lo, double hi, double center, double ratio,
                        double left_fraction) {
  if (m < 3) throw std::invalid_argument("geometric_gap_means: need at least 3 points");
  if (!(lo < center && center < hi)) throw std::invalid_argument("geometric_gap_means: center outside range");
  if (ratio <= 1.0) throw std::invalid_argument("geometric_gap_means: ratio must exceed 1");
  const int n_left = std::max(1, static_cast<int>(std::lround(left_fraction * (m - 1))));
  const int n_right = m - 1 - n_left;
  if (n_right < 1) throw std::invalid_argument("geometric_gap_means: left_fraction too large");

  auto fill = [&](int count, double span, int direction, Arr& out, int base) {
    // gaps g, g*ratio, ..., g*ratio^(count-1) sum to span
    const double g0 = span * (ratio - 1.0) / (std::pow(ratio, count) - 1.0);
    double pos = center, gap = g0;
    for (int k = 0; k < count; ++k) {
      pos += direction * gap;
      out[base + direction * (k + 1)] = pos;
      gap *= ratio;
    }
  };

  Arr means(m);
  means[n_left] = center;
  fill(n_left, center - lo, -1, means, n_left);
  fill(n_right, hi - center, +1, means, n_left);
  return means;
}

Arr gap_scaled_bandwidths(const Arr& means, double scale, double floor_value) {
  const int m = static_cast<int>(means.size());
  Arr bw(m);
  for (int l = 0; l < m; ++l) {
    const double left = l > 0 ? means[l] - means[l - 1] : means[l + 1] - means[l];
    const double right = l < m - 1 ? means[l + 1] - means[l] : means[l] - means[l - 1];
    const double gap = 0.5 * (left + right);
    bw[l] = std::max(floor_value, scale * gap * gap);
  }
  return bw;
}

namespace {

// time expansion and its mixed weight vector w = weights^T * time_kernels
struct TimeMix {
  Arr tk;
  Arr w;
};

TimeMix time_mix(const KernelFieldParams& p, double t) {
  TimeMix tm;
  tm.tk = rbf_expand(t, p.time_means, p.time_bw());
  tm.w = (p.weights.transpose() * tm.tk.matrix()).array();
  return tm;
}

}  // namespace

double phi(double d, double t, const KernelFieldParams& p) {
  const TimeMix tm = time_mix(p, t);
  return (tm.w * rbf_expand(d, p.dist_means, p.dist_bw())).sum();
}

double phi_ddist(double d, double t, const KernelFieldParams& p) {
  const TimeMix tm = time_mix(p, t);
  const Arr k = rbf_expand(d, p.dist_means, p.dist_bw());
  return (tm.w * rbf_expand_deriv(d, p.dist_means, p.dist_bw(), k)).sum();
}

FieldEval field_eval(const KernelField& f, const Vec& x, double t, bool want_div) {
  const int N = f.shape.n_particles, D = f.shape.dim;
  const KernelFieldParams& p = f.params;
  const TimeMix tm = time_mix(p, t);
  const Arr mu = p.dist_means;
  const Arr gamma = p.dist_bw();

  FieldEval out;
  out.v = Vec::Zero(x.size());
  double div = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const auto r = x.segment(i * D, D) - x.segment(j * D, D);
      const double d2 = r.squaredNorm();
      if (d2 == 0.0) continue;
      const double d = std::sqrt(d2);
      const Arr k = rbf_expand(d, mu, gamma);
      const double ph = (tm.w * k).sum();
      out.v.segment(i * D, D) += ph * r;
      out.v.segment(j * D, D) -= ph * r;
      if (want_div) {
        const double phd = (tm.w * rbf_expand_deriv(d, mu, gamma, k)).sum();
        div += 2.0 * (phd * d + D * ph);  // both orderings of the pair
      }
    }
  }
  if (want_div) out.div = div;
  return out;
}

double mixture_potential(const KernelField& f, const Vec& x, double t) {
  const int N = f.shape.n_particles, D = f.shape.dim;
  const KernelFieldParams& p = f.params;
  const TimeMix tm = time_mix(p, t);
  const Arr mu = p.dist_means;
  const Arr gamma = p.dist_bw();
  // antiderivative of k(d)*d for one Gaussian kernel:
  //   alpha(d) = mu*sqrt(pi*gamma/2)*erf((d-mu)/sqrt(2 gamma)) - gamma*exp(-(d-mu)^2/(2 gamma))
  const Arr pref = mu * (std::numbers::pi * gamma / 2.0).sqrt();
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const double d = (x.segment(i * D, D) - x.segment(j * D, D)).norm();
      double pair = 0.0;
      for (int m = 0; m < p.n_dist(); ++m) {
        const double s = d - mu[m];
        const double alpha = pref[m] * std::erf(s / std::sqrt(2.0 * gamma[m])) -
                             gamma[m] * std::exp(-s * s / (2.0 * gamma[m]));
        pair += tm.w[m] * alpha;
      }
      total += pair;  // ordered sum with the 1/2 kernel factor: 2 * (1/2) = 1
    }
  }
  return total;
}

void kernel_field_vjp(const KernelField& f, const Vec& x, double t, const Vec& vbar,
                      double divbar, Vec& xbar, KernelFieldGrads& grads) {
  const int N = f.shape.n_particles, D = f.shape.dim;
  const KernelFieldParams& p = f.params;
  const Arr tk = rbf_expand(t, p.time_means, p.time_bw());
  const Arr w = (p.weights.transpose() * tk.matrix()).array();
  const Arr mu = p.dist_means;
  const Arr gamma = p.dist_bw();

  Arr w_cot = Arr::Zero(p.n_dist());      // cotangent of w, shared across pairs
  Arr mu_cot = Arr::Zero(p.n_dist());     // per-kernel accumulators (before * w)
  Arr lgbw_cot = Arr::Zero(p.n_dist());

  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const Vec r = x.segment(i * D, D) - x.segment(j * D, D);
      const double d2 = r.squaredNorm();
      if (d2 == 0.0) continue;
      const double d = std::sqrt(d2);
      const Arr s = d - mu;
      const Arr k = (-s.square() / (2.0 * gamma)).exp();
      const Arr tratio = s / gamma;          // (d - mu)/gamma
      const Arr kd = -tratio * k;            // dk/dd
      const double ph = (w * k).sum();
      const double phd = (w * kd).sum();
      const double phdd = (w * (tratio.square() - gamma.inverse()) * k).sum();

      const Vec wpair = vbar.segment(i * D, D) - vbar.segment(j * D, D);
      const double gphi = wpair.dot(r) + 2.0 * divbar * D;  // d/dphi of the pair objective
      const double gphd = 2.0 * divbar * d;                 // d/dphid

      // input cotangent
      const double dbar = gphi * phd + gphd * phdd + 2.0 * divbar * phd;
      const Vec rbar = ph * wpair + (dbar / d) * r;
      xbar.segment(i * D, D) += rbar;
      xbar.segment(j * D, D) -= rbar;

      // parameter cotangents; phi = w.k, phid = w.kd
      w_cot += gphi * k + gphd * kd;
      const Arr q = s.square() / (2.0 * gamma);  // (d-mu)^2/(2 gamma)
      mu_cot += w * (gphi * tratio * k + gphd * k * (gamma.inverse() - tratio.square()));
      lgbw_cot += w * (gphi * k * q - gphd * kd * (1.0 - q));
    }
  }

  // w = weights^T * tk
  grads.weights += tk.matrix() * w_cot.matrix().transpose();
  const Arr tk_cot = (p.weights * w_cot.matrix()).array();
  const Arr ts = t - p.time_means;
  const Arr tbw = p.time_bw();
  grads.time_means += tk_cot * (ts / tbw) * tk;
  grads.time_log_bw += tk_cot * tk * ts.square() / (2.0 * tbw);
  grads.dist_means += mu_cot;
  grads.dist_log_bw += lgbw_cot;
}

}  // namespace eqflow
