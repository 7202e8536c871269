#include "eqflow/mlp_field.hpp"

#include <cmath>

namespace eqflow {

int MlpFieldParams::n_params() const {
  int n = 0;
  for (int l = 0; l < n_layers(); ++l)
    n += static_cast<int>(weights[l].size() + biases[l].size());
  return n;
}

void MlpFieldParams::validate() const {
  if (weights.empty() || weights.size() != biases.size())
    throw std::invalid_argument("MlpFieldParams: empty or mismatched layer lists");
  int width = input_width;
  for (int l = 0; l < n_layers(); ++l) {
    if (weights[l].cols() != width || weights[l].rows() != biases[l].size())
      throw std::invalid_argument("MlpFieldParams: layer width mismatch");
    width = static_cast<int>(weights[l].rows());
  }
  if (width != output_width)
    throw std::invalid_argument("MlpFieldParams: output width mismatch");
}

MlpGrads MlpGrads::zeros_like(const MlpFieldParams& p) {
  MlpGrads g;
  for (int l = 0; l < p.n_layers(); ++l) {
    g.weights.push_back(Mat::Zero(p.weights[l].rows(), p.weights[l].cols()));
    g.biases.push_back(Vec::Zero(p.biases[l].size()));
  }
  return g;
}

MlpGrads& MlpGrads::operator+=(const MlpGrads& o) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += o.weights[l];
    biases[l] += o.biases[l];
  }
  return *this;
}

MlpFieldParams make_mlp_params(SystemShape shape, const std::vector<int>& hidden, Rng& rng,
                               double final_scale) {
  MlpFieldParams p;
  p.input_width = shape.n() + 1;
  p.output_width = shape.n();
  std::vector<int> widths;
  widths.push_back(p.input_width);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(p.output_width);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool final_layer = (l + 2 == widths.size());
    const double scale = final_layer ? final_scale : 1.0 / std::sqrt(widths[l]);
    Mat a(widths[l + 1], widths[l]);
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) a(i, j) = scale * rng.gaussian();
    p.weights.push_back(std::move(a));
    p.biases.push_back(Vec::Zero(widths[l + 1]));
  }
  return p;
}

namespace {

// forward pass keeping post-activation values; a[0] is the input
std::vector<Vec> forward_acts(const MlpFieldParams& p, const Vec& x, double t) {
  std::vector<Vec> a(p.n_layers() + 1);
  a[0].resize(p.input_width);
  a[0].head(x.size()) = x;
  a[0][p.input_width - 1] = t;
  for (int l = 0; l < p.n_layers(); ++l) {
    Vec z = p.weights[l] * a[l] + p.biases[l];
    if (l + 1 < p.n_layers()) z = z.array().tanh();
    a[l + 1] = std::move(z);
  }
  return a;
}

}  // namespace

FieldEval field_eval(const MlpField& f, const Vec& x, double t) {
  FieldEval out;
  out.v = forward_acts(f.params, x, t).back();
  return out;
}

void mlp_field_vjp(const MlpField& f, const Vec& x, double t, const Vec& vbar, Vec& xbar,
                   MlpGrads& grads) {
  const MlpFieldParams& p = f.params;
  const auto a = forward_acts(p, x, t);
  Vec abar = vbar;
  for (int l = p.n_layers() - 1; l >= 0; --l) {
    // hidden activations are tanh; the final layer is linear
    Vec zbar = (l + 1 < p.n_layers())
                   ? (abar.array() * (1.0 - a[l + 1].array().square())).matrix().eval()
                   : abar;
    grads.weights[l] += zbar * a[l].transpose();
    grads.biases[l] += zbar;
    abar = p.weights[l].transpose() * zbar;
  }
  xbar += abar.head(x.size());
}

double mlp_hutchinson_div(const MlpField& f, const Vec& x, double t, const Mat& probes,
                          Vec* velocity_out) {
  const MlpFieldParams& p = f.params;
  const auto a = forward_acts(p, x, t);
  if (velocity_out) *velocity_out = a.back();
  double est = 0.0;
  for (int c = 0; c < probes.cols(); ++c) {
    Vec adot = Vec::Zero(p.input_width);
    adot.head(x.size()) = probes.col(c);  // time carries no tangent
    for (int l = 0; l < p.n_layers(); ++l) {
      Vec zdot = p.weights[l] * adot;
      if (l + 1 < p.n_layers()) zdot.array() *= 1.0 - a[l + 1].array().square();
      adot = std::move(zdot);
    }
    est += probes.col(c).dot(adot);
  }
  return est / probes.cols();
}

void mlp_hutchinson_vjp(const MlpField& f, const Vec& x, double t, const Mat& probes,
                        const Vec& vbar, double ebar, Vec& xbar, MlpGrads& grads) {
  const MlpFieldParams& p = f.params;
  const int L = p.n_layers();
  const auto a = forward_acts(p, x, t);

  Vec xbar_acc = Vec::Zero(p.input_width);

  // plain velocity part
  {
    Vec abar = vbar;
    for (int l = L - 1; l >= 0; --l) {
      Vec zbar = (l + 1 < L)
                     ? (abar.array() * (1.0 - a[l + 1].array().square())).matrix().eval()
                     : abar;
      grads.weights[l] += zbar * a[l].transpose();
      grads.biases[l] += zbar;
      abar = p.weights[l].transpose() * zbar;
    }
    xbar_acc += abar;
  }

  // tangent part: reverse through the probe sweeps (forward-over-reverse)
  const double probe_scale = ebar / probes.cols();
  for (int c = 0; c < probes.cols(); ++c) {
    std::vector<Vec> adot(L + 1), zdot(L);
    adot[0] = Vec::Zero(p.input_width);
    adot[0].head(x.size()) = probes.col(c);
    for (int l = 0; l < L; ++l) {
      zdot[l] = p.weights[l] * adot[l];
      adot[l + 1] = (l + 1 < L)
                        ? (zdot[l].array() * (1.0 - a[l + 1].array().square())).matrix().eval()
                        : zdot[l];
    }

    Vec adotbar = probe_scale * probes.col(c);  // e = probe . vdot
    Vec abar = Vec::Zero(p.output_width);
    for (int l = L - 1; l >= 0; --l) {
      Vec zbar, zdotbar;
      if (l + 1 < L) {
        const Arr sp = 1.0 - a[l + 1].array().square();       // tanh'
        const Arr spp = -2.0 * a[l + 1].array() * sp;          // tanh''
        zbar = (abar.array() * sp + adotbar.array() * spp * zdot[l].array()).matrix();
        zdotbar = (adotbar.array() * sp).matrix();
      } else {
        zbar = abar;
        zdotbar = adotbar;
      }
      grads.weights[l] += zbar * a[l].transpose() + zdotbar * adot[l].transpose();
      grads.biases[l] += zbar;
      abar = p.weights[l].transpose() * zbar;
      adotbar = p.weights[l].transpose() * zdotbar;
    }
    xbar_acc += abar;
  }

  xbar += xbar_acc.head(x.size());
}

}  // namespace eqflow
