#pragma once

#include "eqflow/kernel_field.hpp"
#include "eqflow/mlp_field.hpp"

namespace eqflow {

// AdamW with decoupled, multiplicative weight decay: decayed-blocks shrink by
// (1 - lr*wd) before the moment update is applied.
struct OptimizerState {
  Vec m, v;
  long step = 0;

  static OptimizerState zeros(Eigen::Index n) { return {Vec::Zero(n), Vec::Zero(n), 0}; }
};

struct AdamWSettings {
  double learning_rate = 0.005;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adamw_step(Vec& params, const Vec& grads, const Vec& decay_mask, OptimizerState& state,
                const AdamWSettings& cfg);

// Flat views of the trainable parameters. Frozen blocks (per the trainable_*
// flags) are excluded, so the flat length is exactly the trainable count.
// Layout: mixing weights, then distance means/log-bandwidths, then time
// means/log-bandwidths; MLP layers are (weights, bias) in order.
Vec flatten_trainable(const KernelFieldParams& p);
void set_trainable(KernelFieldParams& p, const Vec& flat);
Vec flatten_grads(const KernelFieldGrads& g, const KernelFieldParams& p);
Vec weight_decay_mask(const KernelFieldParams& p);  // decay acts on the mixing matrix only

Vec flatten_trainable(const MlpFieldParams& p);
void set_trainable(MlpFieldParams& p, const Vec& flat);
Vec flatten_grads(const MlpGrads& g, const MlpFieldParams& p);
Vec weight_decay_mask(const MlpFieldParams& p);  // decay acts on weight matrices, not biases

}  // namespace eqflow
