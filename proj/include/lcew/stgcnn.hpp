#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "lcew/graphkernels.hpp"
#include "lcew/rng.hpp"
#include "lcew/tensor.hpp"
#include "lcew/trajdata.hpp"

namespace lcew {

struct ModelConfig {
  int history_steps = 20;  // T
  int future_steps = 20;   // F
  int input_dim = 2;       // D
  int hidden_dim = 8;      // D-hat
  int gcn_layers = 1;
  int txp_layers = 3;
  int txp_kernel = 3;      // odd
  double prelu_init = 0.25;
  int epochs = 100;
  double lr_initial = 0.01;
  double lr_later = 0.002;
  int lr_switch_epoch = 50;  // epochs 1..switch run at lr_initial
  int grad_accum = 1;        // scenes per SGD step
  uint64_t seed = 1;
  KernelKind kernel = KernelKind::MI;
  KernelParams kernel_params;

  void validate() const;
  double lr_for_epoch(int epoch_1based) const {
    return epoch_1based <= lr_switch_epoch ? lr_initial : lr_later;
  }
};

// Trainable state. The same parameter set evaluates scenes of any vehicle
// count: nothing here is sized by N.
struct ModelParams {
  std::vector<Mat> gcn_w;             // layer l: D_l x D_{l+1}
  std::vector<double> gcn_alpha;      // PReLU slope per GCN layer
  std::vector<Tensor3> txp_kernel;    // layer l: out_ch x in_ch x k
  std::vector<std::vector<double>> txp_bias;  // layer l: out_ch
  std::vector<double> txp_alpha;      // PReLU slope per temporal layer
  Mat head_w;                         // D-hat x 2
  std::array<double, 2> head_b{0.0, 0.0};

  static ModelParams zeros(const ModelConfig& cfg);
  static ModelParams init(const ModelConfig& cfg, RandomStream& rng);
  void scale_add(const ModelParams& grads, double factor);  // this += factor * grads
  void fill(double v);
};

using ModelGrads = ModelParams;

// Applies fn to every trainable scalar, in a fixed order shared with the
// gradient container. fn(value_ref, group_name, flat_index_within_group).
template <class P, class F>
void visit_params(P& p, F&& fn) {
  for (size_t l = 0; l < p.gcn_w.size(); ++l) {
    auto& w = p.gcn_w[l];
    for (size_t i = 0; i < w.size(); ++i) fn(w.data()[i], "gcn_w", static_cast<int>(l), static_cast<int>(i));
    fn(p.gcn_alpha[l], "gcn_alpha", static_cast<int>(l), 0);
  }
  for (size_t l = 0; l < p.txp_kernel.size(); ++l) {
    auto& k = p.txp_kernel[l];
    for (size_t i = 0; i < k.size(); ++i) fn(k.data()[i], "txp_kernel", static_cast<int>(l), static_cast<int>(i));
    for (size_t i = 0; i < p.txp_bias[l].size(); ++i) fn(p.txp_bias[l][i], "txp_bias", static_cast<int>(l), static_cast<int>(i));
    fn(p.txp_alpha[l], "txp_alpha", static_cast<int>(l), 0);
  }
  for (size_t i = 0; i < p.head_w.size(); ++i) fn(p.head_w.data()[i], "head_w", 0, static_cast<int>(i));
  fn(p.head_b[0], "head_b", 0, 0);
  fn(p.head_b[1], "head_b", 0, 1);
}

// Per-scene model inputs: increment features (translation invariant), the
// per-timestep normalized adjacency stack, and each vehicle's last observed
// position for the displacement head.
struct SceneInputs {
  Tensor3 features;                      // D x T x N
  std::vector<NormalizedAdjacency> a_norm;  // T entries, N x N
  std::vector<Vec2> last_pos;            // N
};

SceneInputs build_inputs(const Scene& scene, KernelKind kind, const KernelParams& params = {});

struct Prediction {
  Tensor3 values;  // F x 2 x N, absolute positions
  int num_vehicles() const { return values.d2(); }
  int steps() const { return values.d0(); }
  Vec2 pos(int f, int n) const { return {values.at(f, 0, n), values.at(f, 1, n)}; }
};

// Saved forward intermediates for the exact backward pass.
struct Tape {
  Tensor3 features;
  std::vector<NormalizedAdjacency> a_norm;
  std::vector<Tensor3> gcn_in;      // input per GCN layer
  std::vector<Tensor3> gcn_pre;     // pre-activation per GCN layer
  std::vector<Tensor3> gcn_mix;     // A V per GCN layer (N-mixed input, D_l x T x N)
  std::vector<Tensor3> txp_in;      // input per temporal layer
  std::vector<Tensor3> txp_pre;     // pre-activation per temporal layer
  Tensor3 head_in;                  // D-hat x F x N
  Tensor3 disp;                     // F x 2 x N
};

// One graph-convolution layer: per timestep PReLU(A_t X_t W), nodes mixed by
// A_t, features mixed by W.
Tensor3 gcn_forward(const Tensor3& v, const std::vector<NormalizedAdjacency>& a_norm,
                    const Mat& w, double alpha);

// Temporal decoder: time as channels, 1D convolutions over the feature axis
// (pointwise in vehicles, which keeps the stack permutation equivariant),
// residual after the first layer, linear head to per-step displacements,
// cumulative sum onto the last observed positions.
Prediction txpcnn_decode(const Tensor3& embedding, const ModelParams& params,
                         const std::vector<Vec2>& last_pos);

Prediction forward(const SceneInputs& in, const ModelParams& params, Tape* tape = nullptr);

double mse_loss(const Prediction& pred, const Tensor3& truth);

// Loss plus exact parameter gradients via reverse-mode accumulation through
// the recorded tape.
std::pair<double, ModelGrads> mse_loss_and_grad(const SceneInputs& in, const Tensor3& truth,
                                                const ModelParams& params);

Prediction predict(const Scene& scene, const ModelParams& params, KernelKind kind,
                   const KernelParams& kernel_params = {});

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch (NaN when no validation set)
  std::vector<double> lr;          // per epoch
  uint64_t seed = 0;
  bool diverged = false;
  int diverged_epoch = -1;  // 1-based epoch at which training aborted
};

std::pair<ModelParams, TrainReport> train(const std::vector<Scene>& train_scenes,
                                          const std::vector<Scene>& val_scenes,
                                          const ModelConfig& cfg);

}  // namespace lcew
