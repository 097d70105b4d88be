#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lcew/stgcnn.hpp"

namespace lcew {

void ModelConfig::validate() const {
  if (history_steps < 1 || future_steps < 1) throw std::invalid_argument("ModelConfig: horizons must be >= 1");
  if (input_dim != 2) throw std::invalid_argument("ModelConfig: input_dim must be 2");
  if (hidden_dim < 1) throw std::invalid_argument("ModelConfig: hidden_dim must be >= 1");
  if (gcn_layers < 1 || txp_layers < 1) throw std::invalid_argument("ModelConfig: layer counts must be >= 1");
  if (txp_kernel < 1 || txp_kernel % 2 == 0) throw std::invalid_argument("ModelConfig: txp_kernel must be odd");
  if (epochs < 1) throw std::invalid_argument("ModelConfig: epochs must be >= 1");
  if (grad_accum < 1) throw std::invalid_argument("ModelConfig: grad_accum must be >= 1");
  if (lr_initial <= 0.0 || lr_later <= 0.0) throw std::invalid_argument("ModelConfig: learning rates must be positive");
}

namespace {

std::vector<int> gcn_dims(const ModelConfig& cfg) {
  std::vector<int> dims(cfg.gcn_layers + 1, cfg.hidden_dim);
  dims[0] = cfg.input_dim;
  return dims;
}

ModelParams make_shaped(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  const auto dims = gcn_dims(cfg);
  for (int l = 0; l < cfg.gcn_layers; ++l) {
    p.gcn_w.emplace_back(dims[l], dims[l + 1]);
    p.gcn_alpha.push_back(cfg.prelu_init);
  }
  for (int l = 0; l < cfg.txp_layers; ++l) {
    const int in_ch = l == 0 ? cfg.history_steps : cfg.future_steps;
    p.txp_kernel.emplace_back(cfg.future_steps, in_ch, cfg.txp_kernel);
    p.txp_bias.emplace_back(cfg.future_steps, 0.0);
    p.txp_alpha.push_back(cfg.prelu_init);
  }
  p.head_w = Mat(cfg.hidden_dim, 2);
  return p;
}

double prelu(double x, double alpha) { return x > 0.0 ? x : alpha * x; }

// pre(d, o, n) = bias[o] + sum_c sum_k kernel(o, c, k) * x(d + k - pad, c, n)
// Same zero padding along the feature axis d; pointwise in n.
Tensor3 conv_feature_axis(const Tensor3& x, const Tensor3& kernel,
                          const std::vector<double>& bias) {
  const int dext = x.d0(), in_ch = x.d1(), n = x.d2();
  const int out_ch = kernel.d0(), k = kernel.d2();
  if (kernel.d1() != in_ch) throw std::invalid_argument("temporal conv: channel mismatch");
  const int pad = (k - 1) / 2;
  Tensor3 out(dext, out_ch, n);
  for (int d = 0; d < dext; ++d) {
    for (int o = 0; o < out_ch; ++o) {
      for (int nn = 0; nn < n; ++nn) {
        double acc = bias[o];
        for (int c = 0; c < in_ch; ++c) {
          for (int kk = 0; kk < k; ++kk) {
            const int ds = d + kk - pad;
            if (ds < 0 || ds >= dext) continue;
            acc += kernel.at(o, c, kk) * x.at(ds, c, nn);
          }
        }
        out.at(d, o, nn) = acc;
      }
    }
  }
  return out;
}

void conv_feature_axis_backward(const Tensor3& x, const Tensor3& kernel,
                                const Tensor3& dpre, Tensor3* dx,
                                Tensor3* dkernel, std::vector<double>* dbias) {
  const int dext = x.d0(), in_ch = x.d1(), n = x.d2();
  const int out_ch = kernel.d0(), k = kernel.d2();
  const int pad = (k - 1) / 2;
  for (int d = 0; d < dext; ++d) {
    for (int o = 0; o < out_ch; ++o) {
      for (int nn = 0; nn < n; ++nn) {
        const double g = dpre.at(d, o, nn);
        if (g == 0.0) continue;
        (*dbias)[o] += g;
        for (int c = 0; c < in_ch; ++c) {
          for (int kk = 0; kk < k; ++kk) {
            const int ds = d + kk - pad;
            if (ds < 0 || ds >= dext) continue;
            dkernel->at(o, c, kk) += x.at(ds, c, nn) * g;
            dx->at(ds, c, nn) += kernel.at(o, c, kk) * g;
          }
        }
      }
    }
  }
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  ModelParams p = make_shaped(cfg);
  p.fill(0.0);
  return p;
}

ModelParams ModelParams::init(const ModelConfig& cfg, RandomStream& rng) {
  ModelParams p = make_shaped(cfg);
  const auto dims = gcn_dims(cfg);
  for (int l = 0; l < cfg.gcn_layers; ++l) {
    const double lim = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
    for (size_t i = 0; i < p.gcn_w[l].size(); ++i) p.gcn_w[l].data()[i] = rng.uniform(-lim, lim);
  }
  for (int l = 0; l < cfg.txp_layers; ++l) {
    auto& k = p.txp_kernel[l];
    const double lim = std::sqrt(6.0 / ((k.d1() + k.d0()) * k.d2()));
    for (size_t i = 0; i < k.size(); ++i) k.data()[i] = rng.uniform(-lim, lim);
  }
  const double lim = std::sqrt(6.0 / (cfg.hidden_dim + 2));
  for (size_t i = 0; i < p.head_w.size(); ++i) p.head_w.data()[i] = rng.uniform(-lim, lim);
  return p;
}

void ModelParams::fill(double v) {
  visit_params(*this, [v](double& x, const char*, int, int) { x = v; });
}

void ModelParams::scale_add(const ModelParams& grads, double factor) {
  std::vector<double*> mine;
  visit_params(*this, [&](double& x, const char*, int, int) { mine.push_back(&x); });
  std::vector<const double*> theirs;
  visit_params(const_cast<ModelParams&>(grads),
               [&](double& x, const char*, int, int) { theirs.push_back(&x); });
  if (mine.size() != theirs.size()) throw std::invalid_argument("scale_add: parameter shape mismatch");
  for (size_t i = 0; i < mine.size(); ++i) *mine[i] += factor * *theirs[i];
}

SceneInputs build_inputs(const Scene& scene, KernelKind kind, const KernelParams& params) {
  if (scene.num_vehicles() < 2) throw std::invalid_argument("build_inputs: scene needs N >= 2");
  const int t_steps = scene.history_steps();
  const int n = scene.num_vehicles();
  SceneInputs in;
  in.features = Tensor3(2, t_steps, n);
  for (int t = 1; t < t_steps; ++t) {
    for (int d = 0; d < 2; ++d) {
      for (int i = 0; i < n; ++i) {
        in.features.at(d, t, i) = scene.history.at(t, d, i) - scene.history.at(t - 1, d, i);
      }
    }
  }
  in.a_norm = adjacency_stack(scene, kind, params);
  in.last_pos.resize(n);
  for (int i = 0; i < n; ++i) in.last_pos[i] = scene.last_observed(i);
  return in;
}

Tensor3 gcn_forward(const Tensor3& v, const std::vector<NormalizedAdjacency>& a_norm,
                    const Mat& w, double alpha) {
  const int d_in = v.d0(), t_steps = v.d1(), n = v.d2();
  if (static_cast<int>(a_norm.size()) != t_steps) {
    throw std::invalid_argument("gcn_forward: need one adjacency per timestep");
  }
  if (w.rows() != d_in) throw std::invalid_argument("gcn_forward: weight rows != feature dim");
  const int d_out = w.cols();
  Tensor3 out(d_out, t_steps, n);
  for (int t = 0; t < t_steps; ++t) {
    const Mat& a = a_norm[t].w;
    if (a.rows() != n) throw std::invalid_argument("gcn_forward: adjacency size != N");
    for (int i = 0; i < n; ++i) {
      for (int o = 0; o < d_out; ++o) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
          const double aij = a.at(i, j);
          if (aij == 0.0) continue;
          double feat = 0.0;
          for (int di = 0; di < d_in; ++di) feat += v.at(di, t, j) * w.at(di, o);
          acc += aij * feat;
        }
        out.at(o, t, i) = prelu(acc, alpha);
      }
    }
  }
  return out;
}

namespace {

// Full forward with optional tape capture. Reused by the public entry points.
Prediction forward_impl(const SceneInputs& in, const ModelParams& params, Tape* tape) {
  const int t_steps = in.features.d1();
  const int n = in.features.d2();
  if (static_cast<int>(in.a_norm.size()) != t_steps) {
    throw std::invalid_argument("forward: adjacency stack length != T");
  }
  if (static_cast<int>(in.last_pos.size()) != n) {
    throw std::invalid_argument("forward: last_pos size != N");
  }
  if (tape) {
    tape->features = in.features;
    tape->a_norm = in.a_norm;
    tape->gcn_in.clear();
    tape->gcn_pre.clear();
    tape->gcn_mix.clear();
    tape->txp_in.clear();
    tape->txp_pre.clear();
  }

  // GCN stack.
  Tensor3 x = in.features;
  for (size_t l = 0; l < params.gcn_w.size(); ++l) {
    const Mat& w = params.gcn_w[l];
    const int d_in = x.d0(), d_out = w.cols();
    if (w.rows() != d_in) throw std::invalid_argument("forward: GCN weight shape mismatch");
    Tensor3 mix(d_in, t_steps, n);  // A_t X_t, node mixing
    for (int t = 0; t < t_steps; ++t) {
      const Mat& a = in.a_norm[t].w;
      if (a.rows() != n || a.cols() != n) throw std::invalid_argument("forward: adjacency size != N");
      for (int di = 0; di < d_in; ++di) {
        for (int i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += a.at(i, j) * x.at(di, t, j);
          mix.at(di, t, i) = acc;
        }
      }
    }
    Tensor3 pre(d_out, t_steps, n);
    for (int t = 0; t < t_steps; ++t) {
      for (int i = 0; i < n; ++i) {
        for (int o = 0; o < d_out; ++o) {
          double acc = 0.0;
          for (int di = 0; di < d_in; ++di) acc += mix.at(di, t, i) * w.at(di, o);
          pre.at(o, t, i) = acc;
        }
      }
    }
    Tensor3 y(d_out, t_steps, n);
    const double alpha = params.gcn_alpha[l];
    for (size_t i = 0; i < pre.size(); ++i) y.data()[i] = prelu(pre.data()[i], alpha);
    if (tape) {
      tape->gcn_in.push_back(x);
      tape->gcn_mix.push_back(mix);
      tape->gcn_pre.push_back(pre);
    }
    x = std::move(y);
  }

  // Temporal stack: time as channels, conv along the feature axis.
  if (x.d1() != params.txp_kernel[0].d1()) {
    throw std::invalid_argument("forward: history length does not match temporal kernel");
  }
  for (size_t l = 0; l < params.txp_kernel.size(); ++l) {
    Tensor3 pre = conv_feature_axis(x, params.txp_kernel[l], params.txp_bias[l]);
    Tensor3 y(pre.d0(), pre.d1(), pre.d2());
    const double alpha = params.txp_alpha[l];
    for (size_t i = 0; i < pre.size(); ++i) y.data()[i] = prelu(pre.data()[i], alpha);
    if (l > 0) {
      for (size_t i = 0; i < y.size(); ++i) y.data()[i] += x.data()[i];
    }
    if (tape) {
      tape->txp_in.push_back(x);
      tape->txp_pre.push_back(pre);
    }
    x = std::move(y);
  }

  // Linear head to per-step displacements, then cumulative decoding.
  const int f_steps = x.d1();
  const int d_hat = x.d0();
  if (params.head_w.rows() != d_hat) throw std::invalid_argument("forward: head shape mismatch");
  if (tape) tape->head_in = x;
  Tensor3 disp(f_steps, 2, n);
  for (int f = 0; f < f_steps; ++f) {
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < n; ++i) {
        double acc = params.head_b[c];
        for (int d = 0; d < d_hat; ++d) acc += params.head_w.at(d, c) * x.at(d, f, i);
        disp.at(f, c, i) = acc;
      }
    }
  }
  if (tape) tape->disp = disp;

  Prediction pred;
  pred.values = Tensor3(f_steps, 2, n);
  for (int i = 0; i < n; ++i) {
    double px = in.last_pos[i].x, py = in.last_pos[i].y;
    for (int f = 0; f < f_steps; ++f) {
      px += disp.at(f, 0, i);
      py += disp.at(f, 1, i);
      pred.values.at(f, 0, i) = px;
      pred.values.at(f, 1, i) = py;
    }
  }
  return pred;
}

}  // namespace

Prediction txpcnn_decode(const Tensor3& embedding, const ModelParams& params,
                         const std::vector<Vec2>& last_pos) {
  ModelParams decoder = params;
  decoder.gcn_w.clear();
  decoder.gcn_alpha.clear();
  SceneInputs tmp;
  tmp.features = embedding;
  tmp.last_pos = last_pos;
  tmp.a_norm.assign(embedding.d1(), NormalizedAdjacency{0, Mat::identity(embedding.d2())});
  return forward_impl(tmp, decoder, nullptr);
}

Prediction forward(const SceneInputs& in, const ModelParams& params, Tape* tape) {
  return forward_impl(in, params, tape);
}

double mse_loss(const Prediction& pred, const Tensor3& truth) {
  if (!pred.values.same_shape(truth)) throw std::invalid_argument("mse_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const double e = pred.values.data()[i] - truth.data()[i];
    acc += e * e;
  }
  return acc / static_cast<double>(truth.size());
}

std::pair<double, ModelGrads> mse_loss_and_grad(const SceneInputs& in, const Tensor3& truth,
                                                const ModelParams& params) {
  Tape tape;
  const Prediction pred = forward_impl(in, params, &tape);
  const double loss = mse_loss(pred, truth);

  ModelGrads grads = params;
  grads.fill(0.0);

  const int f_steps = pred.values.d0();
  const int n = pred.values.d2();
  const double scale = 2.0 / static_cast<double>(truth.size());

  // d loss / d prediction, then reverse-cumulative into displacements.
  Tensor3 ddisp(f_steps, 2, n);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n; ++i) {
      double carry = 0.0;
      for (int f = f_steps - 1; f >= 0; --f) {
        carry += scale * (pred.values.at(f, c, i) - truth.at(f, c, i));
        ddisp.at(f, c, i) = carry;
      }
    }
  }

  // Head.
  const Tensor3& head_in = tape.head_in;
  const int d_hat = head_in.d0();
  Tensor3 dhead_in(d_hat, f_steps, n);
  for (int f = 0; f < f_steps; ++f) {
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < n; ++i) {
        const double g = ddisp.at(f, c, i);
        grads.head_b[c] += g;
        for (int d = 0; d < d_hat; ++d) {
          grads.head_w.at(d, c) += head_in.at(d, f, i) * g;
          dhead_in.at(d, f, i) += params.head_w.at(d, c) * g;
        }
      }
    }
  }

  // Temporal stack, reversed.
  Tensor3 dy = std::move(dhead_in);
  for (int l = static_cast<int>(params.txp_kernel.size()) - 1; l >= 0; --l) {
    const Tensor3& pre = tape.txp_pre[l];
    const Tensor3& x = tape.txp_in[l];
    const double alpha = params.txp_alpha[l];
    Tensor3 dpre(pre.d0(), pre.d1(), pre.d2());
    for (size_t i = 0; i < pre.size(); ++i) {
      const double p = pre.data()[i];
      const double g = dy.data()[i];
      dpre.data()[i] = p > 0.0 ? g : alpha * g;
      if (p <= 0.0) grads.txp_alpha[l] += p * g;
    }
    Tensor3 dx(x.d0(), x.d1(), x.d2());
    conv_feature_axis_backward(x, params.txp_kernel[l], dpre, &dx,
                               &grads.txp_kernel[l], &grads.txp_bias[l]);
    if (l > 0) {
      for (size_t i = 0; i < dx.size(); ++i) dx.data()[i] += dy.data()[i];  // residual path
    }
    dy = std::move(dx);
  }

  // GCN stack, reversed.
  const int t_steps = in.features.d1();
  for (int l = static_cast<int>(params.gcn_w.size()) - 1; l >= 0; --l) {
    const Tensor3& pre = tape.gcn_pre[l];
    const Tensor3& mix = tape.gcn_mix[l];
    const Mat& w = params.gcn_w[l];
    const double alpha = params.gcn_alpha[l];
    const int d_in = mix.d0(), d_out = pre.d0();

    Tensor3 dpre(d_out, t_steps, n);
    for (size_t i = 0; i < pre.size(); ++i) {
      const double p = pre.data()[i];
      const double g = dy.data()[i];
      dpre.data()[i] = p > 0.0 ? g : alpha * g;
      if (p <= 0.0) grads.gcn_alpha[l] += p * g;
    }

    Tensor3 dmix(d_in, t_steps, n);
    for (int t = 0; t < t_steps; ++t) {
      for (int i = 0; i < n; ++i) {
        for (int o = 0; o < d_out; ++o) {
          const double g = dpre.at(o, t, i);
          if (g == 0.0) continue;
          for (int di = 0; di < d_in; ++di) {
            grads.gcn_w[l].at(di, o) += mix.at(di, t, i) * g;
            dmix.at(di, t, i) += w.at(di, o) * g;
          }
        }
      }
    }

    Tensor3 dx(d_in, t_steps, n);
    for (int t = 0; t < t_steps; ++t) {
      const Mat& a = in.a_norm[t].w;
      for (int di = 0; di < d_in; ++di) {
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int i = 0; i < n; ++i) acc += a.at(i, j) * dmix.at(di, t, i);
          dx.at(di, t, j) = acc;
        }
      }
    }
    dy = std::move(dx);
  }

  return {loss, std::move(grads)};
}

Prediction predict(const Scene& scene, const ModelParams& params, KernelKind kind,
                   const KernelParams& kernel_params) {
  if (scene.num_vehicles() < 2) throw std::invalid_argument("predict: scene needs N >= 2");
  return forward_impl(build_inputs(scene, kind, kernel_params), params, nullptr);
}

std::pair<ModelParams, TrainReport> train(const std::vector<Scene>& train_scenes,
                                          const std::vector<Scene>& val_scenes,
                                          const ModelConfig& cfg) {
  cfg.validate();
  if (train_scenes.empty()) throw std::invalid_argument("train: need at least one scene");
  for (const auto& s : train_scenes) {
    if (s.history_steps() != cfg.history_steps || s.future_steps() != cfg.future_steps) {
      throw std::invalid_argument("train: scene horizons do not match the config");
    }
  }

  std::vector<SceneInputs> inputs;
  inputs.reserve(train_scenes.size());
  for (const auto& s : train_scenes) inputs.push_back(build_inputs(s, cfg.kernel, cfg.kernel_params));
  std::vector<SceneInputs> val_inputs;
  val_inputs.reserve(val_scenes.size());
  for (const auto& s : val_scenes) val_inputs.push_back(build_inputs(s, cfg.kernel, cfg.kernel_params));

  RandomStream init_rng(derive_seed(cfg.seed, 0));
  RandomStream shuffle_rng(derive_seed(cfg.seed, 1));
  ModelParams params = ModelParams::init(cfg, init_rng);
  ModelParams snapshot = params;

  TrainReport report;
  report.seed = cfg.seed;

  std::vector<size_t> order(train_scenes.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.lr_for_epoch(epoch);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    ModelGrads accum = params;
    accum.fill(0.0);
    int pending = 0;

    for (size_t idx : order) {
      auto [loss, grads] = mse_loss_and_grad(inputs[idx], train_scenes[idx].future, params);
      if (!std::isfinite(loss)) {
        params = snapshot;  // last epoch-end checkpoint
        report.diverged = true;
        report.diverged_epoch = epoch;
        return {std::move(params), std::move(report)};
      }
      epoch_loss += loss;
      if (cfg.grad_accum == 1) {
        params.scale_add(grads, -lr);
      } else {
        accum.scale_add(grads, 1.0);
        if (++pending == cfg.grad_accum) {
          params.scale_add(accum, -lr / cfg.grad_accum);
          accum.fill(0.0);
          pending = 0;
        }
      }
    }
    if (pending > 0) {
      params.scale_add(accum, -lr / pending);
    }

    report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    report.lr.push_back(lr);
    if (val_inputs.empty()) {
      report.val_loss.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      double vloss = 0.0;
      for (size_t i = 0; i < val_inputs.size(); ++i) {
        vloss += mse_loss(forward_impl(val_inputs[i], params, nullptr), val_scenes[i].future);
      }
      report.val_loss.push_back(vloss / static_cast<double>(val_inputs.size()));
    }
    snapshot = params;
  }
  return {std::move(params), std::move(report)};
}

}  // namespace lcew
