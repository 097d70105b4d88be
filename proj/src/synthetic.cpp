#include <algorithm>
#include <cmath>

#include "lcew/microsim.hpp"
#include "lcew/synthetic.hpp"

namespace lcew {

Scene random_scene(RandomStream& rng, int n, int history_steps, int future_steps) {
  Scene scene;
  scene.vehicle_ids.resize(n);
  scene.dims.assign(n, {5.0, 1.8});
  scene.history = Tensor3(history_steps, 2, n);
  scene.future = Tensor3(future_steps, 2, n);
  scene.ego_index = 0;
  for (int i = 0; i < n; ++i) {
    scene.vehicle_ids[i] = i + 1;
    double x = rng.uniform(0.0, 60.0);
    double y = rng.uniform(0.0, 7.0);
    double vx = rng.uniform(5.0, 18.0);
    double vy = rng.uniform(-0.5, 0.5);
    const double ax = rng.uniform(-0.5, 0.5);
    const double ay = rng.uniform(-0.1, 0.1);
    for (int s = 0; s < history_steps + future_steps; ++s) {
      if (s < history_steps) {
        scene.history.at(s, 0, i) = x;
        scene.history.at(s, 1, i) = y;
      } else {
        scene.future.at(s - history_steps, 0, i) = x;
        scene.future.at(s - history_steps, 1, i) = y;
      }
      vx += ax * kSampleDt;
      vy += ay * kSampleDt;
      x += vx * kSampleDt;
      y += vy * kSampleDt;
    }
  }
  return scene;
}

std::vector<Scene> synthetic_corpus(const CorpusParams& params) {
  std::vector<Scene> scenes;
  scenes.reserve(params.scenes);
  RandomStream rng(params.seed);
  IdmParams idm;

  const int total_steps = params.history_steps + params.future_steps;
  for (int s = 0; s < params.scenes; ++s) {
    const int n = params.min_vehicles +
                  static_cast<int>(rng.next_u64() % (params.max_vehicles - params.min_vehicles + 1));

    // Lane assignment: vehicles alternate between two lanes; index 0 changes
    // lanes mid-scene.
    struct Veh {
      double x, v, y, vy;
      int lane;
      double desired;
    };
    std::vector<Veh> vehs(n);
    double base = rng.uniform(40.0, 80.0);
    for (int i = 0; i < n; ++i) {
      vehs[i].lane = i % 2;
      vehs[i].y = vehs[i].lane * 3.5;
      vehs[i].vy = 0.0;
      vehs[i].v = rng.uniform(8.0, 14.0);
      vehs[i].desired = rng.uniform(10.0, 16.0);
      vehs[i].x = base - 12.0 * i + rng.uniform(-2.0, 2.0);
      base = vehs[i].x;  // keep strings ordered per lane
    }
    // leader speed oscillation makes followers interact
    const double osc_amp = rng.uniform(0.5, 2.0);
    const double osc_period = rng.uniform(4.0, 8.0);
    // vehicle 0 starts a lane change somewhere inside the window
    const int lc_start = params.history_steps / 2 +
                         static_cast<int>(rng.next_u64() % std::max(1, total_steps / 2));
    const double lc_duration_steps = 30.0;

    Scene scene;
    scene.vehicle_ids.resize(n);
    for (int i = 0; i < n; ++i) scene.vehicle_ids[i] = i + 1;
    scene.dims.assign(n, {5.0, 1.8});
    scene.history = Tensor3(params.history_steps, 2, n);
    scene.future = Tensor3(params.future_steps, 2, n);
    scene.ego_index = 0;
    scene.t0 = 0.0;

    for (int step = 0; step < total_steps; ++step) {
      for (int i = 0; i < n; ++i) {
        if (step < params.history_steps) {
          scene.history.at(step, 0, i) = vehs[i].x;
          scene.history.at(step, 1, i) = vehs[i].y;
        } else {
          scene.future.at(step - params.history_steps, 0, i) = vehs[i].x;
          scene.future.at(step - params.history_steps, 1, i) = vehs[i].y;
        }
      }
      // advance dynamics
      for (int i = 0; i < n; ++i) {
        Veh& v = vehs[i];
        // nearest leader in the same lane
        const Veh* lead = nullptr;
        for (int j = 0; j < n; ++j) {
          if (j == i || vehs[j].lane != v.lane || vehs[j].x <= v.x) continue;
          if (!lead || vehs[j].x < lead->x) lead = &vehs[j];
        }
        double a;
        if (i == 0 && n >= 1 && !lead) {
          // free leader with oscillating target speed
          const double target = v.desired + osc_amp * std::sin(2.0 * M_PI * step * kSampleDt / osc_period);
          a = std::clamp(1.2 * (target - v.v), -idm.b_comf, idm.a_max);
        } else if (lead) {
          a = idm_accel(idm, v.v, v.desired, true, lead->x - v.x - 5.0, lead->v);
        } else {
          const double target = v.desired + osc_amp * std::sin(2.0 * M_PI * step * kSampleDt / osc_period);
          a = std::clamp(1.2 * (target - v.v), -idm.b_comf, idm.a_max);
        }
        v.v = std::max(0.0, v.v + a * kSampleDt);
        v.x += v.v * kSampleDt;
      }
      // lane-change kinematics for vehicle 0
      Veh& ego = vehs[0];
      if (step >= lc_start && step < lc_start + static_cast<int>(lc_duration_steps)) {
        const double p = (step - lc_start + 1) / lc_duration_steps;
        const int from = 0 % 2;
        const double y0 = from * 3.5, y1 = (1 - from) * 3.5;
        ego.y = y0 + (y1 - y0) * 0.5 * (1.0 - std::cos(M_PI * p));
        if (p >= 1.0) ego.lane = 1 - from;
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

Scene truncate_future(const Scene& scene, int f_steps) {
  if (f_steps > scene.future_steps()) {
    throw std::invalid_argument("truncate_future: requested horizon exceeds stored future");
  }
  Scene out = scene;
  out.future = Tensor3(f_steps, 2, scene.num_vehicles());
  for (int f = 0; f < f_steps; ++f) {
    for (int d = 0; d < 2; ++d) {
      for (int i = 0; i < scene.num_vehicles(); ++i) {
        out.future.at(f, d, i) = scene.future.at(f, d, i);
      }
    }
  }
  return out;
}

SceneSplit split_scenes(const std::vector<Scene>& scenes, uint64_t seed) {
  std::vector<size_t> order(scenes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomStream rng(derive_seed(seed, 99));
  rng.shuffle(order);
  SceneSplit split;
  const size_t n_test = scenes.size() / 5;
  const size_t n_rest = scenes.size() - n_test;
  const size_t n_val = (n_rest * 2) / 5;
  for (size_t k = 0; k < order.size(); ++k) {
    const Scene& s = scenes[order[k]];
    if (k < n_test) split.test.push_back(s);
    else if (k < n_test + n_val) split.val.push_back(s);
    else split.train.push_back(s);
  }
  return split;
}

}  // namespace lcew
