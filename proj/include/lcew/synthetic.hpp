#pragma once

#include <cstdint>
#include <vector>

#include "lcew/rng.hpp"
#include "lcew/trajdata.hpp"

namespace lcew {

// Smooth random scene for numeric checks: vehicles with random starting
// states and gently varying accelerations, sampled at 10 Hz.
Scene random_scene(RandomStream& rng, int n, int history_steps, int future_steps);

struct CorpusParams {
  int scenes = 200;
  int history_steps = 20;
  int future_steps = 40;
  int min_vehicles = 3;
  int max_vehicles = 7;
  uint64_t seed = 7;
};

// Interaction-rich two-lane corpus: car-following strings behind a leader
// with varying speed, plus a lane-changing vehicle cutting between lanes.
// Futures continue the same dynamics, so trained predictors have structure
// to exploit beyond position persistence.
std::vector<Scene> synthetic_corpus(const CorpusParams& params);

// Copy of the scene with the future truncated to f steps.
Scene truncate_future(const Scene& scene, int f_steps);

struct SceneSplit {
  std::vector<Scene> train;
  std::vector<Scene> val;
  std::vector<Scene> test;
};

// 20% test; 40% of the remaining training pool held out for validation.
SceneSplit split_scenes(const std::vector<Scene>& scenes, uint64_t seed);

}  // namespace lcew
