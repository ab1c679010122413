#pragma once

namespace partbench::canon {

// Per-task reward mix. lambda_df shapes the distance-reward discount; zero
// disables it.
struct RewardWeights {
  double lambda_r = 0.0;   // rotation alignment
  double lambda_d = 1.0;   // tip-center-to-handle distance
  double lambda_p = 1.0;   // part motion toward the goal
  double lambda_t = 0.0;   // tips closure
  double lambda_df = 0.0;  // distance discount rate
};

}  // namespace partbench::canon
