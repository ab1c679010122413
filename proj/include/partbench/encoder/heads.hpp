#pragma once

#include "partbench/diff/mlp.hpp"
#include "partbench/encoder/voxelize.hpp"

namespace partbench::encoder {

// Pointwise lift + symmetric max-pool + robot-state concat. The pooled
// vector is permutation invariant by construction. `point_seg` assigns each
// per-point row to its sample in the batch.
diff::Tape::Id aggregate_head(diff::Tape& tape, diff::Tape::Id per_point_features,
                              const std::vector<int>& point_seg, int batch,
                              diff::Tape::Id robot_state, const diff::Mlp& lift);

// Domain classifier behind the gradient reversal layer: masked per-point
// features pass through the GRL, a pointwise lift, a max-pool over the mask,
// and two MLP layers to per-category logits. Masks come from the simulator
// and are used only in training losses. An empty mask for any sample is a
// training-data error.
struct DomainClassifier {
  diff::Mlp lift;
  diff::Mlp head;
  int n_categories = 0;
};

DomainClassifier make_domain_classifier(diff::ParamStore& store, const std::string& prefix,
                                        int feature_dim, int n_categories, Rng& rng);
DomainClassifier bind_domain_classifier(diff::ParamStore& store, const std::string& prefix,
                                        int n_categories);

diff::Tape::Id domain_logits(diff::Tape& tape, diff::Tape::Id per_point_features,
                             const std::vector<int>& mask_rows, const std::vector<int>& mask_seg,
                             int batch, double lambda_grl, const DomainClassifier& cls);

}  // namespace partbench::encoder
