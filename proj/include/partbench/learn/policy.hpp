#pragma once

#include "partbench/canon/frame.hpp"
#include "partbench/diff/checkpoint.hpp"
#include "partbench/diff/gaussian.hpp"
#include "partbench/diff/mlp.hpp"
#include "partbench/encoder/heads.hpp"
#include "partbench/encoder/unet.hpp"
#include "partbench/percept/observation.hpp"

namespace partbench::learn {

// Flattened oracle-state layout for the expert nets:
// [qp | qv | x | r (column-major 9) | bbox corners (24 per part)].
int state_dim(int n_q, int n_parts);
Eigen::VectorXd flatten_state(const sim::EnvState& state);

// Canonicalizes into the target part's current frame first (when enabled).
Eigen::VectorXd policy_state(const sim::EnvState& state, bool canonicalize);

// Default bounded action coordinates. Policies emit the target pose as an
// offset from the current gripper pose, expressed in the gripper's body
// frame: translation offsets within +-0.1 m, rotation offsets as angles in
// (-pi, pi), finger width in [0, w_max]. Body-frame offsets make the policy
// equivariant under rigid motion of the scene, which is what lets a
// part-canonicalized expert transfer across part placements.
diff::ActionScaler default_action_scaler(double finger_max_width);

// Target pose for the simulator from a scaled body-frame offset and the
// current gripper pose.
sim::Action compose_action(const Vec3& x, const Mat3& r, const Eigen::VectorXd& scaled);

// State-based actor-critic with a Gaussian head.
struct ExpertPolicy {
  diff::ParamStore store;
  diff::Mlp actor;
  diff::Mlp critic;
  diff::GaussianHead head;
  diff::ActionScaler scaler;
  int input_dim = 0;
  bool canonicalized = true;
  std::vector<int> hidden;

  Eigen::RowVectorXd log_std() const { return head.log_std->value.row(0); }
  diff::Mat act_mean(const diff::Mat& states) const { return mlp_eval(actor, states); }
  Eigen::VectorXd values(const diff::Mat& states) const { return mlp_eval(critic, states).col(0); }
  // scaled mean action for one state
  Eigen::VectorXd act_scaled(const Eigen::VectorXd& state) const;
};

ExpertPolicy make_expert_policy(int input_dim, const std::vector<int>& hidden,
                                double finger_max_width, bool canonicalized, uint64_t seed);
void save_expert(const std::string& path, const ExpertPolicy& policy, const nlohmann::json& extra);
ExpertPolicy load_expert(const std::string& path);

enum class EncoderKind { Sparse, Pointwise };

// Vision-side network shapes.
struct StudentSpec {
  EncoderKind encoder = EncoderKind::Pointwise;
  encoder::UNetSpec unet;                   // used when encoder == Sparse
  encoder::VoxelGridSpec voxel;
  int enc_points = 512;                     // pre-voxelization downsample budget
  std::vector<int> pointwise_hidden = {32}; // used when encoder == Pointwise
  int pointwise_out = 32;
  std::vector<int> lift_hidden = {};        // aggregate lift
  int lift_out = 64;
  std::vector<int> actor_hidden = {128, 64};
  int n_q = 11;
  int n_categories = 0;                     // > 0 enables the domain head
  double finger_max_width = 0.08;
};

// Point-cloud student: encoder backbone, pointwise aggregator, actor, and
// the domain classifier. The critic is absent: distillation updates only the
// backbone and the actor.
struct StudentPolicy {
  diff::ParamStore store;
  StudentSpec spec;
  diff::Mlp pointwise;   // when Pointwise
  encoder::UNetParams unet;  // when Sparse
  diff::Mlp lift;
  diff::Mlp actor;
  diff::GaussianHead head;
  diff::ActionScaler scaler;
  encoder::DomainClassifier domain;

  std::vector<diff::Param*> policy_params();  // encoder + lift + actor (+ log_std excluded)
  std::vector<diff::Param*> domain_params();
};

StudentPolicy make_student_policy(const StudentSpec& spec, uint64_t seed);
void save_student(const std::string& path, const StudentPolicy& policy, const nlohmann::json& extra);
StudentPolicy load_student(const std::string& path);

// Recorded forward pass over a batch of observations. Returns the per-point
// feature node (for the domain head), the segment assignment of the masked
// rows, and the raw/scaled action means.
struct StudentForward {
  diff::Tape::Id per_point = -1;
  diff::Tape::Id mean_raw = -1;
  diff::Tape::Id mean_scaled = -1;
  std::vector<int> mask_rows;
  std::vector<int> mask_seg;
  std::vector<int> labels;
};

StudentForward student_forward(diff::Tape& tape, const StudentPolicy& policy,
                               const std::vector<const percept::Observation*>& batch);

// Plain (non-recorded via throwaway tape) scaled mean actions.
diff::Mat student_act(const StudentPolicy& policy, const std::vector<const percept::Observation*>& batch);

}  // namespace partbench::learn
