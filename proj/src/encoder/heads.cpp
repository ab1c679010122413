#include "partbench/encoder/heads.hpp"

namespace partbench::encoder {

using diff::Tape;

diff::Tape::Id aggregate_head(Tape& tape, Tape::Id per_point_features,
                              const std::vector<int>& point_seg, int batch,
                              Tape::Id robot_state, const diff::Mlp& lift) {
  if (tape.rows(robot_state) != batch) throw ShapeError("aggregate_head: robot state batch mismatch");
  Tape::Id lifted = mlp_forward(tape, lift, per_point_features);
  Tape::Id pooled = tape.segment_max(lifted, point_seg, batch);
  return tape.concat_cols(pooled, robot_state);
}

DomainClassifier make_domain_classifier(diff::ParamStore& store, const std::string& prefix,
                                        int feature_dim, int n_categories, Rng& rng) {
  DomainClassifier cls;
  cls.lift = make_mlp(store, prefix + ".lift", feature_dim, {}, 32, diff::Activation::Elu, rng);
  cls.head = make_mlp(store, prefix + ".head", 32, {32}, n_categories, diff::Activation::Elu, rng);
  cls.n_categories = n_categories;
  return cls;
}

DomainClassifier bind_domain_classifier(diff::ParamStore& store, const std::string& prefix,
                                        int n_categories) {
  DomainClassifier cls;
  cls.lift = bind_mlp(store, prefix + ".lift", diff::Activation::Elu);
  cls.head = bind_mlp(store, prefix + ".head", diff::Activation::Elu);
  cls.n_categories = n_categories;
  return cls;
}

diff::Tape::Id domain_logits(Tape& tape, Tape::Id per_point_features,
                             const std::vector<int>& mask_rows, const std::vector<int>& mask_seg,
                             int batch, double lambda_grl, const DomainClassifier& cls) {
  if (mask_rows.empty() || mask_rows.size() != mask_seg.size())
    throw InputError("domain_logits: empty or inconsistent part mask");
  std::vector<int> count(size_t(batch), 0);
  for (int s : mask_seg) count[size_t(s)]++;
  for (int b = 0; b < batch; ++b)
    if (count[size_t(b)] == 0)
      throw InputError("domain_logits: sample " + std::to_string(b) + " has an empty part mask");

  Tape::Id masked = tape.gather_rows(per_point_features, mask_rows);
  Tape::Id reversed = tape.grl(masked, lambda_grl);
  Tape::Id lifted = tape.elu(mlp_forward(tape, cls.lift, reversed));
  Tape::Id pooled = tape.segment_max(lifted, mask_seg, batch);
  return mlp_forward(tape, cls.head, pooled);
}

}  // namespace partbench::encoder
