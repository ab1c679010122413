#include "partbench/bench/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "partbench/bench/evaluate.hpp"
#include "partbench/bench/experiment.hpp"
#include "partbench/learn/distill.hpp"

namespace partbench::bench {

using diff::Mat;
using diff::Tape;

namespace {

Mat3 random_rotation(Rng& rng) {
  const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  return Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), axis).toRotationMatrix();
}

sim::PartBBox random_bbox(Rng& rng) {
  Obb box;
  box.center = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  box.axes = random_rotation(rng);
  box.half = Vec3(rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3));
  sim::PartBBox bbox;
  bbox.corners = box.corners();
  bbox.part_class = sim::PartClass::Handle;
  bbox.part_id = 0;
  return bbox;
}

sim::EnvState random_state(Rng& rng, int n_q = 11) {
  sim::EnvState s;
  s.qp.resize(n_q);
  s.qv.resize(n_q);
  for (int i = 0; i < n_q; ++i) {
    s.qp[i] = rng.uniform(-1, 1);
    s.qv[i] = rng.uniform(-1, 1);
  }
  s.x = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  s.r = random_rotation(rng);
  s.qp.segment<3>(0) = s.x;
  s.qp.segment<3>(3) = rot_to_euler(s.r);
  s.b_gaparts.push_back(random_bbox(rng));
  s.b_gaparts.push_back(random_bbox(rng));
  s.joint_coords.resize(1);
  s.joint_coords[0] = rng.uniform(0, 1);
  return s;
}

// mirrors the embedding rules of EnvState under a rigid scene motion
sim::EnvState transform_state(const sim::EnvState& s, const Pose& g) {
  sim::EnvState out = s;
  out.x = g * s.x;
  out.r = g.linear() * s.r;
  out.qp.segment<3>(0) = out.x;
  out.qp.segment<3>(3) = rot_to_euler(out.r);
  out.qv.segment<3>(0) = g.linear() * s.qv.segment<3>(0);
  for (auto& bbox : out.b_gaparts)
    for (auto& c : bbox.corners) c = g * c;
  return out;
}

}  // namespace

std::string check_canonicalization_invariance(int n_scenes, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x1c));
  double worst = 0.0;
  for (int i = 0; i < n_scenes; ++i) {
    const sim::EnvState s = random_state(rng);
    Pose g = Pose::Identity();
    g.linear() = random_rotation(rng);
    g.translation() = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const sim::EnvState sg = transform_state(s, g);

    const auto ca = canon::canonicalize_state(s, canon::part_frame(s.b_gaparts[0]));
    const auto cb = canon::canonicalize_state(sg, canon::part_frame(sg.b_gaparts[0]));
    const Eigen::VectorXd da = learn::flatten_state(ca), db = learn::flatten_state(cb);
    worst = std::max(worst, (da - db).cwiseAbs().maxCoeff());
  }
  if (worst >= 1e-9)
    return "canonicalized states differ by " + std::to_string(worst) + " under rigid motion";
  return {};
}

std::string check_reward_units() {
  std::ostringstream err;
  Rng rng(41);
  const sim::PartBBox handle = random_bbox(rng);
  const Mat3 axes = handle.edge_axes();
  Mat3 aligned, orthogonal, opposed;
  aligned.col(0) = axes.col(2);
  aligned.col(1) = axes.col(1);
  aligned.col(2) = -axes.col(0);
  orthogonal.col(0) = axes.col(1);
  orthogonal.col(1) = axes.col(0);
  orthogonal.col(2) = -axes.col(2);
  opposed.col(0) = axes.col(2);
  opposed.col(1) = -axes.col(1);
  opposed.col(2) = axes.col(0);
  if (std::abs(canon::reward_rotation(aligned, handle) - 1.0) > 1e-12) err << "R_rot aligned != 1; ";
  if (std::abs(canon::reward_rotation(orthogonal, handle)) > 1e-12) err << "R_rot orthogonal != 0; ";
  if (std::abs(canon::reward_rotation(opposed, handle) + 1.0) > 1e-12) err << "R_rot opposed != -1; ";

  const Vec3 c(0.3, -0.2, 0.9);
  if (canon::reward_distance(c, c, 1.0) != 0.0) err << "R_dist at contact != 0; ";
  if (std::abs(canon::reward_distance(Vec3(0.5, 0, 0), Vec3::Zero(), 1.0) + 0.5) > 1e-12)
    err << "R_dist(0.5, df=1) != -0.5; ";
  if (std::abs(canon::reward_distance(Vec3(0.5, 0, 0), Vec3::Zero(), 0.5) + 0.25) > 1e-12)
    err << "R_dist(0.5, df=0.5) != -0.25; ";

  for (double ratio : {0.0, 0.3, 1.0})
    if (canon::discount_factor(ratio, 0.0) != 1.0) err << "d_f != 1 at lambda_df 0; ";
  if (canon::discount_factor(0.0, 2.0) != 1.0) err << "d_f != 1 at ratio 0; ";
  if (std::abs(canon::discount_factor(1.0, 1.0) - std::exp(-1.0)) > 1e-12) err << "d_f(1,1) != 1/e; ";

  struct Expected {
    sim::TaskClass task;
    double r, d, p, t, df;
  };
  const Expected table[] = {
      {sim::TaskClass::OpenDoor, 0.2, 2.0, 1.0, 0.0, 1.0},
      {sim::TaskClass::OpenDrawer, 0.2, 1.3, 1.0, 0.0, 2.0},
      {sim::TaskClass::CloseDoor, 0.0, 1.0, 1.0, 0.0, 0.0},
      {sim::TaskClass::CloseDrawer, 0.0, 1.0, 1.0, 0.0, 0.0},
      {sim::TaskClass::PressButton, 0.0, 1.0, 100.0, 10.0, 0.0},
      {sim::TaskClass::GraspHandle, 0.2, 1.0, 0.0, 1.0, 0.0},
  };
  for (const auto& e : table) {
    const canon::RewardWeights w = sim::default_reward_weights(e.task);
    if (w.lambda_r != e.r || w.lambda_d != e.d || w.lambda_p != e.p || w.lambda_t != e.t ||
        w.lambda_df != e.df)
      err << "weight table mismatch for " << sim::task_class_name(e.task) << "; ";
  }
  return err.str();
}

std::string check_gae_oracle(int n_trajectories, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x6ae));
  double worst = 0.0;
  for (int k = 0; k < n_trajectories; ++k) {
    const int t_max = int(rng.uniform_int(3, 20));
    const int n_env = int(rng.uniform_int(1, 4));
    const double gamma = (k % 3 == 0) ? 1.0 : rng.uniform(0.9, 0.999);
    const double lambda = (k % 4 == 0) ? 0.0 : rng.uniform(0.9, 1.0);
    Eigen::MatrixXd r(t_max, n_env), v(t_max, n_env), d(t_max, n_env);
    Eigen::RowVectorXd boot(n_env);
    for (int t = 0; t < t_max; ++t)
      for (int e = 0; e < n_env; ++e) {
        r(t, e) = rng.normal();
        v(t, e) = rng.normal();
        d(t, e) = rng.uniform() < 0.15 ? 1.0 : 0.0;
      }
    for (int e = 0; e < n_env; ++e) boot[e] = rng.normal();

    Eigen::MatrixXd adv, ret;
    learn::gae(r, v, d, boot, gamma, lambda, adv, ret);

    // brute-force double sum with episode cutting
    for (int e = 0; e < n_env; ++e)
      for (int t = 0; t < t_max; ++t) {
        double acc = 0.0, w = 1.0;
        for (int l = 0; t + l < t_max; ++l) {
          const int u = t + l;
          const double next_v = (u + 1 < t_max) ? v(u + 1, e) : boot[e];
          const double delta = r(u, e) + gamma * next_v * (1.0 - d(u, e)) - v(u, e);
          acc += w * delta;
          if (d(u, e) > 0.5) break;
          w *= gamma * lambda;
        }
        worst = std::max(worst, std::abs(acc - adv(t, e)));
        worst = std::max(worst, std::abs(acc + v(t, e) - ret(t, e)));
      }
  }
  if (worst >= 1e-10) return "GAE deviates from the brute-force sum by " + std::to_string(worst);
  return {};
}

std::string check_grl_exactness(uint64_t seed) {
  Rng rng(mix_seed(seed, 0x621));
  for (double lambda : {0.0, 0.5, 1.0, 2.5}) {
    diff::ParamStore store;
    diff::Param& x = store.add("x", 4, 5);
    Mat upstream(4, 5);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < 5; ++j) {
        x.value(i, j) = rng.normal();
        upstream(i, j) = rng.normal();
      }
    Tape tape;
    Tape::Id xn = tape.leaf(x);
    Tape::Id out = tape.grl(xn, lambda);
    if (tape.val(out) != x.value) return "GRL forward is not the identity";
    Tape::Id loss = tape.sum(tape.mul(out, tape.constant(upstream)));
    store.zero_grads();
    tape.backward(loss);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < 5; ++j)
        if (x.grad(i, j) != -(lambda * upstream(i, j)))
          return "GRL backward != -lambda * upstream at lambda " + std::to_string(lambda);
  }
  return {};
}

// ---------------------------------------------------------------------------
// finite-difference gradient checks
// ---------------------------------------------------------------------------

namespace {

struct FdReport {
  double max_rel = 0.0;
  int entries = 0;
};

// Central finite differences over randomly chosen parameter entries.
// `run(grad)` must rebuild the computation from current parameter values.
void fd_check(diff::ParamStore& store, const std::function<double(bool)>& run, Rng& rng,
              int entries_per_param, FdReport& rep) {
  store.zero_grads();
  run(true);
  std::vector<Mat> analytic;
  for (const diff::Param* p : std::as_const(store).all()) analytic.push_back(p->grad);

  const double h = 1e-5;
  size_t pi = 0;
  for (diff::Param* p : store.all()) {
    const Eigen::Index n = p->value.size();
    const int checks = int(std::min<Eigen::Index>(n, entries_per_param));
    for (int c = 0; c < checks; ++c) {
      const Eigen::Index k = Eigen::Index(rng.uniform_int(0, n - 1));
      const double orig = p->value.data()[k];
      p->value.data()[k] = orig + h;
      const double fp = run(false);
      p->value.data()[k] = orig - h;
      const double fm = run(false);
      p->value.data()[k] = orig;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = analytic[pi].data()[k];
      const double rel = std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1.0});
      rep.max_rel = std::max(rep.max_rel, rel);
      rep.entries++;
    }
    ++pi;
  }
}

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

void fill_random(diff::Param& p, Rng& rng, double scale = 0.7) {
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = scale * rng.normal();
}

}  // namespace

std::string check_gradients(int trials, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x6d));
  FdReport rep;

  for (int trial = 0; trial < trials; ++trial) {
    // MLP forward/backward
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      diff::Mlp mlp = diff::make_mlp(store, "mlp", 5, {8, 6}, 3, diff::Activation::Elu, init);
      const Mat input = random_mat(init, 4, 5);
      const Mat proj = random_mat(init, 4, 3);
      auto run = [&](bool grad) {
        Tape tape;
        Tape::Id out = mlp_forward(tape, mlp, tape.constant(input));
        Tape::Id loss = tape.sum(tape.mul(out, tape.constant(proj)));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 4, rep);
    }
    // Gaussian log-prob + entropy w.r.t. mean-producing net and log-std
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      diff::Mlp mlp = diff::make_mlp(store, "actor", 4, {6}, 3, diff::Activation::Elu, init);
      diff::GaussianHead head = diff::make_gaussian_head(store, "policy", 3);
      fill_random(*head.log_std, init, 0.2);
      const Mat input = random_mat(init, 5, 4);
      const Mat actions = random_mat(init, 5, 3);
      const Mat proj = random_mat(init, 5, 1);
      auto run = [&](bool grad) {
        Tape tape;
        Tape::Id mean = mlp_forward(tape, mlp, tape.constant(input));
        Tape::Id logp = diff::gaussian_log_prob_node(tape, mean, tape.leaf(*head.log_std), actions);
        Tape::Id ent = diff::gaussian_entropy_node(tape, tape.leaf(*head.log_std));
        Tape::Id loss = tape.add(tape.sum(tape.mul(logp, tape.constant(proj))), tape.scale(ent, 0.37));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 4, rep);
    }
    // tanh action scaling
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      diff::Param& raw = store.add("raw", 4, 7);
      fill_random(raw, init, 1.5);
      const diff::ActionScaler scaler = learn::default_action_scaler(0.08);
      const Mat proj = random_mat(init, 4, 7);
      auto run = [&](bool grad) {
        Tape tape;
        Tape::Id out = scaler.scale_node(tape, tape.leaf(raw));
        Tape::Id loss = tape.sum(tape.mul(out, tape.constant(proj)));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 4, rep);
    }
    // GRL machinery at lambda = -1 (backward equals the identity gradient, so
    // finite differences apply; the sign/scale contract has its own check)
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      diff::Param& x = store.add("x", 3, 4);
      fill_random(x, init);
      const Mat proj = random_mat(init, 3, 4);
      auto run = [&](bool grad) {
        Tape tape;
        Tape::Id out = tape.grl(tape.leaf(x), -1.0);
        Tape::Id loss = tape.sum(tape.mul(tape.tanh(out), tape.constant(proj)));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 4, rep);
    }
    // batch voxelization w.r.t. point features (positions kept away from
    // voxel boundaries so the assignment is locally constant)
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      encoder::VoxelGridSpec spec;
      spec.lo = Vec3(0, 0, 0);
      spec.hi = Vec3(1, 1, 1);
      spec.resolution = 5;
      diff::Param& pts = store.add("points", 12, 6);
      const double cell = 0.2;
      for (Eigen::Index i = 0; i < 12; ++i) {
        for (int a = 0; a < 3; ++a) {
          const int c = int(init.uniform_int(0, 4));
          pts.value(i, a) = (c + init.uniform(0.15, 0.85)) * cell;
        }
        for (int a = 3; a < 6; ++a) pts.value(i, a) = init.uniform();
      }
      const std::vector<int> offsets{0, 7, 12};
      Mat proj;
      auto run = [&](bool grad) {
        Tape tape;
        auto grid = encoder::voxelize_batch_node(tape, tape.leaf(pts), offsets, spec);
        if (proj.size() == 0) proj = random_mat(init, tape.rows(grid.features), 6);
        Tape::Id loss = tape.sum(tape.mul(grid.features, tape.constant(proj)));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 6, rep);
    }
    // submanifold sparse convolution
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      std::vector<std::array<int, 4>> coords;
      for (int i = 0; i < 20; ++i)
        coords.push_back({int(init.uniform_int(0, 1)), int(init.uniform_int(0, 5)),
                          int(init.uniform_int(0, 5)), int(init.uniform_int(0, 5))});
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
      const encoder::ConvTopology topo = encoder::build_submanifold_topology(coords);
      diff::Param& feat = store.add("features", Eigen::Index(coords.size()), 3);
      fill_random(feat, init);
      encoder::SparseConvParams conv = encoder::make_sparse_conv(store, "conv", 3, 4, 27, init);
      const Mat proj = random_mat(init, Eigen::Index(coords.size()), 4);
      auto run = [&](bool grad) {
        Tape tape;
        Tape::Id out = encoder::sparse_conv(tape, tape.leaf(feat), topo, conv);
        Tape::Id loss = tape.sum(tape.mul(out, tape.constant(proj)));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 2, rep);
    }
    // full UNet on a toy cloud
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      encoder::VoxelGridSpec vspec;
      vspec.lo = Vec3(0, 0, 0);
      vspec.hi = Vec3(1, 1, 1);
      vspec.resolution = 8;
      encoder::UNetSpec uspec;
      uspec.depth = 2;
      uspec.channels = {2, 3, 4};
      uspec.out_dim = 3;
      uspec.in_dim = 6;
      encoder::UNetParams unet = encoder::make_unet(store, "unet", uspec, init);
      diff::Param& pts = store.add("points", 10, 6);
      const double cell = 1.0 / 8.0;
      for (Eigen::Index i = 0; i < 10; ++i) {
        for (int a = 0; a < 3; ++a) {
          const int c = int(init.uniform_int(0, 7));
          pts.value(i, a) = (c + init.uniform(0.2, 0.8)) * cell;
        }
        for (int a = 3; a < 6; ++a) pts.value(i, a) = init.uniform();
      }
      const std::vector<int> offsets{0, 5, 10};
      const Mat proj = random_mat(init, 10, 3);
      auto run = [&](bool grad) {
        Tape tape;
        auto grid = encoder::voxelize_batch_node(tape, tape.leaf(pts), offsets, vspec);
        Tape::Id out = encoder::unet_forward(tape, grid, unet);
        Tape::Id loss = tape.sum(tape.mul(out, tape.constant(proj)));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 1, rep);
    }
    // aggregate head (max-pool margins enforced by redraw)
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      diff::Mlp lift = diff::make_mlp(store, "lift", 4, {6}, 5, diff::Activation::Elu, init);
      diff::Param& feat = store.add("per_point", 10, 4);
      const std::vector<int> seg{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
      const Mat robot = random_mat(init, 2, 3);
      const Mat proj = random_mat(init, 2, 8);
      for (int attempt = 0; attempt < 100; ++attempt) {
        fill_random(feat, init);
        const Mat lifted = mlp_eval(lift, feat.value);
        double margin = 1e9;
        for (int s = 0; s < 2; ++s)
          for (Eigen::Index c = 0; c < lifted.cols(); ++c) {
            double best = -1e18, second = -1e18;
            for (Eigen::Index i = 0; i < lifted.rows(); ++i) {
              if (seg[size_t(i)] != s) continue;
              if (lifted(i, c) > best) {
                second = best;
                best = lifted(i, c);
              } else if (lifted(i, c) > second) {
                second = lifted(i, c);
              }
            }
            margin = std::min(margin, best - second);
          }
        if (margin > 1e-3) break;
      }
      auto run = [&](bool grad) {
        Tape tape;
        Tape::Id out = encoder::aggregate_head(tape, tape.leaf(feat), seg, 2, tape.constant(robot), lift);
        Tape::Id loss = tape.sum(tape.mul(out, tape.constant(proj)));
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 3, rep);
    }
    // domain classifier head (GRL at -1 for finite-difference comparability)
    {
      diff::ParamStore store;
      Rng init(rng.next_u64());
      encoder::DomainClassifier cls = encoder::make_domain_classifier(store, "dom", 4, 3, init);
      diff::Param& feat = store.add("per_point", 12, 4);
      fill_random(feat, init);
      const std::vector<int> mask_rows{0, 1, 2, 5, 6, 8, 9, 11};
      const std::vector<int> mask_seg{0, 0, 0, 0, 1, 1, 1, 1};
      const std::vector<int> labels{1, 2};
      auto run = [&](bool grad) {
        Tape tape;
        Tape::Id logits =
            encoder::domain_logits(tape, tape.leaf(feat), mask_rows, mask_seg, 2, -1.0, cls);
        Tape::Id loss = tape.softmax_xent_mean(logits, labels);
        if (grad) tape.backward(loss);
        return tape.val(loss)(0, 0);
      };
      fd_check(store, run, rng, 3, rep);
    }
  }

  if (rep.max_rel >= 1e-4)
    return "max finite-difference relative error " + std::to_string(rep.max_rel) + " over " +
           std::to_string(rep.entries) + " entries";
  return {};
}

// ---------------------------------------------------------------------------
// voxelization and sparse convolution oracles
// ---------------------------------------------------------------------------

namespace {

std::vector<Eigen::MatrixXd> random_clouds(Rng& rng, int batch, int lo_pts, int hi_pts) {
  std::vector<Eigen::MatrixXd> clouds;
  for (int b = 0; b < batch; ++b) {
    const int n = int(rng.uniform_int(lo_pts, hi_pts));
    Eigen::MatrixXd c(n, 6);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) c(i, a) = rng.uniform(-1.4, 1.4);
      for (int a = 3; a < 6; ++a) c(i, a) = rng.uniform();
    }
    clouds.push_back(std::move(c));
  }
  return clouds;
}

struct LoopedVoxelization {
  std::vector<std::array<int, 4>> coords;
  Mat features;
  std::vector<int> point_to_voxel;
};

LoopedVoxelization looped_voxelize(Tape& tape, const std::vector<Eigen::MatrixXd>& clouds,
                                   const encoder::VoxelGridSpec& spec) {
  LoopedVoxelization out;
  Eigen::Index feat_rows = 0;
  std::vector<encoder::SparseVoxelGrid> grids;
  for (const auto& cloud : clouds) {
    grids.push_back(encoder::voxelize_batch(tape, {&cloud}, spec));
    feat_rows += grids.back().num_voxels();
  }
  out.features.resize(feat_rows, tape.val(grids.front().features).cols());
  Eigen::Index at = 0;
  int point_base = 0;
  for (size_t b = 0; b < grids.size(); ++b) {
    for (const auto& c : grids[b].coords) out.coords.push_back({int(b), c[1], c[2], c[3]});
    out.features.middleRows(at, grids[b].num_voxels()) = tape.val(grids[b].features);
    for (int v : grids[b].point_to_voxel) out.point_to_voxel.push_back(v + int(at));
    at += grids[b].num_voxels();
    point_base += int(grids[b].point_to_voxel.size());
  }
  return out;
}

}  // namespace

std::string check_voxelization_equivalence(int n_batches, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x70c));
  encoder::VoxelGridSpec spec;
  for (int k = 0; k < n_batches; ++k) {
    const int batch = int(rng.uniform_int(2, 6));
    const auto clouds = random_clouds(rng, batch, 40, 200);
    std::vector<const Eigen::MatrixXd*> cloud_ptrs;
    for (const auto& c : clouds) cloud_ptrs.push_back(&c);

    Tape tape;
    const encoder::SparseVoxelGrid batched = encoder::voxelize_batch(tape, cloud_ptrs, spec);
    const LoopedVoxelization looped = looped_voxelize(tape, clouds, spec);

    if (batched.coords != looped.coords) return "batched/looped voxel coordinate sets differ";
    if (tape.val(batched.features) != looped.features)
      return "batched/looped voxel features are not bit-identical";
    if (batched.point_to_voxel != looped.point_to_voxel)
      return "batched/looped point-to-voxel maps differ";
  }
  return {};
}

std::string check_voxelization_speed(int batch, int reps, uint64_t seed, double* batched_s,
                                     double* looped_s) {
  Rng rng(mix_seed(seed, 0x70d));
  encoder::VoxelGridSpec spec;
  std::vector<Eigen::MatrixXd> clouds = random_clouds(rng, batch, 4096, 4096);
  std::vector<const Eigen::MatrixXd*> cloud_ptrs;
  for (const auto& c : clouds) cloud_ptrs.push_back(&c);

  auto now = []() { return std::chrono::steady_clock::now(); };
  double best_batched = 1e18, best_looped = 1e18;
  for (int r = 0; r < reps; ++r) {
    {
      Tape tape;
      const auto t0 = now();
      const auto grid = encoder::voxelize_batch(tape, cloud_ptrs, spec);
      (void)grid;
      best_batched = std::min(best_batched, std::chrono::duration<double>(now() - t0).count());
    }
    {
      Tape tape;
      const auto t0 = now();
      const auto looped = looped_voxelize(tape, clouds, spec);
      (void)looped;
      best_looped = std::min(best_looped, std::chrono::duration<double>(now() - t0).count());
    }
  }
  if (batched_s) *batched_s = best_batched;
  if (looped_s) *looped_s = best_looped;
  if (best_batched > best_looped)
    return "batched voxelization slower than looped: " + std::to_string(best_batched) + "s vs " +
           std::to_string(best_looped) + "s";
  return {};
}

std::string check_sparse_dense_oracle(int n_grids, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5d));
  for (int k = 0; k < n_grids; ++k) {
    const int res = 16, cin = 3, cout = 4, batch = 2;
    std::vector<std::array<int, 4>> coords;
    const int sites = int(rng.uniform_int(60, 140));
    for (int i = 0; i < sites; ++i)
      coords.push_back({int(rng.uniform_int(0, batch - 1)), int(rng.uniform_int(0, res - 1)),
                        int(rng.uniform_int(0, res - 1)), int(rng.uniform_int(0, res - 1))});
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    diff::ParamStore store;
    Rng init(rng.next_u64());
    diff::Param& feat = store.add("f", Eigen::Index(coords.size()), cin);
    fill_random(feat, init);
    encoder::SparseConvParams conv = encoder::make_sparse_conv(store, "c", cin, cout, 27, init);

    Tape tape;
    const encoder::ConvTopology topo = encoder::build_submanifold_topology(coords);
    const Mat sparse_out = tape.val(encoder::sparse_conv(tape, tape.leaf(feat), topo, conv));

    // dense reference: zero-filled volume, direct 27-tap summation at the
    // active sites only
    std::vector<double> dense(size_t(batch) * res * res * res * size_t(cin), 0.0);
    auto at = [&](int b, int x, int y, int z, int ch) -> double& {
      return dense[(((size_t(b) * res + size_t(x)) * res + size_t(y)) * res + size_t(z)) * size_t(cin) +
                   size_t(ch)];
    };
    for (size_t i = 0; i < coords.size(); ++i)
      for (int ch = 0; ch < cin; ++ch)
        at(coords[i][0], coords[i][1], coords[i][2], coords[i][3], ch) = feat.value(Eigen::Index(i), ch);

    for (size_t i = 0; i < coords.size(); ++i) {
      Eigen::RowVectorXd expect = conv.bias->value.row(0);
      expect += feat.value.row(Eigen::Index(i)) * conv.taps[0]->value;  // center tap
      int tap = 1;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const int x = coords[i][1] + dx, y = coords[i][2] + dy, z = coords[i][3] + dz;
            if (x >= 0 && x < res && y >= 0 && y < res && z >= 0 && z < res) {
              Eigen::RowVectorXd nb(cin);
              for (int ch = 0; ch < cin; ++ch) nb[ch] = at(coords[i][0], x, y, z, ch);
              expect += nb * conv.taps[size_t(tap)]->value;
            }
            ++tap;
          }
      const double diff = (sparse_out.row(Eigen::Index(i)) - expect).cwiseAbs().maxCoeff();
      if (diff >= 1e-5)
        return "sparse vs dense convolution differ by " + std::to_string(diff) + " at site " +
               std::to_string(i);
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// success boundaries, splits, solvability
// ---------------------------------------------------------------------------

std::string check_success_boundaries() {
  std::ostringstream err;
  const sim::SimParams params;

  auto eval_task = [&](sim::TaskClass tc, const std::string& category, double q) {
    const sim::ArticulatedObject obj = sim::generate_object(3, category, tc);
    const sim::TaskSpec task = sim::make_task_spec(tc);
    sim::Env env(&obj, task, params);
    sim::EnvState state = env.reset(0);
    state.joint_coords[0] = q;
    return sim::check_success(state, env.gripper(), obj, task, params);
  };

  {
    const double q30 = M_PI / 6.0;
    if (eval_task(sim::TaskClass::OpenDoor, "box_cabinet_door", q30)) err << "OpenDoor at 30 deg must fail; ";
    if (!eval_task(sim::TaskClass::OpenDoor, "box_cabinet_door", 30.1 * M_PI / 180.0))
      err << "OpenDoor at 30.1 deg must pass; ";
  }
  {
    const sim::ArticulatedObject obj = sim::generate_object(3, "box_cabinet_drawer", sim::TaskClass::OpenDrawer);
    const double range = obj.joints[0].hi - obj.joints[0].lo;
    if (eval_task(sim::TaskClass::OpenDrawer, "box_cabinet_drawer", 0.2 * range))
      err << "OpenDrawer at exactly 20% must fail; ";
    if (!eval_task(sim::TaskClass::OpenDrawer, "box_cabinet_drawer", 0.2 * range + 1e-9))
      err << "OpenDrawer just above 20% must pass; ";
  }
  {
    if (eval_task(sim::TaskClass::CloseDoor, "box_cabinet_door", M_PI / 180.0))
      err << "CloseDoor at exactly 1 deg must fail; ";
    if (!eval_task(sim::TaskClass::CloseDoor, "box_cabinet_door", M_PI / 180.0 - 1e-9))
      err << "CloseDoor just below 1 deg must pass; ";
  }
  {
    if (eval_task(sim::TaskClass::CloseDrawer, "box_cabinet_drawer", 0.01))
      err << "CloseDrawer at exactly 1 cm must fail; ";
    if (!eval_task(sim::TaskClass::CloseDrawer, "box_cabinet_drawer", 0.009))
      err << "CloseDrawer at 9 mm must pass; ";
  }
  {
    const sim::ArticulatedObject obj = sim::generate_object(3, "appliance_button", sim::TaskClass::PressButton);
    const double half_travel = 0.5 * (obj.joints[0].hi - obj.joints[0].lo);
    if (eval_task(sim::TaskClass::PressButton, "appliance_button", half_travel))
      err << "PressButton at exactly 50% must fail; ";
    if (!eval_task(sim::TaskClass::PressButton, "appliance_button", half_travel + 1e-9))
      err << "PressButton just above 50% must pass; ";
  }
  return err.str();
}

std::string check_split_disjointness(uint64_t seed) {
  for (sim::TaskClass tc : {sim::TaskClass::OpenDoor, sim::TaskClass::OpenDrawer,
                            sim::TaskClass::PressButton, sim::TaskClass::GraspHandle}) {
    const Splits s = make_splits(sim::categories_for_task(tc), tc, seed, SplitCounts{});
    for (const auto& vc : s.val_inter_categories)
      for (const auto& tcat : s.train_categories)
        if (vc == tcat) return "val-inter category also in training: " + vc;
    for (const auto& a : s.train)
      for (const auto& b : s.val_intra)
        if (a.category == b.category && a.seed == b.seed)
          return "train and val-intra share an instance: " + a.category;
    for (const auto& v : s.val_inter) {
      bool held_out = false;
      for (const auto& vc : s.val_inter_categories) held_out = held_out || v.category == vc;
      if (!held_out) return "val-inter instance from a non-held-out category";
    }
  }
  return {};
}

std::string check_solvability(int instances_per_task, uint64_t seed) {
  std::ostringstream err;
  const sim::SimParams params;
  for (sim::TaskClass tc : {sim::TaskClass::OpenDoor, sim::TaskClass::OpenDrawer,
                            sim::TaskClass::CloseDoor, sim::TaskClass::CloseDrawer,
                            sim::TaskClass::PressButton}) {
    SplitCounts counts;
    counts.train = instances_per_task;
    counts.val_intra = std::max(1, instances_per_task / 2);
    counts.val_inter = std::max(1, instances_per_task / 2);
    const Splits splits = make_splits(sim::categories_for_task(tc), tc, seed, counts);
    std::vector<InstanceRef> all = splits.train;
    all.insert(all.end(), splits.val_intra.begin(), splits.val_intra.end());
    all.insert(all.end(), splits.val_inter.begin(), splits.val_inter.end());
    const auto objects = generate_instances(all, tc);
    std::vector<const sim::ArticulatedObject*> obj_ptrs;
    for (const auto& o : objects) obj_ptrs.push_back(&o);

    const sim::TaskSpec task = sim::make_task_spec(tc);
    const EvalResult res = evaluate([]() { return std::make_unique<OracleAgent>(); }, obj_ptrs,
                                    task, params, 1, mix_seed(seed, 0x50), 1);
    if (res.successes != res.episodes) {
      err << sim::task_class_name(tc) << ": oracle solved " << res.successes << "/" << res.episodes;
      for (const auto& oc : res.per_object)
        if (oc.successes != oc.episodes) err << " [" << oc.category << "#" << oc.seed << "]";
      err << "; ";
    }
  }
  return err.str();
}

std::vector<CheckResult> run_selftest(uint64_t seed) {
  std::vector<CheckResult> results;
  auto run = [&](const std::string& name, const std::function<std::string()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = name;
    r.detail = fn();
    r.pass = r.detail.empty();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(r);
  };
  run("canonicalization-invariance", [&] { return check_canonicalization_invariance(200, seed); });
  run("reward-units", [] { return check_reward_units(); });
  run("gae-oracle", [&] { return check_gae_oracle(50, seed); });
  run("gradient-checks", [&] { return check_gradients(10, seed); });
  run("grl-exactness", [&] { return check_grl_exactness(seed); });
  run("voxelization-equivalence", [&] { return check_voxelization_equivalence(5, seed); });
  run("voxelization-speed", [&] { return check_voxelization_speed(16, 3, seed); });
  run("sparse-dense-conv", [&] { return check_sparse_dense_oracle(5, seed); });
  run("success-boundaries", [] { return check_success_boundaries(); });
  run("split-disjointness", [&] { return check_split_disjointness(seed); });
  run("solvability-oracle", [&] { return check_solvability(4, seed); });
  return results;
}

}  // namespace partbench::bench
