#include "partbench/percept/cloud.hpp"

#include <fstream>
#include <numeric>

#include "json.hpp"

namespace partbench::percept {

Cloud backproject_merge(const std::vector<DepthColorImage>& images,
                        const std::vector<CameraSpec>& cameras) {
  if (images.empty() || images.size() != cameras.size())
    throw ShapeError("backproject_merge: image/camera count mismatch");
  Eigen::Index total = 0;
  for (const auto& img : images)
    for (double d : img.depth) total += (d >= 0.0) ? 1 : 0;
  if (total == 0) throw InputError("empty point cloud: no rays hit the scene");

  Cloud cloud;
  cloud.points.resize(total, 6);
  cloud.tags.resize(size_t(total));
  Eigen::Index row = 0;
  for (size_t c = 0; c < images.size(); ++c) {
    const auto& img = images[c];
    const auto& cam = cameras[c];
    for (int iy = 0; iy < img.height; ++iy) {
      for (int ix = 0; ix < img.width; ++ix) {
        const size_t idx = size_t(iy) * size_t(img.width) + size_t(ix);
        if (img.depth[idx] < 0.0) continue;
        const Vec3 p = cam.backproject(ix + 0.5, iy + 0.5, img.depth[idx]);
        cloud.points.row(row) << p.x(), p.y(), p.z(), img.color[idx].x(), img.color[idx].y(), img.color[idx].z();
        cloud.tags[size_t(row)] = img.tag[idx];
        ++row;
      }
    }
  }
  return cloud;
}

static std::vector<int> fps_indices(const Eigen::MatrixXd& xyz, int n, Rng& rng) {
  const int total = int(xyz.rows());
  std::vector<int> picked;
  picked.reserve(size_t(n));
  const int k = std::min(n, total);
  int cur = int(rng.uniform_int(0, total - 1));
  picked.push_back(cur);
  Eigen::VectorXd best_d2 =
      (xyz.leftCols<3>().rowwise() - xyz.row(cur).head<3>()).rowwise().squaredNorm();
  while (int(picked.size()) < k) {
    int far_idx = 0;
    best_d2.maxCoeff(&far_idx);
    picked.push_back(far_idx);
    const Eigen::VectorXd d2 =
        (xyz.leftCols<3>().rowwise() - xyz.row(far_idx).head<3>()).rowwise().squaredNorm();
    best_d2 = best_d2.cwiseMin(d2);
  }
  while (int(picked.size()) < n) picked.push_back(int(rng.uniform_int(0, total - 1)));
  return picked;
}

std::vector<int> sample_indices(const Eigen::MatrixXd& xyz, int n, SampleMethod method, uint64_t seed) {
  const int total = int(xyz.rows());
  if (total == 0) throw InputError("sample_to_n on an empty cloud");
  Rng rng(mix_seed(seed, 0xd05a));
  if (method == SampleMethod::Fps) return fps_indices(xyz, n, rng);

  std::vector<int> idx(static_cast<size_t>(total), 0);
  std::iota(idx.begin(), idx.end(), 0);
  const int k = std::min(n, total);
  for (int i = 0; i < k; ++i) {
    const int j = int(rng.uniform_int(i, total - 1));
    std::swap(idx[size_t(i)], idx[size_t(j)]);
  }
  idx.resize(size_t(k));
  while (int(idx.size()) < n) idx.push_back(int(rng.uniform_int(0, total - 1)));
  return idx;
}

Cloud sample_to_n(const Cloud& cloud, int n, SampleMethod method, uint64_t seed) {
  const std::vector<int> idx = sample_indices(cloud.points, n, method, seed);
  Cloud out;
  out.points.resize(n, 6);
  out.tags.resize(size_t(n));
  for (int i = 0; i < n; ++i) {
    out.points.row(i) = cloud.points.row(idx[size_t(i)]);
    out.tags[size_t(i)] = cloud.tags[size_t(idx[size_t(i)])];
  }
  return out;
}

void save_cloud(const std::string& path, const Eigen::MatrixXd& points,
                const std::vector<CameraSpec>& cameras) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  const uint32_t count = uint32_t(points.rows());
  f.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    float rec[6];
    for (int j = 0; j < 6; ++j) rec[j] = float(points(i, j));
    f.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  if (!f) throw IoError("write failed: " + path);

  nlohmann::ordered_json side;
  side["format"] = "partbench-cloud";
  side["version"] = 1;
  side["count"] = count;
  side["cameras"] = nlohmann::ordered_json::array();
  for (const auto& cam : cameras) {
    nlohmann::ordered_json c;
    c["width"] = cam.width;
    c["height"] = cam.height;
    c["fx"] = cam.fx;
    c["fy"] = cam.fy;
    c["cx"] = cam.cx;
    c["cy"] = cam.cy;
    c["position"] = {cam.position().x(), cam.position().y(), cam.position().z()};
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (int col = 0; col < 3; ++col)
      for (int row = 0; row < 3; ++row) r.push_back(cam.pose.linear()(row, col));
    c["rotation"] = r;
    side["cameras"].push_back(c);
  }
  std::ofstream sf(path + ".json");
  if (!sf) throw IoError("cannot write " + path + ".json");
  sf << side.dump(2) << "\n";
}

Eigen::MatrixXd load_cloud(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  uint32_t count = 0;
  f.read(reinterpret_cast<char*>(&count), sizeof(count));
  Eigen::MatrixXd points(count, 6);
  for (uint32_t i = 0; i < count; ++i) {
    float rec[6];
    f.read(reinterpret_cast<char*>(rec), sizeof(rec));
    for (int j = 0; j < 6; ++j) points(i, j) = rec[j];
  }
  if (!f) throw IoError("truncated cloud file: " + path);
  return points;
}

}  // namespace partbench::percept
