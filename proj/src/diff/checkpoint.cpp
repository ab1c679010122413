#include "partbench/diff/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace partbench::diff {

static constexpr char kMagic[8] = {'P', 'B', 'C', 'K', 'P', 'T', '0', '1'};

void save_checkpoint(const std::string& path, const ParamStore& store, const nlohmann::json& metadata) {
  nlohmann::json meta = metadata;
  nlohmann::json table = nlohmann::json::array();
  uint64_t offset = 0;
  for (const Param* p : store.all()) {
    table.push_back({{"name", p->name},
                     {"rows", p->value.rows()},
                     {"cols", p->value.cols()},
                     {"offset", offset}});
    offset += uint64_t(p->value.size()) * sizeof(double);
  }
  meta["tensors"] = table;
  const std::string meta_str = meta.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write checkpoint: " + path);
  f.write(kMagic, 8);
  const uint64_t meta_len = meta_str.size();
  f.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
  f.write(meta_str.data(), std::streamsize(meta_str.size()));
  for (const Param* p : store.all())
    f.write(reinterpret_cast<const char*>(p->value.data()),
            std::streamsize(sizeof(double) * size_t(p->value.size())));
  if (!f) throw IoError("write failed: " + path);
}

static nlohmann::json read_meta(std::ifstream& f, const std::string& path) {
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad checkpoint magic: " + path);
  uint64_t meta_len = 0;
  f.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
  std::string meta_str(meta_len, '\0');
  f.read(meta_str.data(), std::streamsize(meta_len));
  if (!f) throw IoError("truncated checkpoint: " + path);
  return nlohmann::json::parse(meta_str);
}

nlohmann::json read_checkpoint_metadata(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read checkpoint: " + path);
  return read_meta(f, path);
}

nlohmann::json load_checkpoint(const std::string& path, ParamStore& store) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read checkpoint: " + path);
  nlohmann::json meta = read_meta(f, path);
  const std::streampos payload_start = f.tellg();
  for (const auto& entry : meta.at("tensors")) {
    const std::string name = entry.at("name");
    Param* p = store.find(name);
    if (!p) throw ShapeError("checkpoint tensor not in store: " + name);
    if (p->value.rows() != entry.at("rows").get<Eigen::Index>() ||
        p->value.cols() != entry.at("cols").get<Eigen::Index>())
      throw ShapeError("checkpoint shape mismatch for " + name);
    f.seekg(payload_start + std::streampos(entry.at("offset").get<uint64_t>()));
    f.read(reinterpret_cast<char*>(p->value.data()),
           std::streamsize(sizeof(double) * size_t(p->value.size())));
    if (!f) throw IoError("truncated payload in " + path);
  }
  return meta;
}

}  // namespace partbench::diff
