#include "okt/grid/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace okt::grid {

namespace {
constexpr char kMagic[4] = {'O', 'K', 'T', '1'};
}

parcel::Bytes encode_checkpoint(const Octree& tree, std::uint64_t step, double time, const std::string& meta) {
  const auto& cfg = tree.config();
  parcel::Writer w;
  w.put_raw(kMagic, 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.n));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.ghost));
  w.put<std::uint32_t>(tree.level_count());
  w.put<double>(cfg.length);
  for (double o : cfg.origin) w.put<double>(o);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(cfg.boundary));
  w.put<std::uint64_t>(step);
  w.put<double>(time);
  w.put_string(meta);
  w.put<std::uint64_t>(tree.nodes().size());
  for (const auto& [k, nd] : tree.nodes()) {
    w.put<std::uint32_t>(k.level);
    for (auto c : k.idx) w.put<std::uint32_t>(c);
    w.put<std::uint64_t>(k.sfc());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(nd.locality));
    w.put<std::uint8_t>(nd.leaf ? 1 : 0);
    for (int f = 0; f < kNumFields; ++f)
      w.put_array(std::span<const double>(nd.grid.field(f), nd.grid.cells_stored()));
  }
  return std::move(w).take();
}

Checkpoint decode_checkpoint(const parcel::Bytes& bytes) {
  try {
    parcel::Reader r(bytes);
    char magic[4];
    r.get_raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw CheckpointError("not a checkpoint (bad magic)");
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion)
      throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported");
    GridConfig cfg;
    cfg.n = static_cast<int>(r.get<std::uint32_t>());
    cfg.ghost = static_cast<int>(r.get<std::uint32_t>());
    const auto levels = r.get<std::uint32_t>();
    cfg.length = r.get<double>();
    for (double& o : cfg.origin) o = r.get<double>();
    const auto b = r.get<std::uint8_t>();
    if (b > 2) throw CheckpointError("bad boundary code");
    cfg.boundary = static_cast<Boundary>(b);
    Checkpoint cp{Octree(cfg), 0, 0.0, {}};
    cp.step = r.get<std::uint64_t>();
    cp.time = r.get<double>();
    cp.meta = r.get_string();
    const auto count = r.get<std::uint64_t>();
    auto& nodes = cp.tree.nodes();
    nodes.clear();
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto level = r.get<std::uint32_t>();
      Index3 idx;
      for (auto& c : idx) c = r.get<std::uint32_t>();
      TreeNode nd;
      nd.key = TreeKey(level, idx);
      if (r.get<std::uint64_t>() != nd.key.sfc()) throw CheckpointError("sfc mismatch for " + nd.key.str());
      nd.locality = static_cast<int>(r.get<std::uint32_t>());
      nd.leaf = r.get<std::uint8_t>() != 0;
      nd.grid = cp.tree.make_grid(nd.key);
      for (int f = 0; f < kNumFields; ++f) r.get_array_into(nd.grid.field(f), nd.grid.cells_stored());
      nodes.emplace(nd.key, std::move(nd));
    }
    if (!r.done()) throw CheckpointError("trailing bytes in checkpoint");
    if (nodes.empty() || cp.tree.level_count() != levels) throw CheckpointError("level count mismatch");
    for (const auto& [k, nd] : nodes) {
      if (k.level > 0 && !cp.tree.contains(k.parent())) throw CheckpointError("orphan node " + k.str());
      if (!nd.leaf)
        for (int c = 0; c < 8; ++c)
          if (!cp.tree.contains(k.child(c))) throw CheckpointError("incomplete children at " + k.str());
    }
    return cp;
  } catch (const parcel::SerializationError& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
}

void write_checkpoint(const std::string& path, const Octree& tree, std::uint64_t step, double time,
                      const std::string& meta) {
  const auto bytes = encode_checkpoint(tree, step, time, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  parcel::Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace okt::grid
