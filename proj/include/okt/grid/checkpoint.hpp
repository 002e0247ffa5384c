#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "okt/grid/octree.hpp"
#include "okt/parcel/serialize.hpp"

namespace okt::grid {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  Octree tree;
  std::uint64_t step = 0;
  double time = 0.0;
  // Free-form run metadata (key=value lines), carried verbatim.
  std::string meta;
};

// Layout: "OKT1", u32 version, u32 n, u32 g, u32 level count, f64 length,
// f64 origin[3], u8 boundary, u64 step, f64 time, string meta, u64 node count,
// then per node in (level, sfc) order: u32 level, u32 idx[3], u64 sfc,
// u32 locality, u8 leaf, and one f64 array per field over the stored block
// including ghosts.
parcel::Bytes encode_checkpoint(const Octree& tree, std::uint64_t step, double time, const std::string& meta = {});
Checkpoint decode_checkpoint(const parcel::Bytes& bytes);

void write_checkpoint(const std::string& path, const Octree& tree, std::uint64_t step, double time,
                      const std::string& meta = {});
Checkpoint read_checkpoint(const std::string& path);

}  // namespace okt::grid
