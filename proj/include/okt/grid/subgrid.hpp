#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace okt::grid {

enum Field : int {
  kRho = 0,
  kSx,
  kSy,
  kSz,
  kEgas,
  kTau,
  kFrac0,
  kFrac1,
  kFrac2,
  kFrac3,
  kFrac4,
  kNumFields
};
inline constexpr int kNumFracs = 5;

const char* field_name(int f);

// One cell's conserved state in field order.
using State = std::array<double, kNumFields>;

// Block of nx*ny*nz cells with `ghost` layers on every side, stored field by
// field; x is the slowest index. Octree nodes use cubes of n^3 cells; the
// block form also serves standalone pencil tests.
class SubGrid {
 public:
  SubGrid() = default;
  SubGrid(std::array<int, 3> dims, int ghost, double h, std::array<double, 3> origin, int level = 0);
  static SubGrid cube(int n, int ghost, double h, std::array<double, 3> origin, int level = 0) {
    return SubGrid({n, n, n}, ghost, h, origin, level);
  }

  const std::array<int, 3>& dims() const noexcept { return dims_; }
  int n(int d) const noexcept { return dims_[d]; }
  int ghost() const noexcept { return ghost_; }
  int level() const noexcept { return level_; }
  double h() const noexcept { return h_; }
  double cell_volume() const noexcept { return h_ * h_ * h_; }
  // Center of interior cell (0,0,0).
  const std::array<double, 3>& origin() const noexcept { return origin_; }
  bool empty() const noexcept { return data_.empty(); }

  // Stored extent including ghosts, and linear strides.
  int stored(int d) const noexcept { return dims_[d] + 2 * ghost_; }
  std::size_t cells_stored() const noexcept { return per_field_; }
  std::size_t interior_cells() const noexcept {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }
  std::ptrdiff_t stride(int d) const noexcept { return strides_[d]; }

  // i, j, k run over [-ghost, n + ghost).
  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>((i + ghost_) * strides_[0] + (j + ghost_) * strides_[1] + (k + ghost_));
  }
  double& at(int f, int i, int j, int k) noexcept { return data_[f * per_field_ + index(i, j, k)]; }
  double at(int f, int i, int j, int k) const noexcept { return data_[f * per_field_ + index(i, j, k)]; }
  double* field(int f) noexcept { return data_.data() + f * per_field_; }
  const double* field(int f) const noexcept { return data_.data() + f * per_field_; }

  State state(int i, int j, int k) const noexcept;
  void set_state(int i, int j, int k, const State& s) noexcept;

  bool interior(int i, int j, int k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] && k < dims_[2];
  }
  std::array<double, 3> center(int i, int j, int k) const noexcept {
    return {origin_[0] + i * h_, origin_[1] + j * h_, origin_[2] + k * h_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  // Volume-weighted interior totals per field.
  State totals() const;

  // Copies interior values only (sizes must match).
  void copy_interior_from(const SubGrid& other);

  bool operator==(const SubGrid& o) const;

 private:
  std::array<int, 3> dims_{0, 0, 0};
  int ghost_ = 0;
  int level_ = 0;
  double h_ = 1.0;
  std::array<double, 3> origin_{0, 0, 0};
  std::array<std::ptrdiff_t, 3> strides_{0, 0, 1};
  std::size_t per_field_ = 0;
  std::vector<double> data_;
};

}  // namespace okt::grid
