#include "okt/grid/subgrid.hpp"

#include <stdexcept>

namespace okt::grid {

const char* field_name(int f) {
  static constexpr const char* names[kNumFields] = {"rho", "sx", "sy", "sz", "E", "tau",
                                                    "frac0", "frac1", "frac2", "frac3", "frac4"};
  if (f < 0 || f >= kNumFields) throw std::out_of_range("field index");
  return names[f];
}

SubGrid::SubGrid(std::array<int, 3> dims, int ghost, double h, std::array<double, 3> origin, int level)
    : dims_(dims), ghost_(ghost), level_(level), h_(h), origin_(origin) {
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("sub-grid extent must be positive");
  }
  if (ghost_ < 0) throw std::invalid_argument("ghost width must be non-negative");
  strides_[2] = 1;
  strides_[1] = stored(2);
  strides_[0] = static_cast<std::ptrdiff_t>(stored(1)) * stored(2);
  per_field_ = static_cast<std::size_t>(stored(0)) * stored(1) * stored(2);
  data_.assign(per_field_ * kNumFields, 0.0);
}

State SubGrid::state(int i, int j, int k) const noexcept {
  State s;
  const auto c = index(i, j, k);
  for (int f = 0; f < kNumFields; ++f) s[f] = data_[f * per_field_ + c];
  return s;
}

void SubGrid::set_state(int i, int j, int k, const State& s) noexcept {
  const auto c = index(i, j, k);
  for (int f = 0; f < kNumFields; ++f) data_[f * per_field_ + c] = s[f];
}

State SubGrid::totals() const {
  State t{};
  for (int f = 0; f < kNumFields; ++f) {
    double acc = 0.0;
    for (int i = 0; i < dims_[0]; ++i)
      for (int j = 0; j < dims_[1]; ++j)
        for (int k = 0; k < dims_[2]; ++k) acc += at(f, i, j, k);
    t[f] = acc * cell_volume();
  }
  return t;
}

void SubGrid::copy_interior_from(const SubGrid& other) {
  if (other.dims_ != dims_) throw std::invalid_argument("sub-grid shape mismatch");
  for (int f = 0; f < kNumFields; ++f)
    for (int i = 0; i < dims_[0]; ++i)
      for (int j = 0; j < dims_[1]; ++j)
        for (int k = 0; k < dims_[2]; ++k) at(f, i, j, k) = other.at(f, i, j, k);
}

bool SubGrid::operator==(const SubGrid& o) const {
  return dims_ == o.dims_ && ghost_ == o.ghost_ && level_ == o.level_ && h_ == o.h_ && origin_ == o.origin_ &&
         data_ == o.data_;
}

}  // namespace okt::grid
