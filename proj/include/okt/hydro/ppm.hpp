#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "okt/hydro/eos.hpp"

namespace okt::hydro {

struct InsufficientGhost : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Face values along one line of `count` cells with `ghost` extra cells on
// each side (q[0] is the first ghost). Face f sits between cells f-1 and f,
// f = 0..count. left[f] is the value from cell f-1, right[f] from cell f.
// Parabolic profiles with monotonicity limiting; when the ghost layer is only
// 2 deep the two block faces use a limited linear profile instead, so that
// both blocks sharing such a face compute identical states from the same
// four cells.
void ppm_line(const double* q, int count, int ghost, double* left, double* right);

// Primitive face states of every face normal to `dir` of a block: faces are
// indexed (f, a, b) with f = 0..n_dir along dir and (a, b) the two other
// interior indices in increasing axis order.
struct FaceStates {
  int dir = 0;
  std::array<int, 3> faces{0, 0, 0};  // face counts per axis
  std::vector<Primitive> left, right;
  std::size_t index(int f, int a, int b) const {
    return (static_cast<std::size_t>(f) * faces[dir == 0 ? 1 : 0] + a) * faces[dir == 2 ? 1 : 2] + b;
  }
};

FaceStates ppm_reconstruct(const grid::SubGrid& g, int dir, const EosParams& eos);

}  // namespace okt::hydro
