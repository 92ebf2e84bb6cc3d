#include "mgan/array.hpp"

namespace mgan {

std::string shape_to_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  out += "]";
  return out;
}

void RealArray::require_finite(const char* what) const {
  if (!finite()) {
    throw NotFiniteError(std::string(what) + ": non-finite value in array " +
                         shape_to_string(shape_));
  }
}

void require_same_shape(const RealArray& a, const RealArray& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                     " vs " + shape_to_string(b.shape()));
  }
}

void require_rank(const RealArray& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     " array, got " + shape_to_string(a.shape()));
  }
}

}  // namespace mgan
