#include "mwht/grid.hpp"

#include <cmath>
#include <string>

namespace mwht {

void GridSpec::validate() const {
  if (nx < 3 || ny < 3) throw DomainError("grid must be at least 3x3 cells");
  if (!(dx > 0.0) || !(dy > 0.0)) throw DomainError("cell size must be positive");
  if (dx != dy) throw DomainError("grid cells must be square (dx == dy)");
  if (!(courant > 0.0) || !(courant < 1.0 / std::sqrt(2.0)))
    throw DomainError("courant factor must lie in (0, 1/sqrt(2)), got " + std::to_string(courant));
  if (pml_thickness < 8) throw DomainError("pml_thickness must be at least 8 cells");
}

}  // namespace mwht
