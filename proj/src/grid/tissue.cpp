#include "mwht/tissue.hpp"

#include <cmath>

#include "mwht/error.hpp"

namespace mwht {

std::string_view to_string(TissueLabel l) {
  switch (l) {
    case TissueLabel::fat: return "fat";
    case TissueLabel::fibroglandular: return "fibroglandular";
    case TissueLabel::water: return "water";
    case TissueLabel::air: return "air";
    case TissueLabel::skin: return "skin";
    case TissueLabel::custom: return "custom";
  }
  return "unknown";
}

std::optional<TissueLabel> parse_tissue_label(std::string_view s) {
  for (int v = 0; v <= static_cast<int>(TissueLabel::custom); ++v) {
    const auto l = static_cast<TissueLabel>(v);
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

void ThermalParams::validate() const {
  if (!(cp > 0.0) || !(k > 0.0) || !(rho > 0.0))
    throw DomainError("thermal cp, k and rho must be positive");
  if (!(a0 >= 0.0) || !(b >= 0.0)) throw DomainError("thermal a0 and b must be non-negative");
  if (!std::isfinite(cp) || !std::isfinite(k) || !std::isfinite(rho) || !std::isfinite(a0) ||
      !std::isfinite(b))
    throw DomainError("thermal parameters must be finite");
}

namespace tissues {

DebyeParams debye_for(TissueLabel l) {
  switch (l) {
    case TissueLabel::fat: return fat_debye;
    case TissueLabel::fibroglandular: return fibroglandular_debye;
    case TissueLabel::water: return water_debye;
    case TissueLabel::air: return air_debye;
    case TissueLabel::skin: return skin_debye;
    case TissueLabel::custom: break;
  }
  throw DomainError("no default Debye parameters for label 'custom'");
}

ThermalParams thermal_for(TissueLabel l) {
  switch (l) {
    case TissueLabel::fat: return fat_thermal;
    case TissueLabel::fibroglandular: return fibroglandular_thermal;
    case TissueLabel::water: return water_thermal;
    case TissueLabel::air: return air_thermal;
    case TissueLabel::skin: return skin_thermal;
    case TissueLabel::custom: break;
  }
  throw DomainError("no default thermal parameters for label 'custom'");
}

}  // namespace tissues

}  // namespace mwht
