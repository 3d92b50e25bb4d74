#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mwht/debye.hpp"

namespace mwht {

enum class TissueLabel : int {
  fat = 0,
  fibroglandular = 1,
  water = 2,
  air = 3,
  skin = 4,
  custom = 5,
};

/// Immersion labels describe the medium surrounding the phantom; all others are tissue.
inline bool is_immersion(TissueLabel l) { return l == TissueLabel::water || l == TissueLabel::air; }

std::string_view to_string(TissueLabel l);
std::optional<TissueLabel> parse_tissue_label(std::string_view s);

/// Pennes bio-heat coefficients of one material.
struct ThermalParams {
  double cp = 1.0;   ///< specific heat, J/(kg degC)
  double k = 1.0;    ///< thermal conductivity, W/(m degC)
  double rho = 1.0;  ///< density, kg/m^3
  double a0 = 0.0;   ///< metabolic heat, W/m^3
  double b = 0.0;    ///< perfusion coefficient, W/(m^3 degC)

  void validate() const;
  friend bool operator==(const ThermalParams&, const ThermalParams&) = default;
};

/// Breast-tissue Debye parameters at 2.5 GHz.
namespace tissues {

inline constexpr DebyeParams fat_debye{3.39, 2.0, 0.05, 0.15e-12};
inline constexpr DebyeParams fibroglandular_debye{17.5, 31.6, 0.72, 0.15e-12};
/// Pure water near room temperature (Kaatze-style single pole). Dielectric data for the
/// coupling bath are not part of the tissue tables, so these are this toolkit's choice.
inline constexpr DebyeParams water_debye{5.2, 74.9, 0.0, 9.3e-12};
inline constexpr DebyeParams air_debye{1.0, 0.0, 0.0, 1e-12};
/// Skin rim of the synthetic realistic phantom reuses fibroglandular dispersion.
inline constexpr DebyeParams skin_debye = fibroglandular_debye;

inline constexpr ThermalParams fat_thermal{2279.0, 0.306, 1069.0, 350.0, 2229.0};
inline constexpr ThermalParams fibroglandular_thermal{3600.0, 0.5, 1050.0, 690.0, 2700.0};
inline constexpr ThermalParams water_thermal{4186.0, 0.6, 1000.0, 0.0, 0.0};
/// Air never enters the thermal update (held at ambient); values only keep invariants valid.
inline constexpr ThermalParams air_thermal{1005.0, 0.026, 1.2, 0.0, 0.0};
inline constexpr ThermalParams skin_thermal = fibroglandular_thermal;

DebyeParams debye_for(TissueLabel l);
ThermalParams thermal_for(TissueLabel l);

}  // namespace tissues

}  // namespace mwht
