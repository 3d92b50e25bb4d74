#include <algorithm>
#include <cmath>
#include <random>

#include "mwht/constants.hpp"
#include "mwht/hfgm.hpp"
#include "mwht/phantoms/phantoms.hpp"

namespace mwht::phantoms {

MediaMap build_homogeneous(TissueLabel tissue, double radius, TissueLabel immersion, const GridSpec& grid) {
  if (tissue != TissueLabel::fat && tissue != TissueLabel::fibroglandular)
    throw ConfigError("homogeneous phantom tissue must be fat or fibroglandular");
  if (!is_immersion(immersion)) throw ConfigError("immersion must be air or water");
  if (!(radius > 0.0)) throw ConfigError("phantom radius must be positive");
  grid.validate();
  MediaMap m(grid, immersion);
  m.paint_disk({0.0, 0.0}, radius, TissueCell::of(tissue));
  return m;
}

MediaMap build_two_inclusion(const GridSpec& grid, TissueLabel immersion) {
  MediaMap m = build_homogeneous(TissueLabel::fat, 0.06, immersion, grid);
  const auto fib = TissueCell::of(TissueLabel::fibroglandular);
  m.paint_disk({-0.03, 0.0}, 0.02, fib);
  m.paint_disk({0.03, 0.0}, 0.02, fib);
  return m;
}

MediaMap load_realistic(const std::filesystem::path& path, const std::optional<GridSpec>& expected) {
  MediaMap m = hfgm::load_media(path);
  if (m.immersion() != TissueLabel::water)
    throw ParseError(44, "realistic phantom must be water-immersed");
  if (expected && (m.grid().nx != expected->nx || m.grid().ny != expected->ny))
    throw ParseError(8, "realistic phantom grid is " + std::to_string(m.grid().nx) + "x" +
                            std::to_string(m.grid().ny) + ", expected " + std::to_string(expected->nx) +
                            "x" + std::to_string(expected->ny));
  try {
    m.validate();
  } catch (const Error& e) {
    throw ParseError(hfgm::header_size, e.what());
  }
  return m;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

}  // namespace

MediaMap generate_scattered_fibroglandular(std::uint64_t seed, const GridSpec& grid,
                                           const ScatteredOptions& o) {
  grid.validate();
  if (!(o.min_fraction > 0.0 && o.min_fraction <= o.max_fraction && o.max_fraction < 1.0))
    throw ConfigError("fibroglandular fraction band must satisfy 0 < min <= max < 1");
  std::mt19937_64 rng(seed);

  // Outline r(theta) = 1 + small low-order harmonics, scaled to the ellipse.
  double amp[3], phase[3];
  for (int h = 0; h < 3; ++h) {
    amp[h] = uniform(rng, 0.0, 0.025);
    phase[h] = uniform(rng, 0.0, 2.0 * constants::pi);
  }
  auto radial = [&](double th) {
    double r = 1.0;
    for (int h = 0; h < 3; ++h) r += amp[h] * std::cos((h + 2) * th + phase[h]);
    return r;
  };
  // Normalized level: < 1 inside. The skin band is approximated by the radial gap.
  auto level = [&](Point p) {
    const double u = p.x / o.semi_x, v = p.y / o.semi_y;
    return std::hypot(u, v) / radial(std::atan2(v, u));
  };
  const double mean_semi = 0.5 * (o.semi_x + o.semi_y);
  const double skin_level = 1.0 - o.skin_thickness / mean_semi;

  MediaMap m(grid, TissueLabel::water);
  const auto fat = TissueCell::of(TissueLabel::fat);
  const auto skin = TissueCell::of(TissueLabel::skin);
  const auto fib = TissueCell::of(TissueLabel::fibroglandular);
  std::size_t breast = 0;
  std::vector<std::size_t> interior;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double l = level(grid.center_of({i, j}));
      if (l >= 1.0) continue;
      ++breast;
      if (l >= skin_level) {
        m.set({i, j}, skin);
      } else {
        m.set({i, j}, fat);
        interior.push_back(grid.index(i, j));
      }
    }
  if (breast == 0) throw GeometryError("breast outline does not cover any cell");

  const double target = uniform(rng, o.min_fraction, o.max_fraction);
  std::size_t fib_cells = 0;
  const double inner_level = skin_level - 0.004 / mean_semi;
  for (int attempt = 0; attempt < 10000 && fib_cells < target * breast; ++attempt) {
    const double th = uniform(rng, 0.0, 2.0 * constants::pi);
    const double rr = std::sqrt(unit(rng)) * 0.85;
    const Point c{rr * o.semi_x * std::cos(th), rr * o.semi_y * std::sin(th)};
    const double a = uniform(rng, 0.003, 0.012), b = a * uniform(rng, 0.4, 1.0);
    const double rot = uniform(rng, 0.0, constants::pi);
    const double cr = std::cos(rot), sr = std::sin(rot);
    std::vector<std::size_t> hit;
    for (std::size_t k : interior) {
      if (m.cells()[k].label != TissueLabel::fat) continue;
      const Point p = grid.center_of({static_cast<int>(k % grid.nx), static_cast<int>(k / grid.nx)});
      if (level(p) >= inner_level) continue;
      const double dx = p.x - c.x, dy = p.y - c.y;
      const double u = (dx * cr + dy * sr) / a, v = (-dx * sr + dy * cr) / b;
      if (u * u + v * v < 1.0) hit.push_back(k);
    }
    if (static_cast<double>(fib_cells + hit.size()) > o.max_fraction * breast) continue;
    for (std::size_t k : hit) m.cells()[k] = fib;
    fib_cells += hit.size();
  }
  if (static_cast<double>(fib_cells) < o.min_fraction * breast)
    throw GeometryError("could not reach the requested fibroglandular fraction");
  return m;
}

double fibroglandular_fraction(const MediaMap& media) {
  std::size_t tissue = 0, fib = 0;
  for (const auto& c : media.cells().values()) {
    if (is_immersion(c.label)) continue;
    ++tissue;
    if (c.label == TissueLabel::fibroglandular) ++fib;
  }
  return tissue == 0 ? 0.0 : static_cast<double>(fib) / static_cast<double>(tissue);
}

}  // namespace mwht::phantoms
