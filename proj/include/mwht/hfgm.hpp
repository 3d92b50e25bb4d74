#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "mwht/grid.hpp"
#include "mwht/media_map.hpp"

namespace mwht::hfgm {

/// Media map file, little-endian throughout.
///
///   offset  size  field
///   0       4     magic "HFGM"
///   4       4     format version (u32, = 1)
///   8       4     nx (u32)
///   12      4     ny (u32)
///   16      8     dx (f64, m)
///   24      8     dy (f64, m)
///   32      32    reserved block, used as:
///                   32 courant (f64), 40 pml_thickness (u32),
///                   44 immersion label (u32, bit 8 set = boundary_h overridden),
///                   48 boundary_h (f64), 56 ambient temperature (f64)
///   64      48*nx*ny  row-major cell records (j outer, i inner), 6 x f64 each:
///                   eps_inf, delta_eps, sigma_s, tau, label, thermal-table index
///   ...     trailer: "THRM", u32 count, count x 5 f64 (cp, k, rho, a0, b)
///
/// Readers that only need dielectric data may stop after the cell records.
inline constexpr char media_magic[4] = {'H', 'F', 'G', 'M'};
inline constexpr std::uint32_t media_version = 1;
inline constexpr std::size_t header_size = 64;
inline constexpr std::size_t record_size = 48;

/// Single scalar plane (field snapshot, Q map, temperature, mask as 0/1).
/// Same 64-byte header layout with magic "HFGS"; the reserved block holds the plane kind
/// (u32 at offset 32) and is otherwise zero. Followed by nx*ny row-major f64 values.
inline constexpr char plane_magic[4] = {'H', 'F', 'G', 'S'};
inline constexpr std::uint32_t plane_version = 1;

enum class PlaneKind : std::uint32_t {
  generic = 0,
  ez = 1,
  heating_potential = 2,
  temperature = 3,
  mask = 4,
  permittivity = 5,
};

void write_media(std::ostream& out, const MediaMap& media);
MediaMap read_media(std::istream& in);
void save_media(const std::filesystem::path& path, const MediaMap& media);
MediaMap load_media(const std::filesystem::path& path);

struct Plane {
  GridSpec grid;  ///< only nx, ny, dx, dy are meaningful
  PlaneKind kind = PlaneKind::generic;
  ScalarGrid values;
};

void write_plane(std::ostream& out, const Plane& plane);
Plane read_plane(std::istream& in);
void save_plane(const std::filesystem::path& path, const ScalarGrid& values, const GridSpec& grid,
                PlaneKind kind);
Plane load_plane(const std::filesystem::path& path);

/// Writes a small grid as CSV: one line per row j, values separated by commas.
void save_plane_csv(const std::filesystem::path& path, const ScalarGrid& values);

}  // namespace mwht::hfgm
