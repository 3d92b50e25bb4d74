#include "mwht/hfgm.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <vector>

#include "mwht/error.hpp"

namespace mwht::hfgm {

namespace {

constexpr char thermal_magic[4] = {'T', 'H', 'R', 'M'};
constexpr std::uint32_t override_flag = 1u << 8;

class Writer {
public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) {
    std::array<char, 4> b;
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
    bytes(b.data(), b.size());
  }
  void f64(double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b;
    for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((u >> (8 * k)) & 0xffu);
    bytes(b.data(), b.size());
  }
  void zeros(std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) out_.put('\0');
  }

private:
  std::ostream& out_;
};

class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint64_t offset() const { return offset_; }

  void bytes(char* p, std::size_t n, const char* what) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw ParseError(offset_ + static_cast<std::uint64_t>(in_.gcount()),
                       std::string("truncated file while reading ") + what);
    offset_ += n;
  }
  std::uint32_t u32(const char* what) {
    std::array<unsigned char, 4> b;
    bytes(reinterpret_cast<char*>(b.data()), 4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
    return v;
  }
  double f64(const char* what) {
    std::array<unsigned char, 8> b;
    bytes(reinterpret_cast<char*>(b.data()), 8, what);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    return std::bit_cast<double>(v);
  }
  void skip(std::size_t n, const char* what) {
    std::vector<char> tmp(n);
    bytes(tmp.data(), n, what);
  }

private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

void check_magic(Reader& r, const char (&expected)[4], const char* what) {
  char m[4];
  const auto at = r.offset();
  r.bytes(m, 4, what);
  if (std::memcmp(m, expected, 4) != 0)
    throw ParseError(at, std::string("bad magic, expected ") + std::string(expected, 4));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

struct ThermalKey {
  std::array<std::uint64_t, 5> bits;
  explicit ThermalKey(const ThermalParams& t)
      : bits{std::bit_cast<std::uint64_t>(t.cp), std::bit_cast<std::uint64_t>(t.k),
             std::bit_cast<std::uint64_t>(t.rho), std::bit_cast<std::uint64_t>(t.a0),
             std::bit_cast<std::uint64_t>(t.b)} {}
  auto operator<=>(const ThermalKey&) const = default;
};

void read_dims(Reader& r, GridSpec& g) {
  const auto nx_at = r.offset();
  const auto nx = r.u32("nx");
  const auto ny = r.u32("ny");
  if (nx == 0 || ny == 0 || nx > (1u << 16) || ny > (1u << 16))
    throw ParseError(nx_at, "implausible grid dimensions");
  g.nx = static_cast<int>(nx);
  g.ny = static_cast<int>(ny);
  g.dx = r.f64("dx");
  g.dy = r.f64("dy");
  if (!(g.dx > 0.0) || !(g.dy > 0.0)) throw ParseError(16, "cell size must be positive");
}

}  // namespace

void write_media(std::ostream& out, const MediaMap& media) {
  const auto& g = media.grid();
  Writer w(out);
  w.bytes(media_magic, 4);
  w.u32(media_version);
  w.u32(static_cast<std::uint32_t>(g.nx));
  w.u32(static_cast<std::uint32_t>(g.ny));
  w.f64(g.dx);
  w.f64(g.dy);
  w.f64(g.courant);
  w.u32(static_cast<std::uint32_t>(g.pml_thickness));
  std::uint32_t imm = static_cast<std::uint32_t>(media.immersion());
  if (media.boundary_h_overridden()) imm |= override_flag;
  w.u32(imm);
  w.f64(media.boundary_h());
  w.f64(media.ambient_temp());

  std::map<ThermalKey, std::uint32_t> index;
  std::vector<ThermalParams> table;
  for (const auto& c : media.cells().values()) {
    const ThermalKey key(c.thermal);
    if (index.emplace(key, static_cast<std::uint32_t>(table.size())).second)
      table.push_back(c.thermal);
  }
  for (const auto& c : media.cells().values()) {
    w.f64(c.debye.eps_inf);
    w.f64(c.debye.delta_eps);
    w.f64(c.debye.sigma_s);
    w.f64(c.debye.tau);
    w.f64(static_cast<double>(static_cast<int>(c.label)));
    w.f64(static_cast<double>(index.at(ThermalKey(c.thermal))));
  }
  w.bytes(thermal_magic, 4);
  w.u32(static_cast<std::uint32_t>(table.size()));
  for (const auto& t : table) {
    w.f64(t.cp);
    w.f64(t.k);
    w.f64(t.rho);
    w.f64(t.a0);
    w.f64(t.b);
  }
  if (!out) throw IoError("write failure while serializing media map");
}

MediaMap read_media(std::istream& in) {
  Reader r(in);
  check_magic(r, media_magic, "magic");
  const auto version = r.u32("version");
  if (version != media_version)
    throw ParseError(4, "unsupported media format version " + std::to_string(version));
  GridSpec g;
  read_dims(r, g);
  g.courant = r.f64("courant");
  g.pml_thickness = static_cast<int>(r.u32("pml_thickness"));
  const auto imm_raw = r.u32("immersion");
  const double h = r.f64("boundary_h");
  const double ambient = r.f64("ambient");
  const auto imm_label = static_cast<TissueLabel>(imm_raw & 0xffu);
  if ((imm_raw & 0xffu) > static_cast<std::uint32_t>(TissueLabel::custom) ||
      !is_immersion(imm_label))
    throw ParseError(44, "invalid immersion label");

  MediaMap media;
  try {
    media = MediaMap(g, imm_label);
  } catch (const DomainError& e) {
    throw ParseError(8, std::string("invalid grid header: ") + e.what());
  }
  if (imm_raw & override_flag) media.override_boundary_h(h);
  media.set_ambient_temp(ambient);

  struct Pending {
    std::uint64_t offset;
    std::uint32_t thermal;
  };
  std::vector<Pending> pending(g.cell_count());
  auto& cells = media.cells();
  for (std::size_t k = 0; k < g.cell_count(); ++k) {
    const auto at = r.offset();
    TissueCell c;
    c.debye.eps_inf = r.f64("cell record");
    c.debye.delta_eps = r.f64("cell record");
    c.debye.sigma_s = r.f64("cell record");
    c.debye.tau = r.f64("cell record");
    const double label = r.f64("cell record");
    const double thermal = r.f64("cell record");
    if (!(label >= 0.0) || label > static_cast<double>(TissueLabel::custom) ||
        label != static_cast<int>(label))
      throw ParseError(at + 32, "invalid tissue label in cell record");
    if (!(thermal >= 0.0) || thermal != static_cast<std::uint32_t>(thermal))
      throw ParseError(at + 40, "invalid thermal index in cell record");
    c.label = static_cast<TissueLabel>(static_cast<int>(label));
    try {
      c.debye.validate();
    } catch (const DomainError& e) {
      throw ParseError(at, e.what());
    }
    if (is_immersion(c.label) && c.label != imm_label)
      throw ParseError(at + 32, "cell immersion label differs from the header immersion");
    cells[k] = c;
    pending[k] = {at, static_cast<std::uint32_t>(thermal)};
  }

  check_magic(r, thermal_magic, "thermal table magic");
  const auto count = r.u32("thermal table size");
  std::vector<ThermalParams> table(count);
  for (auto& t : table) {
    const auto at = r.offset();
    t.cp = r.f64("thermal table");
    t.k = r.f64("thermal table");
    t.rho = r.f64("thermal table");
    t.a0 = r.f64("thermal table");
    t.b = r.f64("thermal table");
    try {
      t.validate();
    } catch (const DomainError& e) {
      throw ParseError(at, e.what());
    }
  }
  for (std::size_t k = 0; k < pending.size(); ++k) {
    if (pending[k].thermal >= table.size())
      throw ParseError(pending[k].offset + 40, "thermal index out of range");
    cells[k].thermal = table[pending[k].thermal];
  }
  try {
    media.validate();
  } catch (const DomainError& e) {
    throw ParseError(r.offset(), e.what());
  }
  return media;
}

void save_media(const std::filesystem::path& path, const MediaMap& media) {
  auto out = open_out(path);
  write_media(out, media);
}

MediaMap load_media(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_media(in);
}

void write_plane(std::ostream& out, const Plane& plane) {
  Writer w(out);
  w.bytes(plane_magic, 4);
  w.u32(plane_version);
  w.u32(static_cast<std::uint32_t>(plane.values.nx()));
  w.u32(static_cast<std::uint32_t>(plane.values.ny()));
  w.f64(plane.grid.dx);
  w.f64(plane.grid.dy);
  w.u32(static_cast<std::uint32_t>(plane.kind));
  w.zeros(28);
  for (double v : plane.values.values()) w.f64(v);
  if (!out) throw IoError("write failure while serializing plane");
}

Plane read_plane(std::istream& in) {
  Reader r(in);
  check_magic(r, plane_magic, "magic");
  const auto version = r.u32("version");
  if (version != plane_version)
    throw ParseError(4, "unsupported plane format version " + std::to_string(version));
  Plane p;
  read_dims(r, p.grid);
  p.kind = static_cast<PlaneKind>(r.u32("plane kind"));
  r.skip(28, "reserved header");
  p.values = ScalarGrid(p.grid.nx, p.grid.ny);
  for (std::size_t k = 0; k < p.values.size(); ++k) p.values[k] = r.f64("plane values");
  return p;
}

void save_plane(const std::filesystem::path& path, const ScalarGrid& values, const GridSpec& grid,
                PlaneKind kind) {
  auto out = open_out(path);
  Plane p{grid, kind, values};
  write_plane(out, p);
}

Plane load_plane(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_plane(in);
}

void save_plane_csv(const std::filesystem::path& path, const ScalarGrid& values) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  for (int j = 0; j < values.ny(); ++j) {
    for (int i = 0; i < values.nx(); ++i) {
      if (i) out << ',';
      out << values(i, j);
    }
    out << '\n';
  }
}

}  // namespace mwht::hfgm
