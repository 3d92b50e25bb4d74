#include "mwht/pipeline/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "mwht/error.hpp"

namespace mwht::pipeline {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out, &len) != 1)
    throw IoError("sha256 failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(out[k]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

namespace {

std::array<unsigned char, 3> colormap(double u) {
  static constexpr double stops[6][3] = {{0, 0, 0},     {30, 40, 160},  {170, 40, 150},
                                         {240, 120, 40}, {250, 220, 60}, {255, 255, 255}};
  u = std::clamp(std::isfinite(u) ? u : 0.0, 0.0, 1.0) * 5.0;
  const int a = std::min(4, static_cast<int>(u));
  const double f = u - a;
  std::array<unsigned char, 3> c{};
  for (int ch = 0; ch < 3; ++ch)
    c[ch] = static_cast<unsigned char>(std::lround(stops[a][ch] + f * (stops[a + 1][ch] - stops[a][ch])));
  return c;
}

void write_p6(const std::filesystem::path& path, int nx, int ny, const std::vector<unsigned char>& rgb) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << "P6\n" << nx << ' ' << ny << "\n255\n";
  os.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace

void save_ppm(const std::filesystem::path& path, const ScalarGrid& map, double db_range) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : map.values())
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  std::vector<unsigned char> rgb(static_cast<std::size_t>(map.nx()) * map.ny() * 3);
  std::size_t p = 0;
  for (int j = map.ny() - 1; j >= 0; --j)
    for (int i = 0; i < map.nx(); ++i) {
      const double v = map(i, j);
      double u = 0.0;
      if (db_range > 0.0) {
        u = (hi > 0.0 && v > 0.0) ? 1.0 + 10.0 * std::log10(v / hi) / db_range : 0.0;
      } else if (hi > lo) {
        u = (v - lo) / (hi - lo);
      }
      const auto c = colormap(u);
      rgb[p++] = c[0];
      rgb[p++] = c[1];
      rgb[p++] = c[2];
    }
  write_p6(path, map.nx(), map.ny(), rgb);
}

void save_mask_ppm(const std::filesystem::path& path, const MaskGrid& mask) {
  std::vector<unsigned char> rgb(static_cast<std::size_t>(mask.nx()) * mask.ny() * 3);
  std::size_t p = 0;
  for (int j = mask.ny() - 1; j >= 0; --j)
    for (int i = 0; i < mask.nx(); ++i) {
      const unsigned char v = mask(i, j) ? 255 : 0;
      rgb[p++] = v;
      rgb[p++] = v;
      rgb[p++] = v;
    }
  write_p6(path, mask.nx(), mask.ny(), rgb);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace mwht::pipeline
