#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <vector>

#include "mwht/metrics/metrics.hpp"

using namespace mwht;
using namespace mwht::metrics;

namespace {

// 3x3 grid of 1 mm cells, all tissue except the (0, 0) corner; q(i, j) = 1 + i + 3 j.
struct Hand {
  GridSpec grid;
  MediaMap media;
  ScalarGrid q{3, 3};
  Hand() {
    grid.nx = grid.ny = 3;
    grid.dx = grid.dy = 1e-3;
    media = MediaMap(grid, TissueLabel::water);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        if (i + j > 0) media.set({i, j}, TissueCell::of(TissueLabel::fat));
        q(i, j) = 1.0 + i + 3 * j;
      }
  }
};

ScalarGrid gaussian(int n, Cell c, double w) {
  ScalarGrid q(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) q(i, j) = std::exp(-((i - c.i) * (i - c.i) + (j - c.j) * (j - c.j)) / (2.0 * w * w));
  return q;
}

bool connected(const MaskGrid& m) {
  const int nx = m.nx(), ny = m.ny();
  std::size_t total = mask_count(m), seen = 0;
  if (total == 0) return true;
  MaskGrid visited(nx, ny, 0);
  std::queue<Cell> todo;
  for (int k = 0; k < nx * ny; ++k)
    if (m[k]) {
      todo.push({k % nx, k / nx});
      visited[k] = 1;
      break;
    }
  while (!todo.empty()) {
    const Cell c = todo.front();
    todo.pop();
    ++seen;
    for (const Cell d : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
      const Cell n{c.i + d.i, c.j + d.j};
      if (n.i < 0 || n.j < 0 || n.i >= nx || n.j >= ny || !m.at(n) || visited.at(n)) continue;
      visited.at(n) = 1;
      todo.push(n);
    }
  }
  return seen == total;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("hand-summed 3x3 power report") {
  Hand h;
  const auto r = power_report(h.q, h.media, {1, 1}, 1.2e-3);
  // Tissue excludes q(0, 0) = 1; the disk holds the centre and its four edge neighbours.
  CHECK(r.total_media == doctest::Approx(44e-6).epsilon(1e-15));
  CHECK(r.treatment_region == doctest::Approx((5.0 + 2.0 + 4.0 + 6.0 + 8.0) * 1e-6).epsilon(1e-15));
  CHECK(r.target_cell == 5.0);
  CHECK_FALSE(r.total_ratio.has_value());

  MaskGrid diag(3, 3, 0);
  diag(0, 0) = diag(1, 1) = diag(2, 2) = 1;
  CHECK(region_power(h.q, diag, h.grid) == doctest::Approx(15e-6).epsilon(1e-15));
}

TEST_CASE("ratios against a baseline") {
  Hand h;
  const auto base = power_report(h.q, h.media, {1, 1}, 1.2e-3);
  const auto same = power_report(h.q, h.media, {1, 1}, 1.2e-3, &base);
  CHECK(*same.total_ratio == 1.0);
  CHECK(*same.treatment_ratio == 1.0);
  CHECK(*same.target_ratio == 1.0);

  ScalarGrid twice = h.q;
  for (auto& v : twice.values()) v *= 2.0;
  const auto dbl = power_report(twice, h.media, {1, 1}, 1.2e-3, &base);
  CHECK(*dbl.total_ratio == 2.0);
  CHECK(*dbl.treatment_ratio == 2.0);
  CHECK(*dbl.target_ratio == 2.0);

  const auto zero = power_report(ScalarGrid(3, 3), h.media, {1, 1}, 1.2e-3);
  const auto vs_zero = power_report(h.q, h.media, {1, 1}, 1.2e-3, &zero);
  CHECK_FALSE(vs_zero.total_ratio.has_value());
  CHECK_FALSE(vs_zero.target_ratio.has_value());

  ScalarGrid neg = h.q;
  neg(2, 2) = -1.0;
  CHECK_THROWS_AS(power_report(neg, h.media, {1, 1}), DomainError);
  CHECK_THROWS_AS(power_report(h.q, h.media, {3, 1}), GeometryError);
  CHECK_THROWS_AS(power_report(ScalarGrid(4, 3), h.media, {1, 1}), DomainError);
}

TEST_CASE("power report is linear and regions add up") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridSpec g;
  g.nx = g.ny = 41;
  MediaMap m(g, TissueLabel::water);
  m.paint_disk({0.0, 0.0}, 0.008, TissueCell::of(TissueLabel::fat));
  ScalarGrid a(41, 41), b(41, 41), sum(41, 41);
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = u(rng);
    b[k] = u(rng);
    sum[k] = 0.7 * a[k] + 1.9 * b[k];
  }
  const Cell t{18, 20};
  const auto ra = power_report(a, m, t, 0.004), rb = power_report(b, m, t, 0.004), rs = power_report(sum, m, t, 0.004);
  CHECK(rs.total_media == doctest::Approx(0.7 * ra.total_media + 1.9 * rb.total_media).epsilon(1e-12));
  CHECK(rs.treatment_region == doctest::Approx(0.7 * ra.treatment_region + 1.9 * rb.treatment_region).epsilon(1e-12));
  CHECK(rs.target_cell == doctest::Approx(0.7 * ra.target_cell + 1.9 * rb.target_cell).epsilon(1e-15));

  const MaskGrid tissue = m.tissue_mask();
  MaskGrid left(41, 41, 0), right(41, 41, 0);
  for (int j = 0; j < 41; ++j)
    for (int i = 0; i < 41; ++i) (i < 20 ? left : right)(i, j) = tissue(i, j);
  CHECK(region_power(a, left, g) + region_power(a, right, g) ==
        doctest::Approx(region_power(a, tissue, g)).epsilon(1e-13));
  CHECK(region_power(a, tissue, g) == doctest::Approx(ra.total_media).epsilon(1e-13));
}

TEST_CASE("contour of a uniform map covers everything") {
  ScalarGrid q(7, 5, 3.5);
  CHECK(mask_count(contour_mask(q, ContourLevel::db(-3.0))) == 35);
  CHECK(mask_count(contour_mask(q, ContourLevel::absolute(1.0))) == 35);
  CHECK(mask_count(contour_mask(q, ContourLevel::absolute(3.6))) == 0);
  CHECK(mask_count(contour_mask(ScalarGrid(4, 4), ContourLevel::db(-3.0))) == 16);
}

TEST_CASE("-3 dB contour of a single peak") {
  const int n = 41;
  const double w = 4.0;
  const ScalarGrid q = gaussian(n, {17, 22}, w);
  const MaskGrid m = contour_mask(q, ContourLevel::db(-3.0));
  CHECK(m(17, 22) == 1);
  CHECK(connected(m));
  // exp(-r^2 / 2w^2) >= 10^-0.3  <=>  r^2 <= 2 w^2 0.3 ln 10.
  const double r2 = 2.0 * w * w * 0.3 * std::log(10.0);
  std::size_t expect = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) expect += (i - 17) * (i - 17) + (j - 22) * (j - 22) <= r2;
  CHECK(mask_count(m) == expect);

  MaskGrid within(n, n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 25; i < n; ++i) within(i, j) = 1;
  const MaskGrid part = contour_mask(q, ContourLevel::db(-3.0), &within);
  CHECK(part(25, 22) == 1);
  CHECK(part(17, 22) == 0);
  CHECK(connected(part));
}

TEST_CASE("-3 dB contour always holds the peak") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    ScalarGrid q(15, 11);
    for (auto& v : q.values()) v = u(rng);
    const auto peak = std::max_element(q.values().begin(), q.values().end()) - q.values().begin();
    CHECK(contour_mask(q, ContourLevel::db(-3.0))[static_cast<std::size_t>(peak)] == 1);
  }
}

TEST_CASE("mask overlap") {
  MaskGrid a(2, 2, 0), b(2, 2, 0);
  CHECK(mask_overlap(a, b) == 1.0);
  a[0] = a[1] = 1;
  b[1] = b[2] = 1;
  CHECK(mask_overlap(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(mask_overlap(a, a) == 1.0);
  CHECK_THROWS_AS(mask_overlap(a, MaskGrid(3, 2)), DomainError);
}

TEST_CASE("slices along y = 0") {
  GridSpec g;
  g.nx = 9;
  g.ny = 7;
  ScalarGrid q(9, 7);
  for (int j = 0; j < 7; ++j)
    for (int i = 0; i < 9; ++i) q(i, j) = 10.0 * j + std::abs(i - 4);
  const auto s = slice_1d(q, g);
  REQUIRE(s.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(s[i] == q(i, 3));
    CHECK(s[i] == s[8 - i]);
  }
  CHECK(slice_row(q, 0)[2] == 2.0);
  CHECK_THROWS_AS(slice_row(q, 7), DomainError);
}

TEST_CASE("focus error") {
  const int n = 31;
  const MaskGrid all(n, n, 1);
  CHECK(focus_error(gaussian(n, {15, 15}, 3.0), all, {15, 15}).distance_cells == 0.0);
  const auto off = focus_error(gaussian(n, {18, 15}, 3.0), all, {15, 15});
  CHECK(off.distance_cells == 3.0);
  CHECK(off.peak == Cell{18, 15});

  // Equal peaks 2 and 4 cells from the target: the nearer one wins.
  ScalarGrid tie(n, n, 0.0);
  tie(15, 11) = 1.0;
  tie(17, 15) = 1.0;
  const auto t = focus_error(tie, all, {15, 15});
  CHECK(t.peak == Cell{17, 15});
  CHECK(t.distance_cells == 2.0);
  // Equidistant tie: first in row-major order.
  tie(17, 15) = 0.0;
  tie(15, 19) = 1.0;
  CHECK(focus_error(tie, all, {15, 15}).peak == Cell{15, 11});

  // The argmax is taken over the region only.
  MaskGrid left(n, n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < 16; ++i) left(i, j) = 1;
  CHECK(focus_error(gaussian(n, {20, 15}, 3.0), left, {15, 15}).peak == Cell{15, 15});
  CHECK_THROWS_AS(focus_error(tie, MaskGrid(n, n, 0), {15, 15}), DomainError);
}

}  // TEST_SUITE
