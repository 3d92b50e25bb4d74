#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "mwht/beamformer/beamformer.hpp"
#include "mwht/phantoms/phantoms.hpp"

using namespace mwht;
using namespace mwht::bf;

namespace {

Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = cd(n(rng), n(rng));
  return m;
}

ObjectiveVector random_objectives(std::mt19937_64& rng, int m) {
  ObjectiveVector g;
  g.g.assign(m, 0.0);
  g.g[0] = 1.0;
  std::bernoulli_distribution b(0.5);
  for (int k = 1; k < m; ++k) g.g[k] = b(rng) ? 1.0 : 0.0;
  return g;
}

GridSpec small_grid() {
  GridSpec g;
  g.nx = 121;
  g.ny = 121;
  return g;
}

// 18 mm fat disk in water with an 8-element ring at 22 mm.
struct SmallSetup {
  GridSpec grid = small_grid();
  MediaMap media = phantoms::build_homogeneous(TissueLabel::fat, 0.018, TissueLabel::water, grid);
  std::vector<Cell> antennas = ring_antennas(grid, 8, 0.022);
};

}  // namespace

TEST_SUITE("beamformer") {

TEST_CASE("conjugate weights of a unit channel are all ones") {
  const Eigen::VectorXcd c = Eigen::VectorXcd::Ones(6);
  const auto w = conjugate_weights(c);
  CHECK(w.phase_only);
  for (int k = 0; k < 6; ++k) CHECK(w.w[k] == cd(1.0, 0.0));
}

TEST_CASE("conjugate weights align unit phasors") {
  const int n = 16;
  Eigen::VectorXcd c(n);
  for (int k = 0; k < n; ++k) c[k] = std::polar(1.0, 0.37 * k * k - 1.1);
  const auto w = conjugate_weights(c);
  const cd sum = (w.w.transpose() * c)(0);
  CHECK(sum.real() == doctest::Approx(n).epsilon(1e-14));
  CHECK(std::abs(sum.imag()) < 1e-12);
}

TEST_CASE("conjugate weights maximise the coherent sum over unit phasors") {
  std::mt19937_64 rng(11);
  const Eigen::VectorXcd c = random_matrix(rng, 12, 1).col(0);
  const auto w = conjugate_weights(c);
  const double best = std::abs((w.w.transpose() * c)(0));
  CHECK(best == doctest::Approx(c.cwiseAbs().sum()).epsilon(1e-12));
  std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXcd u(c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) u[k] = std::polar(1.0, ph(rng));
    CHECK(std::abs((u.transpose() * c)(0)) <= best + 1e-12);
  }
}

TEST_CASE("a zero channel entry is degenerate") {
  Eigen::VectorXcd c = Eigen::VectorXcd::Ones(4);
  c[2] = 0.0;
  CHECK_THROWS_AS(conjugate_weights(c), DegenerateChannelError);
}

TEST_CASE("phase-only projection keeps phases and maps zero to one") {
  Eigen::VectorXcd w(3);
  w << cd(3.0, 4.0), cd(0.0, 0.0), cd(-0.5, 0.0);
  const auto p = phase_only(w);
  CHECK(std::abs(p[0] - cd(0.6, 0.8)) < 1e-15);
  CHECK(p[1] == cd(1.0, 0.0));
  CHECK(p[2] == cd(-1.0, 0.0));
}

TEST_CASE("LCMP with one column reduces to the matched filter") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXcd c = random_matrix(rng, 8, 1);
  const ObjectiveVector g{{1.0}};
  LcmpOptions raw;
  raw.phase_only = false;
  const auto w = lcmp_weights(c, g, raw);
  CHECK(constraint_residual(w.w, c, g) < 1e-14);
  const Eigen::VectorXcd expect = c.col(0).conjugate() / c.col(0).squaredNorm();
  CHECK((w.w - expect).cwiseAbs().maxCoeff() < 1e-14);

  LcmpOptions norm;
  norm.projection = PhaseProjection::normalize;
  const auto p = lcmp_weights(c, g, norm);
  const auto conj = conjugate_weights(c.col(0));
  CHECK((p.w - conj.w).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("LCMP on orthonormal columns picks the focus column") {
  std::mt19937_64 rng(5);
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_matrix(rng, 10, 2));
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(10, 2);
  const ObjectiveVector g{{1.0, 0.0}};
  LcmpOptions raw;
  raw.phase_only = false;
  const auto w = lcmp_weights(q, g, raw);
  const Eigen::RowVectorXcd r = w.w.transpose() * q;
  CHECK(std::abs(r[0] - 1.0) < 1e-14);
  CHECK(std::abs(r[1]) < 1e-14);
  CHECK((w.w - q.col(0).conjugate()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("LCMP meets random constraints before projection") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(4, 32);
  LcmpOptions raw;
  raw.phase_only = false;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nd(rng);
    const int m = std::uniform_int_distribution<int>(1, n - 1)(rng);
    const Eigen::MatrixXcd c = random_matrix(rng, n, m);
    const ObjectiveVector g = random_objectives(rng, m);
    const auto w = lcmp_weights(c, g, raw);
    CHECK(w.residual_pre <= 1e-10);
    CHECK(constraint_residual(w.w, c, g) <= 1e-10);
  }
}

TEST_CASE("LCMP weights are the minimum-norm solution") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXcd c = random_matrix(rng, 9, 3);
  const ObjectiveVector g{{1.0, 0.0, 0.0}};
  LcmpOptions raw;
  raw.phase_only = false;
  const auto w = lcmp_weights(c, g, raw);
  // Adding anything from the null space of C^T keeps the constraints and grows the norm.
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(c.transpose());
  const Eigen::MatrixXcd ker = lu.kernel();
  CHECK(ker.cols() == 6);
  CHECK((ker.adjoint() * w.w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("phase-only flag yields unit-modulus weights") {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXcd c = random_matrix(rng, 16, 3);
  const ObjectiveVector g{{1.0, 0.0, 0.0}};
  for (auto proj : {PhaseProjection::normalize, PhaseProjection::alternating}) {
    LcmpOptions o;
    o.projection = proj;
    const auto w = lcmp_weights(c, g, o);
    CHECK(w.phase_only);
    for (Eigen::Index k = 0; k < w.w.size(); ++k) CHECK(std::abs(w.w[k]) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("alternating projection suppresses the nulls") {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXcd c = random_matrix(rng, 16, 4);
  const ObjectiveVector g{{1.0, 0.0, 0.0, 0.0}};
  LcmpOptions o;
  const auto w = lcmp_weights(c, g, o);
  REQUIRE(w.projection_iterations < o.max_iterations);
  const Eigen::RowVectorXcd r = w.w.transpose() * c;
  for (int m = 1; m < 4; ++m) CHECK(std::abs(r[m]) <= o.null_tolerance * std::abs(r[0]));

  LcmpOptions plain;
  plain.projection = PhaseProjection::normalize;
  const auto p = lcmp_weights(c, g, plain);
  CHECK(w.residual_post <= p.residual_post);
}

TEST_CASE("global channel phase shifts every weight phase equally") {
  std::mt19937_64 rng(31);
  const Eigen::MatrixXcd c = random_matrix(rng, 12, 3);
  const ObjectiveVector g{{1.0, 0.0, 0.0}};
  const double theta = 0.9;
  LcmpOptions o;
  o.projection = PhaseProjection::normalize;
  const auto a = lcmp_weights(c, g, o);
  const auto b = lcmp_weights(Eigen::MatrixXcd(c * std::polar(1.0, theta)), g, o);
  for (Eigen::Index k = 0; k < c.rows(); ++k)
    CHECK(std::abs(b.w[k] - a.w[k] * std::polar(1.0, -theta)) < 1e-12);
}

TEST_CASE("near-dependent constraint columns are named") {
  std::mt19937_64 rng(41);
  Eigen::MatrixXcd c = random_matrix(rng, 10, 3);
  c.col(2) = c.col(0) * cd(1.0 + 1e-9, 0.0);
  try {
    lcmp_weights(c, ObjectiveVector{{1.0, 0.0, 0.0}});
    FAIL("expected IllConditionedError");
  } catch (const IllConditionedError& e) {
    CHECK(e.rcond() < 1e-10);
    CHECK(e.columns() == std::vector<std::size_t>{0, 2});
    CHECK(std::string(e.what()).find("0 2") != std::string::npos);
  }
}

TEST_CASE("LCMP rejects bad shapes and objective vectors") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXcd c = random_matrix(rng, 4, 4);
  CHECK_THROWS_AS(lcmp_weights(c, ObjectiveVector{{1.0, 0.0, 0.0, 0.0}}), ConfigError);
  const Eigen::MatrixXcd d = random_matrix(rng, 4, 2);
  CHECK_THROWS_AS(lcmp_weights(d, ObjectiveVector{{0.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(lcmp_weights(d, ObjectiveVector{{1.0, 0.5}}), ConfigError);
  CHECK_THROWS_AS(lcmp_weights(d, ObjectiveVector{{1.0}}), ConfigError);
}

TEST_CASE("design modes parse and print") {
  for (auto m : {DesignMode::static_baseline, DesignMode::ideal, DesignMode::partial_knowledge})
    CHECK(parse_design_mode(to_string(m)) == m);
  CHECK(parse_design_mode("partial_knowledge") == DesignMode::partial_knowledge);
  CHECK_THROWS_AS(parse_design_mode("oracle"), ConfigError);
}

TEST_CASE("ring antennas and null clusters") {
  const GridSpec g = small_grid();
  const auto ring = ring_antennas(g, 8, 0.022);
  REQUIRE(ring.size() == 8);
  CHECK(ring[0] == Cell{60 + 44, 60});
  CHECK(ring[2] == Cell{60, 60 + 44});
  CHECK(ring[4] == Cell{60 - 44, 60});
  for (int k = 0; k < 8; ++k) {
    const Cell a = ring[k], b = ring[mirror_antenna(k, 8)];
    CHECK(a.i == b.i);
    CHECK(a.j - 60 == 60 - b.j);
  }
  CHECK_THROWS_AS(ring_antennas(g, 8, 0.03), GeometryError);
  CHECK_THROWS_AS(ring_antennas(g, 64, 0.001), GeometryError);
  CHECK_THROWS_AS(ring_antennas(g, 1, 0.02), ConfigError);

  const auto nulls = null_cluster({10, 20}, 3, 2);
  CHECK(nulls == std::vector<Cell>{{10, 20}, {10, 22}, {10, 18}});
  CHECK(null_cluster({5, 5}, 1, 4) == std::vector<Cell>{{5, 5}});
  CHECK_THROWS_AS(null_cluster({0, 0}, 0, 2), ConfigError);
}

TEST_CASE("spatial average of two equal halves") {
  GridSpec g;
  g.nx = 5;
  g.ny = 5;
  MediaMap m(g, TissueLabel::water);
  TissueCell a = TissueCell::of(TissueLabel::fat), b = a;
  a.debye.sigma_s = 1.0;
  b.debye.sigma_s = 0.5;
  MaskGrid region(5, 5, 0);
  for (int i = 1; i <= 4; ++i) {
    m.set({i, 2}, i <= 2 ? a : b);
    region(i, 2) = 1;
  }
  const MediaMap avg = spatial_average_media(m, region);
  for (int i = 1; i <= 4; ++i) CHECK(avg.cell(i, 2).debye.sigma_s == 0.75);
  CHECK(avg.cell(0, 2) == m.cell(0, 2));
  CHECK(avg.cell(1, 1) == m.cell(1, 1));

  const MediaMap twice = spatial_average_media(avg, region);
  for (int i = 1; i <= 4; ++i) {
    CHECK(twice.cell(i, 2).debye.eps_inf == doctest::Approx(avg.cell(i, 2).debye.eps_inf).epsilon(1e-15));
    CHECK(twice.cell(i, 2).debye.sigma_s == doctest::Approx(0.75).epsilon(1e-15));
  }

  MaskGrid one(5, 5, 0);
  one(3, 2) = 1;
  CHECK(spatial_average_media(m, one) == m);

  CHECK_THROWS_AS(spatial_average_media(m, MaskGrid(5, 5, 0)), DomainError);
  CHECK_THROWS_AS(spatial_average_media(m, MaskGrid(4, 5, 1)), DomainError);
}

TEST_CASE("weights and channel CSV round trip") {
  std::mt19937_64 rng(9);
  ChannelMatrix c;
  c.entries = random_matrix(rng, 6, 2);
  std::stringstream cs;
  write_channel_csv(cs, c);
  const ChannelMatrix back = read_channel_csv(cs);
  CHECK(back.entries == c.entries);

  const auto w = lcmp_weights(c, ObjectiveVector{{1.0, 0.0}});
  std::stringstream ws;
  write_weights_csv(ws, w);
  const auto wb = read_weights_csv(ws);
  CHECK(wb.w == w.w);
  CHECK(wb.phase_only);

  std::stringstream bad("antenna,real,imag,phase\n0,1,x,0\n");
  CHECK_THROWS_AS(read_weights_csv(bad), ParseError);
  std::stringstream gap("antenna,real,imag,phase\n0,1,0,0\n2,1,0,0\n");
  CHECK_THROWS_AS(read_weights_csv(gap), ParseError);
  std::stringstream partial("objective,antenna,real,imag,phase\n0,0,1,0,0\n1,1,1,0,0\n");
  CHECK_THROWS_AS(read_channel_csv(partial), ParseError);
}

TEST_CASE("acquired channel is normalised to the reference antenna") {
  SmallSetup s;
  const auto c = acquire_channel(s.media, {{60, 60}}, s.antennas);
  CHECK(c.entries(0, 0) == cd(1.0, 0.0));
  CHECK(c.carrier_freq == 2.5e9);
  // The on-axis antennas form one orbit of the grid symmetry around a centred focus,
  // the diagonal ones another.
  for (int k : {2, 4, 6}) CHECK(std::abs(c.entries(k, 0) - 1.0) < 1e-6);
  for (int k : {3, 5, 7}) CHECK(std::abs(c.entries(k, 0) - c.entries(1, 0)) < 1e-6 * std::abs(c.entries(1, 0)));
}

TEST_CASE("mirrored objective permutes the channel") {
  SmallSetup s;
  const auto up = acquire_channel(s.media, {{60, 72}}, s.antennas);
  const auto down = acquire_channel(s.media, {{60, 48}}, s.antennas);
  for (int k = 0; k < 8; ++k)
    CHECK(std::abs(up.entries(k, 0) - down.entries(mirror_antenna(k, 8), 0)) < 1e-6 * std::abs(up.entries(k, 0)));
  // Nearest element to the focus sees the strongest signal.
  Eigen::Index best = 0;
  up.entries.col(0).cwiseAbs().maxCoeff(&best);
  CHECK(best == 2);
}

TEST_CASE("acquisition rejects bad objectives") {
  SmallSetup s;
  CHECK_THROWS_AS(acquire_channel(s.media, {{60, 60}, {55, 60}, {65, 60}, {60, 55}, {60, 65}, {58, 58}, {62, 62}, {62, 58}},
                                  s.antennas),
                  ConfigError);
  CHECK_THROWS_AS(acquire_channel(s.media, {{60, 99}}, s.antennas), GeometryError);
  AcquireOptions o;
  o.reference_antenna = 8;
  CHECK_THROWS_AS(acquire_channel(s.media, {{60, 60}}, s.antennas, o), ConfigError);
}

TEST_CASE("design modes agree when the true media is the baseline") {
  SmallSetup s;
  const std::vector<Cell> obj{{52, 60}, {68, 60}};
  const ObjectiveVector g{{1.0, 0.0}};
  const auto st = design(DesignMode::static_baseline, s.media, s.media, obj, g, s.antennas);
  const auto id = design(DesignMode::ideal, s.media, s.media, obj, g, s.antennas);
  const auto pk = design(DesignMode::partial_knowledge, s.media, s.media, obj, g, s.antennas);
  CHECK(st.weights.w == id.weights.w);
  CHECK((pk.weights.w - id.weights.w).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(st.weights.mode == DesignMode::static_baseline);
  CHECK(pk.weights.mode == DesignMode::partial_knowledge);

  const auto one = design(DesignMode::ideal, s.media, s.media, {{52, 60}}, ObjectiveVector{{1.0}}, s.antennas);
  const auto conj = conjugate_weights(one.channel.column(0));
  CHECK(one.weights.w == conj.w);
}

}  // TEST_SUITE
