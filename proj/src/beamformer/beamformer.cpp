#include "mwht/beamformer/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "mwht/constants.hpp"

namespace mwht::bf {

std::vector<Cell> ring_antennas(const GridSpec& grid, int count, double radius, Point center) {
  if (count < 2) throw ConfigError("antenna ring needs at least 2 elements");
  if (!(radius > 0.0)) throw ConfigError("antenna ring radius must be positive");
  std::vector<Cell> out;
  std::set<std::pair<int, int>> seen;
  for (int k = 0; k < count; ++k) {
    const double a = 2.0 * constants::pi * k / count;
    const Cell c = grid.cell_at({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    if (!grid.inside_interior(c, 1))
      throw GeometryError("antenna " + std::to_string(k) + " falls outside the grid interior");
    if (!seen.insert({c.i, c.j}).second)
      throw GeometryError("antennas " + std::to_string(k) + " and an earlier element share a cell");
    out.push_back(c);
  }
  return out;
}

std::vector<Cell> null_cluster(Cell center, int count, int spacing) {
  if (count < 1) throw ConfigError("null cluster needs at least one cell");
  if (spacing < 1) throw ConfigError("null spacing must be at least one cell");
  std::vector<Cell> out;
  for (int k = 0; k < count; ++k) {
    const int off = (k + 1) / 2 * (k % 2 == 1 ? 1 : -1);  // 0, +1, -1, +2, -2, ...
    out.push_back({center.i, center.j + off * spacing});
  }
  return out;
}

void ObjectiveVector::validate(int columns) const {
  if (static_cast<int>(g.size()) != columns)
    throw ConfigError("objective vector has " + std::to_string(g.size()) + " entries for " +
                      std::to_string(columns) + " channel columns");
  bool focus = false;
  for (double v : g) {
    if (v != 0.0 && v != 1.0) throw ConfigError("objective entries must be 0 (null) or 1 (focus)");
    focus = focus || v == 1.0;
  }
  if (!focus) throw ConfigError("objective vector needs at least one focus");
}

ObjectiveVector ObjectiveVector::focus_then_nulls(int nulls) {
  ObjectiveVector o;
  o.g.assign(static_cast<std::size_t>(nulls) + 1, 0.0);
  o.g[0] = 1.0;
  return o;
}

std::string to_string(DesignMode m) {
  switch (m) {
    case DesignMode::static_baseline: return "static";
    case DesignMode::ideal: return "ideal";
    case DesignMode::partial_knowledge: return "partial-knowledge";
  }
  return "?";
}

DesignMode parse_design_mode(const std::string& s) {
  if (s == "static") return DesignMode::static_baseline;
  if (s == "ideal") return DesignMode::ideal;
  if (s == "partial-knowledge" || s == "partial_knowledge") return DesignMode::partial_knowledge;
  throw ConfigError("unknown beamformer mode '" + s + "'");
}

ChannelMatrix acquire_channel(const MediaMap& media, const std::vector<Cell>& objectives,
                              const std::vector<Cell>& antennas, const AcquireOptions& options) {
  const int n = static_cast<int>(antennas.size());
  const int m = static_cast<int>(objectives.size());
  if (n < 2) throw ConfigError("acquisition needs at least 2 antennas");
  if (m < 1 || m > n - 1)
    throw ConfigError("objective count must lie in [1, N - 1] (got " + std::to_string(m) + ")");
  if (options.reference_antenna < 0 || options.reference_antenna >= n)
    throw ConfigError("reference antenna index out of range");

  ChannelMatrix c;
  c.entries.resize(n, m);
  c.reference_antenna = options.reference_antenna;
  c.carrier_freq = options.pulse.pulse.carrier;
  c.objectives = objectives;
  for (int col = 0; col < m; ++col) {
    const Cell obj = objectives[col];
    if (!media.grid().contains(obj)) throw GeometryError("objective cell outside the grid");
    if (!media.is_tissue(obj)) throw GeometryError("objective cell is not tissue");
    const em::ProbeRecording rec = em::run_pulse(media, obj, antennas, options.pulse);
    for (int k = 0; k < n; ++k) {
      const auto& s = rec.series[k];
      const auto start = em::first_arrival(s, options.arrival_fraction);
      if (!start || rec.below_noise_floor[k])
        throw AcquisitionError("degenerate recording at antenna " + std::to_string(k) +
                               " for objective " + std::to_string(col));
      c.entries(k, col) = em::single_frequency_dft(s, rec.dt, c.carrier_freq, *start);
    }
    const cd ref = c.entries(c.reference_antenna, col);
    if (std::abs(ref) == 0.0) throw AcquisitionError("reference antenna phasor is zero");
    for (int k = 0; k < n; ++k) c.entries(k, col) /= ref;
    c.entries(c.reference_antenna, col) = cd(1.0, 0.0);
  }
  return c;
}

BeamformerWeights conjugate_weights(const Eigen::VectorXcd& c, DesignMode mode) {
  BeamformerWeights b;
  b.mode = mode;
  b.phase_only = true;
  b.w.resize(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    const double mag = std::abs(c[k]);
    if (!(mag > 0.0) || !std::isfinite(mag))
      throw DegenerateChannelError("channel entry " + std::to_string(k) + " has zero magnitude");
    b.w[k] = std::conj(c[k]) / mag;
  }
  b.pre_projection = b.w;
  return b;
}

Eigen::VectorXcd phase_only(const Eigen::VectorXcd& w) {
  Eigen::VectorXcd out(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double mag = std::abs(w[k]);
    out[k] = mag > 0.0 ? w[k] / mag : cd(1.0, 0.0);
  }
  return out;
}

double constraint_residual(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& c, const ObjectiveVector& g) {
  const Eigen::RowVectorXcd wc = w.transpose() * c;
  double r = 0.0;
  for (Eigen::Index m = 0; m < wc.size(); ++m) r = std::max(r, std::abs(wc[m] - g.g[m]));
  return r;
}

double scaled_constraint_residual(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& c, const ObjectiveVector& g) {
  const Eigen::VectorXcd wc = (w.transpose() * c).transpose();
  Eigen::VectorXcd gv(wc.size());
  for (Eigen::Index m = 0; m < wc.size(); ++m) gv[m] = g.g[m];
  const double den = wc.squaredNorm();
  const cd a = den > 0.0 ? wc.dot(gv) / den : cd(0.0, 0.0);  // dot conjugates the first argument
  return (a * wc - gv).cwiseAbs().maxCoeff();
}

std::pair<Eigen::VectorXcd, int> phase_only_alternating(const Eigen::VectorXcd& start, const Eigen::MatrixXcd& c,
                                                        const ObjectiveVector& g, int max_iterations,
                                                        double null_tolerance) {
  const Eigen::MatrixXcd a = c.transpose();  // rows act on w: (a w)_m = (w C)_m
  const Eigen::MatrixXcd ah = a.adjoint();
  const Eigen::LDLT<Eigen::MatrixXcd> gram(a * ah);
  Eigen::VectorXcd w = phase_only(start);
  auto worst_null = [&](const Eigen::VectorXcd& r, cd focus) {
    double worst = 0.0;
    for (Eigen::Index m = 0; m < r.size(); ++m)
      if (g.g[m] == 0.0) worst = std::max(worst, std::abs(r[m]));
    return std::abs(focus) > 0.0 ? worst / std::abs(focus) : std::numeric_limits<double>::infinity();
  };
  auto focus_mean = [&](const Eigen::VectorXcd& r) {
    cd s(0.0, 0.0);
    int n = 0;
    for (Eigen::Index m = 0; m < r.size(); ++m)
      if (g.g[m] == 1.0) {
        s += r[m];
        ++n;
      }
    return s / static_cast<double>(n);
  };
  int it = 0;
  for (; it < max_iterations; ++it) {
    const Eigen::VectorXcd r = a * w;
    const cd f = focus_mean(r);
    if (worst_null(r, f) <= null_tolerance) break;
    Eigen::VectorXcd b(r.size());
    for (Eigen::Index m = 0; m < r.size(); ++m) b[m] = g.g[m] == 1.0 ? f : cd(0.0, 0.0);
    const Eigen::VectorXcd v = w + ah * gram.solve(b - r);
    w = phase_only(v);
  }
  return {w, it};
}

BeamformerWeights lcmp_weights(const Eigen::MatrixXcd& c, const ObjectiveVector& g,
                               const LcmpOptions& options, DesignMode mode) {
  const Eigen::Index n = c.rows(), m = c.cols();
  if (m < 1 || m > n - 1)
    throw ConfigError("LCMP needs 1 <= M <= N - 1 (N = " + std::to_string(n) + ", M = " +
                      std::to_string(m) + ")");
  g.validate(static_cast<int>(m));

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv[0], smin = sv[m - 1];
  const double rcond = smax > 0.0 ? (smin / smax) * (smin / smax) : 0.0;
  if (!(rcond >= options.rcond_threshold)) {
    std::vector<std::size_t> cols;
    const Eigen::VectorXcd v = svd.matrixV().col(m - 1);
    const double vmax = v.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < m; ++k)
      if (std::abs(v[k]) >= 0.1 * vmax) cols.push_back(static_cast<std::size_t>(k));
    std::ostringstream msg;
    msg << "constraint matrix is ill-conditioned (rcond " << rcond << "); near-dependent columns:";
    for (auto k : cols) msg << ' ' << k;
    throw IllConditionedError(rcond, cols, msg.str());
  }

  // C = Q R; w^T C = g^T  <=>  R^H y = g, w = conj(Q y).
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(c);
  const Eigen::MatrixXcd r = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, m);
  Eigen::VectorXcd gv(m);
  for (Eigen::Index k = 0; k < m; ++k) gv[k] = g.g[k];
  const Eigen::VectorXcd y = r.adjoint().triangularView<Eigen::Lower>().solve(gv);

  BeamformerWeights b;
  b.mode = mode;
  b.pre_projection = (q * y).conjugate();
  b.residual_pre = constraint_residual(b.pre_projection, c, g);
  if (options.phase_only) {
    if (options.projection == PhaseProjection::alternating) {
      auto [w, it] = phase_only_alternating(b.pre_projection, c, g, options.max_iterations, options.null_tolerance);
      b.w = std::move(w);
      b.projection_iterations = it;
    } else {
      b.w = phase_only(b.pre_projection);
    }
    b.phase_only = true;
  } else {
    b.w = b.pre_projection;
  }
  b.residual_post = scaled_constraint_residual(b.w, c, g);
  return b;
}

BeamformerWeights lcmp_weights(const ChannelMatrix& c, const ObjectiveVector& g,
                               const LcmpOptions& options, DesignMode mode) {
  return lcmp_weights(c.entries, g, options, mode);
}

MediaMap spatial_average_media(const MediaMap& media, const MaskGrid& region) {
  const GridSpec& grid = media.grid();
  if (region.nx() != grid.nx || region.ny() != grid.ny)
    throw DomainError("region mask does not match the media grid");
  DebyeParams mean{0.0, 0.0, 0.0, 0.0};
  std::size_t count = 0;
  for (std::size_t k = 0; k < region.size(); ++k) {
    if (!region[k]) continue;
    const DebyeParams& d = media.cells()[k].debye;
    mean.eps_inf += d.eps_inf;
    mean.delta_eps += d.delta_eps;
    mean.sigma_s += d.sigma_s;
    mean.tau += d.tau;
    ++count;
  }
  if (count == 0) throw DomainError("spatial average over an empty region");
  const double inv = static_cast<double>(count);
  mean.eps_inf /= inv;
  mean.delta_eps /= inv;
  mean.sigma_s /= inv;
  mean.tau /= inv;
  MediaMap out = media;
  for (std::size_t k = 0; k < region.size(); ++k)
    if (region[k]) out.cells()[k].debye = mean;
  return out;
}

BeamformerWeights weights_from_channel(const ChannelMatrix& c, const ObjectiveVector& g,
                                       const LcmpOptions& options, DesignMode mode) {
  if (c.columns() == 1) {
    g.validate(1);
    return conjugate_weights(c.column(0), mode);
  }
  return lcmp_weights(c, g, options, mode);
}

DesignResult design(DesignMode mode, const MediaMap& true_media, const MediaMap& baseline_media,
                    const std::vector<Cell>& objectives, const ObjectiveVector& g,
                    const std::vector<Cell>& antennas, const DesignOptions& options) {
  g.validate(static_cast<int>(objectives.size()));
  DesignResult r;
  switch (mode) {
    case DesignMode::static_baseline:
      r.channel = acquire_channel(baseline_media, objectives, antennas, options.acquire);
      break;
    case DesignMode::ideal:
      r.channel = acquire_channel(true_media, objectives, antennas, options.acquire);
      break;
    case DesignMode::partial_knowledge:
      r.channel = acquire_channel(spatial_average_media(true_media, true_media.tissue_mask()),
                                  objectives, antennas, options.acquire);
      break;
  }
  r.weights = weights_from_channel(r.channel, g, options.lcmp, mode);
  return r;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() && s.find_first_not_of(" \r", pos) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "bad number '" + s + "' in CSV line " + std::to_string(line));
  }
}

}  // namespace

void write_weights_csv(std::ostream& os, const BeamformerWeights& w) {
  os << "antenna,real,imag,phase\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < w.w.size(); ++k)
    os << k << ',' << w.w[k].real() << ',' << w.w[k].imag() << ',' << std::arg(w.w[k]) << '\n';
}

void save_weights_csv(const std::filesystem::path& path, const BeamformerWeights& w) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  write_weights_csv(os, w);
}

BeamformerWeights read_weights_csv(std::istream& is) {
  std::string line;
  std::size_t ln = 1;
  if (!std::getline(is, line) || line.rfind("antenna,real,imag", 0) != 0)
    throw ParseError(0, "weights CSV header missing");
  std::vector<cd> v;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() < 3) throw ParseError(ln, "short weights CSV line " + std::to_string(ln));
    if (static_cast<std::size_t>(to_double(f[0], ln)) != v.size())
      throw ParseError(ln, "weights CSV antenna indices must be consecutive");
    v.emplace_back(to_double(f[1], ln), to_double(f[2], ln));
  }
  BeamformerWeights b;
  b.w = Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
  b.pre_projection = b.w;
  b.phase_only = std::all_of(v.begin(), v.end(), [](cd z) { return std::abs(std::abs(z) - 1.0) < 1e-12; });
  return b;
}

BeamformerWeights load_weights_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  return read_weights_csv(is);
}

void write_channel_csv(std::ostream& os, const ChannelMatrix& c) {
  os << "objective,antenna,real,imag,phase\n" << std::setprecision(17);
  for (int m = 0; m < c.columns(); ++m)
    for (int k = 0; k < c.antennas(); ++k) {
      const cd z = c.entries(k, m);
      os << m << ',' << k << ',' << z.real() << ',' << z.imag() << ',' << std::arg(z) << '\n';
    }
}

void save_channel_csv(const std::filesystem::path& path, const ChannelMatrix& c) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  write_channel_csv(os, c);
}

ChannelMatrix read_channel_csv(std::istream& is) {
  std::string line;
  std::size_t ln = 1;
  if (!std::getline(is, line) || line.rfind("objective,antenna,real,imag", 0) != 0)
    throw ParseError(0, "channel CSV header missing");
  std::vector<std::tuple<int, int, cd>> rows;
  int nm = 0, nk = 0;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() < 4) throw ParseError(ln, "short channel CSV line " + std::to_string(ln));
    const int m = static_cast<int>(to_double(f[0], ln)), k = static_cast<int>(to_double(f[1], ln));
    if (m < 0 || k < 0) throw ParseError(ln, "negative index in channel CSV");
    rows.emplace_back(m, k, cd(to_double(f[2], ln), to_double(f[3], ln)));
    nm = std::max(nm, m + 1);
    nk = std::max(nk, k + 1);
  }
  if (rows.size() != static_cast<std::size_t>(nm) * nk) throw ParseError(ln, "channel CSV is not a full matrix");
  ChannelMatrix c;
  c.entries = Eigen::MatrixXcd::Zero(nk, nm);
  for (const auto& [m, k, z] : rows) c.entries(k, m) = z;
  return c;
}

}  // namespace mwht::bf
