#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mwht/em/runs.hpp"
#include "mwht/media_map.hpp"

namespace mwht::bf {

using cd = std::complex<double>;

/// N antennas at angles 2 pi k / N on a circle, snapped to the nearest cell.
/// Antenna 0 sits at (center.x + radius, center.y) and is the default reference.
std::vector<Cell> ring_antennas(const GridSpec& grid, int count, double radius, Point center = {});

/// Antenna index mirrored about the x-axis: k -> (N - k) mod N.
inline int mirror_antenna(int k, int count) { return (count - k) % count; }

/// Null cells for one hotspot: `count` cells spaced `spacing` cells apart along y, centered on `center`.
std::vector<Cell> null_cluster(Cell center, int count = 3, int spacing = 2);

struct ChannelMatrix {
  Eigen::MatrixXcd entries;  ///< N x M, column m is normalized so entries(ref, m) == 1
  int reference_antenna = 0;
  double carrier_freq = 0.0;
  std::vector<Cell> objectives;

  int antennas() const { return static_cast<int>(entries.rows()); }
  int columns() const { return static_cast<int>(entries.cols()); }
  Eigen::VectorXcd column(int m) const { return entries.col(m); }
};

/// g in {0, 1}^M: 1 = focus, 0 = null.
struct ObjectiveVector {
  std::vector<double> g;
  void validate(int columns) const;
  static ObjectiveVector focus_then_nulls(int nulls);
};

enum class DesignMode { static_baseline, ideal, partial_knowledge };
std::string to_string(DesignMode m);
DesignMode parse_design_mode(const std::string& s);

struct BeamformerWeights {
  Eigen::VectorXcd w;  ///< transmitted weights (phase-only if flagged)
  bool phase_only = false;
  DesignMode mode = DesignMode::ideal;
  Eigen::VectorXcd pre_projection;  ///< weights before phase-only projection
  double residual_pre = 0.0;        ///< max |w C - g^H| before projection
  double residual_post = 0.0;       ///< after projection, with w rescaled by the best complex factor
  int projection_iterations = 0;

  std::vector<cd> as_vector() const { return {w.data(), w.data() + w.size()}; }
};

struct AcquireOptions {
  em::PulseOptions pulse;
  int reference_antenna = 0;
  /// DFT starts at the first sample above this fraction of each probe's peak.
  double arrival_fraction = 1e-6;
};

/// Time-reversal acquisition: one pulsed run per objective, 2.5 GHz phasor at each antenna,
/// normalized to the reference antenna. Throws AcquisitionError for degenerate recordings.
ChannelMatrix acquire_channel(const MediaMap& media, const std::vector<Cell>& objectives,
                              const std::vector<Cell>& antennas, const AcquireOptions& options = {});

/// w_k = conj(c_k) / |c_k|. Throws DegenerateChannelError for a zero entry.
BeamformerWeights conjugate_weights(const Eigen::VectorXcd& c, DesignMode mode = DesignMode::ideal);

enum class PhaseProjection {
  normalize,   ///< w_k / |w_k|
  alternating  ///< alternate between the constraint set and unit modulus, starting from normalize
};

struct LcmpOptions {
  bool phase_only = true;
  PhaseProjection projection = PhaseProjection::alternating;
  int max_iterations = 5000;
  /// Stop once every null response is below this fraction of the mean focus response.
  double null_tolerance = 1e-5;
  double rcond_threshold = 1e-10;  ///< reciprocal condition estimate of C^H C
};

/// w = g^H (C^H C)^-1 C^H, solved through a QR factorization of C.
/// Throws IllConditionedError naming the near-dependent columns.
BeamformerWeights lcmp_weights(const ChannelMatrix& c, const ObjectiveVector& g,
                               const LcmpOptions& options = {}, DesignMode mode = DesignMode::ideal);
BeamformerWeights lcmp_weights(const Eigen::MatrixXcd& c, const ObjectiveVector& g,
                               const LcmpOptions& options = {}, DesignMode mode = DesignMode::ideal);

/// max_m |(w C)_m - g_m|.
double constraint_residual(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& c, const ObjectiveVector& g);

/// Unit-magnitude weights keeping each phase (zero entries become 1).
Eigen::VectorXcd phase_only(const Eigen::VectorXcd& w);

/// Unit-modulus weights that keep the null responses of `c` small: alternates between the
/// affine set {w C = b} (nulls zero, foci at their current mean response) and unit modulus.
/// Returns the weights and the number of iterations used.
std::pair<Eigen::VectorXcd, int> phase_only_alternating(const Eigen::VectorXcd& start, const Eigen::MatrixXcd& c,
                                                        const ObjectiveVector& g, int max_iterations,
                                                        double null_tolerance);

/// max_m |a (w C)_m - g_m| for the complex a minimizing the sum of squares.
double scaled_constraint_residual(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& c, const ObjectiveVector& g);

/// Copy whose region cells carry the per-field mean Debye parameters over the region.
MediaMap spatial_average_media(const MediaMap& media, const MaskGrid& region);

struct DesignResult {
  ChannelMatrix channel;
  BeamformerWeights weights;
};

struct DesignOptions {
  AcquireOptions acquire;
  LcmpOptions lcmp;
};

/// static: channel from baseline_media; ideal: from true_media; partial-knowledge: from the
/// tissue-averaged true_media. Conjugate weights for one objective, LCMP otherwise.
DesignResult design(DesignMode mode, const MediaMap& true_media, const MediaMap& baseline_media,
                    const std::vector<Cell>& objectives, const ObjectiveVector& g,
                    const std::vector<Cell>& antennas, const DesignOptions& options = {});

/// Weights from an already acquired channel (conjugate for M = 1, LCMP otherwise).
BeamformerWeights weights_from_channel(const ChannelMatrix& c, const ObjectiveVector& g,
                                       const LcmpOptions& options, DesignMode mode);

// CSV: antenna,real,imag,phase  /  objective,antenna,real,imag,phase
void write_weights_csv(std::ostream& os, const BeamformerWeights& w);
void save_weights_csv(const std::filesystem::path& path, const BeamformerWeights& w);
BeamformerWeights read_weights_csv(std::istream& is);
BeamformerWeights load_weights_csv(const std::filesystem::path& path);
void write_channel_csv(std::ostream& os, const ChannelMatrix& c);
void save_channel_csv(const std::filesystem::path& path, const ChannelMatrix& c);
ChannelMatrix read_channel_csv(std::istream& is);

}  // namespace mwht::bf
