#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwht {

enum class ErrorKind {
  domain,
  geometry,
  config,
  numerical,
  acquisition,
  degenerate_channel,
  ill_conditioned,
  calibration,
  insufficient_data,
  comparison,
  parse,
  io,
};

/// Base of every exception thrown by the toolkit. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error(ErrorKind::geometry, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};

/// NaN/Inf in the field arrays; carries the offending timestep.
class NumericalInstability : public Error {
public:
  NumericalInstability(std::int64_t step, const std::string& where)
      : Error(ErrorKind::numerical,
              "numerical instability at step " + std::to_string(step) + " (" + where + ")"),
        step_(step) {}
  std::int64_t step() const noexcept { return step_; }

private:
  std::int64_t step_;
};

struct AcquisitionError : Error {
  explicit AcquisitionError(const std::string& w) : Error(ErrorKind::acquisition, w) {}
};

struct DegenerateChannelError : Error {
  explicit DegenerateChannelError(const std::string& w) : Error(ErrorKind::degenerate_channel, w) {}
};

/// Constraint set too close to rank deficiency; lists the columns that are nearly dependent.
class IllConditionedError : public Error {
public:
  IllConditionedError(double rcond, std::vector<std::size_t> columns, const std::string& w)
      : Error(ErrorKind::ill_conditioned, w), rcond_(rcond), columns_(std::move(columns)) {}
  double rcond() const noexcept { return rcond_; }
  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

private:
  double rcond_;
  std::vector<std::size_t> columns_;
};

struct CalibrationError : Error {
  explicit CalibrationError(const std::string& w) : Error(ErrorKind::calibration, w) {}
};

struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& w) : Error(ErrorKind::insufficient_data, w) {}
};

struct ComparisonError : Error {
  explicit ComparisonError(const std::string& w) : Error(ErrorKind::comparison, w) {}
};

/// Malformed binary or text input. `offset` is the byte offset where parsing stopped.
class ParseError : public Error {
public:
  ParseError(std::uint64_t offset, const std::string& w)
      : Error(ErrorKind::parse, w + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

private:
  std::uint64_t offset_;
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

}  // namespace mwht
