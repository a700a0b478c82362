#pragma once

#include <stdexcept>
#include <string>

namespace stitchnet {

// All engine failures derive from Error and carry a stable, greppable
// class prefix ("geometry-error: ..." etc.) used verbatim by the CLI.
class Error : public std::runtime_error {
 public:
  Error(const std::string& cls, const std::string& msg)
      : std::runtime_error(cls + ": " + msg), cls_(cls) {}
  const std::string& error_class() const { return cls_; }

 private:
  std::string cls_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape-error", m) {}
};

struct RangeError : Error {
  explicit RangeError(const std::string& m) : Error("range-error", m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error("numeric-error", m) {}
};

struct GeometryError : Error {
  explicit GeometryError(const std::string& m) : Error("geometry-error", m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config-error", m) {}
};

struct DataError : Error {
  explicit DataError(const std::string& m) : Error("data-error", m) {}
};

struct CheckpointError : Error {
  explicit CheckpointError(const std::string& m) : Error("checkpoint-error", m) {}
};

struct MetricError : Error {
  explicit MetricError(const std::string& m) : Error("metric-error", m) {}
};

}  // namespace stitchnet
