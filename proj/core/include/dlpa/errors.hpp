#pragma once

#include <stdexcept>
#include <string>

namespace dlpa {

/// Bad scenario/experiment configuration (inconsistent user counts,
/// invalid keys, infeasible precoder setup). CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem and serialization failures (missing file, bad magic,
/// checksum mismatch, truncation). CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Semantic mismatches between otherwise well-formed artifacts
/// (model/dataset shape disagreement, degenerate inputs). CLI exit code 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dlpa
