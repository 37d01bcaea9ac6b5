// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace muonlab {

enum class ErrorKind {
  Precondition,
  Shape,
  Convergence,
  RankDeficient,
  Numerical,
  Config,
  Io,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "error";
}

}  // namespace muonlab
