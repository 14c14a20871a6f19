#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dlglab {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using IMat = Eigen::MatrixXi;
using IVec = Eigen::VectorXi;

enum class ErrorCode {
  overlapping_head_tail,
  empty_head,
  nonpositive_weight,
  isolated_vertex,
  vertex_out_of_range,
  empty_hypergraph,
  not_hermitian,
  no_convergence,
  shape_mismatch,
  residual_width_mismatch,
  empty_split,
  too_few_samples,
  parse_error,
  invalid_config,
  io_error,
};

const char* to_string(ErrorCode code);

/// Library-wide exception; carries a stable error code for programmatic handling.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace dlglab
