#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace tradeeq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input data. `location` names the offending
/// cell or row (empty when not applicable).
class InputError : public Error {
 public:
  InputError(const std::string& what, std::string location = {})
      : Error(what), location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

/// CSV schema violations, one entry per problem (row numbers included).
class SchemaError : public InputError {
 public:
  explicit SchemaError(std::vector<std::string> problems)
      : InputError(summarize(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string summarize(const std::vector<std::string>& problems) {
    std::string out = "schema error";
    if (!problems.empty()) out += ": " + problems.front();
    if (problems.size() > 1) out += " (+" + std::to_string(problems.size() - 1) + " more)";
    return out;
  }
  std::vector<std::string> problems_;
};

/// Linear dependence where independence was required.
class RankError : public Error {
 public:
  RankError(const std::string& what, Eigen::Index rank, Eigen::Index expected)
      : Error(what), rank_(rank), expected_(expected) {}
  Eigen::Index rank() const noexcept { return rank_; }
  Eigen::Index expected() const noexcept { return expected_; }

 private:
  Eigen::Index rank_;
  Eigen::Index expected_;
};

/// A target vector is not where an operation needs it to be relative to a
/// polyhedral cone. The certificate holds the dual coefficients <f_i, b> of
/// the subcone that came closest.
class ConeError : public Error {
 public:
  enum class Kind { outside, degenerate_target, no_interior_subcone };

  ConeError(const std::string& what, Kind kind, Eigen::Index dual_index,
            Eigen::VectorXd certificate = {}, std::vector<Eigen::Index> subset = {})
      : Error(what),
        kind_(kind),
        dual_index_(dual_index),
        certificate_(std::move(certificate)),
        subset_(std::move(subset)) {}

  Kind kind() const noexcept { return kind_; }
  /// 0-based index of the violated dual constraint, -1 when not meaningful.
  Eigen::Index dual_index() const noexcept { return dual_index_; }
  const Eigen::VectorXd& certificate() const noexcept { return certificate_; }
  const std::vector<Eigen::Index>& subset() const noexcept { return subset_; }

 private:
  Kind kind_;
  Eigen::Index dual_index_;
  Eigen::VectorXd certificate_;
  std::vector<Eigen::Index> subset_;
};

/// A named precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& condition, const std::string& detail)
      : Error(condition + ": " + detail), condition_(condition) {}
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

/// No admissible value exists; `row`/`col` locate the blocking entry.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, Eigen::Index row, Eigen::Index col)
      : Error(what), row_(row), col_(col) {}
  Eigen::Index row() const noexcept { return row_; }
  Eigen::Index col() const noexcept { return col_; }

 private:
  Eigen::Index row_;
  Eigen::Index col_;
};

/// An iterative method hit its cap without meeting its stopping rule.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, long iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

}  // namespace tradeeq
