#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace ccsim::sdp {

/// Matrix whose entries are affine in the decision vector x:
/// constant + sum_i x_i * coeff_i.
class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(int rows, int cols) : constant_(Eigen::MatrixXd::Zero(rows, cols)) {}
  explicit AffineMatrix(Eigen::MatrixXd constant) : constant_(std::move(constant)) {}

  static AffineMatrix zero(int rows, int cols) { return AffineMatrix(rows, cols); }
  static AffineMatrix identity(int n) { return AffineMatrix(Eigen::MatrixXd::Identity(n, n)); }

  int rows() const { return static_cast<int>(constant_.rows()); }
  int cols() const { return static_cast<int>(constant_.cols()); }
  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& terms() const { return terms_; }

  void add_term(int var, const Eigen::MatrixXd& coeff);
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
  /// Replaces variable `var` by the constant `value`.
  AffineMatrix substitute(int var, double value) const;

  AffineMatrix transpose() const;
  AffineMatrix operator+(const AffineMatrix& o) const;
  AffineMatrix operator-(const AffineMatrix& o) const;
  AffineMatrix operator-() const { return (*this) * -1.0; }
  AffineMatrix operator*(double s) const;
  friend AffineMatrix operator*(double s, const AffineMatrix& m) { return m * s; }
  friend AffineMatrix operator*(const Eigen::MatrixXd& left, const AffineMatrix& m);
  AffineMatrix operator*(const Eigen::MatrixXd& right) const;

  /// Assembles a block matrix; every row of blocks must share heights and
  /// every column widths.
  static AffineMatrix blocks(const std::vector<std::vector<AffineMatrix>>& grid);

 private:
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> terms_;
};

/// Linear objective subject to a list of LMIs F_k(x) >= 0.
class LmiProblem {
 public:
  int num_vars() const { return num_vars_; }
  int add_variable() { return num_vars_++; }
  /// Symmetric n x n matrix variable (n(n+1)/2 scalars).
  AffineMatrix add_symmetric(int n);
  /// Unstructured rows x cols matrix variable.
  AffineMatrix add_matrix(int rows, int cols);
  AffineMatrix scalar(int var) const;

  /// Adds F >= 0; F is symmetrised.
  void add_lmi(const AffineMatrix& F, std::string name);
  const std::vector<AffineMatrix>& lmis() const { return lmis_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Maximise c' x.
  void set_objective(Eigen::VectorXd c) { objective_ = std::move(c); }
  Eigen::VectorXd objective() const;

  /// Smallest eigenvalue over all LMIs at x, and the name of the block attaining it.
  std::pair<double, std::string> min_eigenvalue(const Eigen::VectorXd& x) const;

 private:
  int num_vars_ = 0;
  std::vector<AffineMatrix> lmis_;
  std::vector<std::string> names_;
  Eigen::VectorXd objective_;
};

enum class Status { optimal, infeasible, iteration_limit, numerical_error };

const char* to_string(Status s);

struct Options {
  double relative_gap = 1e-9;
  double absolute_gap = 1e-12;
  double t_initial = 1.0;
  double t_factor = 10.0;
  int max_newton_steps = 2000;
};

struct Result {
  Status status = Status::numerical_error;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Smallest LMI eigenvalue at x (positive for strictly feasible points).
  double min_eigenvalue = 0.0;
  int newton_steps = 0;
  std::string message;
};

/// Phase I: a point with every LMI positive definite, or Status::infeasible.
Result find_strictly_feasible(const LmiProblem& problem, const Options& options = {});

/// Log-det barrier path following from a phase-I point.
Result maximize(const LmiProblem& problem, const Options& options = {});

}  // namespace ccsim::sdp
