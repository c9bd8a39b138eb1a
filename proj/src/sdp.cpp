#include "ccsim/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ccsim::sdp {

// ---------------------------------------------------------------------------
// AffineMatrix

void AffineMatrix::add_term(int var, const Eigen::MatrixXd& coeff) {
  if (coeff.rows() != rows() || coeff.cols() != cols()) throw std::invalid_argument("AffineMatrix: term shape mismatch");
  auto it = terms_.find(var);
  if (it == terms_.end()) terms_.emplace(var, coeff);
  else it->second += coeff;
}

Eigen::MatrixXd AffineMatrix::evaluate(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [var, coeff] : terms_) out += x[var] * coeff;
  return out;
}

AffineMatrix AffineMatrix::substitute(int var, double value) const {
  AffineMatrix out(constant_);
  for (const auto& [v, coeff] : terms_) {
    if (v == var) out.constant_ += value * coeff;
    else out.terms_.emplace(v, coeff);
  }
  return out;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out(Eigen::MatrixXd(constant_.transpose()));
  for (const auto& [var, coeff] : terms_) out.terms_.emplace(var, coeff.transpose());
  return out;
}

AffineMatrix AffineMatrix::operator+(const AffineMatrix& o) const {
  if (o.rows() != rows() || o.cols() != cols()) throw std::invalid_argument("AffineMatrix: shape mismatch in +");
  AffineMatrix out(*this);
  out.constant_ += o.constant_;
  for (const auto& [var, coeff] : o.terms_) out.add_term(var, coeff);
  return out;
}

AffineMatrix AffineMatrix::operator-(const AffineMatrix& o) const { return *this + (o * -1.0); }

AffineMatrix AffineMatrix::operator*(double s) const {
  AffineMatrix out(Eigen::MatrixXd(constant_ * s));
  for (const auto& [var, coeff] : terms_) out.terms_.emplace(var, coeff * s);
  return out;
}

AffineMatrix operator*(const Eigen::MatrixXd& left, const AffineMatrix& m) {
  if (left.cols() != m.rows()) throw std::invalid_argument("AffineMatrix: shape mismatch in left product");
  AffineMatrix out(Eigen::MatrixXd(left * m.constant_));
  for (const auto& [var, coeff] : m.terms_) out.terms_.emplace(var, left * coeff);
  return out;
}

AffineMatrix AffineMatrix::operator*(const Eigen::MatrixXd& right) const {
  if (right.rows() != cols()) throw std::invalid_argument("AffineMatrix: shape mismatch in right product");
  AffineMatrix out(Eigen::MatrixXd(constant_ * right));
  for (const auto& [var, coeff] : terms_) out.terms_.emplace(var, coeff * right);
  return out;
}

AffineMatrix AffineMatrix::blocks(const std::vector<std::vector<AffineMatrix>>& grid) {
  if (grid.empty() || grid.front().empty()) throw std::invalid_argument("AffineMatrix::blocks: empty grid");
  std::vector<int> heights;
  std::vector<int> widths;
  for (const auto& row : grid) heights.push_back(row.front().rows());
  for (const auto& cell : grid.front()) widths.push_back(cell.cols());
  int total_rows = 0;
  int total_cols = 0;
  for (int h : heights) total_rows += h;
  for (int w : widths) total_cols += w;

  AffineMatrix out(total_rows, total_cols);
  int r0 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != widths.size()) throw std::invalid_argument("AffineMatrix::blocks: ragged grid");
    int c0 = 0;
    for (std::size_t j = 0; j < widths.size(); ++j) {
      const AffineMatrix& b = grid[i][j];
      if (b.rows() != heights[i] || b.cols() != widths[j]) throw std::invalid_argument("AffineMatrix::blocks: block shape mismatch");
      out.constant_.block(r0, c0, b.rows(), b.cols()) = b.constant_;
      for (const auto& [var, coeff] : b.terms_) {
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(total_rows, total_cols);
        full.block(r0, c0, b.rows(), b.cols()) = coeff;
        out.add_term(var, full);
      }
      c0 += widths[j];
    }
    r0 += heights[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// LmiProblem

AffineMatrix LmiProblem::add_symmetric(int n) {
  AffineMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      m.add_term(add_variable(), e);
    }
  return m;
}

AffineMatrix LmiProblem::add_matrix(int rows, int cols) {
  AffineMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(rows, cols);
      e(i, j) = 1.0;
      m.add_term(add_variable(), e);
    }
  return m;
}

AffineMatrix LmiProblem::scalar(int var) const {
  AffineMatrix m(1, 1);
  m.add_term(var, Eigen::MatrixXd::Ones(1, 1));
  return m;
}

void LmiProblem::add_lmi(const AffineMatrix& F, std::string name) {
  if (F.rows() != F.cols()) throw std::invalid_argument("add_lmi: block must be square");
  lmis_.push_back((F + F.transpose()) * 0.5);
  names_.push_back(std::move(name));
}

Eigen::VectorXd LmiProblem::objective() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_vars_);
  if (objective_.size() > 0) c.head(std::min<Eigen::Index>(objective_.size(), num_vars_)) = objective_.head(std::min<Eigen::Index>(objective_.size(), num_vars_));
  return c;
}

std::pair<double, std::string> LmiProblem::min_eigenvalue(const Eigen::VectorXd& x) const {
  double best = std::numeric_limits<double>::infinity();
  std::string name;
  for (std::size_t k = 0; k < lmis_.size(); ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmis_[k].evaluate(x), Eigen::EigenvaluesOnly);
    const double v = es.eigenvalues().minCoeff();
    if (v < best) {
      best = v;
      name = names_[k];
    }
  }
  return {best, name};
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::iteration_limit: return "iteration_limit";
    case Status::numerical_error: return "numerical_error";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Barrier path following

namespace {

struct Barrier {
  const std::vector<AffineMatrix>& blocks;
  int n;

  // -sum log det F_k(x); +inf outside the interior.
  double value(const Eigen::VectorXd& x) const {
    double phi = 0.0;
    for (const auto& b : blocks) {
      Eigen::LLT<Eigen::MatrixXd> llt(b.evaluate(x));
      if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
      const auto& L = llt.matrixLLT();
      for (int i = 0; i < L.rows(); ++i) {
        if (!(L(i, i) > 0.0)) return std::numeric_limits<double>::infinity();
        phi -= 2.0 * std::log(L(i, i));
      }
    }
    return phi;
  }

  void derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    grad = Eigen::VectorXd::Zero(n);
    hess = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> vars;
    std::vector<Eigen::MatrixXd> g;
    for (const auto& b : blocks) {
      Eigen::LLT<Eigen::MatrixXd> llt(b.evaluate(x));
      vars.clear();
      g.clear();
      for (const auto& [var, coeff] : b.terms()) {
        vars.push_back(var);
        g.push_back(llt.solve(coeff));
      }
      for (std::size_t i = 0; i < vars.size(); ++i) {
        grad[vars[i]] -= g[i].trace();
        for (std::size_t j = 0; j <= i; ++j) {
          const double h = g[i].cwiseProduct(g[j].transpose()).sum();
          hess(vars[i], vars[j]) += h;
          if (i != j) hess(vars[j], vars[i]) += h;
        }
      }
    }
  }
};

// Near the optimum rounding keeps the Newton decrement from vanishing;
// centering is then cut short and t is increased anyway.
constexpr int kMaxCenteringSteps = 60;

using StopRule = std::function<bool(const Eigen::VectorXd&)>;

int total_dimension(const std::vector<AffineMatrix>& blocks) {
  int m = 0;
  for (const auto& b : blocks) m += b.rows();
  return m;
}

Result path_follow(const std::vector<AffineMatrix>& blocks, const Eigen::VectorXd& c, Eigen::VectorXd x,
                   const Options& opt, const StopRule& stop) {
  const int n = static_cast<int>(x.size());
  Barrier barrier{blocks, n};
  const double m = total_dimension(blocks);
  Result res;
  double t = opt.t_initial;
  double phi = barrier.value(x);
  if (!std::isfinite(phi)) {
    res.status = Status::numerical_error;
    res.message = "starting point is not strictly feasible";
    res.x = x;
    return res;
  }
  Eigen::VectorXd grad_phi;
  Eigen::MatrixXd hess;
  for (;;) {
    // Centering: minimise -t c'x + phi(x).
    for (int inner = 0; inner < kMaxCenteringSteps; ++inner) {
      if (res.newton_steps >= opt.max_newton_steps) {
        res.status = Status::iteration_limit;
        res.message = "Newton step budget exhausted";
        res.x = x;
        res.objective = c.dot(x);
        return res;
      }
      barrier.derivatives(x, grad_phi, hess);
      const Eigen::VectorXd grad = -t * c + grad_phi;
      // Jacobi-scaled LDLT; variables can differ by many orders of magnitude.
      Eigen::VectorXd scale = hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd hs = scale.asDiagonal() * hess * scale.asDiagonal();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hs);
      Eigen::VectorXd dx = -(scale.asDiagonal() * ldlt.solve(scale.asDiagonal() * grad));
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
        hs.diagonal().array() += 1e-12;
        dx = -(scale.asDiagonal() * Eigen::LDLT<Eigen::MatrixXd>(hs).solve(scale.asDiagonal() * grad));
        if (!dx.allFinite()) {
          res.status = Status::numerical_error;
          res.message = "singular barrier Hessian";
          res.x = x;
          res.objective = c.dot(x);
          return res;
        }
      }
      const double decrement_sq = -grad.dot(dx);
      if (decrement_sq <= 1e-10) break;

      const double f0 = -t * c.dot(x) + phi;
      double alpha = 1.0;
      Eigen::VectorXd trial;
      double phi_trial = 0.0;
      int halvings = 0;
      for (;; ++halvings) {
        trial = x + alpha * dx;
        phi_trial = barrier.value(trial);
        if (std::isfinite(phi_trial) && -t * c.dot(trial) + phi_trial <= f0 - 0.25 * alpha * decrement_sq) break;
        alpha *= 0.5;
        if (halvings > 60) break;
      }
      ++res.newton_steps;
      if (halvings > 60) break;  // no progress possible at this t
      x = std::move(trial);
      phi = phi_trial;
      if (!x.allFinite() || x.norm() > 1e30) {
        res.status = Status::numerical_error;
        res.message = "iterates diverged (unbounded problem?)";
        res.x = x;
        return res;
      }
      if (stop && stop(x)) {
        res.status = Status::optimal;
        res.x = x;
        res.objective = c.dot(x);
        return res;
      }
    }
    const double obj = c.dot(x);
    if (std::getenv("CCSIM_SDP_DEBUG")) std::fprintf(stderr, "t=%g steps=%d obj=%.12g\n", t, res.newton_steps, obj);
    if (m / t <= std::max(opt.absolute_gap, opt.relative_gap * std::abs(obj))) {
      res.status = Status::optimal;
      res.x = x;
      res.objective = obj;
      return res;
    }
    t *= opt.t_factor;
  }
}

}  // namespace

Result find_strictly_feasible(const LmiProblem& problem, const Options& options) {
  const int n = problem.num_vars();
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  const auto [min_eig, worst] = problem.min_eigenvalue(x0);
  if (min_eig > 0.0) {
    Result r;
    r.status = Status::optimal;
    r.x = x0;
    r.min_eigenvalue = min_eig;
    return r;
  }
  // Variables (x, s); blocks F_k(x) + s I; maximise -s.
  const int s_var = n;
  std::vector<AffineMatrix> blocks;
  for (const auto& F : problem.lmis()) {
    AffineMatrix G = F;
    G.add_term(s_var, Eigen::MatrixXd::Identity(F.rows(), F.cols()));
    blocks.push_back(std::move(G));
  }
  // s >= -1 keeps phase I bounded when s can trade off against a free variable.
  AffineMatrix floor_block(Eigen::MatrixXd::Ones(1, 1));
  floor_block.add_term(s_var, Eigen::MatrixXd::Ones(1, 1));
  blocks.push_back(std::move(floor_block));
  Eigen::VectorXd start(n + 1);
  start.head(n) = x0;
  start[n] = 1.0 - min_eig;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c[n] = -1.0;
  Options phase1 = options;
  phase1.absolute_gap = 1e-14;
  Result r = path_follow(blocks, c, start, phase1, [&](const Eigen::VectorXd& z) { return z[n] < 0.0; });
  const double s = r.x.size() == n + 1 ? r.x[n] : 1.0;
  Result out;
  out.newton_steps = r.newton_steps;
  out.x = r.x.size() == n + 1 ? Eigen::VectorXd(r.x.head(n)) : x0;
  if (s < 0.0) {
    out.status = Status::optimal;
    out.min_eigenvalue = problem.min_eigenvalue(out.x).first;
    if (out.min_eigenvalue > 0.0) return out;
  }
  out.status = r.status == Status::optimal ? Status::infeasible : r.status;
  out.min_eigenvalue = problem.min_eigenvalue(out.x).first;
  out.message = r.status == Status::optimal ? "no strictly feasible point (phase I optimum s = " + std::to_string(s) + ")" : r.message;
  return out;
}

Result maximize(const LmiProblem& problem, const Options& options) {
  Result feasible = find_strictly_feasible(problem, options);
  if (feasible.status != Status::optimal) return feasible;
  const Eigen::VectorXd c = problem.objective();
  Result r = path_follow(problem.lmis(), c, feasible.x, options, {});
  r.newton_steps += feasible.newton_steps;
  if (r.x.size() == problem.num_vars()) r.min_eigenvalue = problem.min_eigenvalue(r.x).first;
  return r;
}

}  // namespace ccsim::sdp
