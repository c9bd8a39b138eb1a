#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ccsim {

/// Axis-aligned box [lo, hi] with finite bounds.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  Eigen::VectorXd halfwidth() const { return 0.5 * (hi - lo); }
  /// All 2^dim corners; corner k takes hi on axis i iff bit i of k is set.
  std::vector<Eigen::VectorXd> vertices() const;
};

/// x+ = A x + B u + Bw w,  y = C x,  w ~ N(0, I).
struct LtiModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Bw;
  Eigen::MatrixXd C;
  Box state_box;
  Box input_box;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int noise_dim() const { return static_cast<int>(Bw.cols()); }
  int output_dim() const { return static_cast<int>(C.rows()); }

  /// Throws ConfigError on inconsistent dimensions or empty/unbounded boxes.
  void validate() const;

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
    return A * x + B * u + Bw * w;
  }
  Eigen::VectorXd output(const Eigen::VectorXd& x) const { return C * x; }
};

struct GridSpec {
  std::vector<int> cells_per_axis;
  std::vector<Eigen::VectorXd> input_samples;
};

/// One axis of a product-form transition row: probabilities of landing in
/// cells [first, first + probs.size()) along that axis.
struct AxisFactor {
  int first = 0;
  std::vector<double> probs;

  double at(int cell) const {
    const int k = cell - first;
    return (k < 0 || k >= static_cast<int>(probs.size())) ? 0.0 : probs[static_cast<std::size_t>(k)];
  }
};

/// Transition distribution over the grid cells plus the sink. Cell
/// probabilities factor across axes because the noise covariance is diagonal.
struct KernelRow {
  std::vector<AxisFactor> axes;
  double sink = 0.0;
};

/// Uniform grid abstraction of an LtiModel: half-open cells [lo, hi) (closed
/// on the global upper face), representatives at cell centers, and an
/// absorbing sink state with index num_cells().
class GridAbstraction {
 public:
  GridAbstraction() = default;
  GridAbstraction(Box domain, std::vector<int> cells_per_axis, std::vector<Eigen::VectorXd> inputs);

  int dim() const { return domain_.dim(); }
  int num_cells() const { return num_cells_; }
  int sink_index() const { return num_cells_; }
  int num_inputs() const { return static_cast<int>(inputs_.size()); }

  const Box& domain() const { return domain_; }
  const std::vector<int>& cells_per_axis() const { return cells_; }
  const Eigen::VectorXd& cell_width() const { return width_; }
  Eigen::VectorXd cell_halfwidths() const { return 0.5 * width_; }
  const std::vector<Eigen::VectorXd>& inputs() const { return inputs_; }
  const Eigen::VectorXd& input(int j) const { return inputs_[static_cast<std::size_t>(j)]; }
  const std::vector<Eigen::VectorXd>& representatives() const { return representatives_; }
  const Eigen::VectorXd& representative(int i) const { return representatives_[static_cast<std::size_t>(i)]; }
  /// Vertices of the symmetric box of deviations X_i - x, x in cell i.
  const std::vector<Eigen::VectorXd>& beta_vertices() const { return beta_vertices_; }
  double max_beta_norm() const { return cell_halfwidths().norm(); }

  /// Index of the cell containing x, or sink_index() if x is outside the domain.
  int project(const Eigen::VectorXd& x) const;
  /// Cell index along one axis, or -1 when outside.
  int axis_index(int axis, double coord) const;
  double axis_lower(int axis, int cell) const;
  std::vector<int> multi_index(int cell) const;
  int flat_index(const std::vector<int>& multi) const;

  bool has_kernel() const { return !kernel_.empty(); }
  const KernelRow& row(int state, int input) const {
    return kernel_[static_cast<std::size_t>(state) * inputs_.size() + static_cast<std::size_t>(input)];
  }
  /// Probability of moving to `target` (a cell index or the sink).
  double probability(const KernelRow& row, int target) const;
  std::vector<double> dense_row(const KernelRow& row) const;
  /// sum_i T(i) values[i] over cells and the sink (values has num_cells()+1 entries).
  double expectation(const KernelRow& row, const std::vector<double>& values) const;

  void set_kernel(std::vector<KernelRow> kernel) { kernel_ = std::move(kernel); }

 private:
  Box domain_;
  std::vector<int> cells_;
  Eigen::VectorXd width_;
  int num_cells_ = 0;
  std::vector<int> strides_;
  std::vector<Eigen::VectorXd> inputs_;
  std::vector<Eigen::VectorXd> representatives_;
  std::vector<Eigen::VectorXd> beta_vertices_;
  std::vector<KernelRow> kernel_;
};

/// Builds the grid over model.state_box and, when `with_kernel`, the
/// transition kernel for every (cell, input sample) pair.
GridAbstraction build_grid(const LtiModel& model, const GridSpec& spec, bool with_kernel = true);

/// Distribution of Pi(A x_hat + B u_hat + Bw w_hat). Requires Bw Bw' diagonal.
KernelRow probability_row(const LtiModel& model, const GridAbstraction& abstraction, const Eigen::VectorXd& x_hat,
                          const Eigen::VectorXd& u_hat);

}  // namespace ccsim
