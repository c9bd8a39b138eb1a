#include "ccsim/models.hpp"

#include "ccsim/errors.hpp"
#include "ccsim/normal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccsim {

namespace {

// Axis probabilities below this are dropped from the stored window; their
// mass ends up in the sink.
constexpr double kWindowCutoff = 1e-18;

void check_box(const Box& box, const char* name) {
  if (box.lo.size() != box.hi.size() || box.lo.size() == 0)
    throw ConfigError(std::string(name) + ": lo/hi dimension mismatch or empty");
  for (int i = 0; i < box.dim(); ++i) {
    if (!std::isfinite(box.lo[i]) || !std::isfinite(box.hi[i]))
      throw ConfigError(std::string(name) + ": bounds must be finite");
    if (box.lo[i] > box.hi[i]) throw ConfigError(std::string(name) + ": lo exceeds hi");
  }
}

}  // namespace

bool Box::contains(const Eigen::VectorXd& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

std::vector<Eigen::VectorXd> Box::vertices() const {
  const int n = dim();
  std::vector<Eigen::VectorXd> out;
  out.reserve(std::size_t{1} << n);
  for (unsigned k = 0; k < (1u << n); ++k) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = (k >> i) & 1u ? hi[i] : lo[i];
    out.push_back(std::move(v));
  }
  return out;
}

void LtiModel::validate() const {
  const int n = static_cast<int>(A.rows());
  if (n == 0 || A.cols() != n) throw ConfigError("model: A must be square and nonempty");
  if (B.rows() != n) throw ConfigError("model: B must have as many rows as A");
  if (Bw.rows() != n || Bw.cols() == 0) throw ConfigError("model: Bw must be n x d with d >= 1");
  if (C.cols() != n || C.rows() == 0) throw ConfigError("model: C must be p x n");
  check_box(state_box, "state_box");
  if (state_box.dim() != n) throw ConfigError("model: state_box dimension differs from A");
  if (B.cols() > 0) {
    check_box(input_box, "input_box");
    if (input_box.dim() != B.cols()) throw ConfigError("model: input_box dimension differs from B");
  }
}

GridAbstraction::GridAbstraction(Box domain, std::vector<int> cells_per_axis, std::vector<Eigen::VectorXd> inputs)
    : domain_(std::move(domain)), cells_(std::move(cells_per_axis)), inputs_(std::move(inputs)) {
  const int n = domain_.dim();
  if (static_cast<int>(cells_.size()) != n) throw ConfigError("grid: cells_per_axis must have one entry per state axis");
  width_.resize(n);
  strides_.assign(static_cast<std::size_t>(n), 1);
  long long total = 1;
  for (int i = 0; i < n; ++i) {
    if (cells_[static_cast<std::size_t>(i)] < 1) throw ConfigError("grid: cells_per_axis entries must be >= 1");
    width_[i] = (domain_.hi[i] - domain_.lo[i]) / cells_[static_cast<std::size_t>(i)];
    if (!(width_[i] > 0.0)) throw ConfigError("grid: zero-volume cell");
    strides_[static_cast<std::size_t>(i)] = static_cast<int>(total);
    total *= cells_[static_cast<std::size_t>(i)];
    if (total > 50'000'000) throw ConfigError("grid: too many cells");
  }
  num_cells_ = static_cast<int>(total);

  representatives_.reserve(static_cast<std::size_t>(num_cells_));
  for (int c = 0; c < num_cells_; ++c) {
    const auto idx = multi_index(c);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = domain_.lo[i] + (idx[static_cast<std::size_t>(i)] + 0.5) * width_[i];
    representatives_.push_back(std::move(x));
  }
  const Eigen::VectorXd h = cell_halfwidths();
  beta_vertices_ = Box{-h, h}.vertices();
}

double GridAbstraction::axis_lower(int axis, int cell) const {
  if (cell >= cells_[static_cast<std::size_t>(axis)]) return domain_.hi[axis];
  return domain_.lo[axis] + cell * width_[axis];
}

int GridAbstraction::axis_index(int axis, double coord) const {
  const double lo = domain_.lo[axis];
  const double hi = domain_.hi[axis];
  const int count = cells_[static_cast<std::size_t>(axis)];
  if (!(coord >= lo && coord <= hi)) return -1;
  if (coord == hi) return count - 1;
  int k = static_cast<int>(std::floor((coord - lo) / width_[axis]));
  k = std::clamp(k, 0, count - 1);
  // Correct floating-point drift so cells are exactly [lower(k), lower(k+1)).
  while (k > 0 && coord < axis_lower(axis, k)) --k;
  while (k + 1 < count && coord >= axis_lower(axis, k + 1)) ++k;
  return k;
}

int GridAbstraction::project(const Eigen::VectorXd& x) const {
  int flat = 0;
  for (int i = 0; i < dim(); ++i) {
    const int k = axis_index(i, x[i]);
    if (k < 0) return sink_index();
    flat += k * strides_[static_cast<std::size_t>(i)];
  }
  return flat;
}

std::vector<int> GridAbstraction::multi_index(int cell) const {
  std::vector<int> idx(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    idx[i] = cell % cells_[i];
    cell /= cells_[i];
  }
  return idx;
}

int GridAbstraction::flat_index(const std::vector<int>& multi) const {
  int flat = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) flat += multi[i] * strides_[i];
  return flat;
}

double GridAbstraction::probability(const KernelRow& row, int target) const {
  if (target == sink_index()) return row.sink;
  const auto idx = multi_index(target);
  double p = 1.0;
  for (std::size_t i = 0; i < idx.size(); ++i) p *= row.axes[i].at(idx[i]);
  return p;
}

std::vector<double> GridAbstraction::dense_row(const KernelRow& row) const {
  std::vector<double> out(static_cast<std::size_t>(num_cells_) + 1, 0.0);
  for (int c = 0; c < num_cells_; ++c) out[static_cast<std::size_t>(c)] = probability(row, c);
  out.back() = row.sink;
  return out;
}

double GridAbstraction::expectation(const KernelRow& row, const std::vector<double>& values) const {
  const int n = dim();
  double total = row.sink * values[static_cast<std::size_t>(num_cells_)];
  if (n == 1) {
    const auto& ax = row.axes[0];
    for (std::size_t k = 0; k < ax.probs.size(); ++k) total += ax.probs[k] * values[static_cast<std::size_t>(ax.first) + k];
    return total;
  }
  // Odometer over the product of axis windows.
  std::vector<std::size_t> pos(static_cast<std::size_t>(n), 0);
  for (const auto& ax : row.axes)
    if (ax.probs.empty()) return total;
  for (;;) {
    double w = 1.0;
    int flat = 0;
    for (int i = 1; i < n; ++i) {
      const auto& ax = row.axes[static_cast<std::size_t>(i)];
      w *= ax.probs[pos[static_cast<std::size_t>(i)]];
      flat += (ax.first + static_cast<int>(pos[static_cast<std::size_t>(i)])) * strides_[static_cast<std::size_t>(i)];
    }
    const auto& ax0 = row.axes[0];
    double inner = 0.0;
    for (std::size_t k = 0; k < ax0.probs.size(); ++k)
      inner += ax0.probs[k] * values[static_cast<std::size_t>(flat + ax0.first) + k];
    total += w * inner;
    int i = 1;
    for (; i < n; ++i) {
      auto& p = pos[static_cast<std::size_t>(i)];
      if (++p < row.axes[static_cast<std::size_t>(i)].probs.size()) break;
      p = 0;
    }
    if (i == n) break;
  }
  return total;
}

KernelRow probability_row(const LtiModel& model, const GridAbstraction& abstraction, const Eigen::VectorXd& x_hat,
                          const Eigen::VectorXd& u_hat) {
  const int n = model.state_dim();
  const Eigen::MatrixXd cov = model.Bw * model.Bw.transpose();
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(cov(i, j)) > 1e-12 * scale)
        throw ConfigError("probability_row: Bw*Bw' is not diagonal; only independent per-axis noise can be integrated exactly");

  const Eigen::VectorXd mean = model.A * x_hat + model.B * u_hat;
  KernelRow row;
  row.axes.resize(static_cast<std::size_t>(n));
  double inside = 1.0;
  for (int i = 0; i < n; ++i) {
    auto& ax = row.axes[static_cast<std::size_t>(i)];
    const double sigma = std::sqrt(cov(i, i));
    if (sigma == 0.0) {
      const int k = abstraction.axis_index(i, mean[i]);
      if (k >= 0) {
        ax.first = k;
        ax.probs = {1.0};
      }
    } else {
      const int count = abstraction.cells_per_axis()[static_cast<std::size_t>(i)];
      std::vector<double> probs(static_cast<std::size_t>(count));
      int first = count;
      int last = -1;
      for (int k = 0; k < count; ++k) {
        const double p = normal_interval(abstraction.axis_lower(i, k), abstraction.axis_lower(i, k + 1), mean[i], sigma);
        probs[static_cast<std::size_t>(k)] = p;
        if (p > kWindowCutoff) {
          first = std::min(first, k);
          last = k;
        }
      }
      if (last >= first) {
        ax.first = first;
        ax.probs.assign(probs.begin() + first, probs.begin() + last + 1);
      }
    }
    double axis_sum = 0.0;
    for (double p : ax.probs) axis_sum += p;
    inside *= axis_sum;
  }
  row.sink = std::max(0.0, 1.0 - inside);
  return row;
}

GridAbstraction build_grid(const LtiModel& model, const GridSpec& spec, bool with_kernel) {
  model.validate();
  if (spec.input_samples.empty()) throw ConfigError("grid: at least one input sample is required");
  for (const auto& u : spec.input_samples) {
    if (u.size() != model.input_dim()) throw ConfigError("grid: input sample dimension differs from B");
    if (model.input_dim() > 0 && !model.input_box.contains(u)) throw ConfigError("grid: input sample outside input_box");
  }
  GridAbstraction abs(model.state_box, spec.cells_per_axis, spec.input_samples);
  if (with_kernel) {
    std::vector<KernelRow> kernel;
    kernel.reserve(static_cast<std::size_t>(abs.num_cells()) * spec.input_samples.size());
    for (int c = 0; c < abs.num_cells(); ++c)
      for (int j = 0; j < abs.num_inputs(); ++j) kernel.push_back(probability_row(model, abs, abs.representative(c), abs.input(j)));
    abs.set_kernel(std::move(kernel));
  }
  return abs;
}

}  // namespace ccsim
