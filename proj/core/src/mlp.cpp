// SPDX-License-Identifier: Apache-2.0
#include "autoscale/mlp.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "autoscale/error.hpp"
#include "autoscale/random.hpp"

namespace autoscale {

MlpProblem::MlpProblem(std::size_t num_tasks, std::size_t input_dim, std::size_t width,
                       std::size_t samples, double noise, std::uint64_t seed,
                       const MlpOptions& options)
    : num_tasks_(num_tasks), input_dim_(input_dim), width_(width), step_size_(options.step_size) {
  if (num_tasks == 0 || input_dim == 0 || width == 0 || samples == 0 ||
      options.teacher_width == 0) {
    throw InvalidArgument("MLP problem sizes must be positive");
  }
  if (!(noise >= 0.0)) throw InvalidArgument("target noise must be nonnegative");
  if (!(step_size_ > 0.0)) throw InvalidArgument("step size must be positive");

  const auto n = static_cast<Eigen::Index>(samples);
  const auto d = static_cast<Eigen::Index>(input_dim);
  const auto m = static_cast<Eigen::Index>(options.teacher_width);
  const auto k = static_cast<Eigen::Index>(num_tasks);

  auto data_rng = make_rng(seed, SeedStream::Dataset);
  std::normal_distribution<double> normal(0.0, 1.0);
  inputs_.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) inputs_(i, j) = normal(data_rng);
  }
  Eigen::MatrixXd teacher_in(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      teacher_in(i, j) = normal(data_rng) / std::sqrt(static_cast<double>(d));
    }
  }
  Eigen::MatrixXd teacher_out(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index t = 0; t < k; ++t) teacher_out(i, t) = normal(data_rng);
  }
  const Eigen::MatrixXd hidden = (inputs_ * teacher_in.transpose()).array().tanh().matrix();
  targets_ = hidden * teacher_out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < k; ++t) targets_(i, t) += noise * normal(data_rng);
  }

  auto init_rng = make_rng(seed, SeedStream::ProblemInit);
  initial_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params()));
  const auto trunk = static_cast<Eigen::Index>(width_ * input_dim_);
  for (Eigen::Index i = 0; i < trunk; ++i) {
    initial_(i) = normal(init_rng) / std::sqrt(static_cast<double>(input_dim_));
  }
  for (std::size_t t = 0; t < num_tasks_; ++t) {
    const auto off = static_cast<Eigen::Index>(head_offset(t));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(width_); ++j) {
      initial_(off + j) = normal(init_rng) / std::sqrt(static_cast<double>(width_));
    }
  }
}

std::size_t MlpProblem::num_params() const {
  return num_shared_params() + num_tasks_ * (width_ + 1);
}

std::size_t MlpProblem::head_offset(std::size_t task) const {
  return num_shared_params() + task * (width_ + 1);
}

void MlpProblem::evaluate(const Eigen::VectorXd& params, std::uint64_t /*iter*/,
                          TaskEvaluation& out) const {
  if (static_cast<std::size_t>(params.size()) != num_params()) {
    throw InvalidArgument("parameter vector has the wrong length");
  }
  const auto n = inputs_.rows();
  const auto w = static_cast<Eigen::Index>(width_);
  const auto d = static_cast<Eigen::Index>(input_dim_);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      w1(params.data(), w, d);
  const Eigen::Map<const Eigen::VectorXd> b1(params.data() + w * d, w);

  // Forward through the shared trunk.
  Eigen::MatrixXd z = inputs_ * w1.transpose();
  z.rowwise() += b1.transpose();
  const Eigen::MatrixXd h = z.array().tanh().matrix();
  const Eigen::MatrixXd dtanh = (1.0 - h.array().square()).matrix();

  out.losses.assign(num_tasks_, 0.0);
  out.gradients = Eigen::MatrixXd::Zero(params.size(), static_cast<Eigen::Index>(num_tasks_));
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t t = 0; t < num_tasks_; ++t) {
    const auto off = static_cast<Eigen::Index>(head_offset(t));
    const Eigen::Map<const Eigen::VectorXd> v(params.data() + off, w);
    const double c = params(off + w);
    const Eigen::VectorXd residual =
        (h * v).array() + c - targets_.col(static_cast<Eigen::Index>(t)).array();
    out.losses[t] = 0.5 * inv_n * residual.squaredNorm();

    // Backward: dl/dy = residual / n.
    const Eigen::VectorXd dy = inv_n * residual;
    auto grad = out.gradients.col(static_cast<Eigen::Index>(t));
    grad.segment(off, w) = h.transpose() * dy;
    grad(off + w) = dy.sum();
    const Eigen::MatrixXd dz = (dy * v.transpose()).cwiseProduct(dtanh);  // n x width
    const Eigen::MatrixXd dw1 = dz.transpose() * inputs_;                // width x d
    for (Eigen::Index i = 0; i < w; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) grad(i * d + j) = dw1(i, j);
    }
    grad.segment(w * d, w) = dz.colwise().sum().transpose();
  }
}

std::vector<double> MlpProblem::task_losses(const Eigen::VectorXd& params) const {
  TaskEvaluation eval;
  evaluate(params, 0, eval);
  return eval.losses;
}

std::string MlpProblem::describe() const {
  std::ostringstream os;
  os << "mlp(K=" << num_tasks_ << ", in=" << input_dim_ << ", width=" << width_
     << ", n=" << inputs_.rows() << ", h=" << step_size_ << ")";
  return os.str();
}

std::unique_ptr<MlpProblem> make_mlp_problem(std::size_t num_tasks, std::size_t input_dim,
                                             std::size_t width, std::size_t samples, double noise,
                                             std::uint64_t seed, const MlpOptions& options) {
  return std::make_unique<MlpProblem>(num_tasks, input_dim, width, samples, noise, seed, options);
}

}  // namespace autoscale
