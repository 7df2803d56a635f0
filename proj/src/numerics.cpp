#include "srugc/numerics.hpp"

#include <cmath>
#include <string>

namespace srugc {

Activation Activation::elu(double alpha) {
  if (!(alpha > 0.0)) throw Error("ELU alpha must be positive");
  return {ActivationKind::elu, alpha};
}

std::string_view to_string(ActivationKind kind) {
  return kind == ActivationKind::relu ? "relu" : "elu";
}

ActivationKind activation_kind_from_string(std::string_view name) {
  if (name == "relu") return ActivationKind::relu;
  if (name == "elu") return ActivationKind::elu;
  throw Error("unknown activation '" + std::string(name) + "' (expected relu or elu)");
}

double l2_norm(std::span<const double> w) {
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return std::sqrt(sq);
}

bool group_soft_threshold_inplace(std::span<double> w, double tau) {
  if (tau < 0.0 || std::isnan(tau)) throw Error("soft-threshold level must be nonnegative");
  if (tau == 0.0) return false;
  const double norm = l2_norm(w);
  if (norm <= tau) {
    for (double& v : w) v = 0.0;
    return true;
  }
  const double shrink = 1.0 - tau / norm;
  for (double& v : w) v *= shrink;
  return false;
}

std::vector<double> group_soft_threshold(std::span<const double> w, double tau) {
  std::vector<double> out(w.begin(), w.end());
  group_soft_threshold_inplace(out, tau);
  return out;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t SeededRng::next_u64() { return engine_(); }

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw Error("uniform_index bound must be positive");
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % bound;
}

double SeededRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

Eigen::MatrixXd sample_gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                       double variance, SeededRng& rng) {
  if (rows < 1 || cols < 1) throw Error("gaussian matrix needs at least one row and column");
  if (!(variance > 0.0)) throw Error("gaussian matrix variance must be positive");
  const double sd = std::sqrt(variance);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = sd * rng.gaussian();
  return out;
}

}  // namespace srugc
