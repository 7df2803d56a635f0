// Scalar and vector primitives shared by the whole library: activations,
// the group soft-thresholding operator and seeded random sampling.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace srugc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ActivationKind { relu, elu };

struct Activation {
  ActivationKind kind = ActivationKind::elu;
  double alpha = 1.0;  // ELU scale; ignored for ReLU

  static Activation relu() { return {ActivationKind::relu, 1.0}; }
  static Activation elu(double alpha = 1.0);

  double operator()(double x) const {
    if (x > 0.0) return x;
    return kind == ActivationKind::relu ? 0.0 : alpha * (std::exp(x) - 1.0);
  }

  /// Derivative with the right-derivative convention at the origin.
  double derivative(double x) const {
    if (x >= 0.0) return 1.0;
    return kind == ActivationKind::relu ? 0.0 : alpha * std::exp(x);
  }
};

std::string_view to_string(ActivationKind kind);
ActivationKind activation_kind_from_string(std::string_view name);

/// Soft-thresholding of a whole group: zero when ||w|| <= tau, otherwise
/// w scaled by (1 - tau/||w||). Throws on negative tau.
std::vector<double> group_soft_threshold(std::span<const double> w, double tau);

/// In-place variant. Returns true when the group was set to exactly zero.
bool group_soft_threshold_inplace(std::span<double> w, double tau);

/// Sequential (left-to-right) Euclidean norm.
double l2_norm(std::span<const double> w);

/// Child seed for task `index` of a run seeded with `seed` (splitmix64 of a
/// golden-ratio stride). Used wherever work is split across components,
/// grid points or independent streams.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

/// Deterministic generator: mt19937_64 core with library-defined
/// transforms, so sample streams do not depend on the standard library's
/// distribution implementations.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Standard normal via the Marsaglia polar method.
  double gaussian();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// i.i.d. N(0, variance) entries, filled row by row.
Eigen::MatrixXd sample_gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                       double variance, SeededRng& rng);

}  // namespace srugc
