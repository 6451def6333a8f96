#pragma once

#include <random>

#include "flashsim/hilbert.hpp"

namespace testutil {

inline flashsim::Mat random_matrix(flashsim::Index n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, scale);
  flashsim::Mat m(n, n);
  for (flashsim::Index i = 0; i < n; ++i)
    for (flashsim::Index j = 0; j < n; ++j) m(i, j) = {nd(gen), nd(gen)};
  return m;
}

inline flashsim::Vec random_vector(flashsim::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  flashsim::Vec v(n);
  for (flashsim::Index i = 0; i < n; ++i) v(i) = {nd(gen), nd(gen)};
  return v / v.norm();
}

inline flashsim::Mat random_hermitian(flashsim::Index n, std::uint64_t seed, double scale = 1.0) {
  const flashsim::Mat m = random_matrix(n, seed, scale);
  return 0.5 * (m + m.adjoint());
}

}  // namespace testutil
