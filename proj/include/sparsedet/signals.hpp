#pragma once

#include <cstdint>
#include <string>

#include "sparsedet/matrix.hpp"
#include "sparsedet/rng.hpp"

namespace sparsedet {

/// One draw of the sign-randomized Bernoulli-block prior M = t * U_I B U_I.
/// The components are kept alongside the product so that divergence
/// calculations and sparsity event checks can be done per draw.
struct PriorSample {
  DenseMatrix matrix;      // p x p
  IndexSet support_I;      // m indices
  std::vector<int> signs_u;  // length p, entries +-1
  DenseMatrix bernoulli_b;   // m x m 0/1 block, indexed along support_I
  double amplitude_t = 0.0;
  double bernoulli_rate = 0.0;  // k/m
};

struct SignalSpec {
  enum class Kind { least_favorable, block, permutation, zero };
  Kind kind = Kind::zero;
  std::size_t p = 0;
  // least_favorable parameters
  std::size_t m = 0;
  std::size_t k = 0;
  double t = 0.0;
  // block parameters (k above is reused as the block size)
  double theta = 0.0;

  static SignalSpec least_favorable(std::size_t p, std::size_t m, std::size_t k, double t);
  static SignalSpec block(std::size_t p, std::size_t k, double theta);
  static SignalSpec permutation(std::size_t p);
  static SignalSpec zero(std::size_t p);
};

PriorSample gen_prior_sample(std::size_t p, std::size_t m, std::size_t k, double t,
                             Rng& rng);

// [[0, M], [M^T, 0]]; preserves the spectral norm and doubles inner products.
DenseMatrix symmetrize(const DenseMatrix& m);

// theta on the top-left k x k block, zero elsewhere.
DenseMatrix gen_block_signal(std::size_t p, std::size_t k, double theta);

DenseMatrix gen_permutation(std::size_t p, Rng& rng);

// X = M + Z with Z iid standard normal.
DenseMatrix add_gaussian_noise(const DenseMatrix& m, Rng& rng);

// n iid rows from N(0, Sigma); Sigma validated PSD via Cholesky.
DenseMatrix sample_gaussian_data(const DenseMatrix& sigma, std::size_t n, Rng& rng);

// Materialize a signal draw (deterministic kinds ignore the rng).
DenseMatrix gen_signal(const SignalSpec& spec, Rng& rng);

// Dump a prior draw: matrix in the fixture text format plus a JSON sidecar
// holding (I, u, t, rate).
void save_prior_sample(const PriorSample& s, const std::string& matrix_path,
                       const std::string& meta_path);

}  // namespace sparsedet
