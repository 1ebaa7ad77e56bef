#pragma once

#include <string>

#include "sparsedet/matrix.hpp"
#include "sparsedet/rng.hpp"

namespace sparsedet {

/// Small index sets certifying that a submatrix carries a constant fraction
/// of the full spectral norm, plus the sampling parameters that produced it.
struct WitnessReport {
  bool success = false;  // ratio >= 1/8
  IndexSet rows;         // I
  IndexSet cols;         // J
  double ratio = 0.0;    // ||M_IJ||_2 / ||M||_2
  double r = 0.0;        // stable rank of the chosen heavy block
  std::size_t d = 0;     // sampled row count
  std::size_t restarts_used = 0;
  bool column_heavy = false;  // true when the transposed block won the split

  std::string to_json() const;
};

// Rows (resp. columns) of M with l2 norm at least tau.
std::pair<IndexSet, IndexSet> energy_split(const DenseMatrix& m, double tau);

// d rows drawn iid with probability ||x_i||^2/||X||_F^2, each rescaled to
// norm ||X||_F and the whole stack divided by sqrt(d), so that
// E[Xt^T Xt] = X^T X.
DenseMatrix rv_row_sample(const DenseMatrix& x, std::size_t d, Rng& rng);

// Constructive search for (I, J) with ||M_IJ|| >= ||M||/8: energy split at
// tau = ||M||/(2 sqrt(k)), pick the heavier of the row/column block, sample
// d = ceil(c_w * r * ln(max(r,2))) rows by squared norm, take the sampled
// column support. Retries with fresh sub-seeds; the best attempt is reported
// either way.
WitnessReport find_witness(const DenseMatrix& m, std::size_t k, double c_w,
                           std::size_t restarts, RngSeed seed);

}  // namespace sparsedet
