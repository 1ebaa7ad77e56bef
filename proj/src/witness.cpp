#include "sparsedet/witness.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sparsedet/kernels.hpp"

namespace sparsedet {

std::pair<IndexSet, IndexSet> energy_split(const DenseMatrix& m, double tau) {
  if (tau <= 0) throw std::invalid_argument("energy_split: tau must be positive");
  const double t2 = tau * tau;
  IndexSet i0, j0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (kern::sum_sq(m.row(i), m.cols()) >= t2) i0.push_back(i);
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
    if (s >= t2) j0.push_back(j);
  }
  return {std::move(i0), std::move(j0)};
}

DenseMatrix rv_row_sample(const DenseMatrix& x, std::size_t d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("rv_row_sample: d must be >= 1");
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<double> cum(rows);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    total += kern::sum_sq(x.row(i), cols);
    cum[i] = total;
  }
  if (total == 0.0) throw std::domain_error("rv_row_sample: zero matrix");
  const double fnorm = std::sqrt(total);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  DenseMatrix out(d, cols);
  for (std::size_t s = 0; s < d; ++s) {
    const double u = rng.next_double() * total;
    const std::size_t i = static_cast<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    const double norm_i = std::sqrt(kern::sum_sq(x.row(i), cols));
    const double scale = fnorm / norm_i * inv_sqrt_d;
    for (std::size_t j = 0; j < cols; ++j) out(s, j) = scale * x(i, j);
  }
  return out;
}

namespace {

IndexSet all_indices(std::size_t n) {
  IndexSet ix(n);
  for (std::size_t i = 0; i < n; ++i) ix[i] = i;
  return ix;
}

IndexSet column_support(const DenseMatrix& m) {
  IndexSet supp;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (m(i, j) != 0.0) {
        supp.push_back(j);
        break;
      }
    }
  }
  return supp;
}

}  // namespace

WitnessReport find_witness(const DenseMatrix& m, std::size_t k, double c_w,
                           std::size_t restarts, RngSeed seed) {
  if (frobenius_norm_sq(m) == 0.0)
    throw std::invalid_argument("find_witness: zero matrix");
  if (!is_k_sparse(m, {k}))
    throw std::invalid_argument("find_witness: matrix is not k-sparse for the given k");
  if (restarts < 1) throw std::invalid_argument("find_witness: restarts must be >= 1");

  const double norm = spectral_norm(m);
  const double tau = norm / (2.0 * std::sqrt(static_cast<double>(k)));
  auto [i0, j0] = energy_split(m, tau);

  const DenseMatrix row_block = submatrix(m, i0, all_indices(m.cols()));
  const DenseMatrix col_block =
      submatrix(m, all_indices(m.rows()), j0).transposed();
  const double norm_rows = i0.empty() ? 0.0 : spectral_norm(row_block);
  const double norm_cols = j0.empty() ? 0.0 : spectral_norm(col_block);
  const bool column_heavy = norm_cols > norm_rows;
  const DenseMatrix& block = column_heavy ? col_block : row_block;
  const IndexSet& base = column_heavy ? j0 : i0;
  const double block_norm = column_heavy ? norm_cols : norm_rows;
  if (block_norm == 0.0)
    throw std::domain_error("find_witness: energy split produced empty blocks");

  const double r = frobenius_norm_sq(block) / (block_norm * block_norm);
  const std::size_t d = static_cast<std::size_t>(
      std::ceil(c_w * r * std::log(std::max(r, 2.0))));

  WitnessReport best;
  best.r = r;
  best.d = d;
  best.column_heavy = column_heavy;
  best.ratio = -1.0;
  Rng seeder(seed);
  for (std::size_t attempt = 0; attempt < restarts; ++attempt) {
    Rng rng = seeder.split(attempt);
    DenseMatrix sampled = rv_row_sample(block, d, rng);
    IndexSet supp = column_support(sampled);
    IndexSet is = column_heavy ? supp : base;
    IndexSet js = column_heavy ? base : supp;
    const double ratio = spectral_norm(submatrix(m, is, js)) / norm;
    if (ratio > best.ratio) {
      best.ratio = ratio;
      best.rows = std::move(is);
      best.cols = std::move(js);
    }
    best.restarts_used = attempt + 1;
    if (best.ratio >= 0.125) break;
  }
  best.success = best.ratio >= 0.125;
  return best;
}

std::string WitnessReport::to_json() const {
  nlohmann::json j;
  j["success"] = success;
  j["I"] = rows;
  j["J"] = cols;
  j["ratio"] = ratio;
  j["r"] = r;
  j["d"] = d;
  j["restarts_used"] = restarts_used;
  j["side"] = column_heavy ? "column-heavy" : "row-heavy";
  return j.dump();
}

}  // namespace sparsedet
