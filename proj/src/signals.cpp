#include "sparsedet/signals.hpp"

#include <fstream>

#include <json.hpp>

namespace sparsedet {

SignalSpec SignalSpec::least_favorable(std::size_t p, std::size_t m, std::size_t k,
                                       double t) {
  SignalSpec s;
  s.kind = Kind::least_favorable;
  s.p = p;
  s.m = m;
  s.k = k;
  s.t = t;
  return s;
}

SignalSpec SignalSpec::block(std::size_t p, std::size_t k, double theta) {
  SignalSpec s;
  s.kind = Kind::block;
  s.p = p;
  s.k = k;
  s.theta = theta;
  return s;
}

SignalSpec SignalSpec::permutation(std::size_t p) {
  SignalSpec s;
  s.kind = Kind::permutation;
  s.p = p;
  return s;
}

SignalSpec SignalSpec::zero(std::size_t p) {
  SignalSpec s;
  s.kind = Kind::zero;
  s.p = p;
  return s;
}

PriorSample gen_prior_sample(std::size_t p, std::size_t m, std::size_t k, double t,
                             Rng& rng) {
  if (k < 1 || k > m || m > p)
    throw std::invalid_argument("gen_prior_sample: need 1 <= k <= m <= p");
  if (t < 0) throw std::invalid_argument("gen_prior_sample: t must be >= 0");
  PriorSample s;
  s.amplitude_t = t;
  s.bernoulli_rate = static_cast<double>(k) / static_cast<double>(m);
  s.support_I = rng.sample_subset(p, m);
  s.signs_u.resize(p);
  for (std::size_t i = 0; i < p; ++i) s.signs_u[i] = rng.next_rademacher();
  s.bernoulli_b = DenseMatrix(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      s.bernoulli_b(a, b) = rng.next_bernoulli(s.bernoulli_rate) ? 1.0 : 0.0;
  s.matrix = DenseMatrix(p, p);
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t i = s.support_I[a];
    for (std::size_t b = 0; b < m; ++b) {
      const std::size_t j = s.support_I[b];
      if (s.bernoulli_b(a, b) != 0.0)
        s.matrix(i, j) = t * s.signs_u[i] * s.signs_u[j];
    }
  }
  return s;
}

DenseMatrix symmetrize(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("symmetrize: matrix not square");
  const std::size_t p = m.rows();
  DenseMatrix out(2 * p, 2 * p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      out(i, p + j) = m(i, j);
      out(p + j, i) = m(i, j);
    }
  return out;
}

DenseMatrix gen_block_signal(std::size_t p, std::size_t k, double theta) {
  if (k > p) throw std::invalid_argument("gen_block_signal: k > p");
  if (theta < 0) throw std::invalid_argument("gen_block_signal: theta must be >= 0");
  DenseMatrix m(p, p);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = theta;
  return m;
}

DenseMatrix gen_permutation(std::size_t p, Rng& rng) {
  if (p < 1) throw std::invalid_argument("gen_permutation: p must be >= 1");
  auto perm = rng.sample_permutation(p);
  DenseMatrix m(p, p);
  for (std::size_t i = 0; i < p; ++i) m(i, perm[i]) = 1.0;
  return m;
}

DenseMatrix add_gaussian_noise(const DenseMatrix& m, Rng& rng) {
  DenseMatrix x = m;
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += rng.next_normal();
  return x;
}

DenseMatrix sample_gaussian_data(const DenseMatrix& sigma, std::size_t n, Rng& rng) {
  const std::size_t p = sigma.rows();
  DenseMatrix l = cholesky_psd(sigma);
  DenseMatrix data(n, p);
  std::vector<double> z(p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) z[j] = rng.next_normal();
    // row = L z
    for (std::size_t i = 0; i < p; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j) s += l(i, j) * z[j];
      data(r, i) = s;
    }
  }
  return data;
}

DenseMatrix gen_signal(const SignalSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case SignalSpec::Kind::least_favorable:
      return gen_prior_sample(spec.p, spec.m, spec.k, spec.t, rng).matrix;
    case SignalSpec::Kind::block:
      return gen_block_signal(spec.p, spec.k, spec.theta);
    case SignalSpec::Kind::permutation:
      return gen_permutation(spec.p, rng);
    case SignalSpec::Kind::zero:
      return DenseMatrix(spec.p, spec.p);
  }
  throw std::invalid_argument("gen_signal: unknown kind");
}

void save_prior_sample(const PriorSample& s, const std::string& matrix_path,
                       const std::string& meta_path) {
  save_matrix(s.matrix, matrix_path);
  nlohmann::json meta;
  meta["I"] = s.support_I;
  meta["u"] = s.signs_u;
  meta["t"] = s.amplitude_t;
  meta["rate"] = s.bernoulli_rate;
  std::ofstream f(meta_path);
  if (!f) throw std::runtime_error("cannot open for writing: " + meta_path);
  f << meta.dump(2) << '\n';
}

}  // namespace sparsedet
