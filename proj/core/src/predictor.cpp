/*
 * predictor.cpp
 */
#include "gridabs/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "gridabs/errors.hpp"
#include "gridabs/random.hpp"

namespace gridabs {

GridParameter::GridParameter(Vector eta) : eta_(std::move(eta)) {
  if (eta_.size() < 1) throw InvalidArgument("grid parameter: eta must be nonempty");
  for (Eigen::Index i = 0; i < eta_.size(); ++i)
    if (!(eta_(i) > 0.0) || !std::isfinite(eta_(i)))
      throw InvalidArgument("grid parameter: eta components must be positive and finite");
}

double predict_single(const PredictorTerm& term, const GridParameter& eta) {
  if (term.dimension() != eta.dimension())
    throw InvalidArgument("predict_single: dimension mismatch");
  const Vector reach = term.p + term.A * eta.eta();
  double out = 1.0;
  for (Eigen::Index i = 0; i < reach.size(); ++i) out *= reach(i) / eta.eta()(i);
  return out;
}

double predict_family(std::span<const PredictorTerm> terms, const GridParameter& eta) {
  if (terms.empty()) throw InvalidArgument("predict_family: empty list of terms");
  double sum = 0.0;
  for (const auto& t : terms) sum += predict_single(t, eta);
  return sum;
}

double predict_abstraction_total(std::span<const PredictorTerm> terms, const GridParameter& eta,
                                 std::uint64_t num_cells) {
  if (num_cells == 0) throw InvalidArgument("predict_abstraction_total: num_cells must be positive");
  return static_cast<double>(num_cells) * predict_family(terms, eta);
}

double exact_expected_cells(const GridParameter& eta, const Vector& r) {
  if (static_cast<std::size_t>(r.size()) != eta.dimension())
    throw InvalidArgument("exact_expected_cells: dimension mismatch");
  double out = 1.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(r(i) > 0.0) || !std::isfinite(r(i)))
      throw InvalidArgument("exact_expected_cells: r must be positive");
    out *= 2.0 * r(i) / eta.eta()(i);
  }
  return out;
}

std::uint64_t lattice_points_in_box(const GridParameter& eta, const Vector& c, const Vector& r) {
  std::uint64_t count = 1;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double e = eta.eta()(i);
    const double lo = std::ceil((c(i) - r(i)) / e);
    const double hi = std::floor((c(i) + r(i)) / e);
    if (hi < lo) return 0;
    count *= static_cast<std::uint64_t>(hi - lo) + 1;
  }
  return count;
}

double mc_expected_cells(const GridParameter& eta, const Vector& r, std::uint64_t samples,
                         std::uint64_t seed, unsigned threads) {
  if (samples < 1) throw InvalidArgument("mc_expected_cells: samples must be >= 1");
  if (static_cast<std::size_t>(r.size()) != eta.dimension())
    throw InvalidArgument("mc_expected_cells: dimension mismatch");
  if ((r.array() < 0.0).any()) throw InvalidArgument("mc_expected_cells: r must be nonnegative");

  constexpr std::uint64_t shard_size = 65536;
  const std::uint64_t shards = (samples + shard_size - 1) / shard_size;
  std::vector<std::uint64_t> shard_sum(shards, 0);

  auto run_shard = [&](std::uint64_t k) {
    Rng rng = Rng::stream(seed, k);
    const std::uint64_t begin = k * shard_size;
    const std::uint64_t end = std::min(samples, begin + shard_size);
    const auto n = r.size();
    Vector c(n);
    std::uint64_t sum = 0;
    for (std::uint64_t s = begin; s < end; ++s) {
      for (Eigen::Index i = 0; i < n; ++i) c(i) = eta.eta()(i) * rng.uniform();
      sum += lattice_points_in_box(eta, c, r);
    }
    shard_sum[k] = sum;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(shards)));
  if (workers == 1) {
    for (std::uint64_t k = 0; k < shards; ++k) run_shard(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::uint64_t k = w; k < shards; k += workers) run_shard(k);
      });
    for (auto& t : pool) t.join();
  }

  std::uint64_t total = 0;
  for (auto s : shard_sum) total += s;
  return static_cast<double>(total) / static_cast<double>(samples);
}

}  // namespace gridabs
