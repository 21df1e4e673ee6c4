/*
 * abstraction.cpp
 */
#include "gridabs/abstraction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "gridabs/errors.hpp"

namespace gridabs {

namespace {

/* index ranges beyond this are treated as unbounded */
constexpr double index_limit = 4.0e18;

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

/*
 * Box of cells c' with |c - c'| <= r' + z + eta/2 per axis. `offset` is
 * (c - cbar) / eta, so for a stationary center the arithmetic is exact.
 */
SuccessorBox successor_box(const UniformGrid& grid, const CellIndex& cell, const Vector& offset,
                           const Vector& reach) {
  const std::size_t n = grid.dimension();
  SuccessorBox box;
  box.lo.resize(n);
  box.hi.resize(n);
  box.width.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::int64_t m = grid.counts()[i];
    const double t = static_cast<double>(cell[i]) + offset(ii);
    const double lo_d = std::ceil(t - reach(ii));
    const double hi_d = std::floor(t + reach(ii));
    const bool representable = std::isfinite(lo_d) && std::isfinite(hi_d) &&
                               std::abs(lo_d) < index_limit && std::abs(hi_d) < index_limit;
    if (grid.periodic()[i]) {
      if (!representable || hi_d - lo_d + 1.0 >= static_cast<double>(m)) {
        box.lo[i] = 0;
        box.hi[i] = m - 1;
        box.width[i] = m;
        continue;
      }
      const auto lo = static_cast<std::int64_t>(lo_d);
      const auto hi = static_cast<std::int64_t>(hi_d);
      box.width[i] = hi - lo + 1;
      box.lo[i] = floor_mod(lo, m);
      box.hi[i] = floor_mod(hi, m);
      if (box.lo[i] > box.hi[i]) box.wrapped_mask |= (1u << i);
    } else {
      if (!representable || lo_d < 0.0 || hi_d > static_cast<double>(m - 1)) {
        SuccessorBox blocked;
        blocked.status = BoxStatus::overflow;
        return blocked;
      }
      box.lo[i] = static_cast<std::int64_t>(lo_d);
      box.hi[i] = static_cast<std::int64_t>(hi_d);
      box.width[i] = box.hi[i] - box.lo[i] + 1;
    }
  }
  return box;
}

/* (r' + z + eta/2) / eta for one input */
Vector reach_in_cells(const UniformGrid& grid, const GrowthBound& gb, const Vector& z) {
  const Vector& eta = grid.eta().eta();
  const Vector radius = eval_growth(gb, 0.5 * eta + z);
  return (radius + z + 0.5 * eta).cwiseQuotient(eta);
}

void check_z(const UniformGrid& grid, const Vector& z) {
  if (static_cast<std::size_t>(z.size()) != grid.dimension())
    throw InvalidArgument("measurement error z has wrong length");
  if ((z.array() < 0.0).any() || !z.allFinite())
    throw InvalidArgument("measurement error z must be nonnegative and finite");
}

void check_plant_grid(const UniformGrid& grid, const Plant& plant) {
  plant.validate();
  if (plant.n != grid.dimension()) throw InvalidArgument("plant and grid dimensions differ");
  if (grid.dimension() > 32) throw InvalidArgument("at most 32 state dimensions are supported");
}

}  // namespace

void Plant::validate() const {
  if (n < 1) throw InvalidArgument("plant: dimension must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("plant: tau must be positive");
  if (inputs.empty()) throw InvalidArgument("plant: at least one input is required");
  if (growth.size() != inputs.size())
    throw InvalidArgument("plant: one growth bound per input is required");
  if (!rhs) throw InvalidArgument("plant: missing vector field");
  if (static_cast<std::size_t>(w.size()) != n || (w.array() < 0.0).any())
    throw InvalidArgument("plant: w must be a nonnegative n-vector");
  for (const auto& gb : growth) {
    gb.validate();
    if (gb.dimension() != n) throw InvalidArgument("plant: growth bound has wrong dimension");
    if (std::abs(gb.tau - tau) > 1e-12 * tau)
      throw InvalidArgument("plant: growth bound sampling time differs from plant tau");
  }
}

std::vector<PredictorTerm> Plant::predictor_terms(const Vector& z) const {
  std::vector<PredictorTerm> out;
  out.reserve(growth.size());
  for (const auto& gb : growth) out.push_back(to_predictor_term(gb, z));
  return out;
}

UniformGrid::UniformGrid(Vector lb, Vector ub, const GridParameter& eta, std::vector<bool> periodic)
    : lb_(std::move(lb)), ub_(std::move(ub)), eta_(eta), periodic_(std::move(periodic)) {
  const auto n = lb_.size();
  if (n < 1 || ub_.size() != n || static_cast<Eigen::Index>(eta_.dimension()) != n)
    throw InvalidArgument("grid: lb, ub and eta must have equal nonzero length");
  if (periodic_.empty()) periodic_.assign(static_cast<std::size_t>(n), false);
  if (static_cast<Eigen::Index>(periodic_.size()) != n)
    throw InvalidArgument("grid: periodic flags must have length n");
  counts_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(lb_(i)) || !std::isfinite(ub_(i)) || !(lb_(i) < ub_(i)))
      throw InvalidArgument("grid: need finite lb < ub in dimension " + std::to_string(i + 1));
    const double len = ub_(i) - lb_(i);
    const double ratio = len / eta_.eta()(i);
    if (!(ratio < 9.0e18)) throw InvalidArgument("grid: too many cells in dimension " + std::to_string(i + 1));
    const auto m = static_cast<std::int64_t>(std::llround(ratio));
    if (m < 1 || std::abs(static_cast<double>(m) * eta_.eta()(i) - len) > 1e-9 * len)
      throw InvalidArgument("grid: eta does not tile the domain in dimension " + std::to_string(i + 1));
    counts_[static_cast<std::size_t>(i)] = m;
    if (static_cast<double>(size_) * static_cast<double>(m) > 9.0e18)
      throw InvalidArgument("grid: number of cells exceeds 64-bit range");
    size_ *= static_cast<std::uint64_t>(m);
  }
}

UniformGrid UniformGrid::from_subdivisions(Vector lb, Vector ub, const std::vector<std::int64_t>& counts,
                                           std::vector<bool> periodic) {
  if (static_cast<Eigen::Index>(counts.size()) != lb.size() || ub.size() != lb.size())
    throw InvalidArgument("grid: subdivisions must have length n");
  Vector eta(lb.size());
  for (Eigen::Index i = 0; i < lb.size(); ++i) {
    if (counts[static_cast<std::size_t>(i)] < 1) throw InvalidArgument("grid: subdivisions must be >= 1");
    eta(i) = (ub(i) - lb(i)) / static_cast<double>(counts[static_cast<std::size_t>(i)]);
  }
  return UniformGrid(std::move(lb), std::move(ub), GridParameter(eta), std::move(periodic));
}

Vector UniformGrid::center(const CellIndex& k) const {
  const auto n = lb_.size();
  if (static_cast<Eigen::Index>(k.size()) != n) throw InvalidArgument("grid: cell index has wrong length");
  Vector c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ki = k[static_cast<std::size_t>(i)];
    if (ki < 0 || ki >= counts_[static_cast<std::size_t>(i)]) throw InvalidArgument("grid: cell index out of range");
    c(i) = lb_(i) + (static_cast<double>(ki) + 0.5) * eta_.eta()(i);
  }
  return c;
}

std::uint64_t UniformGrid::flat_index(const CellIndex& k) const {
  if (k.size() != counts_.size()) throw InvalidArgument("grid: cell index has wrong length");
  std::uint64_t flat = 0;
  for (std::size_t i = counts_.size(); i-- > 0;) {
    if (k[i] < 0 || k[i] >= counts_[i]) throw InvalidArgument("grid: cell index out of range");
    flat = flat * static_cast<std::uint64_t>(counts_[i]) + static_cast<std::uint64_t>(k[i]);
  }
  return flat;
}

CellIndex UniformGrid::unflatten(std::uint64_t flat) const {
  if (flat >= size_) throw InvalidArgument("grid: flat index out of range");
  CellIndex k(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const auto m = static_cast<std::uint64_t>(counts_[i]);
    k[i] = static_cast<std::int64_t>(flat % m);
    flat /= m;
  }
  return k;
}

std::optional<CellIndex> UniformGrid::cell_of(const Vector& x) const {
  if (x.size() != lb_.size()) throw InvalidArgument("grid: point has wrong length");
  CellIndex k(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!std::isfinite(x(ii))) return std::nullopt;
    const double t = std::floor((x(ii) - lb_(ii)) / eta_.eta()(ii));
    const auto m = counts_[i];
    if (periodic_[i]) {
      const double r = t - static_cast<double>(m) * std::floor(t / static_cast<double>(m));
      k[i] = std::clamp<std::int64_t>(static_cast<std::int64_t>(r), 0, m - 1);
    } else {
      if (x(ii) < lb_(ii) || x(ii) > ub_(ii)) return std::nullopt;
      k[i] = std::clamp<std::int64_t>(static_cast<std::int64_t>(t), 0, m - 1);
    }
  }
  return k;
}

Vector integrate(const Plant& plant, const Vector& x0, const Vector& u, double tau, std::size_t substeps) {
  if (substeps < 1) throw InvalidArgument("integrate: substeps must be >= 1");
  if (!(tau > 0.0)) throw InvalidArgument("integrate: tau must be positive");
  if (!plant.rhs) throw InvalidArgument("integrate: plant has no vector field");
  const double h = tau / static_cast<double>(substeps);
  Vector x = x0;
  for (std::size_t s = 0; s < substeps; ++s) {
    const Vector k1 = plant.rhs(x, u);
    const Vector k2 = plant.rhs(x + 0.5 * h * k1, u);
    const Vector k3 = plant.rhs(x + 0.5 * h * k2, u);
    const Vector k4 = plant.rhs(x + h * k3, u);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw IntegrationError("integrate: state became non-finite (blow-up)");
  }
  return x;
}

std::size_t default_substeps(double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("default_substeps: tau must be positive");
  if (tau <= 0.05) return 5;
  return static_cast<std::size_t>(std::ceil(tau / 0.01 - 1e-9));
}

SuccessorBox successors(const UniformGrid& grid, const Plant& plant, const Vector& z,
                        const CellIndex& cell, std::size_t input_index, std::size_t substeps) {
  check_plant_grid(grid, plant);
  check_z(grid, z);
  if (input_index >= plant.inputs.size()) throw InvalidArgument("successors: input index out of range");
  const Vector cbar = grid.center(cell);
  const Vector c = integrate(plant, cbar, plant.inputs[input_index], plant.tau, substeps);
  const Vector offset = (c - cbar).cwiseQuotient(grid.eta().eta());
  return successor_box(grid, cell, offset, reach_in_cells(grid, plant.growth[input_index], z));
}

std::uint64_t count_transitions(const SuccessorBox& box) {
  if (box.status == BoxStatus::overflow) return 0;
  std::uint64_t count = 1;
  for (auto w : box.width) count *= static_cast<std::uint64_t>(w);
  return count;
}

AbstractionStats build(const UniformGrid& grid, const Plant& plant, const Vector& z,
                       const BuildOptions& options, TransitionSink* sink) {
  const auto start = std::chrono::steady_clock::now();
  check_plant_grid(grid, plant);
  check_z(grid, z);

  const std::size_t substeps = options.substeps ? options.substeps : default_substeps(plant.tau);
  const unsigned threads = std::max(1u, options.threads);
  const std::uint64_t cells = grid.size();
  const std::size_t inputs = plant.inputs.size();

  std::vector<Vector> reach;
  for (const auto& gb : plant.growth) reach.push_back(reach_in_cells(grid, gb, z));

  AbstractionStats stats;
  stats.cells = cells;
  stats.inputs = inputs;
  stats.per_input_transitions.assign(inputs, 0);

  struct WorkerResult {
    std::vector<std::uint64_t> per_input;
    std::uint64_t blocked = 0;
    std::uint64_t failed_cell = 0;
    std::size_t failed_input = 0;
    std::exception_ptr error;
  };

  const std::uint64_t batch = std::uint64_t{4096} * threads;
  std::vector<SuccessorBox> boxes;

  for (std::uint64_t begin = 0; begin < cells; begin += batch) {
    const std::uint64_t end = std::min(cells, begin + batch);
    const std::uint64_t len = end - begin;
    if (sink) boxes.assign(len * inputs, SuccessorBox{});

    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, len));
    std::vector<WorkerResult> results(workers);
    auto work = [&](unsigned w) {
      auto& res = results[w];
      res.per_input.assign(inputs, 0);
      const std::uint64_t lo = begin + len * w / workers;
      const std::uint64_t hi = begin + len * (w + 1) / workers;
      for (std::uint64_t flat = lo; flat < hi; ++flat) {
        const CellIndex k = grid.unflatten(flat);
        const Vector cbar = grid.center(k);
        for (std::size_t u = 0; u < inputs; ++u) {
          try {
            const Vector c = integrate(plant, cbar, plant.inputs[u], plant.tau, substeps);
            const Vector offset = (c - cbar).cwiseQuotient(grid.eta().eta());
            SuccessorBox box = successor_box(grid, k, offset, reach[u]);
            if (box.status == BoxStatus::overflow)
              ++res.blocked;
            else
              res.per_input[u] += count_transitions(box);
            if (sink) boxes[(flat - begin) * inputs + u] = std::move(box);
          } catch (...) {
            res.error = std::current_exception();
            res.failed_cell = flat;
            res.failed_input = u;
            return;
          }
        }
      }
    };

    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }

    /* workers own increasing cell ranges, so the first error is the lowest cell */
    for (const auto& res : results) {
      if (!res.error) continue;
      const std::string where = "cell " + std::to_string(res.failed_cell) + ", input " +
                                std::to_string(res.failed_input) + ": ";
      try {
        std::rethrow_exception(res.error);
      } catch (const IntegrationError& e) {
        throw IntegrationError(where + e.what());
      } catch (const std::exception& e) {
        throw std::runtime_error(where + e.what());
      }
    }
    for (const auto& res : results) {
      stats.blocked_pairs += res.blocked;
      for (std::size_t u = 0; u < inputs; ++u) stats.per_input_transitions[u] += res.per_input[u];
    }

    if (sink) {
      for (std::uint64_t idx = 0; idx < len; ++idx)
        for (std::size_t u = 0; u < inputs; ++u) {
          try {
            sink->write(begin + idx, u, boxes[idx * inputs + u]);
          } catch (const std::exception& e) {
            throw IoError("cell " + std::to_string(begin + idx) + ", input " + std::to_string(u) +
                          ": " + e.what());
          }
        }
    }
  }

  for (auto t : stats.per_input_transitions) stats.total_transitions += t;
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

ComparisonReport compare(double predicted, std::uint64_t actual) {
  if (actual == 0) throw InvalidArgument("compare: actual count is zero, relative error is undefined");
  if (!std::isfinite(predicted)) throw InvalidArgument("compare: predicted value must be finite");
  const double a = static_cast<double>(actual);
  return {predicted, actual, std::abs(predicted - a) / a};
}

}  // namespace gridabs
