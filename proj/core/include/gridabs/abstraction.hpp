/*
 * abstraction.hpp
 *
 * Abstractions on a uniform grid of closed hyper-interval cells.
 *
 * For every cell with center cbar and input u:
 *   1) c  = phi(tau, cbar, u)          (nominal flow, RK4)
 *      r' = beta(eta/2 + z, u)         (growth bound)
 *   2) the successors are all cells c' with
 *        (c + [-r', r']) meets (c' + [-eta/2 - z, eta/2 + z])
 *      which is a per-axis interval test, so they form an index box.
 *
 * A pair whose over-approximation touches the complement of the domain (in a
 * non-periodic dimension) reaches an overflow symbol and is recorded as
 * blocked; it contributes no transitions.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridabs/growth.hpp"
#include "gridabs/predictor.hpp"

namespace gridabs {

/* nominal vector field f(x, u) */
using VectorField = std::function<Vector(const Vector& x, const Vector& u)>;

struct Plant {
  std::string name;
  std::size_t n = 0;
  double tau = 0.0;
  std::vector<Vector> inputs;
  VectorField rhs;
  /* one growth bound per input */
  std::vector<GrowthBound> growth;
  /* disturbance bound, only used to derive growth bounds */
  Vector w;
  std::map<std::string, double> metadata;

  void validate() const;
  /* to_predictor_term for every input */
  std::vector<PredictorTerm> predictor_terms(const Vector& z) const;
};

using CellIndex = std::vector<std::int64_t>;

/*
 * Uniform grid on [lb, ub]; m_i cells in dimension i, centers at
 * lb_i + (k_i + 1/2) eta_i. Flat index is mixed radix with dimension 0
 * varying fastest.
 */
class UniformGrid {
 public:
  /* eta must tile [lb, ub] up to 1e-9 relative error per axis */
  UniformGrid(Vector lb, Vector ub, const GridParameter& eta, std::vector<bool> periodic);

  static UniformGrid from_subdivisions(Vector lb, Vector ub, const std::vector<std::int64_t>& counts,
                                       std::vector<bool> periodic);

  std::size_t dimension() const { return static_cast<std::size_t>(lb_.size()); }
  const Vector& lb() const { return lb_; }
  const Vector& ub() const { return ub_; }
  const GridParameter& eta() const { return eta_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<bool>& periodic() const { return periodic_; }
  std::uint64_t size() const { return size_; }

  Vector center(const CellIndex& k) const;
  std::uint64_t flat_index(const CellIndex& k) const;
  CellIndex unflatten(std::uint64_t flat) const;
  /* cell containing x (periodic coordinates wrapped), nullopt outside the domain */
  std::optional<CellIndex> cell_of(const Vector& x) const;

 private:
  Vector lb_, ub_;
  GridParameter eta_;
  std::vector<std::int64_t> counts_;
  std::vector<bool> periodic_;
  std::uint64_t size_ = 1;
};

enum class BoxStatus { inside, overflow };

/*
 * Successor cells of one (cell, input) pair as inclusive index ranges.
 * In a periodic dimension a range may wrap: then lo > hi and the bit for that
 * dimension is set in wrapped_mask. A full ring is stored as [0, m-1].
 */
struct SuccessorBox {
  BoxStatus status = BoxStatus::inside;
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;
  std::vector<std::int64_t> width;
  std::uint32_t wrapped_mask = 0;

  bool operator==(const SuccessorBox&) const = default;
};

/* classical RK4 with `substeps` equal steps over [0, tau] */
Vector integrate(const Plant& plant, const Vector& x0, const Vector& u, double tau, std::size_t substeps);

/* 5 for tau <= 0.05, else ceil(tau / 0.01) */
std::size_t default_substeps(double tau);

SuccessorBox successors(const UniformGrid& grid, const Plant& plant, const Vector& z,
                        const CellIndex& cell, std::size_t input_index, std::size_t substeps);

/* 0 for overflow, else the product of widths */
std::uint64_t count_transitions(const SuccessorBox& box);

struct AbstractionStats {
  std::uint64_t cells = 0;
  std::size_t inputs = 0;
  std::uint64_t total_transitions = 0;
  std::uint64_t blocked_pairs = 0;
  std::vector<std::uint64_t> per_input_transitions;
  double wall_seconds = 0.0;
};

/* receives every (cell, input) box in flat-index order, inputs ascending */
class TransitionSink {
 public:
  virtual ~TransitionSink() = default;
  virtual void write(std::uint64_t cell, std::size_t input, const SuccessorBox& box) = 0;
};

struct BuildOptions {
  std::size_t substeps = 0;  /* 0: default_substeps(plant.tau) */
  unsigned threads = 1;
};

/*
 * Computes every successor box. Work is split over cells; the sink is fed
 * from one thread in flat-index order so its output does not depend on the
 * thread count.
 */
AbstractionStats build(const UniformGrid& grid, const Plant& plant, const Vector& z,
                       const BuildOptions& options = {}, TransitionSink* sink = nullptr);

struct ComparisonReport {
  double predicted = 0.0;
  std::uint64_t actual = 0;
  double relative_error = 0.0;
};

/* |predicted - actual| / actual; actual = 0 is rejected */
ComparisonReport compare(double predicted, std::uint64_t actual);

/*
 * Transition file:
 *   gridabs-trans v1 n=<n> m=<m1,...,mn> inputs=<count>
 *   cell_flat_index,input_index,lo_1,...,lo_n,hi_1,...,hi_n,wrapped_mask
 * one record per non-blocked pair.
 */
class TransitionFileWriter : public TransitionSink {
 public:
  TransitionFileWriter(const std::string& path, const UniformGrid& grid, std::size_t inputs);
  ~TransitionFileWriter() override;
  TransitionFileWriter(const TransitionFileWriter&) = delete;
  TransitionFileWriter& operator=(const TransitionFileWriter&) = delete;

  void write(std::uint64_t cell, std::size_t input, const SuccessorBox& box) override;
  /* flushes and closes; throws IoError on failure */
  void close();
  std::uint64_t bytes_written() const { return bytes_; }

 private:
  std::ofstream out_;
  std::string path_;
  std::uint64_t bytes_ = 0;
};

std::string transition_header(const UniformGrid& grid, std::size_t inputs);
std::string transition_record(std::uint64_t cell, std::size_t input, const SuccessorBox& box);

}  // namespace gridabs
