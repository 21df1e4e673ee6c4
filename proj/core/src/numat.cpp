/*
 * numat.cpp
 */
#include "gridabs/numat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridabs/errors.hpp"

namespace gridabs {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw InvalidArgument(std::string(what) + ": matrix must be square and nonempty");
}

double norm1(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

/*
 * Tarjan's algorithm on the digraph i->j iff m(i,j) > 0.
 * Components are emitted sinks first (reverse topological order of the
 * condensation); nodes are visited in index order so the output is
 * deterministic.
 */
class SccFinder {
 public:
  explicit SccFinder(const Matrix& m)
      : m_(m), n_(static_cast<std::size_t>(m.rows())), index_(n_, unvisited), low_(n_, 0),
        on_stack_(n_, false) {}

  std::vector<std::vector<std::size_t>> run() {
    for (std::size_t v = 0; v < n_; ++v)
      if (index_[v] == unvisited) visit(v);
    return components_;
  }

 private:
  static constexpr std::size_t unvisited = static_cast<std::size_t>(-1);

  void visit(std::size_t v) {
    index_[v] = low_[v] = counter_++;
    stack_.push_back(v);
    on_stack_[v] = true;
    for (std::size_t w = 0; w < n_; ++w) {
      if (w == v || !(m_(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) > 0.0))
        continue;
      if (index_[w] == unvisited) {
        visit(w);
        low_[v] = std::min(low_[v], low_[w]);
      } else if (on_stack_[w]) {
        low_[v] = std::min(low_[v], index_[w]);
      }
    }
    if (low_[v] == index_[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack_.back();
        stack_.pop_back();
        on_stack_[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      components_.push_back(std::move(comp));
    }
  }

  const Matrix& m_;
  std::size_t n_;
  std::size_t counter_ = 0;
  std::vector<std::size_t> index_;
  std::vector<std::size_t> low_;
  std::vector<bool> on_stack_;
  std::vector<std::size_t> stack_;
  std::vector<std::vector<std::size_t>> components_;
};

}  // namespace

bool is_essentially_nonnegative(const Matrix& m) {
  require_square(m, "is_essentially_nonnegative");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && !(m(i, j) >= 0.0)) return false;
  return true;
}

bool is_irreducible(const Matrix& m) {
  require_square(m, "is_irreducible");
  if (m.rows() == 1) return m(0, 0) > 0.0;
  return SccFinder(m).run().size() == 1;
}

Matrix augment_ap(const Matrix& a, const Vector& p) {
  require_square(a, "augment_ap");
  const auto n = a.rows();
  if (p.size() != n) throw InvalidArgument("augment_ap: p must have length n");
  Matrix out(n + 1, n + 1);
  out.topLeftCorner(n, n) = a;
  out.topRightCorner(n, 1) = p;
  out.row(n).setOnes();
  return out;
}

Matrix augment_lzv(const Matrix& l, const Vector& z, const Vector& v) {
  require_square(l, "augment_lzv");
  const auto n = l.rows();
  if (z.size() != n || v.size() != n)
    throw InvalidArgument("augment_lzv: z and v must have length n");
  if (!is_essentially_nonnegative(l))
    throw InvalidArgument("augment_lzv: L must be essentially nonnegative");
  if ((z.array() < 0.0).any() || (v.array() < 0.0).any())
    throw InvalidArgument("augment_lzv: z and v must be nonnegative");
  return augment_ap(l, z + l * z + v);
}

Matrix expm(const Matrix& m, double t) {
  require_square(m, "expm");
  if (!std::isfinite(t)) throw InvalidArgument("expm: t must be finite");
  if (!m.allFinite()) throw InvalidArgument("expm: matrix entries must be finite");
  const auto n = m.rows();

  Matrix a = m * t;
  double shift = 0.0;
  if (is_essentially_nonnegative(a)) {
    shift = std::max(0.0, -a.diagonal().minCoeff());
    a.diagonal().array() += shift;
  }

  const double nrm = norm1(a);
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  a *= std::ldexp(1.0, -squarings);

  /* Taylor kernel; ||a|| <= 1/2 so the remainder after k terms is below
   * 2 * 0.5^k / k!, and we stop once terms drop below roundoff */
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (norm1(term) <= 1e-18 * norm1(result)) break;
  }
  if (shift > 0.0) result *= std::exp(-std::ldexp(shift, -squarings));

  for (int s = 0; s < squarings; ++s) result = result * result;

  if (!result.allFinite()) throw OverflowError("expm: result overflows double range");
  return result;
}

Matrix integral_expm(const Matrix& l, double tau) {
  require_square(l, "integral_expm");
  if (!(tau > 0.0)) throw InvalidArgument("integral_expm: tau must be positive");
  const auto n = l.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = l;
  block.topRightCorner(n, n).setIdentity();
  return expm(block, tau).topRightCorner(n, n);
}

BlockTriangularForm block_triangular_form(const Matrix& m) {
  require_square(m, "block_triangular_form");
  BlockTriangularForm out;
  for (const auto& comp : SccFinder(m).run()) {
    out.block_sizes.push_back(comp.size());
    out.permutation.insert(out.permutation.end(), comp.begin(), comp.end());
  }
  return out;
}

Matrix permute_symmetric(const Matrix& m, const std::vector<std::size_t>& perm) {
  require_square(m, "permute_symmetric");
  const auto n = m.rows();
  if (static_cast<Eigen::Index>(perm.size()) != n)
    throw InvalidArgument("permute_symmetric: permutation length must be n");
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = m(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
  return out;
}

}  // namespace gridabs
