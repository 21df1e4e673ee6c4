/*
 * numat.hpp
 *
 * Dense matrix helpers for nonnegative and essentially nonnegative matrices:
 * matrix exponential, irreducibility, the augmented matrices used by the
 * uniqueness certificates and block triangular structure.
 *
 * Matrices are small (state dimension of a control system), so everything is
 * dense Eigen storage.
 */
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace gridabs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/* true iff every off-diagonal entry is >= 0 */
bool is_essentially_nonnegative(const Matrix& m);

/*
 * Irreducibility of the digraph with an edge i->j iff m(i,j) > 0 (strictly,
 * no tolerance). For n = 1 the matrix is irreducible iff m(0,0) > 0.
 */
bool is_irreducible(const Matrix& m);

/* ( A p ; 1 1 ) */
Matrix augment_ap(const Matrix& a, const Vector& p);

/*
 * ( L  z + Lz + v ; 1 1 )
 *
 * Rejects L that is not essentially nonnegative and negative z or v.
 */
Matrix augment_lzv(const Matrix& l, const Vector& z, const Vector& v);

/*
 * e^{Mt} by scaling and squaring with a Taylor kernel.
 *
 * Essentially nonnegative inputs are shifted to a nonnegative matrix first, so
 * the series has no cancellation and structural zeros of the result are exact
 * zeros. Throws OverflowError when the result is not finite.
 */
Matrix expm(const Matrix& m, double t);

/* \int_0^tau e^{Ls} ds, from the top right block of exp([[L, I],[0, 0]] tau) */
Matrix integral_expm(const Matrix& l, double tau);

struct BlockTriangularForm {
  /* permutation[k] = original index placed at position k */
  std::vector<std::size_t> permutation;
  std::vector<std::size_t> block_sizes;
};

/*
 * Orders the strongly connected components of the positive-entry digraph so
 * that m(perm, perm) is block lower triangular. An irreducible matrix yields
 * one block of size n.
 */
BlockTriangularForm block_triangular_form(const Matrix& m);

/* m(perm[i], perm[j]) */
Matrix permute_symmetric(const Matrix& m, const std::vector<std::size_t>& perm);

}  // namespace gridabs
