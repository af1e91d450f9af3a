#pragma once
// Compressed-sparse-row kernels for the master-equation hot path, used
// against column-major dense matrices:
//   spmm     Y  = A X    (dot-product form; the active X column stays in L1)
//   adjr_acc Y += alpha X A†  (axpy form over the rows of A)
// Y must be distinct from X in both.  These exist because the engine applies
// superoperators matrix-free; correctness is pinned entrywise to a dense
// channel-by-channel oracle in the tests.

#include <cstdint>
#include <vector>

#include "sqz/types.hpp"

namespace sqz::detail {

struct Csr {
  int rows = 0, cols = 0;
  std::vector<int> ptr;  // size rows + 1
  std::vector<int> col;
  std::vector<cd> val;

  std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
};

inline Csr csr_from_sparse(const SpMat& m) {
  Csr a;
  a.rows = static_cast<int>(m.rows());
  a.cols = static_cast<int>(m.cols());
  a.ptr.assign(a.rows + 1, 0);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) ++a.ptr[it.row() + 1];
  for (int i = 0; i < a.rows; ++i) a.ptr[i + 1] += a.ptr[i];
  a.col.resize(m.nonZeros());
  a.val.resize(m.nonZeros());
  std::vector<int> fill(a.ptr.begin(), a.ptr.end() - 1);
  // Column-major outer iteration appends each row's entries in ascending
  // column order.
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      const int at = fill[it.row()]++;
      a.col[at] = static_cast<int>(it.col());
      a.val[at] = it.value();
    }
  return a;
}

// Y = A X.
inline void spmm(const Csr& a, const DMat& x, DMat& y) {
  const int dim = a.rows;
  const int ncols = static_cast<int>(x.cols());
  const int* ptr = a.ptr.data();
  const int* col = a.col.data();
  const cd* val = a.val.data();
  for (int c = 0; c < ncols; ++c) {
    const cd* xc = x.data() + static_cast<std::ptrdiff_t>(c) * x.rows();
    cd* yc = y.data() + static_cast<std::ptrdiff_t>(c) * y.rows();
    for (int i = 0; i < dim; ++i) {
      cd acc(0.0, 0.0);
      for (int k = ptr[i]; k < ptr[i + 1]; ++k) acc += val[k] * xc[col[k]];
      yc[i] = acc;
    }
  }
}

// Y += alpha X A†:  Y(:,j) += alpha * conj(A(j,k)) X(:,k) over the entries
// of row j.
inline void adjr_acc(const Csr& a, cd alpha, const DMat& x, DMat& y) {
  const int nrows = static_cast<int>(x.rows());
  const int* ptr = a.ptr.data();
  const int* col = a.col.data();
  const cd* val = a.val.data();
  for (int j = 0; j < a.rows; ++j) {
    cd* yj = y.data() + static_cast<std::ptrdiff_t>(j) * nrows;
    for (int k = ptr[j]; k < ptr[j + 1]; ++k) {
      const cd w = alpha * std::conj(val[k]);
      const cd* xk = x.data() + static_cast<std::ptrdiff_t>(col[k]) * nrows;
      for (int i = 0; i < nrows; ++i) yj[i] += w * xk[i];
    }
  }
}

// tr(A rho), contraction over the sparse pattern.
inline cd trace_product(const Csr& a, const DMat& rho) {
  cd acc(0.0, 0.0);
  const int dim = static_cast<int>(rho.rows());
  for (int i = 0; i < a.rows; ++i) {
    const cd* coli = rho.data() + static_cast<std::ptrdiff_t>(i) * dim;
    for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k)
      acc += a.val[k] * coli[a.col[k]];  // A(i,k) rho(k,i)
  }
  return acc;
}

}  // namespace sqz::detail
