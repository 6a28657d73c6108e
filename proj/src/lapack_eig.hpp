#pragma once

#include "stripspec/types.hpp"

namespace stripspec::detail {

// Lower-storage banded real-symmetric eigensolve: ab is (kd+1) x n
// column-major with A(i, j) at ab(i - j, j) for j <= i <= j + kd. Fills w
// with ascending eigenvalues and the columns of z with the corresponding
// eigenvectors. ab is destroyed.
void banded_symmetric_eigen(int n, int kd, RMatrix& ab, RVector& w, RMatrix& z);

}  // namespace stripspec::detail
