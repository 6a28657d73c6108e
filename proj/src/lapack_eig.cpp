#include "lapack_eig.hpp"

#include <lapacke.h>

#include <sstream>

#include "stripspec/errors.hpp"

namespace stripspec::detail {

void banded_symmetric_eigen(int n, int kd, RMatrix& ab, RVector& w, RMatrix& z) {
  w.resize(n);
  z.resize(n, n);
  lapack_int info =
      LAPACKE_dsbevd(LAPACK_COL_MAJOR, 'V', 'L', n, kd, ab.data(),
                     static_cast<lapack_int>(ab.rows()), w.data(), z.data(), n);
  if (info != 0) {
    std::ostringstream os;
    os << "banded symmetric eigensolve failed with info " << info;
    throw NumericalError(os.str());
  }
}

}  // namespace stripspec::detail
