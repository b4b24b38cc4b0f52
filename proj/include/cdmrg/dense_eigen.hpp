#ifndef CDMRG_DENSE_EIGEN_HPP
#define CDMRG_DENSE_EIGEN_HPP

#include "cdmrg/types.hpp"

namespace cdmrg {

struct Eigenpairs {
  RealVector values;  // ascending
  Matrix vectors;     // one column per value
};

// Lowest `count` eigenpairs of a hermitian matrix (LAPACK zheevr). Only the
// lower triangle is read.
Eigenpairs lowest_eigenpairs(const Matrix& h, Index count);

}  // namespace cdmrg

#endif  // CDMRG_DENSE_EIGEN_HPP
