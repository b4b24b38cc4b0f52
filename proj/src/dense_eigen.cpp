#include "cdmrg/dense_eigen.hpp"

#include <complex>
#include <string>
#include <vector>

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace cdmrg {

namespace {

// Flushes subnormal operands and results to zero while in scope.
class FlushSubnormals {
 public:
#if defined(__SSE2__)
  FlushSubnormals() : saved_(_mm_getcsr()) {
    _mm_setcsr(saved_ | _MM_FLUSH_ZERO_ON | _MM_DENORMALS_ZERO_ON);
  }
  ~FlushSubnormals() { _mm_setcsr(saved_); }

 private:
  unsigned int saved_;
#endif
};

}  // namespace

Eigenpairs lowest_eigenpairs(const Matrix& h, Index count) {
  if (h.rows() != h.cols()) throw InvalidInput("lowest_eigenpairs: matrix must be square");
  const Index n = h.rows();
  if (count < 1 || count > n) throw InvalidInput("lowest_eigenpairs: count out of range");

  Matrix a = h;
  Eigenpairs out;
  out.values.resize(n);
  out.vectors.resize(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  lapack_int info = 0;
  {
    const FlushSubnormals guard;
    info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', static_cast<lapack_int>(n), a.data(),
                          static_cast<lapack_int>(n), 0.0, 0.0, 1,
                          static_cast<lapack_int>(count), abstol, &found, out.values.data(),
                          out.vectors.data(), static_cast<lapack_int>(n), support.data());
  }
  if (info != 0 || found != count) {
    throw NumericalError("lowest_eigenpairs: zheevr failed (info " + std::to_string(info) + ")");
  }
  out.values.conservativeResize(count);
  return out;
}

}  // namespace cdmrg
