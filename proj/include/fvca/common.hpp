#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fvca {

using cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using Vec  = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx   I1{0.0, 1.0};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define FVCA_ERROR(name)                      \
  struct name : Error {                       \
    using Error::Error;                       \
  }

FVCA_ERROR(RangeTooLarge);
FVCA_ERROR(FluxNotQuantized);
FVCA_ERROR(NotHermitian);
FVCA_ERROR(ConvergenceFailure);
FVCA_ERROR(NonpositiveTemperature);
FVCA_ERROR(NonpositiveWidth);
FVCA_ERROR(NotAProjection);
FVCA_ERROR(NotUnitary);
FVCA_ERROR(ChiralityViolation);
FVCA_ERROR(GapClosed);
FVCA_ERROR(SingularTensor);
FVCA_ERROR(NotClean);
FVCA_ERROR(DimensionParity);
FVCA_ERROR(Unsupported);
FVCA_ERROR(Divergence);
FVCA_ERROR(AllPairsFail);
FVCA_ERROR(DegenerateOverlap);
FVCA_ERROR(MissingManifest);
FVCA_ERROR(ConfigError);

#undef FVCA_ERROR

}  // namespace fvca
