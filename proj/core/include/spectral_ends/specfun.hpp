#pragma once

#include <complex>

namespace spectral_ends {

using cdouble = std::complex<double>;

/// Which square root of w to return.
enum class BranchMode {
  PositiveReal,  ///< Re r > 0; when Re r = 0, Im r >= 0
  NegativeImag,  ///< Im r < 0; when Im r = 0, Re r >= 0
  Principal,     ///< std::sqrt convention with a signed-zero imaginary part treated as +0
};

cdouble branch_sqrt(cdouble w, BranchMode mode);

struct HankelValue {
  cdouble h;   ///< H^(1)_n(z)
  cdouble dh;  ///< d/dz H^(1)_n(z)
};

/// Hankel function of the first kind and its derivative, for |n| <= 60 and
/// 1e-3 <= |z| <= 100. Outside that range InvalidArgument is thrown.
HankelValue hankel1(int n, cdouble z);

cdouble bessel_j(int n, cdouble z);
cdouble bessel_y(int n, cdouble z);

constexpr int kMaxBesselOrder = 60;
constexpr double kMinBesselArg = 1e-3;
constexpr double kMaxBesselArg = 100.0;

}  // namespace spectral_ends
