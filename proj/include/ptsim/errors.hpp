#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace ptsim {

namespace detail {
// Short %g rendering of a double for error messages.
inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}
} // namespace detail

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad parameters, malformed specs, unknown names.
/// The CLI maps these to exit code 2.
class SpecError : public Error {
public:
  using Error::Error;
};

/// A numerical invariant did not hold. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
  using Error::Error;
};

#define PTSIM_DEFINE_ERROR(Name, Base)                                         \
  class Name : public Base {                                                   \
  public:                                                                      \
    explicit Name(const std::string& what) : Base(#Name ": " + what) {}        \
  }

PTSIM_DEFINE_ERROR(DimensionMismatch, SpecError);
PTSIM_DEFINE_ERROR(InvalidModel, SpecError);
PTSIM_DEFINE_ERROR(PhotonMismatch, SpecError);
PTSIM_DEFINE_ERROR(TooLarge, SpecError);
PTSIM_DEFINE_ERROR(InvalidCoherence, SpecError);
PTSIM_DEFINE_ERROR(InvalidDetection, SpecError);
PTSIM_DEFINE_ERROR(UnknownExperiment, SpecError);

PTSIM_DEFINE_ERROR(NonFinite, NumericalError);
PTSIM_DEFINE_ERROR(NotHermitian, NumericalError);
PTSIM_DEFINE_ERROR(NoConvergence, NumericalError);
PTSIM_DEFINE_ERROR(NotPSD, NumericalError);
PTSIM_DEFINE_ERROR(NotUnitary, NumericalError);
PTSIM_DEFINE_ERROR(UnitarityFailure, NumericalError);
PTSIM_DEFINE_ERROR(AsymptoteSuspected, NumericalError);
PTSIM_DEFINE_ERROR(VanishingSupport, NumericalError);
PTSIM_DEFINE_ERROR(EmptyFilter, NumericalError);
PTSIM_DEFINE_ERROR(InvalidDensity, NumericalError);

#undef PTSIM_DEFINE_ERROR

} // namespace ptsim
