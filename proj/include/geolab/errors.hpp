#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace geolab {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used in CLI error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, std::vector<double> witness = {})
      : std::runtime_error(what), kind_(std::move(kind)), witness_(std::move(witness)) {}

  const std::string& kind() const noexcept { return kind_; }
  /// Numeric witness (point, direction, ...) attached to the failure, if any.
  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  std::string kind_;
  std::vector<double> witness_;
};

#define GEOLAB_DEFINE_ERROR(Name)                                                   \
  class Name : public Error {                                                       \
   public:                                                                          \
    explicit Name(const std::string& what, std::vector<double> witness = {})        \
        : Error(#Name, what, std::move(witness)) {}                                 \
  };

GEOLAB_DEFINE_ERROR(DimensionMismatch)
GEOLAB_DEFINE_ERROR(NonTimelikePoint)
GEOLAB_DEFINE_ERROR(DegeneratePlane)
GEOLAB_DEFINE_ERROR(LeftTimelikeRegion)
GEOLAB_DEFINE_ERROR(StepUnderflow)
GEOLAB_DEFINE_ERROR(NotFound)
GEOLAB_DEFINE_ERROR(Trapped)
GEOLAB_DEFINE_ERROR(InsufficientSamples)
GEOLAB_DEFINE_ERROR(CriticalPoint)
GEOLAB_DEFINE_ERROR(ConditionThreeViolated)
GEOLAB_DEFINE_ERROR(NegativeTangentHessian)
GEOLAB_DEFINE_ERROR(FailedVerification)
GEOLAB_DEFINE_ERROR(SigmaSlopeViolation)
GEOLAB_DEFINE_ERROR(DimensionTooLarge)
GEOLAB_DEFINE_ERROR(NotInCone)
GEOLAB_DEFINE_ERROR(ConeDegenerate)
GEOLAB_DEFINE_ERROR(OrthogonalTangentPoint)
GEOLAB_DEFINE_ERROR(PathSearchExhausted)
GEOLAB_DEFINE_ERROR(SchemaError)

#undef GEOLAB_DEFINE_ERROR

}  // namespace geolab
