#pragma once

#include <stdexcept>
#include <string>

namespace gie {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define GIE_ERROR(Name)                 \
  struct Name : Error {                 \
    using Error::Error;                 \
  }

GIE_ERROR(InvalidMesh);
GIE_ERROR(LengthMismatch);
GIE_ERROR(SingularEvaluation);
GIE_ERROR(AmbiguousClassification);
GIE_ERROR(IllConditioned);
GIE_ERROR(InvalidSpec);
GIE_ERROR(SingularStructure);
GIE_ERROR(NotInvertible);
GIE_ERROR(RadiusExceeded);
GIE_ERROR(NoContraction);
GIE_ERROR(MaxIterations);
GIE_ERROR(BudgetExceeded);
GIE_ERROR(BoundaryZero);
GIE_ERROR(DimensionTooHigh);
GIE_ERROR(SolverInconsistent);
GIE_ERROR(PreconditionViolated);
GIE_ERROR(DivergenceDetected);

#undef GIE_ERROR

// check_conditions failure; carries which condition and the measured exponent
struct ConditionFailed : Error {
  ConditionFailed(std::string which, double exponent)
      : Error("condition " + which + " failed (exponent " + std::to_string(exponent) + ")"),
        condition(std::move(which)), growth_exponent(exponent) {}
  std::string condition;
  double growth_exponent;
};

}  // namespace gie
