#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fillab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Which smooth regime a field acts on relative to the switching plane z = 0.
enum class FieldSide { Above, Below };

inline const char* to_string(FieldSide s) {
  return s == FieldSide::Above ? "above" : "below";
}

/// Base for all domain errors. Subcommands map these to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define FILLAB_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

FILLAB_DEFINE_ERROR(NotOnSigma);
FILLAB_DEFINE_ERROR(OrderUnsupported);
FILLAB_DEFINE_ERROR(DenominatorVanishes);
FILLAB_DEFINE_ERROR(NotSlidingRegion);
FILLAB_DEFINE_ERROR(RequiresNormalForm);
FILLAB_DEFINE_ERROR(StepSizeUnderflow);
FILLAB_DEFINE_ERROR(BlowUp);
FILLAB_DEFINE_ERROR(NoReturn);
FILLAB_DEFINE_ERROR(GrazingUnresolved);
FILLAB_DEFINE_ERROR(WrongSide);
FILLAB_DEFINE_ERROR(NoRealReturn);
FILLAB_DEFINE_ERROR(BackwardOnly);
FILLAB_DEFINE_ERROR(NewtonDiverged);
FILLAB_DEFINE_ERROR(IndexZero);
FILLAB_DEFINE_ERROR(DegreeUnsupported);
FILLAB_DEFINE_ERROR(NonInvisibleFold);
FILLAB_DEFINE_ERROR(OutOfRange);
FILLAB_DEFINE_ERROR(NotInCrossing);
FILLAB_DEFINE_ERROR(SingularParams);
FILLAB_DEFINE_ERROR(OutOfWindow);
FILLAB_DEFINE_ERROR(ContinuationStalled);
FILLAB_DEFINE_ERROR(InvalidRegion);
FILLAB_DEFINE_ERROR(EmptyInput);
FILLAB_DEFINE_ERROR(ParseError);

#undef FILLAB_DEFINE_ERROR

}  // namespace fillab
