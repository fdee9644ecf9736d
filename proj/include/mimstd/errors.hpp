#pragma once

#include <stdexcept>
#include <string>

namespace mimstd {

/// Broad failure classes. The CLI maps each class onto a process exit code.
enum class ErrorClass {
  numerical,  // method or numerical failure in an estimator
  negative_variance,
  io,
  schema,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define MIMSTD_DEFINE_ERROR(Name, Class)                                         \
  class Name : public Error {                                                    \
   public:                                                                       \
    explicit Name(const std::string& what) : Error(ErrorClass::Class, what) {}   \
  };

// glm / shared
MIMSTD_DEFINE_ERROR(DomainError, numerical)
MIMSTD_DEFINE_ERROR(ShapeError, numerical)
MIMSTD_DEFINE_ERROR(SeparationError, numerical)
MIMSTD_DEFINE_ERROR(SingularError, numerical)
MIMSTD_DEFINE_ERROR(EmptyInput, numerical)
// bayes_glm
MIMSTD_DEFINE_ERROR(ConvergenceError, numerical)
// mim
MIMSTD_DEFINE_ERROR(DegenerateSynthesisError, numerical)
MIMSTD_DEFINE_ERROR(NegativeVarianceError, negative_variance)
MIMSTD_DEFINE_ERROR(PoolingPolicyError, numerical)
// gcomp
MIMSTD_DEFINE_ERROR(ResampleFailureError, numerical)
// simgen
MIMSTD_DEFINE_ERROR(NotPositiveDefinite, numerical)
// harness
MIMSTD_DEFINE_ERROR(TooManyFailures, numerical)
// io
MIMSTD_DEFINE_ERROR(IoError, io)
MIMSTD_DEFINE_ERROR(SchemaError, schema)

#undef MIMSTD_DEFINE_ERROR

}  // namespace mimstd
