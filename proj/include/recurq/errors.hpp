#pragma once

#include <stdexcept>
#include <string>

namespace recurq {

// Every failure raised by the library derives from recurq::error. The
// message is prefixed with the module that raised it.
class error : public std::runtime_error {
 public:
  error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

#define RECURQ_DEFINE_ERROR(Name, Module)                         \
  class Name : public error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : error(Module, what) {} \
  };

// model-core
RECURQ_DEFINE_ERROR(InvalidArgument, "model")
// baseline
RECURQ_DEFINE_ERROR(NoEvents, "baseline")
RECURQ_DEFINE_ERROR(EmptyRisk, "baseline")
// density
RECURQ_DEFINE_ERROR(DegenerateBin, "density")
RECURQ_DEFINE_ERROR(ZeroMass, "density")
// qr-solver
RECURQ_DEFINE_ERROR(RankDeficient, "qr")
RECURQ_DEFINE_ERROR(GridOutOfRange, "qr")
RECURQ_DEFINE_ERROR(SolverFailure, "qr")
RECURQ_DEFINE_ERROR(Unbounded, "qr")
// inference
RECURQ_DEFINE_ERROR(RangeError, "inference")
RECURQ_DEFINE_ERROR(ReplicateFailure, "inference")
// sim
RECURQ_DEFINE_ERROR(SimulationFailure, "sim")
// cli / io
RECURQ_DEFINE_ERROR(SchemaError, "io")
RECURQ_DEFINE_ERROR(ValidationError, "io")

#undef RECURQ_DEFINE_ERROR

}  // namespace recurq
