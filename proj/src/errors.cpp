#include "stablesde/errors.hpp"

namespace stablesde {

SamplerStall::SamplerStall(double x, long attempts)
    : Error("conditional variance sampler stalled at x=" + std::to_string(x) + " after " +
            std::to_string(attempts) + " rejections"),
      x_(x),
      attempts_(attempts) {}

SamplerStall::SamplerStall(const SamplerStall& inner, std::size_t iteration)
    : Error(std::string(inner.what()) + " in iteration " + std::to_string(iteration)),
      x_(inner.x_),
      attempts_(inner.attempts_),
      iteration_(iteration) {}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

UndeclaredIdentifier::UndeclaredIdentifier(const std::string& name, std::size_t offset)
    : Error("undeclared identifier '" + name + "' at offset " + std::to_string(offset)),
      name_(name),
      offset_(offset) {}

EvalError::EvalError(const std::string& what, std::size_t offset)
    : Error(offset == std::string::npos ? what : what + " at offset " + std::to_string(offset)),
      offset_(offset) {}

ModelViolation::ModelViolation(const std::string& what, std::size_t index)
    : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

SimulationFailure::SimulationFailure(const std::string& what, std::size_t step)
    : Error(what + " at step " + std::to_string(step)), step_(step) {}

}  // namespace stablesde
