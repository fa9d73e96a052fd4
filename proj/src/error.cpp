#include "qs3orao/error.hpp"

namespace qs3orao {

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

NumericError::NumericError(const std::string& what, std::uint64_t iteration)
    : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

}  // namespace qs3orao
