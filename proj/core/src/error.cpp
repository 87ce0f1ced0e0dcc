#include "sard/error.hpp"

namespace sard {

DivergenceError::DivergenceError(const std::string& what, std::string layer)
    : DataError(what), layer_(std::move(layer)) {}

} // namespace sard
