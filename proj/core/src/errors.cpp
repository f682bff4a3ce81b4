#include "pressure_id/errors.hpp"

namespace pressure_id {

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace pressure_id
