#pragma once

#include <string>
#include <vector>

#include "hybridloc/types.hpp"

namespace hybridloc {

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Structural validation of an instance: id ranges, self-loops, duplicate
/// pairs, positivity of ranges/noise, unit bearings (within 1e-12),
/// dimension consistency, and connectivity of the union graph over
/// agents+anchors. Returns the list of violated invariants; never throws.
ValidationResult validate_instance(const ProblemInstance& inst);

}  // namespace hybridloc
