#pragma once

#include <optional>
#include <string>
#include <utility>

#include "hybridloc/types.hpp"

namespace hybridloc {

/// Error while parsing or validating an instance document. The message
/// carries field context (and the validation violations when applicable).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedDocument {
  ProblemInstance instance;
  std::optional<GroundTruth> truth;
};

/// Serialize an instance (and optional ground truth) to a JSON document.
/// Round-trips exactly: parse(serialize(inst, t)) == (inst, t) with doubles
/// preserved bit-for-bit.
std::string serialize(const ProblemInstance& inst,
                      const std::optional<GroundTruth>& truth = std::nullopt);

/// Parse a document produced by serialize (or conforming to the same
/// schema). Runs validate_instance and throws ParseError on malformed input
/// or invariant violations.
ParsedDocument parse(const std::string& doc);

void save_instance(const std::string& path, const ProblemInstance& inst,
                   const std::optional<GroundTruth>& truth = std::nullopt);
ParsedDocument load_instance(const std::string& path);

}  // namespace hybridloc
