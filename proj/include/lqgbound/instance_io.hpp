#pragma once

#include <cstdint>
#include <string>

#include "lqgbound/model.hpp"

namespace lqgbound {

/// An instance file after validation: the solved instance, its
/// parametrization and a hash of the file bytes for provenance lines.
struct LoadedInstance {
  LqgInstance inst;
  Parametrization param;
  std::uint64_t hash = 0;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

/// Parses the JSON instance format:
///   {"mode": "StateFeedback" | "PartiallyObserved",
///    "A": [[...]], "B": [[...]], "C": [[...]], "Q": ..., "R": ...,
///    "Sigma_w": ..., "Sigma_v": ..., "d_x"?, "d_u"?, "d_y"?,
///    "parametrization"?: {"kind": ..., "basis"?: [{"A","B","C"}], "theta_dim"?}}
/// Matrices are row-major nested arrays; a bare number is read as 1x1.
/// C and Sigma_v may be omitted in state-feedback mode. Errors are
/// kInvalidInput with the offending key in the message, or whatever
/// build_instance raises.
LoadedInstance parse_instance(const std::string& text);
LoadedInstance load_instance_file(const std::string& path);

/// Reads a matrix from JSON text: a nested array, or an object with key "K".
Matrix parse_matrix_text(const std::string& text, const std::string& what);

}  // namespace lqgbound
