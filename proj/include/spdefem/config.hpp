#pragma once

#include <string>

#include <json.hpp>

#include "spdefem/harness.hpp"

namespace spdefem {

/// Study configuration from JSON. Keys:
///   dim, extent?, rho | sigmas | sqrt_matrix, f = {kind, c}, p?,
///   levels = [[N, n], ...], samples, seed, reference = {n_mult?, refinements?, kind?},
///   threads?, tolerance?
StudyConfig study_config_from_json(const nlohmann::json& j);

/// Parses a string as TOML or JSON, chosen by `format` ("toml" or "json").
StudyConfig parse_study_config(const std::string& text, const std::string& format);

/// Reads a `.toml` or `.json` file (any other extension is tried as JSON).
StudyConfig load_study_config(const std::string& path);

/// Command-line entry point; returns 0 on success, 1 on configuration
/// errors and 2 on numerical failures.
int run_cli(int argc, char** argv);

}  // namespace spdefem
