#pragma once

#include "sldp/registry.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace sldp {

/// Sections of key = value pairs; values may be double-quoted.
using KeyValueDocument = std::map<std::string, std::map<std::string, std::string>>;

/// Parses the key-value text format. Lines starting with '#' are comments.
/// Throws InputError naming the source and line on malformed input.
KeyValueDocument parse_key_value(std::string_view text, const std::string& source);

/// Builds a problem from sections [problem], [drift], [singular],
/// [diffusion], [modulus] and the optional [experiment], [zvonkin].
ProblemBundle problem_from_document(const KeyValueDocument& doc, const std::string& source);

ProblemBundle load_problem_file(const std::filesystem::path& path);

/// A registry name or a path to a problem file.
ProblemBundle resolve_problem(std::string_view name_or_path);

}  // namespace sldp
