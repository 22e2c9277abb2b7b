#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stablesde {

/// Entry point of the command-line tool; args excludes the program name.
/// Returns 0 on success, 1 for user errors, 2 for numerical failures. On
/// failure one JSON line {"error": {...}} is written to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stablesde
