#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "atlforge/synthesis.hpp"

namespace atlforge::cli {

enum ExitCode : int { kSat = 0, kUnsat = 1, kUnknown = 2, kInputError = 3 };

/// Parses and schema-checks a problem file. Throws SchemaError naming the
/// offending field path.
Problem load_problem(std::string_view text);

/// The result object printed by `solve` and `oracle`.
std::string verdict_to_json(const Verdict& v, const Problem& p);

int exit_code(VerdictStatus s);

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace atlforge::cli
