#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "formlab/scalar.hpp"

namespace formlab {

enum class OutputMode { Text, Json };

// One statement = one nonempty line; '#' starts a comment.
struct Statement {
  int line;            // 1-based source line
  std::string verb;    // chart|form|connection|set|metric|pde or a command
  std::string text;    // the full statement text (verb included)
};

struct Script {
  std::vector<Statement> statements;
};

// Parses and statically checks the script: declaration-before-use, unique
// names, degree bounds for form-producing commands.
Script parse_script(const std::string& text);

// Executes the script; returns the exit code: 0 all assertions pass,
// 1 some assertion failed, 2 execution error (reported with line number).
int run_script(const Script& script, OutputMode mode, std::ostream& out);

}  // namespace formlab
