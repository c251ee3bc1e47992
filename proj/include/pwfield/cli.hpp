// Command-line front end: field sources, run configuration and the
// subcommands of the pwfield tool.
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwfield/field.hpp"
#include "pwfield/integrate.hpp"

namespace pwf::cli {

/// Exit-code contract of the tool.
enum ExitCode : int { Pass = 0, AssertionFailure = 1, ConfigFailure = 2, PreconditionFailure = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds a catalog field from a reference string such as "FF-1",
/// "z0(a=-1, b=-1)", "prop52(-0.25, -0.25, 3, 0.05)" or
/// "theorem13(z0(-1,-1), eps1=0.1, eps2=0.1, eps3=0.005)".
PiecewiseField parse_field_reference(const std::string& ref);

/// Names accepted by parse_field_reference with their parameter lists.
std::vector<std::string> field_reference_help();

struct FieldSource {
  std::optional<std::string> catalog;
  std::optional<std::array<std::string, 2>> upper;
  std::optional<std::array<std::string, 2>> lower;
  expr::ParameterBinding parameters;
  std::optional<Box> box;
};

struct RunConfig {
  FieldSource field;
  IntegratorConfig integrator;
  std::string out_dir = "out";
  std::set<std::string> formats{"csv", "svg", "report"};

  bool wants(const std::string& format) const { return formats.count(format) != 0; }
};

/// Reads the YAML configuration file. Unknown keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& yaml_text);

/// Validates the field source and builds the field. Throws ConfigError.
PiecewiseField build_field(const FieldSource& source);

/// Runs the tool with the given arguments (argv[0] is the program name) and
/// returns the exit code. Tables and reports go to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pwf::cli
