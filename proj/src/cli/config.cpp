#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "pwfield/cli.hpp"

namespace pwf::cli {

namespace {

void reject_unknown(const YAML::Node& node, std::initializer_list<const char*> known, const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    std::string key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double real(const YAML::Node& n, const std::string& what) {
  try {
    double v = n.as<double>();
    if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
    return v;
  } catch (const YAML::Exception&) {
    throw ConfigError(what + " must be a number");
  }
}

std::array<std::string, 2> pair_of_strings(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(what + " must be a list of two expression strings");
  return {n[0].as<std::string>(), n[1].as<std::string>()};
}

RunConfig from_yaml(const YAML::Node& root) {
  RunConfig c;
  if (root.IsNull()) return c;
  reject_unknown(root, {"field", "integrator", "output"}, "the configuration");
  if (const YAML::Node f = root["field"]) {
    reject_unknown(f, {"catalog", "upper", "lower", "parameters", "box"}, "field");
    if (f["catalog"]) c.field.catalog = f["catalog"].as<std::string>();
    if (f["upper"]) c.field.upper = pair_of_strings(f["upper"], "field.upper");
    if (f["lower"]) c.field.lower = pair_of_strings(f["lower"], "field.lower");
    if (const YAML::Node p = f["parameters"]) {
      if (!p.IsMap()) throw ConfigError("field.parameters must be a mapping");
      for (const auto& kv : p) {
        std::string k = kv.first.as<std::string>();
        c.field.parameters.set(k, real(kv.second, "parameter " + k));
      }
    }
    if (const YAML::Node b = f["box"]) {
      if (!b.IsSequence() || b.size() != 2) throw ConfigError("field.box must be [hx, hy]");
      c.field.box = Box{real(b[0], "box hx"), real(b[1], "box hy")};
    }
  }
  if (const YAML::Node g = root["integrator"]) {
    reject_unknown(g, {"relTol", "absTol", "maxStep", "eventTol", "maxTime", "maxEvents", "minAmplitude"},
                   "integrator");
    IntegratorConfig& i = c.integrator;
    if (g["relTol"]) i.relTol = real(g["relTol"], "relTol");
    if (g["absTol"]) i.absTol = real(g["absTol"], "absTol");
    if (g["maxStep"]) i.maxStep = real(g["maxStep"], "maxStep");
    if (g["eventTol"]) i.eventTol = real(g["eventTol"], "eventTol");
    if (g["maxTime"]) i.maxTime = real(g["maxTime"], "maxTime");
    if (g["maxEvents"]) i.maxEvents = static_cast<int>(real(g["maxEvents"], "maxEvents"));
    if (g["minAmplitude"]) i.minAmplitude = real(g["minAmplitude"], "minAmplitude");
  }
  if (const YAML::Node o = root["output"]) {
    reject_unknown(o, {"dir", "formats"}, "output");
    if (o["dir"]) c.out_dir = o["dir"].as<std::string>();
    if (const YAML::Node fm = o["formats"]) {
      if (!fm.IsSequence()) throw ConfigError("output.formats must be a list");
      c.formats.clear();
      for (const auto& x : fm) c.formats.insert(x.as<std::string>());
    }
  }
  return c;
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text) {
  try {
    return from_yaml(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

PiecewiseField build_field(const FieldSource& source) {
  bool inline_given = source.upper || source.lower;
  if (source.catalog && inline_given) throw ConfigError("give either a catalog field or inline expressions, not both");
  if (!source.catalog && !inline_given) throw ConfigError("no field given (use --field or --upper/--lower)");
  if (source.catalog) {
    if (!source.parameters.empty()) throw ConfigError("parameters apply to inline fields only");
    PiecewiseField z = parse_field_reference(*source.catalog);
    if (source.box) z.box = *source.box;
    return z;
  }
  if (!source.upper || !source.lower) throw ConfigError("inline fields need both upper and lower components");
  if (source.box && !(source.box->hx > 0 && source.box->hy > 0)) throw ConfigError("box sizes must be positive");
  try {
    return make_inline((*source.upper)[0], (*source.upper)[1], (*source.lower)[0], (*source.lower)[1],
                       source.parameters, source.box.value_or(Box{}));
  } catch (const expr::ParseError& e) {
    throw ConfigError(std::string("expression: ") + e.what());
  } catch (const expr::EvalError& e) {
    throw ConfigError(std::string("expression: ") + e.what());
  }
}

}  // namespace pwf::cli
