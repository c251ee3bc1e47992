// Catalog reference strings: name, or name(arg, ..., key=value, ...), where
// an argument is a number or another reference.
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <algorithm>
#include <memory>
#include <variant>

#include "pwfield/cli.hpp"

namespace pwf::cli {

namespace {

struct Ref;
using Value = std::variant<double, std::shared_ptr<Ref>>;

struct Ref {
  std::string name;
  std::vector<Value> positional;
  std::vector<std::pair<std::string, Value>> named;
};

class RefParser {
 public:
  explicit RefParser(const std::string& text) : s_(text) {}

  std::shared_ptr<Ref> parse() {
    auto r = reference();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_, 1) + "'");
    return r;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("field reference '" + s_ + "': " + what + " at position " + std::to_string(pos_ + 1));
  }
  static bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

  std::string identifier() {
    skip();
    std::size_t start = pos_;
    if (pos_ >= s_.size() || !std::isalpha(static_cast<unsigned char>(s_[pos_]))) fail("expected a name");
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  std::shared_ptr<Ref> reference() {
    auto r = std::make_shared<Ref>();
    r->name = identifier();
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      skip();
      if (pos_ < s_.size() && s_[pos_] == ')') {
        ++pos_;
        return r;
      }
      for (;;) {
        argument(*r);
        skip();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (pos_ < s_.size() && s_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    return r;
  }

  void argument(Ref& r) {
    skip();
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      std::size_t save = pos_;
      std::string id = identifier();
      skip();
      if (pos_ < s_.size() && s_[pos_] == '=') {
        ++pos_;
        r.named.emplace_back(id, value());
        return;
      }
      pos_ = save;
    }
    if (!r.named.empty()) fail("positional argument after a named one");
    r.positional.push_back(value());
  }

  Value value() {
    skip();
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) return reference();
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    if (begin != end && *begin == '+') ++begin;
    double v = 0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || !std::isfinite(v)) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

// Binds positional and named arguments to a parameter list.
class Args {
 public:
  Args(const Ref& r, std::vector<std::string> names) : ref_(r), names_(std::move(names)) {
    if (r.positional.size() > names_.size())
      throw ConfigError("'" + r.name + "' takes at most " + std::to_string(names_.size()) + " arguments");
    for (std::size_t i = 0; i < r.positional.size(); ++i) bound_[names_[i]] = r.positional[i];
    for (const auto& [k, v] : r.named) {
      if (std::find(names_.begin(), names_.end(), k) == names_.end())
        throw ConfigError("'" + r.name + "' has no parameter '" + k + "'");
      if (bound_.count(k)) throw ConfigError("'" + r.name + "': parameter '" + k + "' given twice");
      bound_[k] = v;
    }
  }

  double number(const std::string& k, std::optional<double> fallback = std::nullopt) const {
    auto it = bound_.find(k);
    if (it == bound_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("'" + ref_.name + "' needs parameter '" + k + "'");
    }
    if (const double* d = std::get_if<double>(&it->second)) return *d;
    throw ConfigError("'" + ref_.name + "': parameter '" + k + "' must be a number");
  }

  int integer(const std::string& k) const {
    double v = number(k);
    if (v != std::floor(v) || std::fabs(v) > 1e6) throw ConfigError("'" + ref_.name + "': '" + k + "' must be an integer");
    return static_cast<int>(v);
  }

  const Ref& field(const std::string& k) const {
    auto it = bound_.find(k);
    if (it == bound_.end()) throw ConfigError("'" + ref_.name + "' needs a base field");
    if (const auto* r = std::get_if<std::shared_ptr<Ref>>(&it->second)) return **r;
    throw ConfigError("'" + ref_.name + "': '" + k + "' must be a field reference");
  }

 private:
  const Ref& ref_;
  std::vector<std::string> names_;
  std::map<std::string, Value> bound_;
};

PiecewiseField build(const Ref& r);

struct Entry {
  std::vector<std::string> params;
  std::function<PiecewiseField(const Args&)> make;
};

const std::map<std::string, Entry>& entries() {
  static const std::map<std::string, Entry> table = {
      {"z0", {{"a", "b"}, [](const Args& a) { return make_z0(a.number("a"), a.number("b")); }}},
      {"prop52",
       {{"a", "b", "m", "eps"},
        [](const Args& a) { return make_prop52(a.number("a"), a.number("b"), a.integer("m"), a.number("eps")); }}},
      {"prop53",
       {{"a", "b", "eps"}, [](const Args& a) { return make_prop53(a.number("a"), a.number("b"), a.number("eps")); }}},
      {"linear",
       {{"p11", "p12", "p21", "p22", "m11", "m12", "m21", "m22"},
        [](const Args& a) {
          return make_linear({a.number("p11"), a.number("p12"), a.number("p21"), a.number("p22")},
                             {a.number("m11"), a.number("m12"), a.number("m21"), a.number("m22")});
        }}},
      {"zstar", {{}, [](const Args&) { return make_counterexample_zstar(false); }}},
      {"zstar-linear", {{}, [](const Args&) { return make_counterexample_zstar(true); }}},
      {"theorem13",
       {{"base", "eps1", "eps2", "eps3"},
        [](const Args& a) {
          return make_theorem13_perturbation(build(a.field("base")), a.number("eps1", 0.0), a.number("eps2", 0.0),
                                             a.number("eps3", 0.0));
        }}},
      {"shift",
       {{"base", "delta"},
        [](const Args& a) { return make_pseudo_hopf_shift(build(a.field("base")), a.number("delta")); }}},
      {"omega3",
       {{"base", "eps"},
        [](const Args& a) { return make_omega3_perturbation(build(a.field("base")), a.number("eps")); }}},
      {"mirror-x", {{"base"}, [](const Args& a) { return reflect_x(build(a.field("base"))); }}},
      {"mirror-y", {{"base"}, [](const Args& a) { return reflect_y(build(a.field("base"))); }}},
      {"reverse", {{"base"}, [](const Args& a) { return time_reversed(build(a.field("base"))); }}},
  };
  return table;
}

PiecewiseField build(const Ref& r) {
  auto it = entries().find(r.name);
  if (it == entries().end()) {
    for (PortraitLabel l : all_portrait_labels()) {
      if (to_string(l) != r.name) continue;
      if (!r.positional.empty() || !r.named.empty()) throw ConfigError("'" + r.name + "' takes no arguments");
      return make_normal_form(l);
    }
    throw ConfigError("unknown field '" + r.name + "'");
  }
  Args args(r, it->second.params);
  try {
    return it->second.make(args);
  } catch (const CatalogError& e) {
    if (e.kind() == CatalogError::Kind::NotOmega0 || e.kind() == CatalogError::Kind::NotOmega3) throw;
    throw ConfigError(r.name + ": " + e.what());
  }
}

}  // namespace

PiecewiseField parse_field_reference(const std::string& ref) { return build(*RefParser(ref).parse()); }

std::vector<std::string> field_reference_help() {
  std::vector<std::string> out;
  for (PortraitLabel l : all_portrait_labels()) out.push_back(to_string(l));
  for (const auto& [name, e] : entries()) {
    std::string s = name + "(";
    for (std::size_t i = 0; i < e.params.size(); ++i) s += (i ? ", " : "") + e.params[i];
    out.push_back(s + ")");
  }
  return out;
}

}  // namespace pwf::cli
