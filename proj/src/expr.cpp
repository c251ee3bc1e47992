#include "pwfield/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <algorithm>

#include "expr_detail.hpp"

namespace pwf::expr {

namespace {

NodePtr make(auto value) { return std::make_shared<const Node>(Node{std::move(value)}); }

template <class T>
const T* as(const NodePtr& n) {
  return std::get_if<T>(&n->data);
}

bool is_const(const NodePtr& n, double v) {
  auto c = as<Constant>(n);
  return c && c->value == v;
}

bool depends_on(const NodePtr& n, Var var) {
  return std::visit(
      [&](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Variable>) return d.var == var;
        else if constexpr (std::is_same_v<T, Negate>) return depends_on(d.child, var);
        else if constexpr (std::is_same_v<T, Binary>) return depends_on(d.lhs, var) || depends_on(d.rhs, var);
        else if constexpr (std::is_same_v<T, Call>) return depends_on(d.arg, var);
        else if constexpr (std::is_same_v<T, Conditional>)
          return depends_on(d.lhs, var) || depends_on(d.rhs, var) || depends_on(d.then_branch, var) ||
                 depends_on(d.else_branch, var);
        else return false;
      },
      n->data);
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), end);
  if (v < 0 || (v == 0 && std::signbit(v))) return "(" + s + ")";
  return s;
}

char op_char(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
  }
  return '?';
}

void print(const NodePtr& n, std::string& out) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          out += format_number(d.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += d.var == Var::X ? 'x' : 'y';
        } else if constexpr (std::is_same_v<T, Parameter>) {
          out += d.name;
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += "(-";
          print(d.child, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Binary>) {
          out += '(';
          print(d.lhs, out);
          out += ' ';
          out += op_char(d.op);
          out += ' ';
          print(d.rhs, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Call>) {
          out += to_string(d.fn);
          out += '(';
          print(d.arg, out);
          out += ')';
        } else {
          out += "if(";
          print(d.lhs, out);
          out += ' ' + to_string(d.cmp) + ' ';
          print(d.rhs, out);
          out += ", ";
          print(d.then_branch, out);
          out += ", ";
          print(d.else_branch, out);
          out += ')';
        }
      },
      n->data);
}

bool equal(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (a->data.index() != b->data.index()) return false;
  return std::visit(
      [&](const auto& da) -> bool {
        using T = std::decay_t<decltype(da)>;
        const auto& db = std::get<T>(b->data);
        if constexpr (std::is_same_v<T, Constant>) return da.value == db.value;
        else if constexpr (std::is_same_v<T, Variable>) return da.var == db.var;
        else if constexpr (std::is_same_v<T, Parameter>) return da.name == db.name;
        else if constexpr (std::is_same_v<T, Negate>) return equal(da.child, db.child);
        else if constexpr (std::is_same_v<T, Binary>)
          return da.op == db.op && equal(da.lhs, db.lhs) && equal(da.rhs, db.rhs);
        else if constexpr (std::is_same_v<T, Call>) return da.fn == db.fn && equal(da.arg, db.arg);
        else
          return da.cmp == db.cmp && equal(da.lhs, db.lhs) && equal(da.rhs, db.rhs) &&
                 equal(da.then_branch, db.then_branch) && equal(da.else_branch, db.else_branch);
      },
      a->data);
}

// Folding used by the parser and bind(): only constant subtrees collapse, so
// domain errors elsewhere are preserved.
std::optional<double> try_fold(BinaryOp op, double a, double b) {
  try {
    double r = detail::apply_binary(op, a, b);
    return r;
  } catch (const detail::DomainFailure&) {
    return std::nullopt;
  }
}

}  // namespace

namespace detail {

bool compare(Cmp c, double a, double b) {
  switch (c) {
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
    case Cmp::Eq: return a == b;
  }
  return false;
}

static double checked(double r, const char* what) {
  if (!std::isfinite(r)) throw DomainFailure{what};
  return r;
}

double int_power(double a, long n) {
  if (n < 0) {
    if (a == 0.0) throw DomainFailure{"division by zero"};
    return checked(1.0 / int_power(a, -n), "overflow");
  }
  double result = 1.0;
  double base = a;
  while (n > 0) {
    if (n & 1) result *= base;
    n >>= 1;
    if (n > 0) base *= base;
  }
  return checked(result, "overflow");
}

bool small_integer(double b, long& n) {
  if (b != std::floor(b) || std::fabs(b) > 64) return false;
  n = static_cast<long>(b);
  return true;
}

double power(double a, double b) {
  long n = 0;
  if (small_integer(b, n)) return int_power(a, n);
  if (a == 0.0) {
    if (b < 0) throw DomainFailure{"division by zero"};
    return 0.0;
  }
  if (a > 0) return checked(std::pow(a, b), "overflow");
  // Negative base: real result only for rationals p/q with odd q.
  for (long q = 1; q < 1000; q += 2) {
    double p = std::round(b * static_cast<double>(q));
    if (std::fabs(p - b * static_cast<double>(q)) <= 1e-12 * std::fabs(p) + 1e-15) {
      double mag = std::pow(-a, b);
      bool odd = std::fmod(std::fabs(p), 2.0) == 1.0;
      return checked(odd ? -mag : mag, "overflow");
    }
  }
  throw DomainFailure{"negative base with non-rational exponent"};
}

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return checked(a + b, "overflow");
    case BinaryOp::Sub: return checked(a - b, "overflow");
    case BinaryOp::Mul: return checked(a * b, "overflow");
    case BinaryOp::Div:
      if (b == 0.0) throw DomainFailure{"division by zero"};
      return checked(a / b, "overflow");
    case BinaryOp::Pow: return power(a, b);
  }
  return 0.0;
}

double apply_func(Func f, double a) {
  switch (f) {
    case Func::Sin: return std::sin(a);
    case Func::Cos: return std::cos(a);
    case Func::Exp:
      if (a < -700.0) return 0.0;
      return checked(std::exp(a), "overflow");
    case Func::Ln:
      if (a <= 0.0) throw DomainFailure{"ln of non-positive value"};
      return std::log(a);
    case Func::Sqrt:
      if (a < 0.0) throw DomainFailure{"sqrt of negative value"};
      return std::sqrt(a);
    case Func::Abs: return std::fabs(a);
  }
  return 0.0;
}

}  // namespace detail

std::string to_string(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

std::string to_string(Cmp c) {
  switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    case Cmp::Eq: return "==";
  }
  return "?";
}

// ---- Expression ----

Expression::Expression() : node_(make(Constant{0.0})) {}
Expression::Expression(NodePtr node) : node_(std::move(node)) {}

Expression Expression::constant(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("constant must be finite");
  return Expression(make(Constant{v}));
}
Expression Expression::variable(Var v) { return Expression(make(Variable{v})); }
Expression Expression::parameter(std::string name) { return Expression(make(Parameter{std::move(name)})); }

Expression Expression::call(Func fn, const Expression& arg) {
  if (arg.is_constant()) {
    try {
      return constant(detail::apply_func(fn, arg.constant_value()));
    } catch (const detail::DomainFailure&) {
    }
  }
  return Expression(make(Call{fn, arg.ptr()}));
}

Expression Expression::conditional(Cmp cmp, const Expression& lhs, const Expression& rhs,
                                   const Expression& then_branch, const Expression& else_branch) {
  if (lhs.is_constant() && rhs.is_constant())
    return detail::compare(cmp, lhs.constant_value(), rhs.constant_value()) ? then_branch : else_branch;
  return Expression(make(Conditional{cmp, lhs.ptr(), rhs.ptr(), then_branch.ptr(), else_branch.ptr()}));
}

bool Expression::is_constant() const { return as<Constant>(node_) != nullptr; }
double Expression::constant_value() const { return as<Constant>(node_)->value; }

std::string Expression::str() const {
  std::string out;
  print(node_, out);
  return out;
}

bool operator==(const Expression& a, const Expression& b) { return equal(a.ptr(), b.ptr()); }

namespace detail {

Expression raw_binary(BinaryOp op, const Expression& a, const Expression& b) {
  if (a.is_constant() && b.is_constant()) {
    if (auto r = try_fold(op, a.constant_value(), b.constant_value())) return Expression::constant(*r);
  }
  return Expression(make(Binary{op, a.ptr(), b.ptr()}));
}

Expression raw_negate(const Expression& a) {
  if (a.is_constant()) return Expression::constant(-a.constant_value());
  return Expression(make(Negate{a.ptr()}));
}

}  // namespace detail

Expression operator+(const Expression& a, const Expression& b) {
  if (is_const(a.ptr(), 0.0)) return b;
  if (is_const(b.ptr(), 0.0)) return a;
  return detail::raw_binary(BinaryOp::Add, a, b);
}

Expression operator-(const Expression& a, const Expression& b) {
  if (is_const(b.ptr(), 0.0)) return a;
  if (is_const(a.ptr(), 0.0)) return -b;
  return detail::raw_binary(BinaryOp::Sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b) {
  if (is_const(a.ptr(), 0.0) || is_const(b.ptr(), 0.0)) return Expression::constant(0.0);
  if (is_const(a.ptr(), 1.0)) return b;
  if (is_const(b.ptr(), 1.0)) return a;
  if (is_const(a.ptr(), -1.0)) return -b;
  if (is_const(b.ptr(), -1.0)) return -a;
  return detail::raw_binary(BinaryOp::Mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b) {
  if (is_const(b.ptr(), 1.0)) return a;
  if (is_const(a.ptr(), 0.0) && !is_const(b.ptr(), 0.0)) return Expression::constant(0.0);
  return detail::raw_binary(BinaryOp::Div, a, b);
}

Expression operator-(const Expression& a) {
  if (auto n = as<Negate>(a.ptr())) return Expression(n->child);
  return detail::raw_negate(a);
}

Expression pow(const Expression& base, const Expression& exponent) {
  if (is_const(exponent.ptr(), 1.0)) return base;
  if (is_const(exponent.ptr(), 0.0)) return Expression::constant(1.0);
  return detail::raw_binary(BinaryOp::Pow, base, exponent);
}

// ---- ParameterBinding ----

ParameterBinding::ParameterBinding(std::initializer_list<std::pair<const std::string, double>> init) {
  for (const auto& [k, v] : init) set(k, v);
}

void ParameterBinding::set(const std::string& name, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + name + "' must be finite");
  values_[name] = value;
}

double ParameterBinding::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end())
    throw EvalError(EvalError::Kind::UnboundParameter, "unbound parameter '" + name + "'", name);
  return it->second;
}

// ---- errors ----

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)), position_(position) {}

EvalError::EvalError(Kind kind, const std::string& message, std::string subexpression)
    : std::runtime_error(message), kind_(kind), subexpression_(std::move(subexpression)) {}

// ---- evaluation ----

namespace {

double eval(const NodePtr& n, double x, double y, const ParameterBinding& p);

[[noreturn]] void domain_error(const NodePtr& n, const detail::DomainFailure& f) {
  std::string sub = Expression(n).str();
  throw EvalError(EvalError::Kind::Domain, std::string(f.what) + " in " + sub, sub);
}

double eval(const NodePtr& n, double x, double y, const ParameterBinding& p) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return d.var == Var::X ? x : y;
        } else if constexpr (std::is_same_v<T, Parameter>) {
          return p.at(d.name);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval(d.child, x, y, p);
        } else if constexpr (std::is_same_v<T, Binary>) {
          double a = eval(d.lhs, x, y, p);
          double b = eval(d.rhs, x, y, p);
          try {
            return detail::apply_binary(d.op, a, b);
          } catch (const detail::DomainFailure& f) {
            domain_error(n, f);
          }
        } else if constexpr (std::is_same_v<T, Call>) {
          double a = eval(d.arg, x, y, p);
          try {
            return detail::apply_func(d.fn, a);
          } catch (const detail::DomainFailure& f) {
            domain_error(n, f);
          }
        } else {
          double l = eval(d.lhs, x, y, p);
          double r = eval(d.rhs, x, y, p);
          return detail::compare(d.cmp, l, r) ? eval(d.then_branch, x, y, p) : eval(d.else_branch, x, y, p);
        }
      },
      n->data);
}

}  // namespace

double evaluate(const Expression& e, double x, double y, const ParameterBinding& params) {
  return eval(e.ptr(), x, y, params);
}

// ---- differentiation ----

Expression differentiate(const Expression& e, Var var) {
  const NodePtr& n = e.ptr();
  if (!depends_on(n, var)) return Expression::constant(0.0);
  return std::visit(
      [&](const auto& d) -> Expression {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Variable>) {
          return Expression::constant(d.var == var ? 1.0 : 0.0);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -differentiate(Expression(d.child), var);
        } else if constexpr (std::is_same_v<T, Binary>) {
          Expression a(d.lhs), b(d.rhs);
          Expression da = differentiate(a, var);
          switch (d.op) {
            case BinaryOp::Add: return da + differentiate(b, var);
            case BinaryOp::Sub: return da - differentiate(b, var);
            case BinaryOp::Mul: return da * b + a * differentiate(b, var);
            case BinaryOp::Div:
              if (!depends_on(d.rhs, var)) return da / b;
              return (da * b - a * differentiate(b, var)) / (b * b);
            case BinaryOp::Pow:
              if (!depends_on(d.rhs, var)) {
                Expression lowered = b - Expression::constant(1.0);
                return b * pow(a, lowered) * da;
              }
              return pow(a, b) *
                     (differentiate(b, var) * Expression::call(Func::Ln, a) + b * da / a);
          }
          return Expression::constant(0.0);
        } else if constexpr (std::is_same_v<T, Call>) {
          Expression a(d.arg);
          Expression da = differentiate(a, var);
          switch (d.fn) {
            case Func::Sin: return Expression::call(Func::Cos, a) * da;
            case Func::Cos: return -(Expression::call(Func::Sin, a) * da);
            case Func::Exp: return Expression::call(Func::Exp, a) * da;
            case Func::Ln: return da / a;
            case Func::Sqrt: return da / (Expression::constant(2.0) * Expression::call(Func::Sqrt, a));
            case Func::Abs:
              return Expression::conditional(Cmp::Ge, a, Expression::constant(0.0), da, -da);
          }
          return Expression::constant(0.0);
        } else if constexpr (std::is_same_v<T, Conditional>) {
          Expression dt = differentiate(Expression(d.then_branch), var);
          Expression de = differentiate(Expression(d.else_branch), var);
          if (dt == de) return dt;
          return Expression(make(Conditional{d.cmp, d.lhs, d.rhs, dt.ptr(), de.ptr()}));
        } else {
          return Expression::constant(0.0);
        }
      },
      n->data);
}

// ---- rewriting ----

namespace {

template <class Leaf>
Expression rewrite(const NodePtr& n, const Leaf& leaf) {
  return std::visit(
      [&](const auto& d) -> Expression {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Negate>) {
          return detail::raw_negate(rewrite(d.child, leaf));
        } else if constexpr (std::is_same_v<T, Binary>) {
          return detail::raw_binary(d.op, rewrite(d.lhs, leaf), rewrite(d.rhs, leaf));
        } else if constexpr (std::is_same_v<T, Call>) {
          return Expression::call(d.fn, rewrite(d.arg, leaf));
        } else if constexpr (std::is_same_v<T, Conditional>) {
          return Expression::conditional(d.cmp, rewrite(d.lhs, leaf), rewrite(d.rhs, leaf),
                                         rewrite(d.then_branch, leaf), rewrite(d.else_branch, leaf));
        } else {
          return leaf(n);
        }
      },
      n->data);
}

void collect_parameters(const NodePtr& n, std::set<std::string>& out) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Parameter>) {
          out.insert(d.name);
        } else if constexpr (std::is_same_v<T, Negate>) {
          collect_parameters(d.child, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          collect_parameters(d.lhs, out);
          collect_parameters(d.rhs, out);
        } else if constexpr (std::is_same_v<T, Call>) {
          collect_parameters(d.arg, out);
        } else if constexpr (std::is_same_v<T, Conditional>) {
          for (const auto* c : {&d.lhs, &d.rhs, &d.then_branch, &d.else_branch}) collect_parameters(*c, out);
        }
      },
      n->data);
}

}  // namespace

Expression substitute(const Expression& e, Var var, const Expression& replacement) {
  return rewrite(e.ptr(), [&](const NodePtr& leaf) {
    if (auto v = as<Variable>(leaf); v && v->var == var) return replacement;
    return Expression(leaf);
  });
}

Expression bind(const Expression& e, const ParameterBinding& params) {
  return rewrite(e.ptr(), [&](const NodePtr& leaf) {
    if (auto p = as<Parameter>(leaf); p && params.contains(p->name))
      return Expression::constant(params.at(p->name));
    return Expression(leaf);
  });
}

std::set<std::string> parameters_of(const Expression& e) {
  std::set<std::string> out;
  collect_parameters(e.ptr(), out);
  return out;
}

// ---- compiled form ----

CompiledExpression::CompiledExpression(const Expression& e, const ParameterBinding& params) {
  for (const auto& name : parameters_of(e)) {
    if (!params.contains(name))
      throw EvalError(EvalError::Kind::UnboundParameter, "unbound parameter '" + name + "'", name);
  }
  Expression bound = bind(e, params);
  emit(bound.ptr(), 0);
}

void CompiledExpression::emit(const NodePtr& n, int depth) {
  max_depth_ = std::max(max_depth_, depth + 1);
  auto push = [&](Op op, double value = 0.0, int ivalue = 0, int source = -1) {
    code_.push_back(Instr{op, Cmp::Lt, ivalue, value, source});
  };
  auto source_of = [&](const NodePtr& node) {
    sources_.push_back(node);
    return static_cast<int>(sources_.size()) - 1;
  };
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Constant>) {
          push(Op::Const, d.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          push(d.var == Var::X ? Op::LoadX : Op::LoadY);
        } else if constexpr (std::is_same_v<T, Parameter>) {
          throw EvalError(EvalError::Kind::UnboundParameter, "unbound parameter '" + d.name + "'", d.name);
        } else if constexpr (std::is_same_v<T, Negate>) {
          emit(d.child, depth);
          push(Op::Neg);
        } else if constexpr (std::is_same_v<T, Binary>) {
          long k = 0;
          auto rc = as<Constant>(d.rhs);
          if (d.op == BinaryOp::Pow && rc && detail::small_integer(rc->value, k)) {
            emit(d.lhs, depth);
            push(Op::PowInt, 0.0, static_cast<int>(k), source_of(n));
            return;
          }
          emit(d.lhs, depth);
          emit(d.rhs, depth + 1);
          static constexpr std::array<Op, 5> ops{Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
          push(ops[static_cast<int>(d.op)], 0.0, 0, source_of(n));
        } else if constexpr (std::is_same_v<T, Call>) {
          emit(d.arg, depth);
          static constexpr std::array<Op, 6> ops{Op::Sin, Op::Cos, Op::Exp, Op::Ln, Op::Sqrt, Op::Abs};
          push(ops[static_cast<int>(d.fn)], 0.0, 0, source_of(n));
        } else {
          emit(d.lhs, depth);
          emit(d.rhs, depth + 1);
          std::size_t branch = code_.size();
          code_.push_back(Instr{Op::JumpUnless, d.cmp, 0, 0.0, -1});
          emit(d.then_branch, depth);
          std::size_t skip = code_.size();
          push(Op::Jump);
          code_[branch].ivalue = static_cast<int>(code_.size());
          emit(d.else_branch, depth);
          code_[skip].ivalue = static_cast<int>(code_.size());
        }
      },
      n->data);
}

void CompiledExpression::fail_domain(int source, const std::string& what) const {
  std::string sub = source >= 0 ? Expression(sources_[static_cast<std::size_t>(source)]).str() : "?";
  throw EvalError(EvalError::Kind::Domain, what + " in " + sub, sub);
}

double CompiledExpression::operator()(double x, double y) const {
  constexpr int kInline = 32;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap_stack;
  double* st = inline_stack.data();
  if (max_depth_ > kInline) {
    heap_stack.resize(static_cast<std::size_t>(max_depth_));
    st = heap_stack.data();
  }
  int sp = 0;
  const std::size_t n = code_.size();
  for (std::size_t pc = 0; pc < n; ++pc) {
    const Instr& in = code_[pc];
    try {
      switch (in.op) {
        case Op::Const: st[sp++] = in.value; break;
        case Op::LoadX: st[sp++] = x; break;
        case Op::LoadY: st[sp++] = y; break;
        case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Op::Add: --sp; st[sp - 1] = detail::apply_binary(BinaryOp::Add, st[sp - 1], st[sp]); break;
        case Op::Sub: --sp; st[sp - 1] = detail::apply_binary(BinaryOp::Sub, st[sp - 1], st[sp]); break;
        case Op::Mul: --sp; st[sp - 1] = detail::apply_binary(BinaryOp::Mul, st[sp - 1], st[sp]); break;
        case Op::Div: --sp; st[sp - 1] = detail::apply_binary(BinaryOp::Div, st[sp - 1], st[sp]); break;
        case Op::Pow: --sp; st[sp - 1] = detail::power(st[sp - 1], st[sp]); break;
        case Op::PowInt: st[sp - 1] = detail::int_power(st[sp - 1], in.ivalue); break;
        case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
        case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
        case Op::Exp: st[sp - 1] = detail::apply_func(Func::Exp, st[sp - 1]); break;
        case Op::Ln: st[sp - 1] = detail::apply_func(Func::Ln, st[sp - 1]); break;
        case Op::Sqrt: st[sp - 1] = detail::apply_func(Func::Sqrt, st[sp - 1]); break;
        case Op::Abs: st[sp - 1] = std::fabs(st[sp - 1]); break;
        case Op::JumpUnless:
          sp -= 2;
          if (!detail::compare(in.cmp, st[sp], st[sp + 1])) pc = static_cast<std::size_t>(in.ivalue) - 1;
          break;
        case Op::Jump: pc = static_cast<std::size_t>(in.ivalue) - 1; break;
      }
    } catch (const detail::DomainFailure& f) {
      fail_domain(in.source, f.what);
    }
  }
  return st[0];
}

}  // namespace pwf::expr
