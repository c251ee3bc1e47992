// Expression language: parsing, evaluation, symbolic derivatives.
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pwf::expr {

enum class Var { X, Y };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Exp, Ln, Sqrt, Abs };
enum class Cmp { Lt, Le, Gt, Ge, Eq };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
  double value;
};
struct Variable {
  Var var;
};
struct Parameter {
  std::string name;
};
struct Negate {
  NodePtr child;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Func fn;
  NodePtr arg;
};
struct Conditional {
  Cmp cmp;
  NodePtr lhs;
  NodePtr rhs;
  NodePtr then_branch;
  NodePtr else_branch;
};

struct Node {
  std::variant<Constant, Variable, Parameter, Negate, Binary, Call, Conditional> data;
};

/// Immutable expression tree. Copies share structure.
class Expression {
 public:
  Expression();  // the constant 0
  explicit Expression(NodePtr node);

  static Expression constant(double v);
  static Expression variable(Var v);
  static Expression x() { return variable(Var::X); }
  static Expression y() { return variable(Var::Y); }
  static Expression parameter(std::string name);
  static Expression call(Func fn, const Expression& arg);
  static Expression conditional(Cmp cmp, const Expression& lhs, const Expression& rhs,
                                const Expression& then_branch, const Expression& else_branch);

  const Node& node() const { return *node_; }
  const NodePtr& ptr() const { return node_; }

  bool is_constant() const;
  // Only meaningful when is_constant().
  double constant_value() const;

  // Fully parenthesized canonical form; parse(str()) reproduces the tree.
  std::string str() const;

  friend bool operator==(const Expression& a, const Expression& b);
  friend bool operator!=(const Expression& a, const Expression& b) { return !(a == b); }

 private:
  NodePtr node_;
};

// Builders fold constants and drop neutral elements.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);

std::string to_string(Func f);
std::string to_string(Cmp c);

/// Name → value map. Values must be finite.
class ParameterBinding {
 public:
  ParameterBinding() = default;
  ParameterBinding(std::initializer_list<std::pair<const std::string, double>> init);

  void set(const std::string& name, double value);
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  double at(const std::string& name) const;
  const std::map<std::string, double>& values() const { return values_; }
  bool empty() const { return values_.empty(); }

  friend bool operator==(const ParameterBinding&, const ParameterBinding&) = default;

 private:
  std::map<std::string, double> values_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  // 1-based character position of the offending token.
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class EvalError : public std::runtime_error {
 public:
  enum class Kind { UnboundParameter, Domain };
  EvalError(Kind kind, const std::string& message, std::string subexpression);
  Kind kind() const { return kind_; }
  const std::string& subexpression() const { return subexpression_; }

 private:
  Kind kind_;
  std::string subexpression_;
};

Expression parse(std::string_view text);

double evaluate(const Expression& e, double x, double y, const ParameterBinding& params = {});

Expression differentiate(const Expression& e, Var var);

// Replace every occurrence of `var` by `replacement`.
Expression substitute(const Expression& e, Var var, const Expression& replacement);

// Replace bound parameters by constants and fold.
Expression bind(const Expression& e, const ParameterBinding& params);

std::set<std::string> parameters_of(const Expression& e);

/// Flattened evaluator for a fixed parameter binding. Used in the integration
/// hot loops; semantics match evaluate() exactly.
class CompiledExpression {
 public:
  CompiledExpression() = default;
  CompiledExpression(const Expression& e, const ParameterBinding& params);

  double operator()(double x, double y) const;

 private:
  enum class Op : unsigned char {
    Const, LoadX, LoadY, Neg, Add, Sub, Mul, Div, Pow, PowInt,
    Sin, Cos, Exp, Ln, Sqrt, Abs, JumpUnless, Jump
  };
  struct Instr {
    Op op;
    Cmp cmp;        // JumpUnless
    int ivalue;     // PowInt exponent or jump target
    double value;   // Const
    int source;     // index into sources_ for error messages, -1 if none
  };
  void emit(const NodePtr& n, int depth);
  void fail_domain(int source, const std::string& what) const;

  std::vector<Instr> code_;
  std::vector<NodePtr> sources_;
  int max_depth_ = 0;
};

}  // namespace pwf::expr
