#include <cctype>
#include <charconv>
#include <numbers>

#include "expr_detail.hpp"
#include "pwfield/expr.hpp"

namespace pwf::expr {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression run() {
    skip_space();
    if (pos_ >= text_.size()) fail("empty expression");
    Expression e = expression();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_ + 1); }
  [[noreturn]] void fail_at(const std::string& message, std::size_t at) const {
    throw ParseError(message, at + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expression expression() {
    Expression lhs = term();
    for (;;) {
      if (accept('+')) lhs = detail::raw_binary(BinaryOp::Add, lhs, term());
      else if (accept('-')) lhs = detail::raw_binary(BinaryOp::Sub, lhs, term());
      else return lhs;
    }
  }

  Expression term() {
    Expression lhs = unary();
    for (;;) {
      if (accept('*')) lhs = detail::raw_binary(BinaryOp::Mul, lhs, unary());
      else if (accept('/')) lhs = detail::raw_binary(BinaryOp::Div, lhs, unary());
      else return lhs;
    }
  }

  Expression unary() {
    if (accept('-')) return detail::raw_negate(unary());
    if (accept('+')) return unary();
    return power();
  }

  Expression power() {
    Expression base = primary();
    if (accept('^')) return detail::raw_binary(BinaryOp::Pow, base, unary());
    return base;
  }

  Expression number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) fail_at("malformed number", start);
    return Expression::constant(value);
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Cmp comparison() {
    skip_space();
    std::size_t at = pos_;
    auto next = [&](char c) { return pos_ < text_.size() && text_[pos_] == c; };
    if (next('<')) {
      ++pos_;
      if (next('=')) return ++pos_, Cmp::Le;
      return Cmp::Lt;
    }
    if (next('>')) {
      ++pos_;
      if (next('=')) return ++pos_, Cmp::Ge;
      return Cmp::Gt;
    }
    if (next('=')) {
      ++pos_;
      if (next('=')) ++pos_;
      return Cmp::Eq;
    }
    fail_at("expected comparison operator", at);
  }

  Expression conditional() {
    expect('(');
    Expression lhs = expression();
    Cmp cmp = comparison();
    Expression rhs = expression();
    expect(',');
    Expression then_branch = expression();
    expect(',');
    Expression else_branch = expression();
    expect(')');
    return Expression(std::make_shared<const Node>(
        Node{Conditional{cmp, lhs.ptr(), rhs.ptr(), then_branch.ptr(), else_branch.ptr()}}));
  }

  Expression primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expression inner = expression();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      std::string name = identifier();
      skip_space();
      bool call = pos_ < text_.size() && text_[pos_] == '(';
      if (name == "if") {
        if (!call) fail_at("'if' requires arguments", start);
        return conditional();
      }
      if (call) {
        static const std::pair<const char*, Func> funcs[] = {{"sin", Func::Sin},   {"cos", Func::Cos},
                                                             {"exp", Func::Exp},   {"ln", Func::Ln},
                                                             {"sqrt", Func::Sqrt}, {"abs", Func::Abs}};
        for (const auto& [fname, fn] : funcs) {
          if (name == fname) {
            ++pos_;
            Expression arg = expression();
            expect(')');
            return Expression(std::make_shared<const Node>(Node{Call{fn, arg.ptr()}}));
          }
        }
        fail_at("unknown function '" + name + "'", start);
      }
      if (name == "x") return Expression::x();
      if (name == "y") return Expression::y();
      if (name == "pi") return Expression::constant(std::numbers::pi);
      for (const char* reserved : {"sin", "cos", "exp", "ln", "sqrt", "abs"}) {
        if (name == reserved) fail_at("function '" + name + "' used without arguments", start);
      }
      return Expression::parameter(name);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse(std::string_view text) { return Parser(text).run(); }

}  // namespace pwf::expr
