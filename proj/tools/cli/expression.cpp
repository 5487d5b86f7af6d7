#include "expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <utility>

namespace chaplygin::cli {

namespace {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { kConst, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall } kind;
  double value = 0.0;
  Index var = 0;
  double (*fn)(double) = nullptr;
  NodePtr a;
  NodePtr b;

  double eval(const Vec& v) const {
    switch (kind) {
      case Kind::kConst: return value;
      case Kind::kVar: return v(var);
      case Kind::kNeg: return -a->eval(v);
      case Kind::kAdd: return a->eval(v) + b->eval(v);
      case Kind::kSub: return a->eval(v) - b->eval(v);
      case Kind::kMul: return a->eval(v) * b->eval(v);
      case Kind::kDiv: return a->eval(v) / b->eval(v);
      case Kind::kPow: return std::pow(a->eval(v), b->eval(v));
      case Kind::kCall: return fn(a->eval(v));
    }
    return 0.0;
  }
};

std::shared_ptr<Node> make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double fn_ln(double x) { return std::log(x); }
double fn_exp(double x) { return std::exp(x); }
double fn_sqrt(double x) { return std::sqrt(x); }
double fn_sin(double x) { return std::sin(x); }
double fn_cos(double x) { return std::cos(x); }
double fn_tan(double x) { return std::tan(x); }
double fn_abs(double x) { return std::abs(x); }

class Parser {
 public:
  Parser(const std::string& src, const VariableTable& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(msg, pos_); }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) {
        n = make(Node::Kind::kAdd, n, term());
      } else if (accept('-')) {
        n = make(Node::Kind::kSub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) {
        n = make(Node::Kind::kMul, n, unary());
      } else if (accept('/')) {
        n = make(Node::Kind::kDiv, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Kind::kPow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = make(Node::Kind::kConst);
    n->value = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id = src_.substr(start, pos_ - start);
    if (accept('(')) {
      static const std::map<std::string, double (*)(double)> kFns = {
          {"ln", fn_ln},   {"log", fn_ln}, {"exp", fn_exp}, {"sqrt", fn_sqrt},
          {"sin", fn_sin}, {"cos", fn_cos}, {"tan", fn_tan}, {"abs", fn_abs}};
      auto it = kFns.find(id);
      if (it == kFns.end()) {
        pos_ = start;
        fail("unknown function '" + id + "'");
      }
      auto n = make(Node::Kind::kCall, expr());
      n->fn = it->second;
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (auto it = vars_.find(id); it != vars_.end()) {
      auto n = make(Node::Kind::kVar);
      n->var = it->second;
      return n;
    }
    if (id == "pi" || id == "e") {
      auto n = make(Node::Kind::kConst);
      n->value = id == "pi" ? std::numbers::pi : std::numbers::e;
      return n;
    }
    pos_ = start;
    fail("unknown variable '" + id + "'");
  }

  const std::string& src_;
  const VariableTable& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarMap compile_expression(const std::string& source, const VariableTable& variables) {
  NodePtr root = Parser(source, variables).parse();
  Index needed = 0;
  for (const auto& [name, idx] : variables) needed = std::max(needed, idx + 1);
  return [root, needed](const Vec& v) {
    if (v.size() < needed) throw DimensionMismatch("expression: argument vector too short");
    return root->eval(v);
  };
}

VariableTable shape_variables(Index r) {
  VariableTable t;
  for (Index i = 0; i < r; ++i) t["s" + std::to_string(i + 1)] = i;
  return t;
}

}  // namespace chaplygin::cli
