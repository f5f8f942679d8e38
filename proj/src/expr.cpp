#include "tumorpf/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "tumorpf/error.hpp"

namespace tpf {

struct Expression::Node {
  enum Op { Num, X, Y, T, Neg, Add, Sub, Mul, Div, Pow, Call } op = Num;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(double x, double y, double t) const {
    switch (op) {
      case Num: return value;
      case X: return x;
      case Y: return y;
      case T: return t;
      case Neg: return -a->eval(x, y, t);
      case Add: return a->eval(x, y, t) + b->eval(x, y, t);
      case Sub: return a->eval(x, y, t) - b->eval(x, y, t);
      case Mul: return a->eval(x, y, t) * b->eval(x, y, t);
      case Div: return a->eval(x, y, t) / b->eval(x, y, t);
      case Pow: return std::pow(a->eval(x, y, t), b->eval(x, y, t));
      case Call: return fn(a->eval(x, y, t));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

struct Function {
  const char* name;
  double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
    {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
    {"tanh", [](double v) { return std::tanh(v); }}, {"abs", [](double v) { return std::abs(v); }},
};

NodePtr leaf(Node::Op op, double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  return n;
}

NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

  bool uses_t = false;

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::Config,
         "expression \"" + s_ + "\": " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(Node::Add, lhs, term());
      else if (accept('-')) lhs = binary(Node::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(Node::Mul, lhs, unary());
      else if (accept('/')) lhs = binary(Node::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return binary(Node::Neg, unary(), nullptr);
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return binary(Node::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) error("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) error("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return leaf(Node::Num, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return leaf(Node::X);
      if (name == "y") return leaf(Node::Y);
      if (name == "t") {
        uses_t = true;
        return leaf(Node::T);
      }
      if (name == "pi") return leaf(Node::Num, std::numbers::pi);
      for (const Function& f : kFunctions) {
        if (name != f.name) continue;
        if (!accept('(')) error("expected '(' after " + name);
        auto n = std::make_shared<Node>();
        n->op = Node::Call;
        n->fn = f.fn;
        n->a = expr();
        if (!accept(')')) error("expected ')'");
        return n;
      }
      pos_ = start;
      error("unknown identifier '" + name + "'");
    }
    error("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& source) {
  Parser p(source);
  Expression e;
  e.root_ = p.parse();
  e.source_ = source;
  e.uses_t_ = p.uses_t;
  return e;
}

double Expression::operator()(double x, double y, double t) const {
  return root_->eval(x, y, t);
}

}  // namespace tpf
