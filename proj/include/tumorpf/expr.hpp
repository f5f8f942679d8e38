#pragma once

#include <memory>
#include <string>

namespace tpf {

/// Scalar expression in the coordinates x, y and the time t.
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := ('+' | '-') unary | power
///   power  := atom ('^' unary)?            right-associative
///   atom   := number | x | y | t | pi | fn '(' expr ')' | '(' expr ')'
///   fn     := sin cos tan exp log sqrt tanh abs
///
/// Parse errors throw Config with the column of the offending token.
class Expression {
 public:
  static Expression parse(const std::string& source);

  double operator()(double x, double y, double t) const;

  const std::string& source() const noexcept { return source_; }
  bool depends_on_time() const noexcept { return uses_t_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
  bool uses_t_ = false;
};

}  // namespace tpf
