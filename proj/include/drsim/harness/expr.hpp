#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

namespace drsim::harness {

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Bindings = std::map<std::string, long double>;

// Arithmetic over named values: + - * / (also the symbols − × · ÷),
// unary minus, parentheses, lg ln sqrt ceil floor min max, and the
// comparisons < <= > >= == (also ≤ ≥), which yield 1 or 0.
class Expr {
 public:
  static Expr parse(const std::string& text);
  long double eval(const Bindings& vars) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace drsim::harness
