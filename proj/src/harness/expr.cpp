#include "drsim/harness/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace drsim::harness {

struct Expr::Node {
  enum class Kind { kNumber, kVar, kUnary, kBinary, kCall } kind;
  long double value = 0;
  std::string name;  // variable, function or operator
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node::Kind kind, std::string name, std::vector<NodePtr> args = {}, long double v = 0) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->name = std::move(name);
  n->args = std::move(args);
  n->value = v;
  return n;
}

// Replaces the accepted non-ASCII operator symbols with ASCII spellings.
std::string normalize(const std::string& in) {
  static const std::pair<const char*, const char*> table[] = {
      {"−", "-"}, {"×", "*"}, {"·", "*"}, {"÷", "/"}, {"≤", "<="}, {"≥", ">="},
  };
  std::string out;
  for (std::size_t i = 0; i < in.size();) {
    bool hit = false;
    for (const auto& [from, to] : table) {
      const std::string f(from);
      if (in.compare(i, f.size(), f) == 0) {
        out += to;
        i += f.size();
        hit = true;
        break;
      }
    }
    if (!hit) out += in[i++];
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string s) : s_(std::move(s)) {}

  NodePtr parse() {
    NodePtr n = comparison();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_, 1) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExprError(what + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  NodePtr comparison() {
    NodePtr lhs = sum();
    for (const char* op : {"<=", ">=", "==", "<", ">"}) {
      if (eat(op)) return make(Expr::Node::Kind::kBinary, op, {lhs, sum()});
    }
    return lhs;
  }
  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat("+")) {
        n = make(Expr::Node::Kind::kBinary, "+", {n, product()});
      } else if (eat("-")) {
        n = make(Expr::Node::Kind::kBinary, "-", {n, product()});
      } else {
        return n;
      }
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat("*")) {
        n = make(Expr::Node::Kind::kBinary, "*", {n, unary()});
      } else if (eat("/")) {
        n = make(Expr::Node::Kind::kBinary, "/", {n, unary()});
      } else {
        return n;
      }
    }
  }
  NodePtr unary() {
    if (eat("-")) return make(Expr::Node::Kind::kUnary, "-", {unary()});
    return primary();
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = comparison();
      if (!eat(")")) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const long double v = std::strtold(begin, &end);
      pos_ += static_cast<std::size_t>(end - begin);
      return make(Expr::Node::Kind::kNumber, "", {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      if (!eat("(")) return make(Expr::Node::Kind::kVar, name);
      std::vector<NodePtr> args;
      if (!eat(")")) {
        do {
          args.push_back(comparison());
        } while (eat(","));
        if (!eat(")")) fail("missing ')' after arguments of " + name);
      }
      const bool one = name == "lg" || name == "ln" || name == "sqrt" || name == "ceil" || name == "floor";
      const bool two = name == "min" || name == "max";
      if (!one && !two) fail("unknown function " + name);
      if ((one && args.size() != 1) || (two && args.size() < 2)) fail("wrong argument count for " + name);
      return make(Expr::Node::Kind::kCall, name, std::move(args));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
};

long double eval_node(const Expr::Node& n, const Bindings& vars) {
  using K = Expr::Node::Kind;
  switch (n.kind) {
    case K::kNumber:
      return n.value;
    case K::kVar: {
      const auto it = vars.find(n.name);
      if (it == vars.end()) throw ExprError("unbound name " + n.name);
      return it->second;
    }
    case K::kUnary:
      return -eval_node(*n.args[0], vars);
    case K::kBinary: {
      const long double a = eval_node(*n.args[0], vars);
      const long double b = eval_node(*n.args[1], vars);
      if (n.name == "+") return a + b;
      if (n.name == "-") return a - b;
      if (n.name == "*") return a * b;
      if (n.name == "/") {
        if (b == 0) throw ExprError("division by zero");
        return a / b;
      }
      if (n.name == "<") return a < b;
      if (n.name == "<=") return a <= b;
      if (n.name == ">") return a > b;
      if (n.name == ">=") return a >= b;
      return a == b;
    }
    case K::kCall: {
      const long double a = eval_node(*n.args[0], vars);
      if (n.name == "lg") return std::log2(a);
      if (n.name == "ln") return std::log(a);
      if (n.name == "sqrt") return std::sqrt(a);
      if (n.name == "ceil") return std::ceil(a);
      if (n.name == "floor") return std::floor(a);
      long double acc = a;
      for (std::size_t i = 1; i < n.args.size(); ++i) {
        const long double v = eval_node(*n.args[i], vars);
        acc = n.name == "min" ? std::min(acc, v) : std::max(acc, v);
      }
      return acc;
    }
  }
  return 0;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
  Expr e;
  e.text_ = text;
  e.root_ = Parser(normalize(text)).parse();
  return e;
}

long double Expr::eval(const Bindings& vars) const { return eval_node(*root_, vars); }

}  // namespace drsim::harness
