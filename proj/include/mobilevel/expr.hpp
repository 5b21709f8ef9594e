#pragma once

// Small arithmetic expression language for inline problem specs.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//   var    := x1..xn | y1..ym   (plain x / y when that block has dimension 1)
//   func   := sin | cos | exp | sqrt | abs

#include "mobilevel/rational.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace mobilevel {

class Expression {
 public:
  Expression() = default;

  /// `first` and `second` name the two variable blocks (x and y by default).
  static Expression parse(const std::string& text, std::size_t n, std::size_t m, char first = 'x', char second = 'y') {
    Expression e;
    e.text_ = text;
    Parser p{text, 0, n, m, first, second, e.nodes_};
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return e;
  }

  double eval(const std::vector<double>& x, const std::vector<double>& y) const { return eval(root_, x, y); }

  const std::string& text() const { return text_; }

 private:
  enum class Op { num, var_x, var_y, add, sub, mul, div, pow, neg, sin, cos, exp, sqrt, abs };

  struct Node {
    Op op;
    double value = 0;
    std::size_t index = 0;
    int a = -1;
    int b = -1;
  };

  struct Parser {
    const std::string& s;
    std::size_t pos;
    std::size_t n, m;
    char first, second;
    std::vector<Node>& nodes;

    [[noreturn]] void fail(const std::string& msg) const {
      throw InvalidInput("expression '" + s + "' at column " + std::to_string(pos + 1) + ": " + msg);
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    int add(Node node) {
      nodes.push_back(node);
      return static_cast<int>(nodes.size() - 1);
    }
    int expr() {
      int lhs = term();
      for (;;) {
        if (eat('+')) lhs = add({Op::add, 0, 0, lhs, term()});
        else if (eat('-')) lhs = add({Op::sub, 0, 0, lhs, term()});
        else return lhs;
      }
    }
    int term() {
      int lhs = unary();
      for (;;) {
        if (eat('*')) lhs = add({Op::mul, 0, 0, lhs, unary()});
        else if (eat('/')) lhs = add({Op::div, 0, 0, lhs, unary()});
        else return lhs;
      }
    }
    int unary() {
      if (eat('-')) return add({Op::neg, 0, 0, unary()});
      if (eat('+')) return unary();
      return power();
    }
    int power() {
      int base = atom();
      if (eat('^')) return add({Op::pow, 0, 0, base, unary()});
      return base;
    }
    int atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      if (eat('(')) {
        int inner = expr();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v = std::stod(s.substr(pos), &used);
        pos += used;
        return add({Op::num, v});
      }
      if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
      std::size_t start = pos;
      while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
      std::string word = s.substr(start, pos - start);
      if (word == "pi") return add({Op::num, std::numbers::pi});
      static const std::pair<const char*, Op> funcs[] = {
          {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
      for (const auto& [name, op] : funcs) {
        if (word != name) continue;
        if (!eat('(')) fail("expected '(' after " + word);
        int arg = expr();
        if (!eat(')')) fail("expected ')'");
        return add({op, 0, 0, arg});
      }
      if (word[0] == first || word[0] == second) {
        const bool is_x = word[0] == first;
        const std::size_t dim = is_x ? n : m;
        std::size_t idx = 0;
        if (word.size() == 1) {
          if (dim != 1) fail("bare '" + word + "' needs dimension 1; use " + word + "1.." + word + std::to_string(dim));
          idx = 0;
        } else {
          std::string digits = word.substr(1);
          if (!std::all_of(digits.begin(), digits.end(), [](unsigned char d) { return std::isdigit(d); }))
            fail("unknown name '" + word + "'");
          idx = std::stoul(digits);
          if (idx < 1 || idx > dim) fail("variable '" + word + "' out of range");
          --idx;
        }
        return add({is_x ? Op::var_x : Op::var_y, 0, idx});
      }
      fail("unknown name '" + word + "'");
    }
  };

  double eval(int k, const std::vector<double>& x, const std::vector<double>& y) const {
    const Node& nd = nodes_[static_cast<std::size_t>(k)];
    switch (nd.op) {
      case Op::num: return nd.value;
      case Op::var_x: return x.at(nd.index);
      case Op::var_y: return y.at(nd.index);
      case Op::add: return eval(nd.a, x, y) + eval(nd.b, x, y);
      case Op::sub: return eval(nd.a, x, y) - eval(nd.b, x, y);
      case Op::mul: return eval(nd.a, x, y) * eval(nd.b, x, y);
      case Op::div: return eval(nd.a, x, y) / eval(nd.b, x, y);
      case Op::pow: {
        double b = eval(nd.a, x, y), e = eval(nd.b, x, y);
        if (e == 2.0) return b * b;
        return std::pow(b, e);
      }
      case Op::neg: return -eval(nd.a, x, y);
      case Op::sin: return std::sin(eval(nd.a, x, y));
      case Op::cos: return std::cos(eval(nd.a, x, y));
      case Op::exp: return std::exp(eval(nd.a, x, y));
      case Op::sqrt: return std::sqrt(eval(nd.a, x, y));
      case Op::abs: return std::abs(eval(nd.a, x, y));
    }
    return 0;
  }

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace mobilevel
