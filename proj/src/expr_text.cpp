// Copyright 2026 The hybridsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hybridsim/expr_text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

namespace hybridsim {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  HamiltonianExpr parse() {
    std::vector<HamiltonianTerm> terms;
    skip_space();
    if (at_end()) fail("empty expression");
    double sign = 1.0;
    if (peek() == '-') {
      sign = -1.0;
      advance();
    }
    terms.push_back(parse_term(sign));
    for (;;) {
      skip_space();
      if (at_end()) break;
      const char c = peek();
      if (c != '+' && c != '-') fail(std::string("expected '+' or '-', found '") + c + "'");
      advance();
      terms.push_back(parse_term(c == '-' ? -1.0 : 1.0));
    }
    return HamiltonianExpr(std::move(terms));
  }

 private:
  HamiltonianTerm parse_term(double sign) {
    skip_space();
    const int line = line_;
    const int col = col_;
    double coefficient = 1.0;
    std::vector<Factor> factors;
    bool need_factor = true;
    if (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
      coefficient = parse_number();
      skip_space();
      if (!at_end() && peek() == '*') {
        advance();
      } else {
        need_factor = false;
      }
    }
    if (need_factor) {
      factors.push_back(parse_factor());
      for (;;) {
        skip_space();
        if (at_end() || peek() != '*') break;
        advance();
        factors.push_back(parse_factor());
      }
    }
    for (std::size_t i = 0; i < factors.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (factors[i].subsystem == factors[j].subsystem) {
          throw ParseError("two factors on subsystem " + std::to_string(factors[i].subsystem) +
                               "; pre-multiply them",
                           line, col);
        }
      }
    }
    try {
      return HamiltonianTerm(sign * coefficient, std::move(factors));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line, col);
    }
  }

  Factor parse_factor() {
    skip_space();
    const int line = line_;
    const int col = col_;
    std::string name;
    while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) {
      name += peek();
      advance();
    }
    if (name.empty()) fail("expected an operator name");
    skip_space();
    if (at_end() || peek() != '@') fail("expected '@' after '" + name + "'");
    advance();
    const int subsystem = parse_int();
    int power = 1;
    skip_space();
    if (!at_end() && peek() == '^') {
      advance();
      const int pl = line_;
      const int pc = col_;
      power = parse_int();
      if (name != "X" && name != "P") throw ParseError("powers apply only to X and P", pl, pc);
      if (power < 1) throw ParseError("exponent must be >= 1", pl, pc);
    }
    LocalOp op = LocalOp::identity();
    if (name == "sx") {
      op = LocalOp::sx();
    } else if (name == "sy") {
      op = LocalOp::sy();
    } else if (name == "sz") {
      op = LocalOp::sz();
    } else if (name == "I") {
      op = LocalOp::identity();
    } else if (name == "X") {
      op = LocalOp::x_pow(power);
    } else if (name == "P") {
      op = LocalOp::p_pow(power);
    } else if (name == "a") {
      op = LocalOp::a();
    } else if (name == "ad") {
      op = LocalOp::ad();
    } else {
      throw ParseError("unknown operator '" + name + "'", line, col);
    }
    return Factor{subsystem, op};
  }

  int parse_int() {
    skip_space();
    const std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    if (start == pos_) fail("expected an integer");
    int v = 0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc()) fail("integer out of range");
    return v;
  }

  double parse_number() {
    const std::size_t start = pos_;
    const int line = line_;
    const int col = col_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
      advance();
    }
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      advance();
      if (!at_end() && (peek() == '+' || peek() == '-')) advance();
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_ || !std::isfinite(v)) {
      throw ParseError("malformed number '" +
                           std::string(text_.substr(start, pos_ - start)) + "'",
                       line, col);
    }
    return v;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::string factor_text(const Factor& f) {
  std::string s = f.op.name() + "@" + std::to_string(f.subsystem);
  if (f.op.power() > 1) s += "^" + std::to_string(f.op.power());
  return s;
}

std::string render(const HamiltonianExpr& expr, bool compact) {
  const std::string mul = compact ? "*" : " * ";
  std::string out;
  bool first = true;
  for (const auto& t : expr.terms()) {
    double c = t.coefficient();
    if (first) {
      if (c < 0) {
        out += "-";
        c = -c;
      }
    } else {
      out += compact ? (c < 0 ? "-" : "+") : (c < 0 ? " - " : " + ");
      c = std::abs(c);
    }
    first = false;
    const bool show_coefficient = !compact || c != 1.0 || t.factors().empty();
    bool lead = true;
    if (show_coefficient) {
      out += format_double(c);
      lead = false;
    }
    for (const auto& f : t.factors()) {
      if (!lead) out += mul;
      out += factor_text(f);
      lead = false;
    }
  }
  return out;
}

}  // namespace

HamiltonianExpr parse_hamiltonian(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const HamiltonianExpr& expr) { return render(expr, false); }

std::string to_compact(const HamiltonianExpr& expr) { return render(expr, true); }

}  // namespace hybridsim
