#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtt {

// Minimal interpreted language so desk-scale benchmarks need no external
// toolchain: 64-bit integer arithmetic (/ and % truncate toward zero),
// comparisons, short-circuit booleans, variables, if/else, while, fn
// definitions with call-by-value, read()/print() as the test channel.

enum class MinilangStatus { ok, parse_error, runtime_error, timeout };

struct MinilangLimits {
  long long max_steps = 50'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct MinilangResult {
  MinilangStatus status = MinilangStatus::ok;
  std::string output;
  std::string message;
};

namespace minilang {

struct Token {
  enum Kind { number, ident, symbol, eof } kind;
  std::string text;
  std::int64_t value = 0;
  std::size_t pos = 0;
};

struct LexFail {
  std::string message;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    unsigned char c = src[i];
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '#') {  // line comment
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t start = i;
      std::int64_t v = 0;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
        v = v * 10 + (src[i] - '0');
        ++i;
      }
      out.push_back({Token::number, std::string(src.substr(start, i - start)), v, start});
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t start = i;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        ++i;
      }
      out.push_back({Token::ident, std::string(src.substr(start, i - start)), 0, start});
      continue;
    }
    static constexpr std::string_view two_char[] = {"<=", ">=", "==", "!=", "&&", "||"};
    bool matched = false;
    for (auto op : two_char) {
      if (src.substr(i, 2) == op) {
        out.push_back({Token::symbol, std::string(op), 0, i});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("+-*/%<>!=(){},;").find(c) != std::string_view::npos) {
      out.push_back({Token::symbol, std::string(1, static_cast<char>(c)), 0, i});
      ++i;
      continue;
    }
    throw LexFail{"unexpected character '" + std::string(1, static_cast<char>(c)) +
                  "' at offset " + std::to_string(i)};
  }
  out.push_back({Token::eof, "", 0, src.size()});
  return out;
}

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;

struct Expr {
  enum Kind { literal, variable, binary, unary, call, read_input } kind;
  std::int64_t value = 0;       // literal
  std::string name;             // variable, call
  std::string op;               // binary, unary
  ExprPtr lhs, rhs;             // binary; unary uses lhs
  std::vector<ExprPtr> args;    // call
};

struct Stmt {
  enum Kind { assign, expression, if_else, while_loop, ret, print_out } kind;
  std::string target;             // assign
  ExprPtr expr;                   // assign value / condition / return / print
  std::vector<StmtPtr> body;      // if true-branch, while body
  std::vector<StmtPtr> else_body; // if false-branch
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  std::vector<StmtPtr> body;
};

struct Program {
  std::map<std::string, Function> functions;
};

struct ParseFail {
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  // main() is a run-time requirement, not a parse-time one: a candidate is
  // compilable as long as it parses.
  Program parse_program() {
    Program prog;
    while (!at_end()) {
      Function fn = parse_function();
      if (prog.functions.count(fn.name)) {
        throw ParseFail{"function '" + fn.name + "' defined twice"};
      }
      prog.functions.emplace(fn.name, std::move(fn));
    }
    return prog;
  }

 private:
  const Token& peek() const { return toks_[idx_]; }
  bool at_end() const { return peek().kind == Token::eof; }

  const Token& advance() { return toks_[idx_++]; }

  bool match_symbol(std::string_view s) {
    if (peek().kind == Token::symbol && peek().text == s) {
      ++idx_;
      return true;
    }
    return false;
  }

  void expect_symbol(std::string_view s) {
    if (!match_symbol(s)) {
      throw ParseFail{"expected '" + std::string(s) + "' at offset " +
                      std::to_string(peek().pos) + ", got '" + peek().text + "'"};
    }
  }

  std::string expect_ident() {
    if (peek().kind != Token::ident) {
      throw ParseFail{"expected identifier at offset " + std::to_string(peek().pos)};
    }
    return advance().text;
  }

  Function parse_function() {
    std::string kw = expect_ident();
    if (kw != "fn") throw ParseFail{"expected 'fn', got '" + kw + "'"};
    Function fn;
    fn.name = expect_ident();
    expect_symbol("(");
    if (!match_symbol(")")) {
      fn.params.push_back(expect_ident());
      while (match_symbol(",")) fn.params.push_back(expect_ident());
      expect_symbol(")");
    }
    fn.body = parse_block();
    return fn;
  }

  std::vector<StmtPtr> parse_block() {
    expect_symbol("{");
    std::vector<StmtPtr> stmts;
    while (!match_symbol("}")) {
      if (at_end()) throw ParseFail{"unterminated block"};
      stmts.push_back(parse_statement());
    }
    return stmts;
  }

  StmtPtr parse_statement() {
    if (peek().kind == Token::ident) {
      const std::string& word = peek().text;
      if (word == "if") return parse_if();
      if (word == "while") return parse_while();
      if (word == "return") {
        advance();
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::ret;
        if (!(peek().kind == Token::symbol && peek().text == ";")) {
          stmt->expr = parse_expr();
        }
        expect_symbol(";");
        return stmt;
      }
      if (word == "print") {
        advance();
        expect_symbol("(");
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::print_out;
        stmt->expr = parse_expr();
        expect_symbol(")");
        expect_symbol(";");
        return stmt;
      }
      // assignment: IDENT '=' expr ';'
      if (toks_[idx_ + 1].kind == Token::symbol && toks_[idx_ + 1].text == "=") {
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::assign;
        stmt->target = advance().text;
        advance();  // '='
        stmt->expr = parse_expr();
        expect_symbol(";");
        return stmt;
      }
    }
    auto stmt = std::make_unique<Stmt>();
    stmt->kind = Stmt::expression;
    stmt->expr = parse_expr();
    expect_symbol(";");
    return stmt;
  }

  StmtPtr parse_if() {
    advance();  // 'if'
    expect_symbol("(");
    auto stmt = std::make_unique<Stmt>();
    stmt->kind = Stmt::if_else;
    stmt->expr = parse_expr();
    expect_symbol(")");
    stmt->body = parse_block();
    if (peek().kind == Token::ident && peek().text == "else") {
      advance();
      if (peek().kind == Token::ident && peek().text == "if") {
        stmt->else_body.push_back(parse_if());
      } else {
        stmt->else_body = parse_block();
      }
    }
    return stmt;
  }

  StmtPtr parse_while() {
    advance();  // 'while'
    expect_symbol("(");
    auto stmt = std::make_unique<Stmt>();
    stmt->kind = Stmt::while_loop;
    stmt->expr = parse_expr();
    expect_symbol(")");
    stmt->body = parse_block();
    return stmt;
  }

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (peek().kind == Token::symbol && peek().text == "||") {
      advance();
      auto node = std::make_unique<Expr>();
      node->kind = Expr::binary;
      node->op = "||";
      node->lhs = std::move(lhs);
      node->rhs = parse_and();
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_equality();
    while (peek().kind == Token::symbol && peek().text == "&&") {
      advance();
      auto node = std::make_unique<Expr>();
      node->kind = Expr::binary;
      node->op = "&&";
      node->lhs = std::move(lhs);
      node->rhs = parse_equality();
      lhs = std::move(node);
    }
    return lhs;
  }

  ExprPtr parse_binary_level(ExprPtr (Parser::*next)(),
                             std::initializer_list<std::string_view> ops) {
    ExprPtr lhs = (this->*next)();
    while (peek().kind == Token::symbol) {
      bool hit = false;
      for (auto op : ops) {
        if (peek().text == op) {
          advance();
          auto node = std::make_unique<Expr>();
          node->kind = Expr::binary;
          node->op = std::string(op);
          node->lhs = std::move(lhs);
          node->rhs = (this->*next)();
          lhs = std::move(node);
          hit = true;
          break;
        }
      }
      if (!hit) break;
    }
    return lhs;
  }

  ExprPtr parse_equality() {
    return parse_binary_level(&Parser::parse_relational, {"==", "!="});
  }
  ExprPtr parse_relational() {
    return parse_binary_level(&Parser::parse_additive, {"<", "<=", ">", ">="});
  }
  ExprPtr parse_additive() {
    return parse_binary_level(&Parser::parse_multiplicative, {"+", "-"});
  }
  ExprPtr parse_multiplicative() {
    return parse_binary_level(&Parser::parse_unary, {"*", "/", "%"});
  }

  ExprPtr parse_unary() {
    if (peek().kind == Token::symbol && (peek().text == "-" || peek().text == "!")) {
      auto node = std::make_unique<Expr>();
      node->kind = Expr::unary;
      node->op = advance().text;
      node->lhs = parse_unary();
      return node;
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    if (peek().kind == Token::number) {
      auto node = std::make_unique<Expr>();
      node->kind = Expr::literal;
      node->value = advance().value;
      return node;
    }
    if (match_symbol("(")) {
      ExprPtr inner = parse_expr();
      expect_symbol(")");
      return inner;
    }
    if (peek().kind == Token::ident) {
      std::string name = advance().text;
      if (name == "read") {
        expect_symbol("(");
        expect_symbol(")");
        auto node = std::make_unique<Expr>();
        node->kind = Expr::read_input;
        return node;
      }
      if (match_symbol("(")) {
        auto node = std::make_unique<Expr>();
        node->kind = Expr::call;
        node->name = std::move(name);
        if (!match_symbol(")")) {
          node->args.push_back(parse_expr());
          while (match_symbol(",")) node->args.push_back(parse_expr());
          expect_symbol(")");
        }
        return node;
      }
      auto node = std::make_unique<Expr>();
      node->kind = Expr::variable;
      node->name = std::move(name);
      return node;
    }
    throw ParseFail{"unexpected token '" + peek().text + "' at offset " +
                    std::to_string(peek().pos)};
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

struct RuntimeFail {
  std::string message;
  bool timed_out = false;
};

class Interpreter {
 public:
  Interpreter(const Program& program, std::string_view input, MinilangLimits limits)
      : program_(program), input_(input), limits_(limits) {}

  std::string run() {
    const Function& main_fn = find_function("main");
    if (!main_fn.params.empty()) {
      throw RuntimeFail{"main must take no parameters"};
    }
    call(main_fn, {});
    return std::move(output_);
  }

 private:
  struct ReturnSignal {
    std::int64_t value;
  };

  const Function& find_function(const std::string& name) const {
    auto it = program_.functions.find(name);
    if (it == program_.functions.end()) {
      throw RuntimeFail{"call to undefined function '" + name + "'"};
    }
    return it->second;
  }

  void tick() {
    if (++steps_ > limits_.max_steps) {
      throw RuntimeFail{"step ceiling exceeded", false};
    }
    if (limits_.deadline && (steps_ & 0xfff) == 0 &&
        std::chrono::steady_clock::now() >= *limits_.deadline) {
      throw RuntimeFail{"deadline exceeded", true};
    }
  }

  std::int64_t call(const Function& fn, std::vector<std::int64_t> args) {
    if (args.size() != fn.params.size()) {
      throw RuntimeFail{"function '" + fn.name + "' expects " +
                        std::to_string(fn.params.size()) + " arguments, got " +
                        std::to_string(args.size())};
    }
    if (++depth_ > 256) throw RuntimeFail{"call depth limit exceeded"};
    std::map<std::string, std::int64_t> scope;
    for (std::size_t i = 0; i < args.size(); ++i) scope[fn.params[i]] = args[i];
    std::int64_t result = 0;
    try {
      exec_block(fn.body, scope);
    } catch (const ReturnSignal& r) {
      result = r.value;
    }
    --depth_;
    return result;
  }

  void exec_block(const std::vector<StmtPtr>& stmts,
                  std::map<std::string, std::int64_t>& scope) {
    for (const auto& stmt : stmts) exec(*stmt, scope);
  }

  void exec(const Stmt& stmt, std::map<std::string, std::int64_t>& scope) {
    tick();
    switch (stmt.kind) {
      case Stmt::assign:
        scope[stmt.target] = eval(*stmt.expr, scope);
        break;
      case Stmt::expression:
        eval(*stmt.expr, scope);
        break;
      case Stmt::if_else:
        if (eval(*stmt.expr, scope) != 0) {
          exec_block(stmt.body, scope);
        } else {
          exec_block(stmt.else_body, scope);
        }
        break;
      case Stmt::while_loop:
        while (eval(*stmt.expr, scope) != 0) {
          exec_block(stmt.body, scope);
        }
        break;
      case Stmt::ret:
        throw ReturnSignal{stmt.expr ? eval(*stmt.expr, scope) : 0};
      case Stmt::print_out: {
        std::int64_t v = eval(*stmt.expr, scope);
        if (!output_.empty()) output_ += '\n';
        output_ += std::to_string(v);
        break;
      }
    }
  }

  std::int64_t eval(const Expr& expr, std::map<std::string, std::int64_t>& scope) {
    tick();
    switch (expr.kind) {
      case Expr::literal:
        return expr.value;
      case Expr::variable: {
        auto it = scope.find(expr.name);
        if (it == scope.end()) {
          throw RuntimeFail{"undefined variable '" + expr.name + "'"};
        }
        return it->second;
      }
      case Expr::read_input:
        return read_int();
      case Expr::unary: {
        std::int64_t v = eval(*expr.lhs, scope);
        return expr.op == "-" ? -v : (v == 0 ? 1 : 0);
      }
      case Expr::call: {
        const Function& fn = find_function(expr.name);
        std::vector<std::int64_t> args;
        args.reserve(expr.args.size());
        for (const auto& a : expr.args) args.push_back(eval(*a, scope));
        return call(fn, std::move(args));
      }
      case Expr::binary: {
        if (expr.op == "&&") {
          return (eval(*expr.lhs, scope) != 0 && eval(*expr.rhs, scope) != 0) ? 1 : 0;
        }
        if (expr.op == "||") {
          return (eval(*expr.lhs, scope) != 0 || eval(*expr.rhs, scope) != 0) ? 1 : 0;
        }
        std::int64_t a = eval(*expr.lhs, scope);
        std::int64_t b = eval(*expr.rhs, scope);
        if (expr.op == "+") return a + b;
        if (expr.op == "-") return a - b;
        if (expr.op == "*") return a * b;
        if (expr.op == "/") {
          if (b == 0) throw RuntimeFail{"division by zero"};
          return a / b;  // C++ division already truncates toward zero
        }
        if (expr.op == "%") {
          if (b == 0) throw RuntimeFail{"modulo by zero"};
          return a % b;
        }
        if (expr.op == "<") return a < b ? 1 : 0;
        if (expr.op == "<=") return a <= b ? 1 : 0;
        if (expr.op == ">") return a > b ? 1 : 0;
        if (expr.op == ">=") return a >= b ? 1 : 0;
        if (expr.op == "==") return a == b ? 1 : 0;
        return a != b ? 1 : 0;
      }
    }
    throw RuntimeFail{"unreachable expression kind"};
  }

  std::int64_t read_int() {
    while (input_pos_ < input_.size() &&
           std::isspace(static_cast<unsigned char>(input_[input_pos_]))) {
      ++input_pos_;
    }
    std::size_t start = input_pos_;
    if (input_pos_ < input_.size() && input_[input_pos_] == '-') ++input_pos_;
    while (input_pos_ < input_.size() &&
           std::isdigit(static_cast<unsigned char>(input_[input_pos_]))) {
      ++input_pos_;
    }
    if (input_pos_ == start || (input_[start] == '-' && input_pos_ == start + 1)) {
      throw RuntimeFail{"read() with no integer left on stdin"};
    }
    return std::stoll(std::string(input_.substr(start, input_pos_ - start)));
  }

  const Program& program_;
  std::string_view input_;
  MinilangLimits limits_;
  std::string output_;
  std::size_t input_pos_ = 0;
  long long steps_ = 0;
  int depth_ = 0;
};

}  // namespace minilang

// Parse-only entry: compilability for minilang test specs.
inline MinilangResult minilang_parse(std::string_view program) {
  try {
    minilang::Parser parser(minilang::lex(program));
    parser.parse_program();
    return {MinilangStatus::ok, "", ""};
  } catch (const minilang::LexFail& e) {
    return {MinilangStatus::parse_error, "", e.message};
  } catch (const minilang::ParseFail& e) {
    return {MinilangStatus::parse_error, "", e.message};
  }
}

// Runs a program against a stdin string. Successive print() values are
// separated by a newline; there is no trailing newline.
inline MinilangResult minilang_run(std::string_view program, std::string_view stdin_text,
                                   MinilangLimits limits = {}) {
  minilang::Program prog;
  try {
    minilang::Parser parser(minilang::lex(program));
    prog = parser.parse_program();
  } catch (const minilang::LexFail& e) {
    return {MinilangStatus::parse_error, "", e.message};
  } catch (const minilang::ParseFail& e) {
    return {MinilangStatus::parse_error, "", e.message};
  }
  minilang::Interpreter interp(prog, stdin_text, limits);
  try {
    std::string out = interp.run();
    return {MinilangStatus::ok, std::move(out), ""};
  } catch (const minilang::RuntimeFail& e) {
    return {e.timed_out ? MinilangStatus::timeout : MinilangStatus::runtime_error, "",
            e.message};
  }
}

}  // namespace rtt
