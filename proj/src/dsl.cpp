#include "diffspace/dsl.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "diffspace/format.hpp"

namespace diffspace::dsl {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

struct Token {
  enum class Kind { End, Ident, Number, String, Punct };
  Kind kind = Kind::End;
  std::string text;   // Ident/String content, Punct spelling ("!=" or one char)
  double number = 0;  // Number
  int line = 1;
  int col = 1;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '.'; }

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
      if (text[i + j] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    unsigned char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.kind = Token::Kind::Ident;
      t.text = text.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      t.kind = Token::Kind::Number;
      t.text = text.substr(i, j - i);
      t.number = std::strtod(t.text.c_str(), nullptr);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') {
        if (text[j] == '\\' && j + 1 < text.size() &&
            (text[j + 1] == '"' || text[j + 1] == '\\')) {
          value += text[j + 1];
          j += 2;
        } else {
          value += text[j];
          ++j;
        }
      }
      if (j >= text.size() || text[j] != '"') {
        throw parse_error(line, col, "unterminated string literal");
      }
      t.kind = Token::Kind::String;
      t.text = std::move(value);
      advance(j + 1 - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '!') {
      if (i + 1 < text.size() && text[i + 1] == '=') {
        t.kind = Token::Kind::Punct;
        t.text = "!=";
        advance(2);
        out.push_back(std::move(t));
        continue;
      }
      throw parse_error(line, col, "expected '!=' after '!'");
    }
    static const std::string singles = ";,:=(){}^+-*/<>[]";
    if (singles.find(static_cast<char>(c)) != std::string::npos) {
      t.kind = Token::Kind::Punct;
      t.text = std::string(1, static_cast<char>(c));
      advance(1);
      out.push_back(std::move(t));
      continue;
    }
    throw parse_error(line, col, "unexpected character '" + std::string(1, static_cast<char>(c)) +
                                     "' (code " + std::to_string(int(c)) + ")");
  }
  Token end;
  end.kind = Token::Kind::End;
  end.line = line;
  end.col = col;
  out.push_back(std::move(end));
  return out;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program parse() {
    Program p;
    while (!at_end()) {
      p.statements.push_back(statement());
    }
    return p;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string got;
    switch (t.kind) {
      case Token::Kind::End: got = "end of input"; break;
      case Token::Kind::Ident: got = "'" + t.text + "'"; break;
      case Token::Kind::Number: got = "number '" + t.text + "'"; break;
      case Token::Kind::String: got = "string \"" + t.text + "\""; break;
      case Token::Kind::Punct: got = "'" + t.text + "'"; break;
    }
    throw parse_error(t.line, t.col, "expected " + expected + ", got " + got);
  }

  bool is_punct(const char* s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Punct && t.text == s;
  }
  bool is_word(const char* s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Ident && t.text == s;
  }
  void expect_punct(const char* s, const std::string& context) {
    if (!is_punct(s)) fail("'" + std::string(s) + "' " + context);
    take();
  }
  void expect_word(const char* s, const std::string& context) {
    if (!is_word(s)) fail("'" + std::string(s) + "' " + context);
    take();
  }

  std::string ident(const std::string& what) {
    if (peek().kind != Token::Kind::Ident) fail(what);
    return take().text;
  }

  double signed_number(const std::string& what) {
    bool neg = false;
    if (is_punct("-")) {
      take();
      neg = true;
    }
    if (peek().kind != Token::Kind::Number) fail(what);
    double v = take().number;
    return neg ? -v : v;
  }

  int integer(const std::string& what) {
    if (peek().kind != Token::Kind::Number) fail(what);
    const Token& t = peek();
    double v = t.number;
    if (v != std::floor(v) || v < 0 || v > 2147483647.0 || t.text.find('.') != std::string::npos ||
        t.text.find('e') != std::string::npos || t.text.find('E') != std::string::npos) {
      fail(what);
    }
    take();
    return static_cast<int>(v);
  }

  // point := "(" signed {"," signed} ")" | "{" [INT ":" signed {...}] "}"
  //        | "z" "(" INT ")" | "zero" | ("left"|"right") point
  PointLit point() {
    PointLit p;
    if (is_word("zero")) {
      take();
      p.kind = PointLit::Kind::Zero;
      return p;
    }
    if (is_word("z") && is_punct("(", 1)) {
      take();
      take();
      p.kind = PointLit::Kind::Z;
      p.z_index = integer("a positive probe index in z(...)");
      if (p.z_index < 1) fail("a positive probe index in z(...)");
      expect_punct(")", "to close z(...)");
      return p;
    }
    if (is_word("left") || is_word("right")) {
      p.side = is_word("left") ? Side::Left : Side::Right;
      take();
      p.kind = PointLit::Kind::Tagged;
      p.inner = std::make_shared<PointLit>(point());
      return p;
    }
    if (is_punct("(")) {
      take();
      p.kind = PointLit::Kind::Tuple;
      p.tuple.push_back(signed_number("a coordinate value"));
      while (is_punct(",")) {
        take();
        p.tuple.push_back(signed_number("a coordinate value"));
      }
      expect_punct(")", "to close the tuple");
      return p;
    }
    if (is_punct("{")) {
      take();
      if (is_punct("}")) {
        take();
        p.kind = PointLit::Kind::Zero;
        return p;
      }
      p.kind = PointLit::Kind::Support;
      do {
        int k = integer("a support index");
        expect_punct(":", "after the support index");
        double v = signed_number("a support value");
        p.support.emplace_back(k, v);
      } while (is_punct(",") && (take(), true));
      expect_punct("}", "to close the sequence point");
      return p;
    }
    fail("a point: (..), {index: value, ..}, z(k), zero, or left/right <point>");
  }

  // assignment := "{" [key ":" signed {"," key ":" signed}] "}"
  // key := IDENT | STRING; the bare word `tail` sets the default tail.
  AssignLit assignment() {
    AssignLit a;
    expect_punct("{", "to open the assignment");
    if (is_punct("}")) {
      take();
      return a;
    }
    do {
      bool tail_key = false;
      std::string key;
      if (peek().kind == Token::Kind::String) {
        key = take().text;
      } else if (peek().kind == Token::Kind::Ident) {
        key = take().text;
        if (key == "tail") tail_key = true;
      } else {
        fail("a generator name or \"quoted\" key");
      }
      expect_punct(":", "after the assignment key");
      double v = signed_number("an assigned value");
      if (tail_key) {
        a.tail = v;
      } else {
        a.values.emplace_back(std::move(key), v);
      }
    } while (is_punct(",") && (take(), true));
    expect_punct("}", "to close the assignment");
    return a;
  }

  // Points start with (, {INT:, z(, zero, left, right. Everything else in a
  // point-or-assignment position is an assignment literal or a named one.
  bool looks_like_point() const {
    if (is_punct("(")) return true;
    if (is_word("zero") || is_word("left") || is_word("right")) return true;
    if (is_word("z") && is_punct("(", 1)) return true;
    if (is_punct("{")) return peek(1).kind == Token::Kind::Number;
    return false;
  }

  // expr := term {("+"|"-") term}
  ExprPtr expr() {
    ExprPtr e = term();
    while (is_punct("+") || is_punct("-")) {
      char op = take().text[0];
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Binary;
      node->op = op;
      node->a = e;
      node->b = term();
      e = node;
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (is_punct("*") || is_punct("/")) {
      char op = take().text[0];
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Binary;
      node->op = op;
      node->a = e;
      node->b = factor();
      e = node;
    }
    return e;
  }

  ExprPtr factor() {
    if (is_punct("-")) {
      take();
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Unary;
      node->a = factor();
      return node;
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (is_punct("^")) {
      take();
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Pow;
      node->index = integer("a nonnegative integer exponent");
      node->a = base;
      return node;
    }
    return base;
  }

  ExprPtr atom() {
    if (peek().kind == Token::Kind::Number) {
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Number;
      node->number = take().number;
      return node;
    }
    if (is_punct("(")) {
      take();
      ExprPtr inner = expr();
      expect_punct(")", "to close the parenthesized expression");
      return inner;
    }
    if (peek().kind != Token::Kind::Ident) {
      fail("a number, a name, or '('");
    }
    std::string word = peek().text;
    if (is_punct("(", 1)) {
      if (word == "exp" || word == "sin" || word == "cos" || word == "cutoff" ||
          word == "bump") {
        take();
        take();
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Call;
        node->name = word;
        node->a = expr();
        expect_punct(")", "to close " + word + "(...)");
        return node;
      }
      if (word == "pi" || word == "rho") {
        take();
        take();
        auto node = std::make_shared<Expr>();
        node->kind = word == "pi" ? Expr::Kind::Pi : Expr::Kind::Rho;
        node->index = integer("a positive index in " + word + "(...)");
        if (node->index < 1) fail("a positive index in " + word + "(...)");
        expect_punct(")", "to close " + word + "(...)");
        return node;
      }
      if (word == "dist2") {
        take();
        take();
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Dist2;
        node->point = point();
        expect_punct(")", "to close dist2(...)");
        return node;
      }
      if (word == "xi" || word == "xi_atlas") {
        fail("an expression (" + word + "(...) defines a whole element: fn name = " + word +
             "(...))");
      }
    }
    auto node = std::make_shared<Expr>();
    node->kind = Expr::Kind::Name;
    node->name = take().text;
    return node;
  }

  // probe_spec := "approach" "(" point "," INT ")" | "zgeom" "(" INT "," INT ")"
  //             | "[" point {"," point} "]"
  ProbeSpec probe_spec() {
    ProbeSpec s;
    if (is_word("approach")) {
      take();
      expect_punct("(", "after approach");
      s.kind = ProbeSpec::Kind::Approach;
      s.start = point();
      expect_punct(",", "between the start point and the step count");
      s.count = integer("a step count");
      expect_punct(")", "to close approach(...)");
      return s;
    }
    if (is_word("zgeom")) {
      take();
      expect_punct("(", "after zgeom");
      s.kind = ProbeSpec::Kind::ZGeom;
      s.count = integer("a step count");
      expect_punct(",", "between the step count and the top index");
      s.top = integer("a top probe index");
      expect_punct(")", "to close zgeom(...)");
      return s;
    }
    if (is_punct("[")) {
      take();
      s.kind = ProbeSpec::Kind::List;
      s.points.push_back(point());
      while (is_punct(",")) {
        take();
        s.points.push_back(point());
      }
      expect_punct("]", "to close the point list");
      return s;
    }
    fail("a probe path: approach(point, n), zgeom(n, kmax), or [p1, p2, ...]");
  }

  SpaceStmt space_stmt() {
    SpaceStmt s;
    s.name = ident("a space name after 'space'");
    expect_punct("=", "after the space name");
    if (is_word("R")) {
      take();
      expect_punct("^", "after R");
      if (is_word("N")) {
        take();
        s.domain = SpaceStmt::Domain::SeqSpace;
      } else {
        s.domain = SpaceStmt::Domain::FiniteDim;
        s.dim = integer("a dimension after R^");
        if (s.dim < 1) fail("a positive dimension after R^");
      }
    } else if (is_word("points")) {
      take();
      s.domain = SpaceStmt::Domain::Points;
      expect_punct("{", "to open the point list");
      s.members.push_back(point());
      while (is_punct(",")) {
        take();
        s.members.push_back(point());
      }
      expect_punct("}", "to close the point list");
    } else if (is_word("union")) {
      take();
      s.domain = SpaceStmt::Domain::Union;
      expect_punct("(", "after union");
      s.left = ident("the left space name");
      expect_punct(",", "between the union sides");
      s.right = ident("the right space name");
      expect_punct(")", "to close union(...)");
    } else if (is_word("tilde")) {
      take();
      s.domain = SpaceStmt::Domain::Tilde;
      expect_punct("(", "after tilde");
      s.center = point();
      expect_punct(")", "to close tilde(...)");
    } else {
      fail("a domain: R^n, R^N, points {...}, union(A, B), or tilde(p)");
    }
    while (is_word("where") || is_word("minus")) {
      if (is_word("where")) {
        take();
        SpaceStmt::Where w;
        w.expr = expr();
        if (is_punct("=")) {
          w.rel = Relation::EqZero;
        } else if (is_punct(">")) {
          w.rel = Relation::Positive;
        } else if (is_punct("!=")) {
          w.rel = Relation::NonZero;
        } else {
          fail("'=', '>', or '!=' in the where clause");
        }
        take();
        if (peek().kind != Token::Kind::Number || peek().number != 0.0) {
          fail("'0' on the right of the where relation");
        }
        take();
        s.wheres.push_back(std::move(w));
      } else {
        take();
        expect_punct("{", "after minus");
        s.removed.push_back(point());
        while (is_punct(",")) {
          take();
          s.removed.push_back(point());
        }
        expect_punct("}", "to close the removed-point list");
      }
    }
    return s;
  }

  GenStmt gen_stmt() {
    GenStmt g;
    do {
      GenStmt::Item item;
      item.name = ident("a generator name");
      expect_punct("=", "after the generator name");
      if (is_word("pi") && is_punct("(", 1)) {
        take();
        take();
        item.kind = GenStmt::Item::Kind::Pi;
        item.pi_index = integer("a positive projection index");
        if (item.pi_index < 1) fail("a positive projection index");
        expect_punct(")", "to close pi(...)");
      } else if (is_word("theta") && is_punct("(", 1)) {
        take();
        take();
        item.kind = GenStmt::Item::Kind::Theta;
        item.theta = point();
        expect_punct(")", "to close theta(...)");
      } else {
        item.kind = GenStmt::Item::Kind::Map;
        item.map = expr();
      }
      g.items.push_back(std::move(item));
    } while (is_punct(",") && (take(), true));
    return g;
  }

  FnStmt fn_stmt() {
    FnStmt f;
    f.name = ident("an element name after 'fn'");
    expect_punct("=", "after the element name");
    if (is_word("xi") && is_punct("(", 1)) {
      take();
      take();
      f.kind = FnStmt::Kind::Xi;
      f.center = point();
      expect_punct(")", "to close xi(...)");
      return f;
    }
    if (is_word("xi_atlas") && is_punct("(", 1)) {
      take();
      take();
      f.kind = FnStmt::Kind::XiAtlas;
      f.atlas_depth = integer("an atlas depth");
      expect_punct(")", "to close xi_atlas(...)");
      return f;
    }
    f.kind = FnStmt::Kind::Expr;
    f.expr = expr();
    return f;
  }

  void command_target(CommandStmt& c, const std::string& what) {
    if (looks_like_point()) {
      fail(what + " (a point is not accepted here)");
    }
    if (is_punct("{")) {
      c.value = assignment();
    } else if (peek().kind == Token::Kind::Ident) {
      c.value_ref = take().text;
    } else {
      fail(what);
    }
  }

  std::vector<std::string> name_list(const std::string& what) {
    std::vector<std::string> names;
    names.push_back(ident(what));
    while (is_punct(",")) {
      take();
      names.push_back(ident(what));
    }
    return names;
  }

  CommandStmt command(CommandStmt::Verb verb) {
    CommandStmt c;
    c.verb = verb;
    switch (verb) {
      case CommandStmt::Verb::Eval:
        c.element = ident("an element name after 'eval'");
        expect_word("at", "after the element name");
        if (looks_like_point()) {
          c.point = point();
        } else if (is_punct("{")) {
          c.value = assignment();
        } else if (peek().kind == Token::Kind::Ident && !is_word("in")) {
          c.value_ref = take().text;
        } else {
          fail("a point or an assignment after 'at'");
        }
        break;
      case CommandStmt::Verb::Classify:
      case CommandStmt::Verb::Union:
        command_target(c, "an assignment literal or a named assignment");
        break;
      case CommandStmt::Verb::Xi:
        expect_word("at", "after 'xi'");
        c.point = point();
        break;
      case CommandStmt::Verb::Probe:
        c.point = point();
        expect_word("with", "after the candidate point");
        c.names = name_list("a witness element name");
        expect_word("along", "after the witness list");
        c.probes.push_back(probe_spec());
        while (is_punct(",")) {
          take();
          c.probes.push_back(probe_spec());
        }
        break;
      case CommandStmt::Verb::Tilde:
        c.point = point();
        if (is_word("as")) {
          take();
          c.as_name = ident("a space name after 'as'");
        }
        break;
      case CommandStmt::Verb::Spec:
        if (is_word("with")) {
          take();
          c.names = name_list("a named assignment");
        }
        if (is_word("as")) {
          take();
          c.as_name = ident("a space name after 'as'");
        }
        break;
      case CommandStmt::Verb::Density:
        command_target(c, "an assignment literal or a named assignment");
        expect_word("within", "after the assignment");
        c.tol = signed_number("a tolerance");
        expect_word("by", "after the tolerance");
        c.names = name_list("a test-family element name");
        break;
    }
    if (is_word("in")) {
      take();
      c.in_space = ident("a space name after 'in'");
    }
    return c;
  }

  Statement statement() {
    Statement st;
    st.line = peek().line;
    st.col = peek().col;
    if (peek().kind != Token::Kind::Ident) {
      fail(
          "a statement keyword (space, gen, fn, assign, use, eval, classify, xi, probe, "
          "tilde, spec, density, union)");
    }
    std::string head = peek().text;
    if (head == "space") {
      take();
      st.node = space_stmt();
    } else if (head == "gen") {
      take();
      st.node = gen_stmt();
    } else if (head == "fn") {
      take();
      st.node = fn_stmt();
    } else if (head == "assign") {
      take();
      AssignStmt a;
      a.name = ident("an assignment name after 'assign'");
      expect_punct("=", "after the assignment name");
      a.value = assignment();
      st.node = a;
    } else if (head == "use") {
      take();
      UseStmt u;
      u.name = ident("a space name after 'use'");
      st.node = u;
    } else if (head == "eval") {
      take();
      st.node = command(CommandStmt::Verb::Eval);
    } else if (head == "classify") {
      take();
      st.node = command(CommandStmt::Verb::Classify);
    } else if (head == "xi") {
      take();
      st.node = command(CommandStmt::Verb::Xi);
    } else if (head == "probe") {
      take();
      st.node = command(CommandStmt::Verb::Probe);
    } else if (head == "tilde") {
      take();
      st.node = command(CommandStmt::Verb::Tilde);
    } else if (head == "spec") {
      take();
      st.node = command(CommandStmt::Verb::Spec);
    } else if (head == "density") {
      take();
      st.node = command(CommandStmt::Verb::Density);
    } else if (head == "union") {
      take();
      st.node = command(CommandStmt::Verb::Union);
    } else {
      fail(
          "a statement keyword (space, gen, fn, assign, use, eval, classify, xi, probe, "
          "tilde, spec, density, union)");
    }
    expect_punct(";", "to end the statement");
    return st;
  }
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

std::string print_number(double v) { return fmt_g(v, 17); }

std::string print_point(const PointLit& p) {
  switch (p.kind) {
    case PointLit::Kind::Zero:
      return "zero";
    case PointLit::Kind::Z:
      return "z(" + std::to_string(p.z_index) + ")";
    case PointLit::Kind::Tuple: {
      std::string out = "(";
      for (std::size_t i = 0; i < p.tuple.size(); ++i) {
        if (i) out += ", ";
        out += print_number(p.tuple[i]);
      }
      return out + ")";
    }
    case PointLit::Kind::Support: {
      std::string out = "{";
      for (std::size_t i = 0; i < p.support.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(p.support[i].first) + ": " + print_number(p.support[i].second);
      }
      return out + "}";
    }
    case PointLit::Kind::Tagged:
      return std::string(p.side == Side::Left ? "left " : "right ") + print_point(*p.inner);
  }
  return "zero";
}

bool plain_ident(const std::string& s) {
  if (s.empty() || !ident_start(static_cast<unsigned char>(s[0]))) return false;
  for (unsigned char c : s) {
    if (!ident_char(c)) return false;
  }
  return true;
}

std::string print_key(const std::string& key) {
  if (plain_ident(key) && key != "tail") return key;
  std::string out = "\"";
  for (char c : key) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string print_assignment(const AssignLit& a) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : a.values) {
    if (!first) out += ", ";
    first = false;
    out += print_key(key) + ": " + print_number(value);
  }
  if (a.tail) {
    if (!first) out += ", ";
    out += "tail: " + print_number(*a.tail);
  }
  return out + "}";
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      return (e.op == '+' || e.op == '-') ? 1 : 2;
    case Expr::Kind::Unary:
      return 3;
    case Expr::Kind::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return e.number < 0 ? "-" + print_number(-e.number) : print_number(e.number);
    case Expr::Kind::Name:
      return e.name;
    case Expr::Kind::Pi:
      return "pi(" + std::to_string(e.index) + ")";
    case Expr::Kind::Rho:
      return "rho(" + std::to_string(e.index) + ")";
    case Expr::Kind::Dist2:
      return "dist2(" + print_point(e.point) + ")";
    case Expr::Kind::Call:
      return e.name + "(" + print_expr(*e.a) + ")";
    case Expr::Kind::Unary: {
      std::string inner = print_expr(*e.a);
      if (precedence(*e.a) < 3) inner = "(" + inner + ")";
      return "-" + inner;
    }
    case Expr::Kind::Pow: {
      std::string base = print_expr(*e.a);
      if (precedence(*e.a) < 5) base = "(" + base + ")";
      return base + "^" + std::to_string(e.index);
    }
    case Expr::Kind::Binary: {
      int prec = precedence(e);
      std::string lhs = print_expr(*e.a);
      if (precedence(*e.a) < prec) lhs = "(" + lhs + ")";
      std::string rhs = print_expr(*e.b);
      if (precedence(*e.b) <= prec) rhs = "(" + rhs + ")";
      return lhs + " " + std::string(1, e.op) + " " + rhs;
    }
  }
  return "0";
}

std::string print_probe_spec(const ProbeSpec& s) {
  switch (s.kind) {
    case ProbeSpec::Kind::Approach:
      return "approach(" + print_point(s.start) + ", " + std::to_string(s.count) + ")";
    case ProbeSpec::Kind::ZGeom:
      return "zgeom(" + std::to_string(s.count) + ", " + std::to_string(s.top) + ")";
    case ProbeSpec::Kind::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (i) out += ", ";
        out += print_point(s.points[i]);
      }
      return out + "]";
    }
  }
  return "[]";
}

std::string print_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

struct StatementPrinter {
  std::string operator()(const SpaceStmt& s) const {
    std::string out = "space " + s.name + " = ";
    switch (s.domain) {
      case SpaceStmt::Domain::FiniteDim:
        out += "R^" + std::to_string(s.dim);
        break;
      case SpaceStmt::Domain::SeqSpace:
        out += "R^N";
        break;
      case SpaceStmt::Domain::Points: {
        out += "points {";
        for (std::size_t i = 0; i < s.members.size(); ++i) {
          if (i) out += ", ";
          out += print_point(s.members[i]);
        }
        out += "}";
        break;
      }
      case SpaceStmt::Domain::Union:
        out += "union(" + s.left + ", " + s.right + ")";
        break;
      case SpaceStmt::Domain::Tilde:
        out += "tilde(" + print_point(s.center) + ")";
        break;
    }
    for (const auto& w : s.wheres) {
      out += " where " + print_expr(*w.expr);
      out += w.rel == Relation::EqZero ? " = 0" : w.rel == Relation::Positive ? " > 0" : " != 0";
    }
    if (!s.removed.empty()) {
      out += " minus {";
      for (std::size_t i = 0; i < s.removed.size(); ++i) {
        if (i) out += ", ";
        out += print_point(s.removed[i]);
      }
      out += "}";
    }
    return out;
  }
  std::string operator()(const GenStmt& g) const {
    std::string out = "gen ";
    for (std::size_t i = 0; i < g.items.size(); ++i) {
      if (i) out += ", ";
      const auto& item = g.items[i];
      out += item.name + " = ";
      switch (item.kind) {
        case GenStmt::Item::Kind::Pi:
          out += "pi(" + std::to_string(item.pi_index) + ")";
          break;
        case GenStmt::Item::Kind::Theta:
          out += "theta(" + print_point(item.theta) + ")";
          break;
        case GenStmt::Item::Kind::Map:
          out += print_expr(*item.map);
          break;
      }
    }
    return out;
  }
  std::string operator()(const FnStmt& f) const {
    std::string out = "fn " + f.name + " = ";
    switch (f.kind) {
      case FnStmt::Kind::Expr:
        out += print_expr(*f.expr);
        break;
      case FnStmt::Kind::Xi:
        out += "xi(" + print_point(f.center) + ")";
        break;
      case FnStmt::Kind::XiAtlas:
        out += "xi_atlas(" + std::to_string(f.atlas_depth) + ")";
        break;
    }
    return out;
  }
  std::string operator()(const AssignStmt& a) const {
    return "assign " + a.name + " = " + print_assignment(a.value);
  }
  std::string operator()(const UseStmt& u) const { return "use " + u.name; }
  std::string operator()(const CommandStmt& c) const {
    std::string out;
    auto target = [&]() {
      return c.value ? print_assignment(*c.value) : c.value_ref;
    };
    switch (c.verb) {
      case CommandStmt::Verb::Eval:
        out = "eval " + c.element + " at ";
        out += c.point ? print_point(*c.point) : target();
        break;
      case CommandStmt::Verb::Classify:
        out = "classify " + target();
        break;
      case CommandStmt::Verb::Xi:
        out = "xi at " + print_point(*c.point);
        break;
      case CommandStmt::Verb::Probe: {
        out = "probe " + print_point(*c.point) + " with " + print_names(c.names) + " along ";
        for (std::size_t i = 0; i < c.probes.size(); ++i) {
          if (i) out += ", ";
          out += print_probe_spec(c.probes[i]);
        }
        break;
      }
      case CommandStmt::Verb::Tilde:
        out = "tilde " + print_point(*c.point);
        if (!c.as_name.empty()) out += " as " + c.as_name;
        break;
      case CommandStmt::Verb::Spec:
        out = "spec";
        if (!c.names.empty()) out += " with " + print_names(c.names);
        if (!c.as_name.empty()) out += " as " + c.as_name;
        break;
      case CommandStmt::Verb::Density:
        out = "density " + target() + " within " + print_number(c.tol) + " by " +
              print_names(c.names);
        break;
      case CommandStmt::Verb::Union:
        out = "union " + target();
        break;
    }
    if (!c.in_space.empty()) out += " in " + c.in_space;
    return out;
  }
};

}  // namespace

Program parse_program(const std::string& text) {
  return Parser(lex(text)).parse();
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& st : p.statements) {
    out += std::visit(StatementPrinter{}, st.node);
    out += ";\n";
  }
  return out;
}

bool Program::operator==(const Program& other) const {
  return print_program(*this) == print_program(other);
}

}  // namespace diffspace::dsl
