#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "diffspace/carrier.hpp"
#include "diffspace/errors.hpp"

namespace diffspace::dsl {

/// Parse failure with the 1-based source position and an expected-token
/// message ("expected ..., got ...").
class parse_error : public error {
 public:
  parse_error(int line, int col, const std::string& what)
      : error(std::to_string(line) + ":" + std::to_string(col) + ": " + what),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

/// A point literal: a real tuple, a finitely supported sequence written as
/// {index: value, ...}, the probe point z(k), the all-zero sequence, or a
/// side-tagged point of a union.
struct PointLit {
  enum class Kind { Tuple, Support, Z, Zero, Tagged };
  Kind kind = Kind::Zero;
  std::vector<double> tuple;
  std::vector<std::pair<int, double>> support;
  int z_index = 0;
  Side side = Side::Left;
  std::shared_ptr<const PointLit> inner;
};

/// Expression AST over named elements and generators. Operands are shared
/// immutable subtrees.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
struct Expr {
  enum class Kind {
    Number,  // literal constant
    Name,    // element or generator reference
    Pi,      // pi(k): the k-th projection generator
    Rho,     // rho(k): sum of the first k squared projections
    Dist2,   // dist2(p): squared distance to a fixed tuple
    Call,    // exp/sin/cos/cutoff/bump applied to one operand
    Unary,   // negation
    Binary,  // + - * /
    Pow,     // integer power of the operand
  };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;  // Name: the reference; Call: the function word
  int index = 0;     // Pi/Rho: k; Pow: the exponent
  PointLit point;    // Dist2
  char op = '+';     // Binary
  ExprPtr a;
  ExprPtr b;
};

/// An assignment literal {gen: value, ..., tail: value}. String keys allow
/// names outside the identifier grammar, e.g. the union idempotents "(1,0)".
struct AssignLit {
  std::vector<std::pair<std::string, double>> values;
  std::optional<double> tail;
};

/// A probe path for prolongation tests: a halving approach toward the
/// candidate from a start point, a geometric z(k) schedule added to the
/// candidate, or an explicit point list.
struct ProbeSpec {
  enum class Kind { Approach, ZGeom, List };
  Kind kind = Kind::List;
  PointLit start;  // Approach
  int count = 0;   // Approach / ZGeom
  int top = 0;     // ZGeom: largest k
  std::vector<PointLit> points;
};

struct SpaceStmt {
  enum class Domain { FiniteDim, SeqSpace, Points, Union, Tilde };
  std::string name;
  Domain domain = Domain::FiniteDim;
  int dim = 0;                    // FiniteDim
  std::vector<PointLit> members;  // Points
  std::string left;               // Union
  std::string right;              // Union
  PointLit center;                // Tilde
  struct Where {
    ExprPtr expr;
    Relation rel = Relation::EqZero;
  };
  std::vector<Where> wheres;
  std::vector<PointLit> removed;
};

struct GenStmt {
  struct Item {
    enum class Kind { Pi, Theta, Map };
    std::string name;
    Kind kind = Kind::Pi;
    int pi_index = 0;  // Pi
    PointLit theta;    // Theta
    ExprPtr map;       // Map: expression over the coordinates
  };
  std::vector<Item> items;
};

struct FnStmt {
  enum class Kind {
    Expr,     // superposition of named inputs
    Xi,       // the intrinsic cutoff sum, centered at a point
    XiAtlas,  // the localized atlas form of the cutoff sum
  };
  std::string name;
  Kind kind = Kind::Expr;
  ExprPtr expr;
  PointLit center;      // Xi
  int atlas_depth = 0;  // XiAtlas
};

struct AssignStmt {
  std::string name;
  AssignLit value;
};

struct UseStmt {
  std::string name;
};

struct CommandStmt {
  enum class Verb { Eval, Classify, Xi, Probe, Tilde, Spec, Density, Union };
  Verb verb = Verb::Eval;
  std::string in_space;  // optional "in <name>" qualifier

  std::string element;             // eval
  std::optional<PointLit> point;   // eval/xi target, probe/tilde candidate
  std::optional<AssignLit> value;  // inline assignment
  std::string value_ref;           // named assignment instead of inline
  std::vector<std::string> names;  // probe witnesses, spec extras, density family
  std::vector<ProbeSpec> probes;   // probe
  std::string as_name;             // tilde/spec result space name
  double tol = 0.0;                // density
};

struct Statement {
  std::variant<SpaceStmt, GenStmt, FnStmt, AssignStmt, UseStmt, CommandStmt> node;
  int line = 0;
  int col = 0;
};

/// A parsed script. Equality compares canonical forms (positions and
/// formatting do not participate), so parse(print(p)) == p.
struct Program {
  std::vector<Statement> statements;
  bool operator==(const Program& other) const;
};

/// Parses a script or throws parse_error with the source position and the
/// expected token. Accepts arbitrary bytes (bad ones fail cleanly).
Program parse_program(const std::string& text);

/// Canonical one-statement-per-line rendering; reparses to an equal Program.
std::string print_program(const Program& p);

}  // namespace diffspace::dsl
