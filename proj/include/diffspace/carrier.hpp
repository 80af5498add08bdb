#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "diffspace/smooth_map.hpp"

namespace diffspace {

enum class Side { Left, Right };

/// A point of a carrier: a finite real tuple, a finitely supported real
/// sequence (all unlisted coordinates are zero), or a tagged point of a
/// disjoint union. Immutable; Seq support is kept canonical (indices
/// strictly increasing, values nonzero).
class Point {
 public:
  enum class Kind { FiniteVec, Seq, Tagged };

  static Point finite_vec(std::vector<double> coords);
  /// Support entries are (index, value) with 1-based indices. Entries are
  /// sorted; zero values are dropped; duplicate indices are rejected.
  static Point seq(std::vector<std::pair<int, double>> support);
  /// The all-zero sequence (empty support).
  static Point zero_seq() { return seq({}); }
  static Point tagged(Side side, Point inner);

  Kind kind() const { return kind_; }

  const std::vector<double>& coords() const;                 // FiniteVec
  const std::vector<std::pair<int, double>>& support() const;  // Seq

  /// 1-based coordinate access. FiniteVec: k must lie in [1, dim].
  /// Seq: any k >= 1, zero off the support.
  double coordinate(int k) const;

  /// FiniteVec: dimension. Seq: largest support index (0 when all-zero).
  int max_index() const;

  Side side() const;          // Tagged
  const Point& inner() const;  // Tagged

  /// Exact structural equality on canonical forms.
  bool operator==(const Point& other) const;
  /// Componentwise comparison within tol (same kind and, for tuples, the
  /// same dimension; for sequences, compared over the union of supports).
  bool almost_equal(const Point& other, double tol) const;

  std::string to_string() const;

 private:
  Point() = default;
  Kind kind_ = Kind::FiniteVec;
  std::vector<double> coords_;
  std::vector<std::pair<int, double>> support_;
  Side side_ = Side::Left;
  std::shared_ptr<const Point> inner_;
};

/// Relation a constraint map is required to satisfy on carrier members.
enum class Relation { EqZero, Positive, NonZero };

struct Constraint {
  SmoothMap map;
  Relation rel;
};

/// The underlying set of a differential space: a constrained region of R^n
/// (possibly with finitely many points removed), the space of finitely
/// supported sequences, an explicit finite set, or a disjoint union.
/// Immutable and shareable; sampling is a pure function of (seed, index).
class Carrier {
 public:
  enum class Kind { FiniteDim, SeqSpace, FiniteSet, Union };

  /// R^dim cut down by constraints, minus the excluded points. Excluded
  /// points must be dim-dimensional tuples satisfying the constraints
  /// (they are removed members, not constraint violations).
  static Carrier finite_dim(int dim, std::vector<Constraint> constraints = {},
                            std::vector<Point> excluded = {});
  static Carrier seq_space(std::vector<Point> excluded = {});
  static Carrier finite_set(std::vector<Point> points);
  static Carrier disjoint_union(Carrier left, Carrier right);

  Kind kind() const { return kind_; }
  int dim() const;
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<Point>& excluded() const { return excluded_; }
  const std::vector<Point>& members() const;  // FiniteSet
  const Carrier& left() const;                // Union
  const Carrier& right() const;               // Union

  /// Membership. Equality constraints use a 1e-9 band; Positive/NonZero are
  /// strict. Excluded tuples are compared within 1e-9, excluded sequence
  /// points exactly (canonical form). Throws domain_error when the point
  /// variant does not fit the carrier variant.
  bool contains(const Point& p) const;

  /// Deterministic sample: a pure function of (seed, index). Constraint
  /// carriers draw a start in [-2,2]^dim and Newton-project onto the
  /// equality set; draws violating strict constraints or hitting excluded
  /// points are retried. A capped retry budget throws sampling_error.
  Point sample_at(std::uint64_t seed, std::uint64_t index) const;
  std::vector<Point> sample(std::uint64_t seed, int count) const;

  std::string describe() const;

 private:
  Carrier() = default;
  Kind kind_ = Kind::FiniteDim;
  int dim_ = 0;
  std::vector<Constraint> constraints_;
  std::vector<Point> excluded_;
  std::vector<Point> members_;
  std::shared_ptr<const Carrier> left_;
  std::shared_ptr<const Carrier> right_;
};

}  // namespace diffspace
