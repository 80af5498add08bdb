#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffspace/carrier.hpp"
#include "diffspace/structure.hpp"

namespace diffspace::spectrum {

/// A candidate homomorphism presented by its values on generators. For
/// sequence spaces, projections that are not named explicitly take the
/// default tail value (a nonzero tail is not finitely supported and is
/// rejected during classification).
struct GeneratorAssignment {
  std::map<std::string, double> values;
  double default_tail = 0.0;
};

/// An algebra homomorphism into the reals: either evaluation at a carrier
/// point, or a generator assignment extended by the composition law.
class Homomorphism {
 public:
  enum class Kind { Evaluation, FromAssignment };

  static Homomorphism evaluation(Point p);
  static Homomorphism from_assignment(GeneratorAssignment a);

  Kind kind() const { return kind_; }
  const Point& point() const;
  const GeneratorAssignment& assignment() const;

 private:
  Homomorphism() = default;
  Kind kind_ = Kind::Evaluation;
  std::optional<Point> point_;
  GeneratorAssignment assignment_;
};

enum class Diagnosis { NotInCarrier, DivergentAlongProbe, AlgebraicContradiction };

/// The verdict on a candidate homomorphism: it is evaluation at one or
/// more carrier points (several when the generators do not separate
/// points), or it is obstructed by a witness element.
struct HomOutcome {
  enum class Kind { Evaluation, Obstructed };
  Kind kind = Kind::Evaluation;

  std::vector<Point> points;    // Evaluation: candidate first, then fiber mates
  std::string witness;          // Obstructed: name of the witness element
  ElementPtr witness_element;   // Obstructed: the element itself
  std::vector<Point> probe;     // Obstructed: divergence path, when one is used
  Diagnosis diagnosis = Diagnosis::NotInCarrier;
  std::string detail;           // human-readable account of the outcome
};

/// Evaluation at p. Errors when p is not a carrier member.
Homomorphism ev(const DifferentialSpace& space, const Point& p);

/// The value of a homomorphism on a registered element or generator.
/// Evaluations delegate to element evaluation; assignments extend through
/// superpositions by the composition law. Localized and pairwise elements
/// need a candidate point, so assignments reject them here and direct the
/// caller to classify.
double apply_hom(const DifferentialSpace& space, const Homomorphism& h,
                 const std::string& element);

/// The carrier point whose coordinates are h's values on the projection
/// generators. Requires a projection for every coordinate (finite
/// dimensions) or a zero default tail (sequences).
Point recover_point(const DifferentialSpace& space, const Homomorphism& h);

/// Decides whether the assignment is an evaluation: recovers the candidate
/// point from projection values, checks generators with forced values
/// (characteristic generators, smooth-map generators), and either returns
/// the carrier points realizing the assignment or constructs an
/// obstruction witness. Finite-dimensional outside candidates are refuted
/// by the reciprocal of the squared distance; sequence-space excluded
/// points by the cutoff sum along a translated probe path.
HomOutcome classify(const DifferentialSpace& space, const GeneratorAssignment& a);

/// A function on homomorphisms: hat(f)(h) = apply_hom(h, f).
struct SpecFunction {
  const DifferentialSpace* space = nullptr;
  std::string name;
  double operator()(const Homomorphism& h) const;
};
SpecFunction hat(const DifferentialSpace& space, const std::string& element);

/// The spectrum realized at desk scale: classify the evaluation images of
/// carrier samples (all members, for finite carriers) plus any extra
/// assignments, and rebuild the structure over the accepted points with
/// "hat."-prefixed generators. The accepted points are the carrier members
/// of the result.
DifferentialSpace spec_space(const DifferentialSpace& space,
                             const std::vector<GeneratorAssignment>& extra = {},
                             int sample_budget = 24);

/// A carrier point approximating an accepted assignment: every element of
/// `family` differs from the assignment's value by at most tol there. The
/// recovered candidate is tried first, then sampled points; a failed
/// search reports its budget instead of looping.
Point density_witness(const DifferentialSpace& space, const GeneratorAssignment& a,
                      double tol, const std::vector<std::string>& family);

/// Classification on a disjoint union: the idempotent values select a
/// side, the assignment is projected to that side's generators
/// ("left."/"right." prefixes), and the side's own classification runs.
/// Idempotent values outside {0,1} or not summing to 1 are an algebraic
/// contradiction, with no side selected.
struct UnionOutcome {
  std::optional<Side> side;
  HomOutcome outcome;
};
UnionOutcome union_classify(const DifferentialSpace& space, const GeneratorAssignment& a);
UnionOutcome union_classify(const DifferentialSpace& space, const Homomorphism& h);

}  // namespace diffspace::spectrum
