#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diffspace/carrier.hpp"
#include "diffspace/smooth_map.hpp"

namespace diffspace {

/// A named generating function of a differential structure: a coordinate
/// projection (1-based), a smooth map applied to all coordinates of a
/// finite-dimensional carrier, or the characteristic function of a point.
struct Generator {
  enum class Kind { Projection, MapOfCoords, Theta };
  Kind kind = Kind::Projection;
  std::string name;
  int index = 0;                 // Projection
  std::optional<SmoothMap> map;  // MapOfCoords
  std::optional<Point> point;    // Theta
};

/// The generating family of a structure. Finite-dimensional spaces carry an
/// explicit list; sequence spaces carry the full projection family pi1,
/// pi2, ... resolved on demand, plus any explicitly added generators
/// (e.g. a theta).
class GeneratorSet {
 public:
  static GeneratorSet projections(int dim);  // named x1..x<dim>
  static GeneratorSet projection_family();   // pi<k> for every k >= 1
  void add(Generator g);

  bool is_family() const { return family_; }
  const std::vector<Generator>& named() const { return named_; }
  /// Resolve by name; for a projection family, names "pi<k>" synthesize the
  /// k-th projection.
  std::optional<Generator> resolve(const std::string& name) const;

 private:
  bool family_ = false;
  std::vector<Generator> named_;
};

/// One conjunct of a region: the preimage of the open interval (lo, hi)
/// under a registered element.
struct RegionTerm {
  std::string element;
  double lo;
  double hi;
};
using Region = std::vector<RegionTerm>;

class AlgebraElement;
using ElementPtr = std::shared_ptr<const AlgebraElement>;

struct AtlasPiece {
  Region region;
  ElementPtr body;
};

/// An element of the function algebra of a space. Elements are immutable
/// and evaluated against the space that owns them:
///  - GenRef: the value of a named generator.
///  - Global: outer smooth map applied to the values of the input elements.
///  - Local: an atlas of (region, body) pieces; the lowest-indexed covering
///    piece supplies the value.
///  - Pair: componentwise element of a disjoint-union structure.
///  - XiSum: the locally finite cutoff sum over a sequence carrier,
///    translated to a center point (see seqspace).
class AlgebraElement {
 public:
  enum class Kind { GenRef, Global, Local, Pair, XiSum };

  static std::shared_ptr<AlgebraElement> gen_ref(std::string gen_name);
  static std::shared_ptr<AlgebraElement> global(SmoothMap outer,
                                                std::vector<std::string> input_names,
                                                std::vector<ElementPtr> inputs);
  static std::shared_ptr<AlgebraElement> local(std::vector<AtlasPiece> pieces);
  static std::shared_ptr<AlgebraElement> pair(ElementPtr left, ElementPtr right);
  static std::shared_ptr<AlgebraElement> xi_sum(Point center);

  Kind kind = Kind::GenRef;
  std::string display;  // registration name, or a derived label

  std::string gen_name;                  // GenRef
  std::optional<SmoothMap> outer;        // Global
  std::vector<std::string> input_names;  // Global
  std::vector<ElementPtr> inputs;        // Global
  std::vector<AtlasPiece> pieces;        // Local
  ElementPtr left;                       // Pair
  ElementPtr right;                      // Pair
  std::optional<Point> center;           // XiSum
};

/// A differential space: a carrier, a generating set, and a registry of
/// named algebra elements built by superposition and localization. Spaces
/// are built single-threaded and then frozen; evaluation is const.
///
/// Every registration evaluates the new element on sampled carrier points,
/// so a space never holds an element that fails on its own carrier.
class DifferentialSpace {
 public:
  static DifferentialSpace over_finite_dim(Carrier c);
  static DifferentialSpace over_finite_dim(Carrier c, std::vector<std::string> gen_names);
  static DifferentialSpace over_seq(Carrier c);
  /// A finite-dimensional structure generated by named smooth maps of the
  /// coordinates instead of the projections (the generators need not
  /// separate points).
  static DifferentialSpace with_map_generators(
      Carrier c, const std::vector<std::pair<std::string, SmoothMap>>& gens);
  /// Disjoint union: carrier Union(A,B), elements are componentwise pairs,
  /// with the idempotent constants "(1,0)" and "(0,1)" pre-registered.
  static DifferentialSpace union_space(DifferentialSpace a, DifferentialSpace b);

  const Carrier& carrier() const { return carrier_; }
  const GeneratorSet& generators() const { return gens_; }
  bool is_union() const { return static_cast<bool>(left_); }
  const DifferentialSpace& left_space() const;
  const DifferentialSpace& right_space() const;
  bool is_restricted() const { return restricted_; }
  /// Display name of a generator ("x1|M" on restricted spaces).
  std::string generator_display(const std::string& name) const;

  /// Adds the characteristic-function generator of p under `name`.
  void add_theta(const std::string& name, Point p);
  /// Adds a smooth map of all coordinates as a generator under `name`.
  void add_map_generator(const std::string& name, SmoothMap map);

  /// Registers outer(inputs...) under `name`. Inputs are names of
  /// registered elements or generators. On a union space all inputs must be
  /// pairs and the operation acts componentwise.
  const ElementPtr& superpose(const std::string& name, const SmoothMap& outer,
                              const std::vector<std::string>& inputs);

  struct PieceSpec {
    Region region;
    SmoothMap outer;
    std::vector<std::string> inputs;
  };
  /// Registers a localized element from atlas pieces. Sampled carrier
  /// points must all be covered, and covering pieces must agree within
  /// 1e-9 at sampled points.
  const ElementPtr& from_atlas(const std::string& name, const std::vector<PieceSpec>& pieces);

  /// Union spaces only: registers the pair (left_name from A, right_name
  /// from B) under `name`.
  const ElementPtr& register_pair(const std::string& name, const std::string& left_name,
                                  const std::string& right_name);

  /// Sequence spaces only: registers the translated cutoff sum.
  const ElementPtr& register_xi(const std::string& name, Point center);

  bool has_element(const std::string& name) const;
  /// Resolves an element or generator name. Generator hits synthesize a
  /// GenRef without registering it.
  ElementPtr element(const std::string& name) const;
  const std::vector<std::pair<std::string, ElementPtr>>& registry() const { return registry_; }

  double eval_element(const std::string& name, const Point& p) const;
  double eval(const AlgebraElement& e, const Point& p) const;

  /// Subspace structure: same generators (displayed with a |M suffix) and
  /// registry over the sub-carrier. Samples of `sub` must be members of the
  /// parent carrier.
  DifferentialSpace restrict(Carrier sub) const;

  std::uint64_t sampler_seed() const { return seed_; }
  void set_sampler_seed(std::uint64_t s) { seed_ = s; }

  std::string describe() const;

 private:
  DifferentialSpace() = default;
  const ElementPtr& register_element(const std::string& name,
                                     std::shared_ptr<AlgebraElement> e);
  void validate_on_samples(const AlgebraElement& e) const;
  bool region_contains(const Region& r, const Point& p) const;
  double eval_generator(const Generator& g, const Point& p) const;
  double eval_raw(const AlgebraElement& e, const Point& p) const;

  Carrier carrier_ = Carrier::finite_dim(1);
  GeneratorSet gens_;
  std::vector<std::pair<std::string, ElementPtr>> registry_;
  std::unordered_map<std::string, std::size_t> index_;
  std::shared_ptr<const DifferentialSpace> left_;
  std::shared_ptr<const DifferentialSpace> right_;
  std::uint64_t seed_ = 0;
  bool restricted_ = false;
  int validation_samples_ = 32;
};

namespace detail {

/// Shared core of the cutoff sum: k0, term count, value, and optionally a
/// trace of the non-unit terms. Throws domain_error when p equals center
/// (there the mathematical sum diverges).
struct XiTerm {
  int k;
  double scaled_rho;  // k^2 rho_k
  double phi;
};
struct XiResult {
  int k0 = 0;
  long long terms_evaluated = 0;
  double value = 0.0;
};
XiResult xi_sum(const Point& p, const Point& center, std::vector<XiTerm>* trace = nullptr,
                std::size_t trace_cap = 64);

}  // namespace detail

}  // namespace diffspace
