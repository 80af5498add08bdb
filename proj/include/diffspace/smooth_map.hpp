#pragma once

#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace diffspace {

namespace detail {
struct Node;
using NodePtr = std::shared_ptr<const Node>;
}  // namespace detail

/// Declared nonvanishing domain for a guarded reciprocal. Evaluating the
/// reciprocal where the denominator violates the guard raises
/// guard_violation instead of returning inf/NaN silently.
enum class Guard { NonZero, Positive, Negative };

/// Introspection view of an expression tree (used by the JSON export).
struct ExprTree {
  std::string kind;
  std::string detail;
  std::vector<ExprTree> children;
};

/// An n-ary smooth function as an immutable expression tree. Leaves are
/// argument slots and constants; internal nodes are arithmetic, guarded
/// reciprocals, integer powers, exp/sin/cos, two smooth flat-splice
/// primitives (cutoff, bump kernel), composition, and segment-integral
/// quadrature nodes.
///
/// Values are plain doubles; evaluation is pure and deterministic (same map,
/// same arguments, bit-identical result) and safe to run concurrently.
/// First partial derivatives are computed by structural differentiation
/// (forward-mode duals over the tree), never by finite differences.
class SmoothMap {
 public:
  /// Projection onto argument `index` (0-based) of an `arity`-ary map.
  static SmoothMap slot(int arity, int index);
  static SmoothMap constant(int arity, double value);

  int arity() const { return arity_; }

  double eval(std::span<const double> args) const;
  double operator()(std::initializer_list<double> args) const {
    return eval(std::span<const double>(args.begin(), args.size()));
  }

  /// All first partial derivatives at `args`.
  std::vector<double> partials(std::span<const double> args) const;

  SmoothMap pow(int exponent) const;
  SmoothMap reciprocal(Guard guard = Guard::NonZero) const;

  /// outer(inner_1(x), ..., inner_n(x)); all inners must share one arity,
  /// which becomes the arity of the result.
  static SmoothMap compose(const SmoothMap& outer, std::vector<SmoothMap> inners);

  ExprTree tree() const;

  friend SmoothMap operator+(const SmoothMap& a, const SmoothMap& b);
  friend SmoothMap operator-(const SmoothMap& a, const SmoothMap& b);
  friend SmoothMap operator*(const SmoothMap& a, const SmoothMap& b);
  friend SmoothMap operator-(const SmoothMap& a);
  friend SmoothMap exp(const SmoothMap& a);
  friend SmoothMap sin(const SmoothMap& a);
  friend SmoothMap cos(const SmoothMap& a);
  friend SmoothMap cutoff(const SmoothMap& a);
  friend SmoothMap bump_kernel(const SmoothMap& a);

  const detail::NodePtr& root() const { return root_; }
  SmoothMap(int arity, detail::NodePtr root) : arity_(arity), root_(std::move(root)) {}

 private:
  int arity_;
  detail::NodePtr root_;
};

/// The 1-d smooth cutoff: values in [0,1], identically 1 on (-inf, 1/2],
/// identically 0 on [1, inf). Built from h(t) = exp(-1/t) (t > 0) as
/// h(1-t) / (h(1-t) + h(t-1/2)).
SmoothMap cutoff1d();

/// Scalar fast path for the same cutoff; bit-identical to evaluating the
/// cutoff1d() expression (both run the one shared implementation).
double cutoff_value(double t);

/// omega(x) = sum_i (x_i - p_i)^2; zero exactly at p, positive elsewhere.
SmoothMap distance_sq(std::span<const double> p);

/// Smooth bump supported on the closed ball B(p, r): equals 1 at p,
/// positive inside, identically 0 at distance >= r.
SmoothMap bump_ball(std::span<const double> p, double r);

/// First-order factorization of f at base point p:
///   f(x) = f(p) + sum_i g_i(x) (x_i - p_i),   g_i(p) = d_i f(p),
/// with g_i(x) the segment integral of d_i f over [p, x]. Polynomial bodies
/// integrate symbolically (exact); other bodies use a fixed 32-node
/// Gauss-Legendre quadrature node embedded in the returned maps.
struct HadamardFactors {
  double base_value;
  std::vector<SmoothMap> factors;
};
HadamardFactors hadamard_factors(const SmoothMap& f, std::span<const double> p);

}  // namespace diffspace
