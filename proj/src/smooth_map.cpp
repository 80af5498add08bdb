#include "diffspace/smooth_map.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>

#include "diffspace/errors.hpp"
#include "diffspace/format.hpp"

namespace diffspace {
namespace detail {

// ---------------------------------------------------------------------------
// Forward-mode dual numbers, nested for higher derivatives.
// ---------------------------------------------------------------------------

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative slot
};

template <class T>
struct DualDepth {
  static constexpr int value = 0;
};
template <class T>
struct DualDepth<Dual<T>> {
  static constexpr int value = DualDepth<T>::value + 1;
};

// Deepest derivative nesting the evaluator will instantiate. Each quadrature
// node consumes one level (it differentiates its integrand internally), and a
// partials() call consumes one more. Beyond the cap evaluation refuses
// loudly rather than returning something subtly wrong.
constexpr int kMaxDualDepth = 3;

template <class T>
struct ScalarOps {
  static T constant(double c) { return c; }
};
template <class T>
struct ScalarOps<Dual<T>> {
  static Dual<T> constant(double c) {
    return {ScalarOps<T>::constant(c), ScalarOps<T>::constant(0.0)};
  }
};

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.v * b.d + a.d * b.v};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline double inverse(double x) { return 1.0 / x; }
template <class T>
Dual<T> inverse(const Dual<T>& a) {
  T iv = inverse(a.v);
  return {iv, -(a.d * (iv * iv))};
}

inline double exp_t(double x) { return std::exp(x); }
template <class T>
Dual<T> exp_t(const Dual<T>& a) {
  T e = exp_t(a.v);
  return {e, a.d * e};
}

inline double sin_t(double x) { return std::sin(x); }
inline double cos_t(double x) { return std::cos(x); }
template <class T>
Dual<T> sin_t(const Dual<T>& a);
template <class T>
Dual<T> cos_t(const Dual<T>& a);
template <class T>
Dual<T> sin_t(const Dual<T>& a) {
  return {sin_t(a.v), a.d * cos_t(a.v)};
}
template <class T>
Dual<T> cos_t(const Dual<T>& a) {
  return {cos_t(a.v), -(a.d * sin_t(a.v))};
}

// exp(-1/u) extended by 0 for u <= 0. The cut sits at u = 1e-3 where the
// true value exp(-1000) already underflows to exactly 0.0, so splicing there
// is value-exact and keeps derivative slots free of 0 * inf.
template <class T>
T flat_exp(const T& u) {
  if (!(value_of(u) > 1e-3)) return ScalarOps<T>::constant(0.0);
  return exp_t(-inverse(u));
}

// The 1-d cutoff h(1-t) / (h(1-t) + h(t-1/2)) with h(t) = exp(-1/t). The
// t <= 1/2 and t >= 1 branches return exact constants, matching the true
// values (one summand underflows to 0 there and x/x == 1 in IEEE).
template <class T>
T cutoff_fn(const T& t) {
  double tv = value_of(t);
  if (tv <= 0.5) return ScalarOps<T>::constant(1.0);
  if (tv >= 1.0) return ScalarOps<T>::constant(0.0);
  T a = flat_exp(ScalarOps<T>::constant(1.0) - t);
  T b = flat_exp(t - ScalarOps<T>::constant(0.5));
  return a / (a + b);
}

// Bump profile exp(-s / (1 - s)) for s < 1, 0 beyond; equals 1 exactly at
// s = 0. At s >= 0.999 the true value underflows to 0, hence the early cut.
template <class T>
T bump_fn(const T& s) {
  if (value_of(s) >= 0.999) return ScalarOps<T>::constant(0.0);
  return exp_t(-(s / (ScalarOps<T>::constant(1.0) - s)));
}

// ---------------------------------------------------------------------------
// Expression nodes.
// ---------------------------------------------------------------------------

struct Node {
  enum class Kind {
    Slot,
    Const,
    Add,
    Mul,
    Neg,
    Recip,
    PowInt,
    Exp,
    Sin,
    Cos,
    Cutoff,
    BumpKernel,
    Compose,
    Quadrature,
  };

  Kind kind;
  int slot = 0;                   // Slot
  double value = 0.0;             // Const
  int exponent = 0;               // PowInt
  Guard guard = Guard::NonZero;   // Recip
  std::vector<NodePtr> children;  // operands; for Compose, the inner maps

  // Compose: the outer body, consuming children.size() values.
  NodePtr outer;

  // Quadrature: integral over [0,1] of d_i integrand evaluated along the
  // segment base_point + t (x - base_point); represents one first-order
  // factor g_i of the integrand about base_point.
  NodePtr integrand;
  int partial_index = 0;
  std::vector<double> base_point;
};

using Kind = Node::Kind;

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature on [0,1], 32 nodes (exact through degree 63).
// Roots of the degree-32 Legendre polynomial by Newton iteration.
// ---------------------------------------------------------------------------

std::array<std::pair<double, double>, 32> compute_gl32() {
  constexpr int n = 32;
  constexpr double pi = 3.14159265358979323846;
  // Legendre P_n and P_n' at x via the three-term recurrence.
  auto legendre = [](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return std::pair<double, double>{p1, dp};
  };
  std::array<std::pair<double, double>, 32> out{};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 64; ++iter) {
      auto [p, dp] = legendre(x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double dp = legendre(x).second;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map from [-1,1] to [0,1]; store ascending in t.
    out[n - 1 - i] = {(x + 1.0) / 2.0, w / 2.0};
  }
  return out;
}

const std::array<std::pair<double, double>, 32>& gauss_legendre_01() {
  static const auto table = compute_gl32();
  return table;
}

// ---------------------------------------------------------------------------
// Generic evaluation over double or nested duals.
// ---------------------------------------------------------------------------

template <class T>
T eval_node(const Node& n, std::span<const T> args);

template <class T>
T eval_quadrature(const Node& n, std::span<const T> args) {
  if constexpr (DualDepth<T>::value >= kMaxDualDepth) {
    throw guard_violation(
        "quadrature evaluation would exceed the supported derivative depth (" +
        std::to_string(kMaxDualDepth) + ")");
  } else {
    using D = Dual<T>;
    const T zero = ScalarOps<T>::constant(0.0);
    const T one = ScalarOps<T>::constant(1.0);
    const std::size_t dim = n.base_point.size();
    std::vector<D> y(dim);
    T acc = zero;
    for (const auto& [tq, wq] : gauss_legendre_01()) {
      const T t = ScalarOps<T>::constant(tq);
      for (std::size_t k = 0; k < dim; ++k) {
        T pk = ScalarOps<T>::constant(n.base_point[k]);
        y[k].v = pk + t * (args[k] - pk);
        y[k].d = (static_cast<int>(k) == n.partial_index) ? one : zero;
      }
      D r = eval_node<D>(*n.integrand, std::span<const D>(y.data(), y.size()));
      acc = acc + ScalarOps<T>::constant(wq) * r.d;
    }
    return acc;
  }
}

template <class T>
T eval_node(const Node& n, std::span<const T> args) {
  switch (n.kind) {
    case Kind::Slot:
      return args[static_cast<std::size_t>(n.slot)];
    case Kind::Const:
      return ScalarOps<T>::constant(n.value);
    case Kind::Add:
      return eval_node<T>(*n.children[0], args) + eval_node<T>(*n.children[1], args);
    case Kind::Mul:
      return eval_node<T>(*n.children[0], args) * eval_node<T>(*n.children[1], args);
    case Kind::Neg:
      return -eval_node<T>(*n.children[0], args);
    case Kind::Recip: {
      T c = eval_node<T>(*n.children[0], args);
      double cv = value_of(c);
      bool ok = false;
      switch (n.guard) {
        case Guard::NonZero:
          ok = cv != 0.0;
          break;
        case Guard::Positive:
          ok = cv > 0.0;
          break;
        case Guard::Negative:
          ok = cv < 0.0;
          break;
      }
      if (!ok) {
        throw guard_violation("reciprocal evaluated at denominator " + fmt_g(cv) +
                              ", outside its declared guard");
      }
      return inverse(c);
    }
    case Kind::PowInt: {
      T c = eval_node<T>(*n.children[0], args);
      int e = n.exponent;
      bool invert = e < 0;
      if (invert) {
        if (value_of(c) == 0.0) {
          throw guard_violation("negative integer power evaluated at 0");
        }
        e = -e;
      }
      if (e == 0) return ScalarOps<T>::constant(1.0);
      T r = c;
      for (int k = 1; k < e; ++k) r = r * c;
      return invert ? inverse(r) : r;
    }
    case Kind::Exp:
      return exp_t(eval_node<T>(*n.children[0], args));
    case Kind::Sin:
      return sin_t(eval_node<T>(*n.children[0], args));
    case Kind::Cos:
      return cos_t(eval_node<T>(*n.children[0], args));
    case Kind::Cutoff:
      return cutoff_fn(eval_node<T>(*n.children[0], args));
    case Kind::BumpKernel:
      return bump_fn(eval_node<T>(*n.children[0], args));
    case Kind::Compose: {
      std::vector<T> inner;
      inner.reserve(n.children.size());
      for (const auto& c : n.children) inner.push_back(eval_node<T>(*c, args));
      return eval_node<T>(*n.outer, std::span<const T>(inner.data(), inner.size()));
    }
    case Kind::Quadrature:
      return eval_quadrature<T>(n, args);
  }
  throw error("corrupt expression node");
}

}  // namespace detail

using detail::Kind;
using detail::Node;
using detail::NodePtr;

// ---------------------------------------------------------------------------
// SmoothMap construction.
// ---------------------------------------------------------------------------

SmoothMap SmoothMap::slot(int arity, int index) {
  if (arity < 1) throw arity_error("slot requires arity >= 1, got " + std::to_string(arity));
  if (index < 0 || index >= arity) {
    throw arity_error("slot index " + std::to_string(index) + " out of range for arity " +
                      std::to_string(arity));
  }
  Node n;
  n.kind = Kind::Slot;
  n.slot = index;
  return SmoothMap(arity, detail::make_node(std::move(n)));
}

SmoothMap SmoothMap::constant(int arity, double value) {
  if (arity < 0) throw arity_error("constant requires arity >= 0");
  Node n;
  n.kind = Kind::Const;
  n.value = value;
  return SmoothMap(arity, detail::make_node(std::move(n)));
}

namespace {

void check_same_arity(const SmoothMap& a, const SmoothMap& b, const char* op) {
  if (a.arity() != b.arity()) {
    throw arity_error(std::string(op) + ": operand arities differ (" +
                      std::to_string(a.arity()) + " vs " + std::to_string(b.arity()) + ")");
  }
}

SmoothMap make_binary(Kind kind, const SmoothMap& a, const SmoothMap& b) {
  Node n;
  n.kind = kind;
  n.children = {a.root(), b.root()};
  return SmoothMap(a.arity(), detail::make_node(std::move(n)));
}

SmoothMap make_unary(Kind kind, const SmoothMap& a) {
  Node n;
  n.kind = kind;
  n.children = {a.root()};
  return SmoothMap(a.arity(), detail::make_node(std::move(n)));
}

}  // namespace

SmoothMap operator+(const SmoothMap& a, const SmoothMap& b) {
  check_same_arity(a, b, "add");
  return make_binary(Kind::Add, a, b);
}

SmoothMap operator-(const SmoothMap& a, const SmoothMap& b) {
  check_same_arity(a, b, "subtract");
  return make_binary(Kind::Add, a, -b);
}

SmoothMap operator*(const SmoothMap& a, const SmoothMap& b) {
  check_same_arity(a, b, "multiply");
  return make_binary(Kind::Mul, a, b);
}

SmoothMap operator-(const SmoothMap& a) { return make_unary(Kind::Neg, a); }
SmoothMap exp(const SmoothMap& a) { return make_unary(Kind::Exp, a); }
SmoothMap sin(const SmoothMap& a) { return make_unary(Kind::Sin, a); }
SmoothMap cos(const SmoothMap& a) { return make_unary(Kind::Cos, a); }
SmoothMap cutoff(const SmoothMap& a) { return make_unary(Kind::Cutoff, a); }
SmoothMap bump_kernel(const SmoothMap& a) { return make_unary(Kind::BumpKernel, a); }

SmoothMap SmoothMap::pow(int exponent) const {
  Node n;
  n.kind = Kind::PowInt;
  n.exponent = exponent;
  n.children = {root_};
  return SmoothMap(arity_, detail::make_node(std::move(n)));
}

SmoothMap SmoothMap::reciprocal(Guard guard) const {
  Node n;
  n.kind = Kind::Recip;
  n.guard = guard;
  n.children = {root_};
  return SmoothMap(arity_, detail::make_node(std::move(n)));
}

SmoothMap SmoothMap::compose(const SmoothMap& outer, std::vector<SmoothMap> inners) {
  if (inners.empty()) throw arity_error("compose requires at least one inner map");
  if (static_cast<int>(inners.size()) != outer.arity()) {
    throw arity_error("compose: outer arity " + std::to_string(outer.arity()) +
                      " does not match " + std::to_string(inners.size()) + " inner maps");
  }
  int inner_arity = inners.front().arity();
  for (const auto& m : inners) {
    if (m.arity() != inner_arity) {
      throw arity_error("compose: inner maps must share one arity");
    }
  }
  Node n;
  n.kind = Kind::Compose;
  n.outer = outer.root();
  n.children.reserve(inners.size());
  for (auto& m : inners) n.children.push_back(m.root());
  return SmoothMap(inner_arity, detail::make_node(std::move(n)));
}

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

double SmoothMap::eval(std::span<const double> args) const {
  if (static_cast<int>(args.size()) != arity_) {
    throw arity_error("eval: expected " + std::to_string(arity_) + " arguments, got " +
                      std::to_string(args.size()));
  }
  return detail::eval_node<double>(*root_, args);
}

std::vector<double> SmoothMap::partials(std::span<const double> args) const {
  if (static_cast<int>(args.size()) != arity_) {
    throw arity_error("partials: expected " + std::to_string(arity_) + " arguments, got " +
                      std::to_string(args.size()));
  }
  using D = detail::Dual<double>;
  std::vector<D> dargs(args.size());
  std::vector<double> out(args.size());
  for (std::size_t j = 0; j < args.size(); ++j) {
    for (std::size_t k = 0; k < args.size(); ++k) {
      dargs[k] = {args[k], k == j ? 1.0 : 0.0};
    }
    out[j] = detail::eval_node<D>(*root_, std::span<const D>(dargs.data(), dargs.size())).d;
  }
  return out;
}

double cutoff_value(double t) { return detail::cutoff_fn<double>(t); }

// ---------------------------------------------------------------------------
// Stock constructions.
// ---------------------------------------------------------------------------

SmoothMap cutoff1d() { return cutoff(SmoothMap::slot(1, 0)); }

SmoothMap distance_sq(std::span<const double> p) {
  if (p.empty()) throw arity_error("distance_sq requires a nonempty base point");
  int n = static_cast<int>(p.size());
  std::optional<SmoothMap> acc;
  for (int i = 0; i < n; ++i) {
    SmoothMap term = (SmoothMap::slot(n, i) - SmoothMap::constant(n, p[i])).pow(2);
    acc = acc ? *acc + term : term;
  }
  return *acc;
}

SmoothMap bump_ball(std::span<const double> p, double r) {
  if (!(r > 0.0)) throw domain_error("bump_ball radius must be positive, got " + fmt_g(r));
  int n = static_cast<int>(p.size());
  return bump_kernel(distance_sq(p) * SmoothMap::constant(n, 1.0 / (r * r)));
}

// ---------------------------------------------------------------------------
// Polynomial bodies: exact symbolic segment integration.
// ---------------------------------------------------------------------------

namespace {

// Sparse multivariate polynomial: exponent vector -> coefficient. The final
// slot of an exponent vector may serve as the segment parameter t during
// integration.
struct Poly {
  int arity = 0;
  std::map<std::vector<int>, double> terms;
};

void poly_cleanup(Poly& p) {
  for (auto it = p.terms.begin(); it != p.terms.end();) {
    if (it->second == 0.0) {
      it = p.terms.erase(it);
    } else {
      ++it;
    }
  }
}

Poly poly_const(int arity, double c) {
  Poly p{arity, {}};
  if (c != 0.0) p.terms[std::vector<int>(static_cast<std::size_t>(arity), 0)] = c;
  return p;
}

Poly poly_slot(int arity, int i) {
  Poly p{arity, {}};
  std::vector<int> e(static_cast<std::size_t>(arity), 0);
  e[static_cast<std::size_t>(i)] = 1;
  p.terms[std::move(e)] = 1.0;
  return p;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [e, c] : b.terms) out.terms[e] += c;
  poly_cleanup(out);
  return out;
}

Poly poly_neg(const Poly& a) {
  Poly out = a;
  for (auto& [e, c] : out.terms) c = -c;
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out{a.arity, {}};
  for (const auto& [ea, ca] : a.terms) {
    for (const auto& [eb, cb] : b.terms) {
      std::vector<int> e(ea.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
      out.terms[std::move(e)] += ca * cb;
    }
  }
  poly_cleanup(out);
  return out;
}

Poly poly_pow(const Poly& a, int k) {
  Poly out = poly_const(a.arity, 1.0);
  for (int i = 0; i < k; ++i) out = poly_mul(out, a);
  return out;
}

std::optional<Poly> as_polynomial(const Node& n, int arity) {
  switch (n.kind) {
    case Kind::Slot:
      return poly_slot(arity, n.slot);
    case Kind::Const:
      return poly_const(arity, n.value);
    case Kind::Add: {
      auto a = as_polynomial(*n.children[0], arity);
      if (!a) return std::nullopt;
      auto b = as_polynomial(*n.children[1], arity);
      if (!b) return std::nullopt;
      return poly_add(*a, *b);
    }
    case Kind::Mul: {
      auto a = as_polynomial(*n.children[0], arity);
      if (!a) return std::nullopt;
      auto b = as_polynomial(*n.children[1], arity);
      if (!b) return std::nullopt;
      return poly_mul(*a, *b);
    }
    case Kind::Neg: {
      auto a = as_polynomial(*n.children[0], arity);
      if (!a) return std::nullopt;
      return poly_neg(*a);
    }
    case Kind::PowInt: {
      if (n.exponent < 0) return std::nullopt;
      auto a = as_polynomial(*n.children[0], arity);
      if (!a) return std::nullopt;
      return poly_pow(*a, n.exponent);
    }
    case Kind::Compose: {
      auto outer = as_polynomial(*n.outer, static_cast<int>(n.children.size()));
      if (!outer) return std::nullopt;
      std::vector<Poly> inner;
      inner.reserve(n.children.size());
      for (const auto& c : n.children) {
        auto q = as_polynomial(*c, arity);
        if (!q) return std::nullopt;
        inner.push_back(std::move(*q));
      }
      Poly acc = poly_const(arity, 0.0);
      for (const auto& [e, coef] : outer->terms) {
        Poly term = poly_const(arity, coef);
        for (std::size_t j = 0; j < e.size(); ++j) {
          if (e[j] > 0) term = poly_mul(term, poly_pow(inner[j], e[j]));
        }
        acc = poly_add(acc, term);
      }
      return acc;
    }
    default:
      return std::nullopt;
  }
}

Poly poly_derivative(const Poly& p, int i) {
  Poly out{p.arity, {}};
  for (const auto& [e, c] : p.terms) {
    int k = e[static_cast<std::size_t>(i)];
    if (k == 0) continue;
    std::vector<int> eo = e;
    eo[static_cast<std::size_t>(i)] -= 1;
    out.terms[std::move(eo)] += c * k;
  }
  poly_cleanup(out);
  return out;
}

// integral over t in [0,1] of df(p + t (x - p)), computed symbolically:
// substitute x_j -> p_j + t x_j - t p_j (t is a fresh final variable),
// expand, then integrate termwise in t.
Poly segment_integral(const Poly& df, std::span<const double> p) {
  const int n = df.arity;
  Poly acc = poly_const(n + 1, 0.0);
  for (const auto& [e, c] : df.terms) {
    Poly term = poly_const(n + 1, c);
    for (int j = 0; j < n; ++j) {
      int k = e[static_cast<std::size_t>(j)];
      if (k == 0) continue;
      Poly lin = poly_const(n + 1, p[static_cast<std::size_t>(j)]);
      Poly xt = poly_mul(poly_slot(n + 1, j), poly_slot(n + 1, n));
      lin = poly_add(lin, xt);
      lin = poly_add(lin, poly_mul(poly_const(n + 1, -p[static_cast<std::size_t>(j)]),
                                   poly_slot(n + 1, n)));
      term = poly_mul(term, poly_pow(lin, k));
    }
    acc = poly_add(acc, term);
  }
  Poly out{n, {}};
  for (const auto& [e, c] : acc.terms) {
    int tk = e[static_cast<std::size_t>(n)];
    std::vector<int> xe(e.begin(), e.begin() + n);
    out.terms[std::move(xe)] += c / (tk + 1);
  }
  poly_cleanup(out);
  return out;
}

SmoothMap poly_to_map(const Poly& p, int arity) {
  std::optional<SmoothMap> acc;
  for (const auto& [e, c] : p.terms) {
    SmoothMap term = SmoothMap::constant(arity, c);
    for (int j = 0; j < arity; ++j) {
      int k = e[static_cast<std::size_t>(j)];
      if (k > 0) term = term * SmoothMap::slot(arity, j).pow(k);
    }
    acc = acc ? *acc + term : term;
  }
  return acc.value_or(SmoothMap::constant(arity, 0.0));
}

}  // namespace

HadamardFactors hadamard_factors(const SmoothMap& f, std::span<const double> p) {
  if (static_cast<int>(p.size()) != f.arity()) {
    throw arity_error("hadamard_factors: base point dimension " + std::to_string(p.size()) +
                      " does not match map arity " + std::to_string(f.arity()));
  }
  HadamardFactors out{f.eval(p), {}};
  out.factors.reserve(p.size());
  if (auto body = as_polynomial(*f.root(), f.arity())) {
    for (int i = 0; i < f.arity(); ++i) {
      out.factors.push_back(
          poly_to_map(segment_integral(poly_derivative(*body, i), p), f.arity()));
    }
  } else {
    for (int i = 0; i < f.arity(); ++i) {
      Node n;
      n.kind = Kind::Quadrature;
      n.integrand = f.root();
      n.partial_index = i;
      n.base_point.assign(p.begin(), p.end());
      out.factors.emplace_back(f.arity(), detail::make_node(std::move(n)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Introspection.
// ---------------------------------------------------------------------------

namespace {

ExprTree tree_of(const Node& n) {
  ExprTree t;
  auto recurse_children = [&] {
    for (const auto& c : n.children) t.children.push_back(tree_of(*c));
  };
  switch (n.kind) {
    case Kind::Slot:
      t.kind = "slot";
      t.detail = std::to_string(n.slot);
      break;
    case Kind::Const:
      t.kind = "const";
      t.detail = fmt_g(n.value);
      break;
    case Kind::Add:
      t.kind = "add";
      recurse_children();
      break;
    case Kind::Mul:
      t.kind = "mul";
      recurse_children();
      break;
    case Kind::Neg:
      t.kind = "neg";
      recurse_children();
      break;
    case Kind::Recip:
      t.kind = "recip";
      t.detail = n.guard == Guard::NonZero ? "nonzero"
                 : n.guard == Guard::Positive ? "positive"
                                              : "negative";
      recurse_children();
      break;
    case Kind::PowInt:
      t.kind = "pow";
      t.detail = std::to_string(n.exponent);
      recurse_children();
      break;
    case Kind::Exp:
      t.kind = "exp";
      recurse_children();
      break;
    case Kind::Sin:
      t.kind = "sin";
      recurse_children();
      break;
    case Kind::Cos:
      t.kind = "cos";
      recurse_children();
      break;
    case Kind::Cutoff:
      t.kind = "cutoff";
      recurse_children();
      break;
    case Kind::BumpKernel:
      t.kind = "bump";
      recurse_children();
      break;
    case Kind::Compose:
      t.kind = "compose";
      t.children.push_back(tree_of(*n.outer));
      recurse_children();
      break;
    case Kind::Quadrature: {
      t.kind = "segment_factor";
      std::string d = "i=" + std::to_string(n.partial_index) + " p=(";
      for (std::size_t k = 0; k < n.base_point.size(); ++k) {
        if (k > 0) d += ",";
        d += fmt_g(n.base_point[k]);
      }
      t.detail = d + ")";
      t.children.push_back(tree_of(*n.integrand));
      break;
    }
  }
  return t;
}

}  // namespace

ExprTree SmoothMap::tree() const { return tree_of(*root_); }

}  // namespace diffspace
