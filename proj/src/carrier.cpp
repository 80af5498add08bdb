#include "diffspace/carrier.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "diffspace/errors.hpp"
#include "diffspace/format.hpp"
#include "diffspace/rng.hpp"

namespace diffspace {

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

Point Point::finite_vec(std::vector<double> coords) {
  if (coords.empty()) throw domain_error("a tuple point needs at least one coordinate");
  Point p;
  p.kind_ = Kind::FiniteVec;
  p.coords_ = std::move(coords);
  return p;
}

Point Point::seq(std::vector<std::pair<int, double>> support) {
  std::sort(support.begin(), support.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> canon;
  canon.reserve(support.size());
  for (const auto& [k, v] : support) {
    if (k < 1) throw domain_error("sequence indices are 1-based, got " + std::to_string(k));
    if (!canon.empty() && canon.back().first == k) {
      throw domain_error("duplicate sequence index " + std::to_string(k));
    }
    if (v != 0.0) canon.emplace_back(k, v);
  }
  Point p;
  p.kind_ = Kind::Seq;
  p.support_ = std::move(canon);
  return p;
}

Point Point::tagged(Side side, Point inner) {
  if (inner.kind_ == Kind::Tagged) {
    throw domain_error("nested tagged points are not supported");
  }
  Point p;
  p.kind_ = Kind::Tagged;
  p.side_ = side;
  p.inner_ = std::make_shared<const Point>(std::move(inner));
  return p;
}

const std::vector<double>& Point::coords() const {
  if (kind_ != Kind::FiniteVec) throw domain_error("point is not a finite tuple");
  return coords_;
}

const std::vector<std::pair<int, double>>& Point::support() const {
  if (kind_ != Kind::Seq) throw domain_error("point is not a sequence");
  return support_;
}

double Point::coordinate(int k) const {
  switch (kind_) {
    case Kind::FiniteVec:
      if (k < 1 || k > static_cast<int>(coords_.size())) {
        throw domain_error("coordinate index " + std::to_string(k) + " out of range for a " +
                           std::to_string(coords_.size()) + "-dimensional point");
      }
      return coords_[static_cast<std::size_t>(k - 1)];
    case Kind::Seq: {
      if (k < 1) throw domain_error("sequence indices are 1-based");
      for (const auto& [i, v] : support_) {
        if (i == k) return v;
        if (i > k) break;
      }
      return 0.0;
    }
    case Kind::Tagged:
      throw domain_error("tagged points have no direct coordinates; use inner()");
  }
  throw error("corrupt point");
}

int Point::max_index() const {
  switch (kind_) {
    case Kind::FiniteVec:
      return static_cast<int>(coords_.size());
    case Kind::Seq:
      return support_.empty() ? 0 : support_.back().first;
    case Kind::Tagged:
      return inner_->max_index();
  }
  throw error("corrupt point");
}

Side Point::side() const {
  if (kind_ != Kind::Tagged) throw domain_error("point is not tagged");
  return side_;
}

const Point& Point::inner() const {
  if (kind_ != Kind::Tagged) throw domain_error("point is not tagged");
  return *inner_;
}

bool Point::operator==(const Point& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::FiniteVec:
      return coords_ == other.coords_;
    case Kind::Seq:
      return support_ == other.support_;
    case Kind::Tagged:
      return side_ == other.side_ && *inner_ == *other.inner_;
  }
  return false;
}

bool Point::almost_equal(const Point& other, double tol) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::FiniteVec: {
      if (coords_.size() != other.coords_.size()) return false;
      for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (std::abs(coords_[i] - other.coords_[i]) > tol) return false;
      }
      return true;
    }
    case Kind::Seq: {
      int top = std::max(max_index(), other.max_index());
      for (int k = 1; k <= top; ++k) {
        if (std::abs(coordinate(k) - other.coordinate(k)) > tol) return false;
      }
      return true;
    }
    case Kind::Tagged:
      return side_ == other.side_ && inner_->almost_equal(*other.inner_, tol);
  }
  return false;
}

std::string Point::to_string() const {
  switch (kind_) {
    case Kind::FiniteVec: {
      std::string s = "(";
      for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (i > 0) s += ", ";
        s += fmt_g(coords_[i], 10);
      }
      return s + ")";
    }
    case Kind::Seq: {
      std::string s = "{";
      for (std::size_t i = 0; i < support_.size(); ++i) {
        if (i > 0) s += ", ";
        s += std::to_string(support_[i].first) + ": " + fmt_g(support_[i].second, 10);
      }
      return s + "}";
    }
    case Kind::Tagged:
      return std::string(side_ == Side::Left ? "left:" : "right:") + inner_->to_string();
  }
  throw error("corrupt point");
}

// ---------------------------------------------------------------------------
// Carrier construction
// ---------------------------------------------------------------------------

namespace {

constexpr double kEqTol = 1e-9;

bool satisfies_constraints(const std::vector<Constraint>& cs, std::span<const double> x) {
  for (const auto& c : cs) {
    double v = c.map.eval(x);
    switch (c.rel) {
      case Relation::EqZero:
        if (std::abs(v) > kEqTol) return false;
        break;
      case Relation::Positive:
        if (!(v > 0.0)) return false;
        break;
      case Relation::NonZero:
        if (v == 0.0) return false;
        break;
    }
  }
  return true;
}

}  // namespace

Carrier Carrier::finite_dim(int dim, std::vector<Constraint> constraints,
                            std::vector<Point> excluded) {
  if (dim < 1) throw domain_error("finite_dim carrier needs dimension >= 1");
  for (const auto& c : constraints) {
    if (c.map.arity() != dim) {
      throw arity_error("constraint arity " + std::to_string(c.map.arity()) +
                        " does not match carrier dimension " + std::to_string(dim));
    }
  }
  for (const auto& p : excluded) {
    if (p.kind() != Point::Kind::FiniteVec ||
        static_cast<int>(p.coords().size()) != dim) {
      throw domain_error("excluded point " + p.to_string() + " is not a " +
                         std::to_string(dim) + "-dimensional tuple");
    }
    if (!satisfies_constraints(constraints, p.coords())) {
      throw domain_error("excluded point " + p.to_string() +
                         " violates the carrier constraints; excluded points must be "
                         "removed members");
    }
  }
  Carrier c;
  c.kind_ = Kind::FiniteDim;
  c.dim_ = dim;
  c.constraints_ = std::move(constraints);
  c.excluded_ = std::move(excluded);
  return c;
}

Carrier Carrier::seq_space(std::vector<Point> excluded) {
  for (const auto& p : excluded) {
    if (p.kind() != Point::Kind::Seq) {
      throw domain_error("seq_space excluded points must be sequence points");
    }
  }
  Carrier c;
  c.kind_ = Kind::SeqSpace;
  c.excluded_ = std::move(excluded);
  return c;
}

Carrier Carrier::finite_set(std::vector<Point> points) {
  if (points.empty()) throw domain_error("finite_set carrier needs at least one point");
  Carrier c;
  c.kind_ = Kind::FiniteSet;
  c.members_ = std::move(points);
  return c;
}

Carrier Carrier::disjoint_union(Carrier left, Carrier right) {
  Carrier c;
  c.kind_ = Kind::Union;
  c.left_ = std::make_shared<const Carrier>(std::move(left));
  c.right_ = std::make_shared<const Carrier>(std::move(right));
  return c;
}

int Carrier::dim() const {
  if (kind_ != Kind::FiniteDim) throw domain_error("carrier has no finite dimension");
  return dim_;
}

const std::vector<Point>& Carrier::members() const {
  if (kind_ != Kind::FiniteSet) throw domain_error("carrier is not a finite set");
  return members_;
}

const Carrier& Carrier::left() const {
  if (kind_ != Kind::Union) throw domain_error("carrier is not a union");
  return *left_;
}

const Carrier& Carrier::right() const {
  if (kind_ != Kind::Union) throw domain_error("carrier is not a union");
  return *right_;
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

bool Carrier::contains(const Point& p) const {
  switch (kind_) {
    case Kind::FiniteDim: {
      if (p.kind() != Point::Kind::FiniteVec) {
        throw domain_error("finite-dimensional carrier expects a tuple point, got " +
                           p.to_string());
      }
      if (static_cast<int>(p.coords().size()) != dim_) return false;
      if (!satisfies_constraints(constraints_, p.coords())) return false;
      for (const auto& ex : excluded_) {
        if (p.almost_equal(ex, kEqTol)) return false;
      }
      return true;
    }
    case Kind::SeqSpace: {
      if (p.kind() != Point::Kind::Seq) {
        throw domain_error("sequence carrier expects a sequence point, got " + p.to_string());
      }
      for (const auto& ex : excluded_) {
        if (p == ex) return false;  // removed points are matched exactly
      }
      return true;
    }
    case Kind::FiniteSet: {
      for (const auto& m : members_) {
        if (m.kind() == p.kind() && m.almost_equal(p, kEqTol)) return true;
      }
      return false;
    }
    case Kind::Union: {
      if (p.kind() != Point::Kind::Tagged) {
        throw domain_error("union carrier expects a tagged point, got " + p.to_string());
      }
      return p.side() == Side::Left ? left_->contains(p.inner()) : right_->contains(p.inner());
    }
  }
  throw error("corrupt carrier");
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

constexpr int kSampleAttempts = 64;
constexpr int kNewtonIters = 50;
constexpr double kNewtonTol = 1e-12;

// Solve the m x m system A y = b in place by Gaussian elimination with
// partial pivoting. Returns false on a (near-)singular pivot.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t m = b.size();
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < m; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < m; ++k) s -= a[i][k] * b[k];
    b[i] = s / a[i][i];
  }
  return true;
}

// Gauss-Newton projection of x onto the joint zero set of the equality
// constraints: x <- x - J^T (J J^T)^{-1} c(x). Returns true on convergence.
bool project_onto_equalities(const std::vector<const SmoothMap*>& eqs, std::vector<double>& x) {
  const std::size_t m = eqs.size();
  const std::size_t n = x.size();
  for (int iter = 0; iter < kNewtonIters; ++iter) {
    std::vector<double> c(m);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      c[i] = eqs[i]->eval(x);
      worst = std::max(worst, std::abs(c[i]));
    }
    if (worst <= kNewtonTol) return true;
    std::vector<std::vector<double>> jac(m);
    for (std::size_t i = 0; i < m; ++i) jac[i] = eqs[i]->partials(x);
    std::vector<std::vector<double>> gram(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += jac[i][k] * jac[j][k];
        gram[i][j] = s;
      }
    }
    if (!solve_dense(gram, c)) return false;
    for (std::size_t k = 0; k < n; ++k) {
      double step = 0.0;
      for (std::size_t i = 0; i < m; ++i) step += jac[i][k] * c[i];
      x[k] -= step;
    }
  }
  return false;
}

}  // namespace

Point Carrier::sample_at(std::uint64_t seed, std::uint64_t index) const {
  auto eng = stream_engine(seed, index);
  switch (kind_) {
    case Kind::FiniteDim: {
      std::vector<const SmoothMap*> eqs;
      for (const auto& c : constraints_) {
        if (c.rel == Relation::EqZero) eqs.push_back(&c.map);
      }
      for (int attempt = 0; attempt < kSampleAttempts; ++attempt) {
        std::vector<double> x(static_cast<std::size_t>(dim_));
        for (auto& v : x) v = uniform(eng, -2.0, 2.0);
        if (!eqs.empty() && !project_onto_equalities(eqs, x)) continue;
        Point p = Point::finite_vec(x);
        if (contains(p)) return p;
      }
      throw sampling_error("sampling budget exceeded after " +
                           std::to_string(kSampleAttempts) + " attempts on " + describe());
    }
    case Kind::SeqSpace: {
      for (int attempt = 0; attempt < kSampleAttempts; ++attempt) {
        int sup = 1 + static_cast<int>(uniform_int(eng, 0, 3));
        std::vector<int> idx;
        while (static_cast<int>(idx.size()) < sup) {
          int k = 1 + static_cast<int>(uniform_int(eng, 0, 11));
          if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
        }
        std::vector<std::pair<int, double>> entries;
        entries.reserve(idx.size());
        for (int k : idx) {
          double mag = uniform(eng, 0.25, 2.0);
          double sgn = uniform_int(eng, 0, 1) == 0 ? 1.0 : -1.0;
          entries.emplace_back(k, sgn * mag);
        }
        Point p = Point::seq(std::move(entries));
        if (contains(p)) return p;
      }
      throw sampling_error("sampling budget exceeded on " + describe());
    }
    case Kind::FiniteSet: {
      auto i = static_cast<std::size_t>(
          uniform_int(eng, 0, static_cast<std::int64_t>(members_.size()) - 1));
      return members_[i];
    }
    case Kind::Union: {
      Side side = uniform_int(eng, 0, 1) == 0 ? Side::Left : Side::Right;
      std::uint64_t inner_seed = eng();
      const Carrier& sub = side == Side::Left ? *left_ : *right_;
      return Point::tagged(side, sub.sample_at(inner_seed, 0));
    }
  }
  throw error("corrupt carrier");
}

std::vector<Point> Carrier::sample(std::uint64_t seed, int count) const {
  if (count < 0) throw domain_error("sample count must be >= 0");
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(sample_at(seed, static_cast<std::uint64_t>(i)));
  }
  return out;
}

std::string Carrier::describe() const {
  switch (kind_) {
    case Kind::FiniteDim: {
      std::string s = "R^" + std::to_string(dim_);
      if (!constraints_.empty()) {
        s += " with " + std::to_string(constraints_.size()) + " constraint" +
             (constraints_.size() == 1 ? "" : "s");
      }
      if (!excluded_.empty()) {
        s += ", " + std::to_string(excluded_.size()) + " point" +
             (excluded_.size() == 1 ? "" : "s") + " removed";
      }
      return s;
    }
    case Kind::SeqSpace: {
      std::string s = "R^N (finitely supported sequences)";
      if (!excluded_.empty()) {
        s += ", " + std::to_string(excluded_.size()) + " point" +
             (excluded_.size() == 1 ? "" : "s") + " removed";
      }
      return s;
    }
    case Kind::FiniteSet:
      return "finite set of " + std::to_string(members_.size()) + " point" +
             (members_.size() == 1 ? "" : "s");
    case Kind::Union:
      return "union(" + left_->describe() + " | " + right_->describe() + ")";
  }
  throw error("corrupt carrier");
}

}  // namespace diffspace
