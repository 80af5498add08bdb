#include "diffspace/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "diffspace/errors.hpp"
#include "diffspace/format.hpp"

namespace diffspace {

// ---------------------------------------------------------------------------
// GeneratorSet
// ---------------------------------------------------------------------------

GeneratorSet GeneratorSet::projections(int dim) {
  if (dim < 1) throw domain_error("a projection family needs dimension >= 1");
  GeneratorSet g;
  for (int i = 1; i <= dim; ++i) {
    Generator gen;
    gen.kind = Generator::Kind::Projection;
    gen.name = "x" + std::to_string(i);
    gen.index = i;
    g.named_.push_back(std::move(gen));
  }
  return g;
}

GeneratorSet GeneratorSet::projection_family() {
  GeneratorSet g;
  g.family_ = true;
  return g;
}

void GeneratorSet::add(Generator g) {
  if (resolve(g.name)) {
    throw domain_error("generator name '" + g.name + "' already in use");
  }
  named_.push_back(std::move(g));
}

std::optional<Generator> GeneratorSet::resolve(const std::string& name) const {
  for (const auto& g : named_) {
    if (g.name == name) return g;
  }
  if (family_ && name.size() > 2 && name.compare(0, 2, "pi") == 0) {
    int k = 0;
    for (std::size_t i = 2; i < name.size(); ++i) {
      if (name[i] < '0' || name[i] > '9') return std::nullopt;
      if (k > 100000000) return std::nullopt;
      k = k * 10 + (name[i] - '0');
    }
    if (k >= 1 && name[2] != '0') {
      Generator g;
      g.kind = Generator::Kind::Projection;
      g.name = name;
      g.index = k;
      return g;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// AlgebraElement factories
// ---------------------------------------------------------------------------

std::shared_ptr<AlgebraElement> AlgebraElement::gen_ref(std::string gen_name) {
  auto e = std::make_shared<AlgebraElement>();
  e->kind = Kind::GenRef;
  e->display = gen_name;
  e->gen_name = std::move(gen_name);
  return e;
}

std::shared_ptr<AlgebraElement> AlgebraElement::global(SmoothMap outer,
                                                       std::vector<std::string> input_names,
                                                       std::vector<ElementPtr> inputs) {
  if (input_names.size() != inputs.size() ||
      static_cast<int>(inputs.size()) != outer.arity()) {
    throw arity_error("global element: outer arity " + std::to_string(outer.arity()) +
                      " does not match " + std::to_string(inputs.size()) + " inputs");
  }
  auto e = std::make_shared<AlgebraElement>();
  e->kind = Kind::Global;
  e->outer = std::move(outer);
  e->input_names = std::move(input_names);
  e->inputs = std::move(inputs);
  return e;
}

std::shared_ptr<AlgebraElement> AlgebraElement::local(std::vector<AtlasPiece> pieces) {
  if (pieces.empty()) throw atlas_error("a localized element needs at least one piece");
  auto e = std::make_shared<AlgebraElement>();
  e->kind = Kind::Local;
  e->pieces = std::move(pieces);
  return e;
}

std::shared_ptr<AlgebraElement> AlgebraElement::pair(ElementPtr left, ElementPtr right) {
  auto e = std::make_shared<AlgebraElement>();
  e->kind = Kind::Pair;
  e->display = "(" + left->display + ", " + right->display + ")";
  e->left = std::move(left);
  e->right = std::move(right);
  return e;
}

std::shared_ptr<AlgebraElement> AlgebraElement::xi_sum(Point center) {
  if (center.kind() != Point::Kind::Seq) {
    throw domain_error("the cutoff sum is centered at a sequence point");
  }
  auto e = std::make_shared<AlgebraElement>();
  e->kind = Kind::XiSum;
  e->center = std::move(center);
  return e;
}

// ---------------------------------------------------------------------------
// DifferentialSpace construction
// ---------------------------------------------------------------------------

namespace {

int tuple_dim_of(const Carrier& c) {
  switch (c.kind()) {
    case Carrier::Kind::FiniteDim:
      return c.dim();
    case Carrier::Kind::FiniteSet: {
      const auto& ms = c.members();
      if (ms.front().kind() != Point::Kind::FiniteVec) {
        throw domain_error("finite-set carriers under a projection structure need tuple points");
      }
      int d = static_cast<int>(ms.front().coords().size());
      for (const auto& m : ms) {
        if (m.kind() != Point::Kind::FiniteVec ||
            static_cast<int>(m.coords().size()) != d) {
          throw domain_error("finite-set carrier points have mixed dimensions");
        }
      }
      return d;
    }
    default:
      throw domain_error("expected a finite-dimensional carrier, got " + c.describe());
  }
}

}  // namespace

DifferentialSpace DifferentialSpace::over_finite_dim(Carrier c) {
  int dim = tuple_dim_of(c);
  DifferentialSpace s;
  s.carrier_ = std::move(c);
  s.gens_ = GeneratorSet::projections(dim);
  return s;
}

DifferentialSpace DifferentialSpace::over_finite_dim(Carrier c,
                                                     std::vector<std::string> gen_names) {
  int dim = tuple_dim_of(c);
  if (static_cast<int>(gen_names.size()) != dim) {
    throw arity_error("expected " + std::to_string(dim) + " generator names, got " +
                      std::to_string(gen_names.size()));
  }
  DifferentialSpace s;
  s.carrier_ = std::move(c);
  GeneratorSet gens;
  for (int i = 1; i <= dim; ++i) {
    Generator g;
    g.kind = Generator::Kind::Projection;
    g.name = gen_names[static_cast<std::size_t>(i - 1)];
    g.index = i;
    gens.add(std::move(g));
  }
  s.gens_ = std::move(gens);
  return s;
}

DifferentialSpace DifferentialSpace::with_map_generators(
    Carrier c, const std::vector<std::pair<std::string, SmoothMap>>& gens) {
  int dim = tuple_dim_of(c);
  if (gens.empty()) {
    throw domain_error("a structure needs at least one generator");
  }
  DifferentialSpace s;
  s.carrier_ = std::move(c);
  for (const auto& [name, map] : gens) {
    if (map.arity() != dim) {
      throw arity_error("generator '" + name + "' has arity " + std::to_string(map.arity()) +
                        " on a " + std::to_string(dim) + "-dimensional carrier");
    }
    Generator g;
    g.kind = Generator::Kind::MapOfCoords;
    g.name = name;
    g.map = map;
    s.gens_.add(std::move(g));
  }
  return s;
}

void DifferentialSpace::add_map_generator(const std::string& name, SmoothMap map) {
  if (has_element(name)) {
    throw domain_error("name '" + name + "' already refers to an element or generator");
  }
  int dim = tuple_dim_of(carrier_);
  if (map.arity() != dim) {
    throw arity_error("generator '" + name + "' has arity " + std::to_string(map.arity()) +
                      " on a " + std::to_string(dim) + "-dimensional carrier");
  }
  Generator g;
  g.kind = Generator::Kind::MapOfCoords;
  g.name = name;
  g.map = std::move(map);
  gens_.add(std::move(g));
}

DifferentialSpace DifferentialSpace::over_seq(Carrier c) {
  if (c.kind() != Carrier::Kind::SeqSpace) {
    throw domain_error("over_seq expects a sequence carrier, got " + c.describe());
  }
  DifferentialSpace s;
  s.carrier_ = std::move(c);
  s.gens_ = GeneratorSet::projection_family();
  return s;
}

DifferentialSpace DifferentialSpace::union_space(DifferentialSpace a, DifferentialSpace b) {
  DifferentialSpace s;
  s.carrier_ = Carrier::disjoint_union(a.carrier(), b.carrier());
  s.left_ = std::make_shared<const DifferentialSpace>(std::move(a));
  s.right_ = std::make_shared<const DifferentialSpace>(std::move(b));

  auto const_side = [](double v) {
    auto e = AlgebraElement::global(SmoothMap::constant(0, v), {}, {});
    e->display = fmt_g(v, 10);
    return e;
  };
  s.register_element("(1,0)", AlgebraElement::pair(const_side(1.0), const_side(0.0)));
  s.register_element("(0,1)", AlgebraElement::pair(const_side(0.0), const_side(1.0)));
  return s;
}

const DifferentialSpace& DifferentialSpace::left_space() const {
  if (!left_) throw domain_error("space is not a union");
  return *left_;
}

const DifferentialSpace& DifferentialSpace::right_space() const {
  if (!right_) throw domain_error("space is not a union");
  return *right_;
}

std::string DifferentialSpace::generator_display(const std::string& name) const {
  return restricted_ ? name + "|M" : name;
}

// ---------------------------------------------------------------------------
// Registration
// ---------------------------------------------------------------------------

const ElementPtr& DifferentialSpace::register_element(const std::string& name,
                                                      std::shared_ptr<AlgebraElement> e) {
  if (name.empty()) throw domain_error("element name must be nonempty");
  if (has_element(name)) {
    throw domain_error("name '" + name + "' already refers to an element or generator");
  }
  if (e->display.empty() || e->kind == AlgebraElement::Kind::Pair) e->display = name;
  validate_on_samples(*e);
  index_[name] = registry_.size();
  registry_.emplace_back(name, ElementPtr(std::move(e)));
  return registry_.back().second;
}

void DifferentialSpace::validate_on_samples(const AlgebraElement& e) const {
  for (int i = 0; i < validation_samples_; ++i) {
    Point p = carrier_.sample_at(seed_, static_cast<std::uint64_t>(i));
    eval_raw(e, p);  // any failure (guard, atlas gap, ...) aborts registration
  }
}

void DifferentialSpace::add_theta(const std::string& name, Point p) {
  if (has_element(name)) {
    throw domain_error("name '" + name + "' already refers to an element or generator");
  }
  Generator g;
  g.kind = Generator::Kind::Theta;
  g.name = name;
  g.point = std::move(p);
  gens_.add(std::move(g));
}

const ElementPtr& DifferentialSpace::superpose(const std::string& name, const SmoothMap& outer,
                                               const std::vector<std::string>& inputs) {
  if (static_cast<int>(inputs.size()) != outer.arity()) {
    throw arity_error("superpose: outer arity " + std::to_string(outer.arity()) +
                      " does not match " + std::to_string(inputs.size()) + " inputs");
  }
  if (is_union()) {
    // Componentwise on pairs: outer((f1,g1),...,(fn,gn)) = (outer(f...), outer(g...)).
    std::vector<std::string> left_names;
    std::vector<std::string> right_names;
    std::vector<ElementPtr> lefts;
    std::vector<ElementPtr> rights;
    for (const auto& in : inputs) {
      ElementPtr e = element(in);
      if (e->kind != AlgebraElement::Kind::Pair) {
        throw domain_error("superpose on a union space needs pair inputs; '" + in +
                           "' is not a pair");
      }
      left_names.push_back(in + ".l");
      right_names.push_back(in + ".r");
      lefts.push_back(e->left);
      rights.push_back(e->right);
    }
    auto l = AlgebraElement::global(outer, std::move(left_names), std::move(lefts));
    auto r = AlgebraElement::global(outer, std::move(right_names), std::move(rights));
    l->display = name + ".l";
    r->display = name + ".r";
    return register_element(name, AlgebraElement::pair(std::move(l), std::move(r)));
  }
  std::vector<ElementPtr> resolved;
  resolved.reserve(inputs.size());
  for (const auto& in : inputs) resolved.push_back(element(in));
  return register_element(name, AlgebraElement::global(outer, inputs, std::move(resolved)));
}

const ElementPtr& DifferentialSpace::from_atlas(const std::string& name,
                                                const std::vector<PieceSpec>& pieces) {
  if (pieces.empty()) throw atlas_error("from_atlas needs at least one piece");
  std::vector<AtlasPiece> built;
  built.reserve(pieces.size());
  for (const auto& spec : pieces) {
    for (const auto& term : spec.region) {
      if (!(term.lo < term.hi)) {
        throw atlas_error("region interval (" + fmt_g(term.lo, 10) + ", " + fmt_g(term.hi, 10) +
                          ") is empty");
      }
      element(term.element);  // must resolve
    }
    if (static_cast<int>(spec.inputs.size()) != spec.outer.arity()) {
      throw arity_error("atlas piece: outer arity does not match input count");
    }
    std::vector<ElementPtr> resolved;
    resolved.reserve(spec.inputs.size());
    for (const auto& in : spec.inputs) resolved.push_back(element(in));
    auto body = AlgebraElement::global(spec.outer, spec.inputs, std::move(resolved));
    body->display = name + "[" + std::to_string(built.size()) + "]";
    built.push_back(AtlasPiece{spec.region, std::move(body)});
  }

  // Sampled atlas checks: full coverage, and agreement of covering pieces.
  constexpr int kAtlasSamples = 1000;
  for (int i = 0; i < kAtlasSamples; ++i) {
    Point p = carrier_.sample_at(seed_, static_cast<std::uint64_t>(i));
    double first_val = 0.0;
    int covering = 0;
    for (const auto& piece : built) {
      if (!region_contains(piece.region, p)) continue;
      double v = eval_raw(*piece.body, p);
      if (covering == 0) {
        first_val = v;
      } else if (std::abs(v - first_val) > 1e-9) {
        throw atlas_error("atlas pieces disagree at sampled point " + p.to_string() + ": " +
                          fmt_g(first_val) + " vs " + fmt_g(v));
      }
      ++covering;
    }
    if (covering == 0) {
      throw atlas_error("sampled point " + p.to_string() +
                        " is not covered by any atlas piece; extend the atlas");
    }
  }
  return register_element(name, AlgebraElement::local(std::move(built)));
}

const ElementPtr& DifferentialSpace::register_pair(const std::string& name,
                                                   const std::string& left_name,
                                                   const std::string& right_name) {
  if (!is_union()) throw domain_error("register_pair needs a union space");
  return register_element(
      name, AlgebraElement::pair(left_->element(left_name), right_->element(right_name)));
}

const ElementPtr& DifferentialSpace::register_xi(const std::string& name, Point center) {
  if (carrier_.kind() != Carrier::Kind::SeqSpace) {
    throw domain_error("the cutoff sum lives on sequence carriers");
  }
  return register_element(name, AlgebraElement::xi_sum(std::move(center)));
}

bool DifferentialSpace::has_element(const std::string& name) const {
  return index_.count(name) > 0 || gens_.resolve(name).has_value();
}

ElementPtr DifferentialSpace::element(const std::string& name) const {
  auto it = index_.find(name);
  if (it != index_.end()) return registry_[it->second].second;
  if (auto g = gens_.resolve(name)) return AlgebraElement::gen_ref(g->name);
  throw lookup_error("unknown element or generator '" + name + "'");
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double DifferentialSpace::eval_generator(const Generator& g, const Point& p) const {
  switch (g.kind) {
    case Generator::Kind::Projection:
      return p.coordinate(g.index);
    case Generator::Kind::MapOfCoords:
      return g.map->eval(p.coords());
    case Generator::Kind::Theta:
      return p == *g.point ? 1.0 : 0.0;
  }
  throw error("corrupt generator");
}

bool DifferentialSpace::region_contains(const Region& r, const Point& p) const {
  for (const auto& term : r) {
    double v = eval_raw(*element(term.element), p);
    if (!(term.lo < v && v < term.hi)) return false;
  }
  return true;
}

double DifferentialSpace::eval_raw(const AlgebraElement& e, const Point& p) const {
  switch (e.kind) {
    case AlgebraElement::Kind::GenRef: {
      auto g = gens_.resolve(e.gen_name);
      if (!g) throw lookup_error("unknown generator '" + e.gen_name + "'");
      return eval_generator(*g, p);
    }
    case AlgebraElement::Kind::Global: {
      std::vector<double> vals;
      vals.reserve(e.inputs.size());
      for (const auto& in : e.inputs) vals.push_back(eval_raw(*in, p));
      return e.outer->eval(vals);
    }
    case AlgebraElement::Kind::Local: {
      for (const auto& piece : e.pieces) {
        if (region_contains(piece.region, p)) return eval_raw(*piece.body, p);
      }
      throw atlas_error("no atlas piece of '" + e.display + "' covers " + p.to_string());
    }
    case AlgebraElement::Kind::Pair: {
      if (p.kind() != Point::Kind::Tagged) {
        throw domain_error("pair elements evaluate at tagged points, got " + p.to_string());
      }
      return p.side() == Side::Left ? left_space().eval_raw(*e.left, p.inner())
                                    : right_space().eval_raw(*e.right, p.inner());
    }
    case AlgebraElement::Kind::XiSum:
      return detail::xi_sum(p, *e.center).value;
  }
  throw error("corrupt element");
}

double DifferentialSpace::eval(const AlgebraElement& e, const Point& p) const {
  if (!carrier_.contains(p)) {
    throw domain_error("point " + p.to_string() + " is not a member of " + carrier_.describe());
  }
  return eval_raw(e, p);
}

double DifferentialSpace::eval_element(const std::string& name, const Point& p) const {
  return eval(*element(name), p);
}

// ---------------------------------------------------------------------------
// Restriction
// ---------------------------------------------------------------------------

DifferentialSpace DifferentialSpace::restrict(Carrier sub) const {
  constexpr int kChecks = 32;
  for (int i = 0; i < kChecks; ++i) {
    Point p = sub.sample_at(seed_, static_cast<std::uint64_t>(i));
    bool ok = false;
    try {
      ok = carrier_.contains(p);
    } catch (const domain_error&) {
      ok = false;  // variant mismatch: certainly not a subset
    }
    if (!ok) {
      throw domain_error("restriction target is not a subset: sampled point " + p.to_string() +
                         " of " + sub.describe() + " lies outside " + carrier_.describe());
    }
  }
  DifferentialSpace s = *this;
  s.carrier_ = std::move(sub);
  s.restricted_ = true;
  for (const auto& [name, e] : s.registry_) {
    (void)name;
    s.validate_on_samples(*e);
  }
  return s;
}

std::string DifferentialSpace::describe() const {
  std::string s = "differential space over " + carrier_.describe();
  if (gens_.is_family()) {
    s += "; generators " + generator_display("pi1") + ", " + generator_display("pi2") + ", ...";
    for (const auto& g : gens_.named()) s += ", " + generator_display(g.name);
  } else if (!gens_.named().empty()) {
    s += "; generators ";
    for (std::size_t i = 0; i < gens_.named().size(); ++i) {
      if (i > 0) s += ", ";
      s += generator_display(gens_.named()[i].name);
    }
  }
  s += "; " + std::to_string(registry_.size()) + " registered element" +
       (registry_.size() == 1 ? "" : "s");
  return s;
}

// ---------------------------------------------------------------------------
// The cutoff-sum core
// ---------------------------------------------------------------------------

namespace detail {

XiResult xi_sum(const Point& p, const Point& center, std::vector<XiTerm>* trace,
                std::size_t trace_cap) {
  if (p.kind() != Point::Kind::Seq || center.kind() != Point::Kind::Seq) {
    throw domain_error("the cutoff sum is defined on sequence points");
  }
  // Support of p - center, merged from both canonical supports.
  std::vector<std::pair<int, double>> diff;
  {
    const auto& a = p.support();
    const auto& b = center.support();
    std::size_t i = 0;
    std::size_t j = 0;
    constexpr int kEnd = std::numeric_limits<int>::max();
    while (i < a.size() || j < b.size()) {
      int ka = i < a.size() ? a[i].first : kEnd;
      int kb = j < b.size() ? b[j].first : kEnd;
      if (ka < kb) {
        diff.emplace_back(ka, a[i++].second);
      } else if (kb < ka) {
        diff.emplace_back(kb, -b[j++].second);
      } else {
        double d = a[i++].second - b[j++].second;
        if (d != 0.0) diff.emplace_back(ka, d);
      }
    }
  }
  if (diff.empty()) {
    throw domain_error("the cutoff sum diverges at its center point " + center.to_string());
  }

  XiResult r;
  double rho = 0.0;
  std::size_t si = 0;
  constexpr int kTermCap = 100000000;
  for (int k = 1; k <= kTermCap; ++k) {
    if (si < diff.size() && diff[si].first == k) {
      double y = diff[si].second;
      rho += y * y;
      ++si;
    }
    double t = static_cast<double>(k) * static_cast<double>(k) * rho;
    if (t > 1.0) {
      r.k0 = k;
      return r;
    }
    double phi = cutoff_value(t);
    r.value += phi;
    r.terms_evaluated += 1;
    if (trace && phi != 1.0 && trace->size() < trace_cap) {
      trace->push_back(XiTerm{k, t, phi});
    }
  }
  throw error("cutoff sum did not truncate within " + std::to_string(kTermCap) +
              " terms; the point is too close to the center");
}

}  // namespace detail

}  // namespace diffspace
