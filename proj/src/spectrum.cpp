#include "diffspace/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "diffspace/errors.hpp"
#include "diffspace/format.hpp"
#include "diffspace/seqspace.hpp"
#include "diffspace/smooth_map.hpp"

namespace diffspace::spectrum {

namespace {

constexpr double kForcedValueTol = 1e-9;
constexpr double kFiberMatchTol = 1e-9;
constexpr int kFiberSampleBudget = 512;
constexpr int kDensitySampleBudget = 512;
constexpr int kProbeLength = 20;
constexpr int kProbeTopIndex = 1000000;

bool has_projection_generators(const DifferentialSpace& space) {
  if (space.generators().is_family()) return true;
  for (const auto& g : space.generators().named()) {
    if (g.kind == Generator::Kind::Projection) return true;
  }
  return false;
}

/// Candidate point of an assignment on a finite-dimensional space: the
/// tuple of values on the projection generators, which must cover every
/// coordinate.
Point finite_dim_candidate(const DifferentialSpace& space, const GeneratorAssignment& a) {
  int dim = 0;
  for (const auto& g : space.generators().named()) {
    if (g.kind == Generator::Kind::Projection) dim = std::max(dim, g.index);
  }
  std::vector<double> coords(static_cast<std::size_t>(dim), 0.0);
  std::vector<bool> seen(static_cast<std::size_t>(dim), false);
  for (const auto& g : space.generators().named()) {
    if (g.kind != Generator::Kind::Projection) continue;
    auto it = a.values.find(g.name);
    if (it == a.values.end()) {
      throw domain_error("assignment misses the projection generator '" + g.name + "'");
    }
    coords[static_cast<std::size_t>(g.index - 1)] = it->second;
    seen[static_cast<std::size_t>(g.index - 1)] = true;
  }
  for (int i = 0; i < dim; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw domain_error("no projection generator covers coordinate " + std::to_string(i + 1));
    }
  }
  return Point::finite_vec(std::move(coords));
}

/// Candidate point of an assignment on a sequence space: the finitely
/// supported point of the explicit projection values.
Point seq_candidate(const DifferentialSpace& space, const GeneratorAssignment& a) {
  if (a.default_tail != 0.0) {
    throw domain_error("a nonzero default tail is not finitely supported");
  }
  std::vector<std::pair<int, double>> entries;
  for (const auto& [name, value] : a.values) {
    auto g = space.generators().resolve(name);
    if (!g || g->kind != Generator::Kind::Projection) continue;
    if (value != 0.0) entries.emplace_back(g->index, value);
  }
  return Point::seq(std::move(entries));
}

/// Extension of an assignment through an element graph by the composition
/// law. Only generator references and superpositions extend; localized,
/// pairwise, and cutoff-sum elements need a candidate point.
double extend_assignment(const DifferentialSpace& space, const GeneratorAssignment& a,
                         const AlgebraElement& e) {
  switch (e.kind) {
    case AlgebraElement::Kind::GenRef: {
      auto it = a.values.find(e.gen_name);
      if (it != a.values.end()) return it->second;
      auto g = space.generators().resolve(e.gen_name);
      if (g && g->kind == Generator::Kind::Projection && space.generators().is_family()) {
        return a.default_tail;
      }
      throw domain_error("assignment does not cover the generator '" + e.gen_name + "'");
    }
    case AlgebraElement::Kind::Global: {
      std::vector<double> vals;
      vals.reserve(e.inputs.size());
      for (const auto& input : e.inputs) {
        vals.push_back(extend_assignment(space, a, *input));
      }
      return e.outer->eval(vals);
    }
    default:
      throw domain_error("element '" + e.display +
                         "' is localized; classify the assignment to a point first");
  }
}

/// Value the assignment pins on a generator: the explicit value when
/// named, otherwise the value at the candidate point.
double generator_target(const DifferentialSpace& space, const GeneratorAssignment& a,
                        const Generator& g, const Point& candidate) {
  auto it = a.values.find(g.name);
  if (it != a.values.end()) return it->second;
  return space.eval_element(g.name, candidate);
}

bool fiber_matches(const DifferentialSpace& space, const GeneratorAssignment& a,
                   const Point& candidate, const Point& m) {
  for (const auto& g : space.generators().named()) {
    double target = generator_target(space, a, g, candidate);
    if (std::abs(space.eval_element(g.name, m) - target) > kFiberMatchTol) return false;
  }
  return true;
}

bool contains_point(const std::vector<Point>& pts, const Point& p) {
  return std::any_of(pts.begin(), pts.end(), [&](const Point& q) { return q == p; });
}

/// Sum of a sequence point and a finitely supported displacement.
Point translate(const Point& base, const Point& delta) {
  std::vector<std::pair<int, double>> entries;
  const auto& a = base.support();
  const auto& b = delta.support();
  std::size_t i = 0;
  std::size_t j = 0;
  constexpr int kEnd = std::numeric_limits<int>::max();
  while (i < a.size() || j < b.size()) {
    int ka = i < a.size() ? a[i].first : kEnd;
    int kb = j < b.size() ? b[j].first : kEnd;
    if (ka < kb) {
      entries.emplace_back(ka, a[i++].second);
    } else if (kb < ka) {
      entries.emplace_back(kb, b[j++].second);
    } else {
      double s = a[i++].second + b[j++].second;
      if (s != 0.0) entries.emplace_back(ka, s);
    }
  }
  return Point::seq(std::move(entries));
}

/// The seeded probe path toward an excluded sequence point: translated
/// single-support probes with geometrically growing index, ending at
/// kProbeTopIndex.
std::vector<Point> probe_toward(const Point& candidate) {
  std::vector<Point> probe;
  probe.reserve(kProbeLength);
  for (int j = 1; j <= kProbeLength; ++j) {
    double e = 6.0 * (j - 1) / static_cast<double>(kProbeLength - 1);
    int k = static_cast<int>(std::lround(std::pow(10.0, e)));
    k = std::min(std::max(k, 1), kProbeTopIndex);
    probe.push_back(translate(candidate, seqspace::z(k)));
  }
  return probe;
}

HomOutcome obstructed(Diagnosis d, std::string witness, ElementPtr element,
                      std::vector<Point> probe, std::string detail) {
  HomOutcome out;
  out.kind = HomOutcome::Kind::Obstructed;
  out.diagnosis = d;
  out.witness = std::move(witness);
  out.witness_element = std::move(element);
  out.probe = std::move(probe);
  out.detail = std::move(detail);
  return out;
}

}  // namespace

Homomorphism Homomorphism::evaluation(Point p) {
  Homomorphism h;
  h.kind_ = Kind::Evaluation;
  h.point_ = std::move(p);
  return h;
}

Homomorphism Homomorphism::from_assignment(GeneratorAssignment a) {
  Homomorphism h;
  h.kind_ = Kind::FromAssignment;
  h.assignment_ = std::move(a);
  return h;
}

const Point& Homomorphism::point() const {
  if (!point_) throw domain_error("this homomorphism carries no evaluation point");
  return *point_;
}

const GeneratorAssignment& Homomorphism::assignment() const {
  if (kind_ != Kind::FromAssignment) {
    throw domain_error("this homomorphism carries no assignment");
  }
  return assignment_;
}

Homomorphism ev(const DifferentialSpace& space, const Point& p) {
  if (!space.carrier().contains(p)) {
    throw domain_error("ev needs a carrier member, got " + p.to_string());
  }
  return Homomorphism::evaluation(p);
}

double apply_hom(const DifferentialSpace& space, const Homomorphism& h,
                 const std::string& element) {
  ElementPtr e = space.element(element);
  if (h.kind() == Homomorphism::Kind::Evaluation) {
    return space.eval(*e, h.point());
  }
  return extend_assignment(space, h.assignment(), *e);
}

Point recover_point(const DifferentialSpace& space, const Homomorphism& h) {
  if (h.kind() == Homomorphism::Kind::Evaluation) return h.point();
  const auto& a = h.assignment();
  if (space.is_union()) {
    throw domain_error("recover_point does not apply to disjoint unions");
  }
  if (space.generators().is_family()) return seq_candidate(space, a);
  if (!has_projection_generators(space)) {
    throw domain_error("the generators include no projections; no candidate point exists");
  }
  return finite_dim_candidate(space, a);
}

HomOutcome classify(const DifferentialSpace& space, const GeneratorAssignment& a) {
  if (space.is_union()) {
    throw domain_error("disjoint unions are classified by union_classify");
  }
  for (const auto& [name, value] : a.values) {
    (void)value;
    if (!space.generators().resolve(name)) {
      throw lookup_error("assignment names the unknown generator '" + name + "'");
    }
  }

  const Carrier& carrier = space.carrier();
  bool is_seq = space.generators().is_family();

  // Step 1: candidate point from the projection values.
  std::optional<Point> candidate;
  if (is_seq) {
    if (a.default_tail != 0.0) {
      HomOutcome out;
      out.kind = HomOutcome::Kind::Obstructed;
      out.diagnosis = Diagnosis::NotInCarrier;
      out.detail = "a nonzero default tail is not finitely supported, so no carrier "
                   "point realizes the assignment";
      return out;
    }
    candidate = seq_candidate(space, a);
  } else if (has_projection_generators(space)) {
    candidate = finite_dim_candidate(space, a);
  }

  // Step 2: generators with forced values must agree with the candidate.
  if (candidate) {
    for (const auto& g : space.generators().named()) {
      auto it = a.values.find(g.name);
      if (it == a.values.end()) continue;
      double assigned = it->second;
      if (g.kind == Generator::Kind::Theta) {
        double forced = (*g.point == *candidate) ? 1.0 : 0.0;
        if (std::abs(assigned - forced) > kForcedValueTol) {
          return obstructed(
              Diagnosis::AlgebraicContradiction, g.name, space.element(g.name), {},
              "'" + g.name + "' is the characteristic function of " + g.point->to_string() +
                  ", forcing the value " + fmt_g(forced, 10) + " at the candidate " +
                  candidate->to_string() + "; the assignment gives " + fmt_g(assigned, 10));
        }
      } else if (g.kind == Generator::Kind::MapOfCoords) {
        double forced = g.map->eval(candidate->coords());
        if (std::abs(assigned - forced) > kForcedValueTol) {
          return obstructed(
              Diagnosis::AlgebraicContradiction, g.name, space.element(g.name), {},
              "the composition law forces '" + g.name + "' to " + fmt_g(forced, 17) +
                  " at the candidate " + candidate->to_string() + "; the assignment gives " +
                  fmt_g(assigned, 17));
        }
      }
    }
  }

  // Step 3: a member candidate is an evaluation; collect its fiber when
  // the generators might not separate points.
  if (candidate && carrier.contains(*candidate)) {
    HomOutcome out;
    out.kind = HomOutcome::Kind::Evaluation;
    out.points.push_back(*candidate);
    if (carrier.kind() == Carrier::Kind::FiniteSet) {
      for (const auto& m : carrier.members()) {
        if (m == *candidate || contains_point(out.points, m)) continue;
        if (fiber_matches(space, a, *candidate, m)) out.points.push_back(m);
      }
    }
    out.detail = "assignment is evaluation at " + candidate->to_string();
    return out;
  }

  // No candidate point: only a sample search over the generators is left.
  if (!candidate) {
    std::vector<Point> matched;
    std::vector<Point> pool;
    if (carrier.kind() == Carrier::Kind::FiniteSet) {
      pool = carrier.members();
    } else {
      pool = carrier.sample(space.sampler_seed(), kFiberSampleBudget);
    }
    for (const auto& m : pool) {
      if (contains_point(matched, m)) continue;
      bool ok = true;
      for (const auto& g : space.generators().named()) {
        auto it = a.values.find(g.name);
        if (it == a.values.end()) continue;
        if (std::abs(space.eval_element(g.name, m) - it->second) > kFiberMatchTol) {
          ok = false;
          break;
        }
      }
      if (ok) matched.push_back(m);
    }
    if (!matched.empty()) {
      HomOutcome out;
      out.kind = HomOutcome::Kind::Evaluation;
      out.points = std::move(matched);
      out.detail = "assignment is realized by " + std::to_string(out.points.size()) +
                   " carrier point(s) found by sample search";
      return out;
    }
    HomOutcome out;
    out.kind = HomOutcome::Kind::Obstructed;
    out.diagnosis = Diagnosis::NotInCarrier;
    out.detail = "no carrier point among " + std::to_string(pool.size()) +
                 " searched realizes the assignment on all generators";
    return out;
  }

  // Step 4: the candidate lies outside the carrier. Build the obstruction
  // witness suited to the carrier.
  if (carrier.kind() == Carrier::Kind::SeqSpace) {
    std::string witness_name;
    ElementPtr witness;
    for (const auto& [name, elem] : space.registry()) {
      if (elem->kind == AlgebraElement::Kind::XiSum && *elem->center == *candidate) {
        witness_name = name;
        witness = elem;
        break;
      }
    }
    if (!witness) {
      auto fresh = AlgebraElement::xi_sum(*candidate);
      fresh->display = "xi[" + candidate->to_string() + "]";
      witness_name = fresh->display;
      witness = std::move(fresh);
    }
    std::vector<Point> probe = probe_toward(*candidate);
    std::vector<double> values;
    values.reserve(probe.size());
    for (const auto& p : probe) values.push_back(space.eval(*witness, p));
    if (seqspace::diverges_along(values)) {
      return obstructed(Diagnosis::DivergentAlongProbe, witness_name, witness, std::move(probe),
                        "'" + witness_name + "' climbs past 1e6 along the probe toward " +
                            candidate->to_string() + ", so no evaluation matches");
    }
    return obstructed(Diagnosis::NotInCarrier, witness_name, witness, std::move(probe),
                      "candidate " + candidate->to_string() +
                          " is not a carrier member and the cutoff-sum witness did not "
                          "certify divergence");
  }

  // Finite-dimensional carriers: the squared distance to the candidate is
  // positive on every member, so its reciprocal is an element; the
  // assignment sends the squared distance to exactly 0, yet the product
  // with its reciprocal is the unit.
  SmoothMap omega = distance_sq(candidate->coords());
  std::vector<std::string> proj_names;
  std::vector<ElementPtr> proj_refs;
  for (const auto& g : space.generators().named()) {
    if (g.kind != Generator::Kind::Projection) continue;
    proj_names.push_back(g.name);
    proj_refs.push_back(space.element(g.name));
  }
  auto witness = AlgebraElement::global(omega.reciprocal(Guard::Positive), proj_names,
                                        std::move(proj_refs));
  std::string witness_name = "1/|x - " + candidate->to_string() + "|^2";
  witness->display = witness_name;
  auto omega_elem = AlgebraElement::global(omega, witness->input_names, witness->inputs);
  double omega_value = extend_assignment(space, a, *omega_elem);
  return obstructed(Diagnosis::AlgebraicContradiction, witness_name, witness, {},
                    "the squared distance to " + candidate->to_string() +
                        " takes the value " + fmt_g(omega_value, 10) +
                        " under the assignment, yet its product with '" + witness_name +
                        "' is the unit: 1 = chi(1) while chi(dist^2)*chi(1/dist^2) = 0");
}

double SpecFunction::operator()(const Homomorphism& h) const {
  return apply_hom(*space, h, name);
}

SpecFunction hat(const DifferentialSpace& space, const std::string& element) {
  (void)space.element(element);  // surface unknown names now
  SpecFunction f;
  f.space = &space;
  f.name = element;
  return f;
}

DifferentialSpace spec_space(const DifferentialSpace& space,
                             const std::vector<GeneratorAssignment>& extra,
                             int sample_budget) {
  if (space.is_union() || space.carrier().kind() == Carrier::Kind::SeqSpace) {
    throw domain_error(
        "the spectrum carrier is realized for finite-dimensional and finite carriers; "
        "classify sequence and union assignments pointwise instead");
  }
  if (sample_budget < 1) throw domain_error("spec_space needs a positive sample budget");

  std::vector<Point> accepted;
  if (space.carrier().kind() == Carrier::Kind::FiniteSet) {
    accepted = space.carrier().members();
  } else {
    for (const auto& p : space.carrier().sample(space.sampler_seed(), sample_budget)) {
      if (!contains_point(accepted, p)) accepted.push_back(p);
    }
  }
  for (const auto& a : extra) {
    HomOutcome out = classify(space, a);
    if (out.kind != HomOutcome::Kind::Evaluation) continue;
    for (const auto& p : out.points) {
      if (!contains_point(accepted, p)) accepted.push_back(p);
    }
  }

  Carrier carrier = Carrier::finite_set(accepted);

  std::vector<std::string> proj_names;
  std::vector<std::pair<std::string, SmoothMap>> map_gens;
  for (const auto& g : space.generators().named()) {
    if (g.kind == Generator::Kind::Projection) proj_names.push_back("hat." + g.name);
    if (g.kind == Generator::Kind::MapOfCoords) map_gens.emplace_back("hat." + g.name, *g.map);
  }

  DifferentialSpace spec =
      proj_names.empty() ? DifferentialSpace::with_map_generators(carrier, map_gens)
                         : DifferentialSpace::over_finite_dim(carrier, proj_names);
  if (!proj_names.empty()) {
    for (auto& [name, map] : map_gens) spec.add_map_generator(name, std::move(map));
  }
  for (const auto& g : space.generators().named()) {
    if (g.kind == Generator::Kind::Theta) spec.add_theta("hat." + g.name, *g.point);
  }
  spec.set_sampler_seed(space.sampler_seed());
  return spec;
}

Point density_witness(const DifferentialSpace& space, const GeneratorAssignment& a,
                      double tol, const std::vector<std::string>& family) {
  if (!(tol > 0.0)) throw domain_error("density tolerance must be positive");
  if (family.empty()) throw domain_error("density needs a nonempty test family");

  HomOutcome out = classify(space, a);
  if (out.kind != HomOutcome::Kind::Evaluation) {
    throw domain_error("the assignment is not accepted, so no density witness exists: " +
                       out.detail);
  }
  const Point& candidate = out.points.front();
  std::vector<double> targets;
  targets.reserve(family.size());
  for (const auto& f : family) targets.push_back(space.eval_element(f, candidate));

  auto max_error = [&](const Point& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      worst = std::max(worst, std::abs(space.eval_element(family[i], p) - targets[i]));
    }
    return worst;
  };

  // Nearest sampled point first (the finite window into ev(M)), then the
  // recovered candidate itself, which matches exactly.
  std::vector<Point> pool;
  if (space.carrier().kind() == Carrier::Kind::FiniteSet) {
    pool = space.carrier().members();
  } else {
    pool = space.carrier().sample(space.sampler_seed(), kDensitySampleBudget);
  }
  const Point* best = nullptr;
  double best_error = std::numeric_limits<double>::infinity();
  for (const auto& p : pool) {
    double err = max_error(p);
    if (err < best_error) {
      best_error = err;
      best = &p;
    }
  }
  if (best && best_error <= tol) return *best;
  if (max_error(candidate) <= tol) return candidate;
  throw sampling_error("no density witness within " + fmt_g(tol, 10) + " among " +
                       std::to_string(pool.size()) + " sampled points (best " +
                       fmt_g(best_error, 10) + ")");
}

UnionOutcome union_classify(const DifferentialSpace& space, const GeneratorAssignment& a) {
  if (!space.is_union()) {
    throw domain_error("union_classify needs a disjoint-union space");
  }
  auto left_it = a.values.find("(1,0)");
  auto right_it = a.values.find("(0,1)");
  if (left_it == a.values.end() || right_it == a.values.end()) {
    throw domain_error("union assignments need values on the idempotents '(1,0)' and '(0,1)'");
  }
  double v10 = left_it->second;
  double v01 = right_it->second;
  auto near = [](double v, double t) { return std::abs(v - t) <= kForcedValueTol; };
  bool valid = (near(v10, 0.0) || near(v10, 1.0)) && (near(v01, 0.0) || near(v01, 1.0)) &&
               near(v10 + v01, 1.0);
  if (!valid) {
    UnionOutcome out;
    out.outcome = obstructed(
        Diagnosis::AlgebraicContradiction, "(1,0)", space.element("(1,0)"), {},
        "(1,0)+(0,1) is the unit and (1,0)*(0,1) vanishes, so a homomorphism sends one "
        "idempotent to 1 and the other to 0; got " +
            fmt_g(v10, 10) + " and " + fmt_g(v01, 10));
    return out;
  }

  Side side = near(v10, 1.0) ? Side::Left : Side::Right;
  const DifferentialSpace& sub = side == Side::Left ? space.left_space() : space.right_space();
  const std::string prefix = side == Side::Left ? "left." : "right.";
  const std::string other = side == Side::Left ? "right." : "left.";

  GeneratorAssignment projected;
  projected.default_tail = a.default_tail;
  for (const auto& [name, value] : a.values) {
    if (name == "(1,0)" || name == "(0,1)") continue;
    if (name.rfind(prefix, 0) == 0) {
      projected.values[name.substr(prefix.size())] = value;
    } else if (name.rfind(other, 0) != 0) {
      throw lookup_error("union assignments name side generators as 'left.<g>' or "
                         "'right.<g>'; got '" + name + "'");
    }
  }

  UnionOutcome out;
  out.side = side;
  out.outcome = classify(sub, projected);
  if (out.outcome.kind == HomOutcome::Kind::Evaluation) {
    for (auto& p : out.outcome.points) p = Point::tagged(side, std::move(p));
  } else {
    out.outcome.witness = prefix + out.outcome.witness;
    for (auto& p : out.outcome.probe) p = Point::tagged(side, std::move(p));
  }
  return out;
}

UnionOutcome union_classify(const DifferentialSpace& space, const Homomorphism& h) {
  if (h.kind() == Homomorphism::Kind::FromAssignment) {
    return union_classify(space, h.assignment());
  }
  if (!space.is_union()) {
    throw domain_error("union_classify needs a disjoint-union space");
  }
  const Point& p = h.point();
  if (!space.carrier().contains(p)) {
    throw domain_error("evaluation point " + p.to_string() + " is not a union member");
  }
  UnionOutcome out;
  out.side = p.side();
  out.outcome.kind = HomOutcome::Kind::Evaluation;
  out.outcome.points.push_back(p);
  out.outcome.detail = "evaluation at the tagged point " + p.to_string();
  return out;
}

}  // namespace diffspace::spectrum
