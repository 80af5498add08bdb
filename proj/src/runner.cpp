#include "diffspace/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "diffspace/errors.hpp"
#include "diffspace/seqspace.hpp"

namespace diffspace::dsl {

namespace {

// ---------------------------------------------------------------------------
// Literal conversion
// ---------------------------------------------------------------------------

Point to_point(const PointLit& lit) {
  switch (lit.kind) {
    case PointLit::Kind::Tuple:
      return Point::finite_vec(lit.tuple);
    case PointLit::Kind::Support:
      return Point::seq(lit.support);
    case PointLit::Kind::Z:
      return seqspace::z(lit.z_index);
    case PointLit::Kind::Zero:
      return Point::zero_seq();
    case PointLit::Kind::Tagged:
      return Point::tagged(lit.side, to_point(*lit.inner));
  }
  return Point::zero_seq();
}

spectrum::GeneratorAssignment to_assignment(const AssignLit& lit) {
  spectrum::GeneratorAssignment a;
  for (const auto& [key, value] : lit.values) a.values[key] = value;
  if (lit.tail) a.default_tail = *lit.tail;
  return a;
}

Json point_json(const Point& p) {
  switch (p.kind()) {
    case Point::Kind::FiniteVec: {
      Json tuple = Json::array();
      for (double v : p.coords()) tuple.push(Json::number(v));
      return Json::object().set("tuple", std::move(tuple));
    }
    case Point::Kind::Seq: {
      Json support = Json::array();
      for (const auto& [k, v] : p.support()) {
        support.push(Json::array().push(Json::integer(k)).push(Json::number(v)));
      }
      return Json::object().set("support", std::move(support));
    }
    case Point::Kind::Tagged:
      return Json::object()
          .set("side", Json::str(p.side() == Side::Left ? "left" : "right"))
          .set("point", point_json(p.inner()));
  }
  return Json();
}

// ---------------------------------------------------------------------------
// Expression compilation
// ---------------------------------------------------------------------------

std::string projection_name(const DifferentialSpace& space, int index) {
  if (space.generators().is_family()) return "pi" + std::to_string(index);
  for (const auto& g : space.generators().named()) {
    if (g.kind == Generator::Kind::Projection && g.index == index) return g.name;
  }
  throw lookup_error("no projection generator with index " + std::to_string(index));
}

std::vector<std::string> projection_names_in_order(const DifferentialSpace& space) {
  std::vector<std::pair<int, std::string>> found;
  for (const auto& g : space.generators().named()) {
    if (g.kind == Generator::Kind::Projection) found.emplace_back(g.index, g.name);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> names;
  names.reserve(found.size());
  for (auto& [index, name] : found) names.push_back(std::move(name));
  return names;
}

void push_unique(std::vector<std::string>& inputs, const std::string& name) {
  if (std::find(inputs.begin(), inputs.end(), name) == inputs.end()) {
    inputs.push_back(name);
  }
}

void collect_inputs(const Expr& e, const DifferentialSpace& space,
                    std::vector<std::string>& inputs) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return;
    case Expr::Kind::Name:
      push_unique(inputs, e.name);
      return;
    case Expr::Kind::Pi:
      push_unique(inputs, projection_name(space, e.index));
      return;
    case Expr::Kind::Rho:
      if (!space.generators().is_family()) {
        throw domain_error("rho(k) needs a sequence space");
      }
      for (int j = 1; j <= e.index; ++j) push_unique(inputs, "pi" + std::to_string(j));
      return;
    case Expr::Kind::Dist2: {
      auto names = projection_names_in_order(space);
      if (names.empty()) {
        throw domain_error("dist2 needs projection generators on a finite-dimensional space");
      }
      for (const auto& n : names) push_unique(inputs, n);
      return;
    }
    case Expr::Kind::Call:
    case Expr::Kind::Unary:
    case Expr::Kind::Pow:
      collect_inputs(*e.a, space, inputs);
      return;
    case Expr::Kind::Binary:
      collect_inputs(*e.a, space, inputs);
      collect_inputs(*e.b, space, inputs);
      return;
  }
}

SmoothMap build_map(const Expr& e, const DifferentialSpace& space,
                    const std::vector<std::string>& inputs) {
  int n = static_cast<int>(inputs.size());
  auto slot_of = [&](const std::string& name) {
    auto it = std::find(inputs.begin(), inputs.end(), name);
    return SmoothMap::slot(n, static_cast<int>(it - inputs.begin()));
  };
  switch (e.kind) {
    case Expr::Kind::Number:
      return SmoothMap::constant(n, e.number);
    case Expr::Kind::Name:
      return slot_of(e.name);
    case Expr::Kind::Pi:
      return slot_of(projection_name(space, e.index));
    case Expr::Kind::Rho: {
      SmoothMap acc = slot_of("pi1").pow(2);
      for (int j = 2; j <= e.index; ++j) {
        acc = acc + slot_of("pi" + std::to_string(j)).pow(2);
      }
      return acc;
    }
    case Expr::Kind::Dist2: {
      Point center = to_point(e.point);
      if (center.kind() != Point::Kind::FiniteVec) {
        throw domain_error("dist2 takes a tuple center");
      }
      auto names = projection_names_in_order(space);
      if (center.coords().size() != names.size()) {
        throw arity_error("dist2 center has " + std::to_string(center.coords().size()) +
                          " coordinates; the space has " + std::to_string(names.size()));
      }
      std::vector<SmoothMap> inners;
      inners.reserve(names.size());
      for (const auto& name : names) inners.push_back(slot_of(name));
      return SmoothMap::compose(distance_sq(center.coords()), std::move(inners));
    }
    case Expr::Kind::Call: {
      SmoothMap a = build_map(*e.a, space, inputs);
      if (e.name == "exp") return exp(a);
      if (e.name == "sin") return sin(a);
      if (e.name == "cos") return cos(a);
      if (e.name == "cutoff") return cutoff(a);
      return bump_kernel(a);
    }
    case Expr::Kind::Unary:
      return -build_map(*e.a, space, inputs);
    case Expr::Kind::Pow:
      return build_map(*e.a, space, inputs).pow(e.index);
    case Expr::Kind::Binary: {
      SmoothMap a = build_map(*e.a, space, inputs);
      SmoothMap b = build_map(*e.b, space, inputs);
      switch (e.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        default: return a * b.reciprocal(Guard::NonZero);
      }
    }
  }
  return SmoothMap::constant(n, 0.0);
}

/// Compiles an expression whose leaves are the coordinates x1..x<dim>
/// (where clauses and gen maps run before any generator exists).
SmoothMap build_coord_map(const Expr& e, int dim) {
  auto coord_slot = [&](const std::string& name, int index) {
    if (index < 1 || index > dim) {
      throw lookup_error("'" + name + "' is outside the coordinates x1..x" +
                         std::to_string(dim));
    }
    return SmoothMap::slot(dim, index - 1);
  };
  switch (e.kind) {
    case Expr::Kind::Number:
      return SmoothMap::constant(dim, e.number);
    case Expr::Kind::Name: {
      if (e.name.size() > 1 && e.name[0] == 'x') {
        bool digits = true;
        for (std::size_t i = 1; i < e.name.size(); ++i) {
          digits = digits && std::isdigit(static_cast<unsigned char>(e.name[i]));
        }
        if (digits) return coord_slot(e.name, std::atoi(e.name.c_str() + 1));
      }
      throw lookup_error("'" + e.name + "' is not a coordinate; this expression runs "
                         "before generators exist, so leaves are x1..x" +
                         std::to_string(dim));
    }
    case Expr::Kind::Pi:
      return coord_slot("pi(" + std::to_string(e.index) + ")", e.index);
    case Expr::Kind::Rho:
      throw domain_error("rho(k) needs a sequence space");
    case Expr::Kind::Dist2: {
      Point center = to_point(e.point);
      if (center.kind() != Point::Kind::FiniteVec ||
          static_cast<int>(center.coords().size()) != dim) {
        throw arity_error("dist2 center must be a tuple of dimension " + std::to_string(dim));
      }
      return distance_sq(center.coords());
    }
    case Expr::Kind::Call: {
      SmoothMap a = build_coord_map(*e.a, dim);
      if (e.name == "exp") return exp(a);
      if (e.name == "sin") return sin(a);
      if (e.name == "cos") return cos(a);
      if (e.name == "cutoff") return cutoff(a);
      return bump_kernel(a);
    }
    case Expr::Kind::Unary:
      return -build_coord_map(*e.a, dim);
    case Expr::Kind::Pow:
      return build_coord_map(*e.a, dim).pow(e.index);
    case Expr::Kind::Binary: {
      SmoothMap a = build_coord_map(*e.a, dim);
      SmoothMap b = build_coord_map(*e.b, dim);
      switch (e.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        default: return a * b.reciprocal(Guard::NonZero);
      }
    }
  }
  return SmoothMap::constant(dim, 0.0);
}

// ---------------------------------------------------------------------------
// Probe paths
// ---------------------------------------------------------------------------

/// candidate + t * (start - candidate), componentwise over the union of
/// supports for sequence points.
Point step_toward(const Point& candidate, const Point& start, double t) {
  if (candidate.kind() == Point::Kind::FiniteVec && start.kind() == Point::Kind::FiniteVec) {
    if (candidate.coords().size() != start.coords().size()) {
      throw arity_error("approach start and candidate have different dimensions");
    }
    std::vector<double> coords(candidate.coords());
    for (std::size_t i = 0; i < coords.size(); ++i) {
      coords[i] += t * (start.coords()[i] - coords[i]);
    }
    return Point::finite_vec(std::move(coords));
  }
  if (candidate.kind() == Point::Kind::Seq && start.kind() == Point::Kind::Seq) {
    std::vector<std::pair<int, double>> entries;
    const auto& a = candidate.support();
    const auto& b = start.support();
    std::size_t i = 0;
    std::size_t j = 0;
    constexpr int kEnd = std::numeric_limits<int>::max();
    while (i < a.size() || j < b.size()) {
      int ka = i < a.size() ? a[i].first : kEnd;
      int kb = j < b.size() ? b[j].first : kEnd;
      double base = ka <= kb ? a[i].second : 0.0;
      double goal = kb <= ka ? b[j].second : 0.0;
      int k = std::min(ka, kb);
      if (ka <= kb) ++i;
      if (kb <= ka) ++j;
      double v = base + t * (goal - base);
      if (v != 0.0) entries.emplace_back(k, v);
    }
    return Point::seq(std::move(entries));
  }
  throw domain_error("approach needs the start and the candidate to be the same point kind");
}

/// Componentwise sum of two sequence points over merged supports.
Point seq_translate(const Point& base, const Point& delta) {
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

std::vector<Point> build_probe(const ProbeSpec& spec, const Point& candidate) {
  switch (spec.kind) {
    case ProbeSpec::Kind::List: {
      std::vector<Point> points;
      points.reserve(spec.points.size());
      for (const auto& lit : spec.points) points.push_back(to_point(lit));
      return points;
    }
    case ProbeSpec::Kind::Approach: {
      if (spec.count < 1) throw domain_error("approach needs a positive step count");
      std::vector<Point> points;
      points.reserve(static_cast<std::size_t>(spec.count));
      double t = 1.0;
      for (int j = 0; j < spec.count; ++j, t *= 0.5) {
        points.push_back(step_toward(candidate, to_point(spec.start), t));
      }
      return points;
    }
    case ProbeSpec::Kind::ZGeom: {
      if (spec.count < 2) throw domain_error("zgeom needs at least two steps");
      if (spec.top < 2) throw domain_error("zgeom needs a top index of at least 2");
      if (candidate.kind() != Point::Kind::Seq) {
        throw domain_error("zgeom probes live in the sequence space");
      }
      std::vector<Point> points;
      points.reserve(static_cast<std::size_t>(spec.count));
      double top_exp = std::log10(static_cast<double>(spec.top));
      for (int j = 1; j <= spec.count; ++j) {
        double e = top_exp * (j - 1) / static_cast<double>(spec.count - 1);
        int k = static_cast<int>(std::lround(std::pow(10.0, e)));
        k = std::max(k, 1);
        points.push_back(seq_translate(candidate, seqspace::z(k)));
      }
      return points;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Statement helpers
// ---------------------------------------------------------------------------

int coordinate_dim(const Carrier& carrier) {
  if (carrier.kind() == Carrier::Kind::FiniteDim) return carrier.dim();
  if (carrier.kind() == Carrier::Kind::FiniteSet &&
      carrier.members().front().kind() == Point::Kind::FiniteVec) {
    return static_cast<int>(carrier.members().front().coords().size());
  }
  throw domain_error("gen applies to finite-dimensional carriers");
}

const char* verb_word(CommandStmt::Verb verb) {
  switch (verb) {
    case CommandStmt::Verb::Eval: return "eval";
    case CommandStmt::Verb::Classify: return "classify";
    case CommandStmt::Verb::Xi: return "xi";
    case CommandStmt::Verb::Probe: return "probe";
    case CommandStmt::Verb::Tilde: return "tilde";
    case CommandStmt::Verb::Spec: return "spec";
    case CommandStmt::Verb::Density: return "density";
    case CommandStmt::Verb::Union: return "union";
  }
  return "command";
}

struct StatementOp {
  const char* operator()(const SpaceStmt&) const { return "space"; }
  const char* operator()(const GenStmt&) const { return "gen"; }
  const char* operator()(const FnStmt&) const { return "fn"; }
  const char* operator()(const AssignStmt&) const { return "assign"; }
  const char* operator()(const UseStmt&) const { return "use"; }
  const char* operator()(const CommandStmt& c) const { return verb_word(c.verb); }
};

const char* diagnosis_word(spectrum::Diagnosis d) {
  switch (d) {
    case spectrum::Diagnosis::NotInCarrier: return "NotInCarrier";
    case spectrum::Diagnosis::DivergentAlongProbe: return "DivergentAlongProbe";
    case spectrum::Diagnosis::AlgebraicContradiction: return "AlgebraicContradiction";
  }
  return "unknown";
}

void fill_outcome(Json& record, const spectrum::HomOutcome& out) {
  if (out.kind == spectrum::HomOutcome::Kind::Evaluation) {
    record.set("outcome", Json::str("evaluation"));
    Json points = Json::array();
    for (const auto& p : out.points) points.push(point_json(p));
    record.set("points", std::move(points));
  } else {
    record.set("outcome", Json::str("obstructed"));
    record.set("points", Json::array());
    if (!out.witness.empty()) record.set("witness", Json::str(out.witness));
    record.set("diagnosis", Json::str(diagnosis_word(out.diagnosis)));
    if (!out.probe.empty()) {
      Json probe = Json::array();
      for (const auto& p : out.probe) probe.push(point_json(p));
      record.set("probe", std::move(probe));
    }
  }
  if (!out.detail.empty()) record.set("detail", Json::str(out.detail));
}

}  // namespace

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

DifferentialSpace& Runner::working(const CommandStmt& c) {
  const std::string& name = c.in_space.empty() ? active_ : c.in_space;
  if (name.empty()) {
    throw domain_error("no active space; define one with 'space' or select one with 'use'");
  }
  auto it = spaces_.find(name);
  if (it == spaces_.end()) throw lookup_error("unknown space '" + name + "'");
  return it->second;
}

spectrum::GeneratorAssignment Runner::target_assignment(const CommandStmt& c) const {
  if (c.value) return to_assignment(*c.value);
  auto it = assigns_.find(c.value_ref);
  if (it == assigns_.end()) {
    throw lookup_error("unknown assignment '" + c.value_ref + "'");
  }
  return it->second;
}

void Runner::run_command(const CommandStmt& c, Json& record) {
  switch (c.verb) {
    case CommandStmt::Verb::Eval: {
      DifferentialSpace& space = working(c);
      record.set("element", Json::str(c.element));
      double value;
      if (c.point) {
        value = space.eval_element(c.element, to_point(*c.point));
      } else {
        auto h = spectrum::Homomorphism::from_assignment(target_assignment(c));
        value = spectrum::apply_hom(space, h, c.element);
      }
      record.set("outcome", Json::str("value"));
      record.set("value", Json::number(value));
      return;
    }
    case CommandStmt::Verb::Classify: {
      DifferentialSpace& space = working(c);
      fill_outcome(record, spectrum::classify(space, target_assignment(c)));
      return;
    }
    case CommandStmt::Verb::Xi: {
      auto rep = seqspace::xi(to_point(*c.point));
      record.set("outcome", Json::str("value"));
      record.set("value", Json::number(rep.value));
      record.set("k0", Json::integer(rep.k0));
      record.set("terms", Json::integer(rep.terms_evaluated));
      Json trace = Json::array();
      for (const auto& term : rep.trace) {
        trace.push(Json::object()
                       .set("k", Json::integer(term.k))
                       .set("scaled_rho", Json::number(term.scaled_rho))
                       .set("phi", Json::number(term.phi)));
      }
      record.set("trace", std::move(trace));
      return;
    }
    case CommandStmt::Verb::Probe: {
      DifferentialSpace& space = working(c);
      Point candidate = to_point(*c.point);
      std::vector<std::vector<Point>> probes;
      probes.reserve(c.probes.size());
      for (const auto& spec : c.probes) probes.push_back(build_probe(spec, candidate));
      auto rep = seqspace::tilde_membership(space, candidate, c.names, probes);
      if (rep.status == seqspace::ProlongationStatus::Prolongable) {
        record.set("outcome", Json::str("prolongable"));
        Json values = Json::object();
        for (const auto& [name, value] : rep.values) values.set(name, Json::number(value));
        record.set("values", std::move(values));
      } else {
        record.set("outcome", Json::str("obstructed"));
        record.set("witness", Json::str(rep.obstructing_witness));
        record.set("probe", Json::integer(rep.obstructing_probe));
        record.set("reason", Json::str(rep.reason));
      }
      return;
    }
    case CommandStmt::Verb::Tilde: {
      Point center = to_point(*c.point);
      DifferentialSpace space = seqspace::tilde_structure(center);
      space.set_sampler_seed(seed_);
      std::string name =
          c.as_name.empty() ? "tilde" + std::to_string(++tilde_count_) : c.as_name;
      record.set("outcome", Json::str("space"));
      record.set("space", Json::str(name));
      record.set("family", Json::boolean(true));
      Json gens = Json::array();
      for (const auto& g : space.generators().named()) gens.push(Json::str(g.name));
      record.set("generators", std::move(gens));
      spaces_.insert_or_assign(name, std::move(space));
      active_ = name;
      return;
    }
    case CommandStmt::Verb::Spec: {
      DifferentialSpace& space = working(c);
      std::vector<spectrum::GeneratorAssignment> extras;
      extras.reserve(c.names.size());
      for (const auto& name : c.names) {
        auto it = assigns_.find(name);
        if (it == assigns_.end()) throw lookup_error("unknown assignment '" + name + "'");
        extras.push_back(it->second);
      }
      DifferentialSpace spec = spectrum::spec_space(space, extras);
      record.set("outcome", Json::str("space"));
      if (!c.as_name.empty()) record.set("space", Json::str(c.as_name));
      Json accepted = Json::array();
      for (const auto& p : spec.carrier().members()) accepted.push(point_json(p));
      record.set("accepted", std::move(accepted));
      Json gens = Json::array();
      for (const auto& g : spec.generators().named()) gens.push(Json::str(g.name));
      record.set("generators", std::move(gens));
      if (!c.as_name.empty()) {
        spaces_.insert_or_assign(c.as_name, std::move(spec));
        active_ = c.as_name;
      }
      return;
    }
    case CommandStmt::Verb::Density: {
      DifferentialSpace& space = working(c);
      auto a = target_assignment(c);
      Point w = spectrum::density_witness(space, a, c.tol, c.names);
      auto out = spectrum::classify(space, a);
      double worst = 0.0;
      for (const auto& f : c.names) {
        worst = std::max(worst, std::abs(space.eval_element(f, w) -
                                         space.eval_element(f, out.points.front())));
      }
      record.set("outcome", Json::str("witness"));
      record.set("point", point_json(w));
      record.set("max_error", Json::number(worst));
      return;
    }
    case CommandStmt::Verb::Union: {
      DifferentialSpace& space = working(c);
      auto out = spectrum::union_classify(space, target_assignment(c));
      if (out.side) {
        record.set("side", Json::str(*out.side == Side::Left ? "left" : "right"));
      }
      fill_outcome(record, out.outcome);
      return;
    }
  }
}

RunResult Runner::run(const Program& p) {
  RunResult result;
  for (const auto& st : p.statements) {
    bool is_command = std::holds_alternative<CommandStmt>(st.node);
    try {
      if (const auto* s = std::get_if<SpaceStmt>(&st.node)) {
        std::vector<Point> removed;
        removed.reserve(s->removed.size());
        for (const auto& lit : s->removed) removed.push_back(to_point(lit));
        DifferentialSpace space = [&] {
          switch (s->domain) {
            case SpaceStmt::Domain::FiniteDim: {
              std::vector<Constraint> constraints;
              constraints.reserve(s->wheres.size());
              for (const auto& w : s->wheres) {
                constraints.push_back(Constraint{build_coord_map(*w.expr, s->dim), w.rel});
              }
              return DifferentialSpace::over_finite_dim(
                  Carrier::finite_dim(s->dim, std::move(constraints), std::move(removed)));
            }
            case SpaceStmt::Domain::SeqSpace:
              if (!s->wheres.empty()) {
                throw domain_error("where clauses need a finite-dimensional domain");
              }
              return DifferentialSpace::over_seq(Carrier::seq_space(std::move(removed)));
            case SpaceStmt::Domain::Points: {
              if (!s->wheres.empty() || !removed.empty()) {
                throw domain_error("points domains take no where or minus clauses");
              }
              std::vector<Point> members;
              members.reserve(s->members.size());
              for (const auto& lit : s->members) members.push_back(to_point(lit));
              return DifferentialSpace::over_finite_dim(Carrier::finite_set(std::move(members)));
            }
            case SpaceStmt::Domain::Union: {
              auto lit = spaces_.find(s->left);
              auto rit = spaces_.find(s->right);
              if (lit == spaces_.end()) throw lookup_error("unknown space '" + s->left + "'");
              if (rit == spaces_.end()) throw lookup_error("unknown space '" + s->right + "'");
              if (!s->wheres.empty() || !removed.empty()) {
                throw domain_error("union domains take no where or minus clauses");
              }
              return DifferentialSpace::union_space(lit->second, rit->second);
            }
            case SpaceStmt::Domain::Tilde:
              if (!s->wheres.empty() || !removed.empty()) {
                throw domain_error("tilde domains take no where or minus clauses");
              }
              return seqspace::tilde_structure(to_point(s->center));
          }
          throw domain_error("unhandled space domain");
        }();
        space.set_sampler_seed(seed_);
        spaces_.insert_or_assign(s->name, std::move(space));
        active_ = s->name;
      } else if (const auto* g = std::get_if<GenStmt>(&st.node)) {
        if (active_.empty()) {
          throw domain_error("no active space; define one with 'space' first");
        }
        DifferentialSpace& space = spaces_.at(active_);
        bool any_theta = false;
        bool all_pi = true;
        for (const auto& item : g->items) {
          any_theta = any_theta || item.kind == GenStmt::Item::Kind::Theta;
          all_pi = all_pi && item.kind == GenStmt::Item::Kind::Pi;
        }
        if (any_theta) {
          for (const auto& item : g->items) {
            if (item.kind != GenStmt::Item::Kind::Theta) {
              throw domain_error(
                  "theta generators cannot mix with other kinds in one gen statement");
            }
            space.add_theta(item.name, to_point(item.theta));
          }
        } else {
          if (!space.registry().empty()) {
            throw domain_error("generators must be named before elements are registered");
          }
          int dim = coordinate_dim(space.carrier());
          DifferentialSpace rebuilt = [&] {
            if (all_pi) {
              std::vector<std::string> names(static_cast<std::size_t>(dim));
              std::vector<bool> seen(static_cast<std::size_t>(dim), false);
              for (const auto& item : g->items) {
                if (item.pi_index < 1 || item.pi_index > dim) {
                  throw domain_error("pi(" + std::to_string(item.pi_index) +
                                     ") is outside the coordinates 1.." + std::to_string(dim));
                }
                if (seen[static_cast<std::size_t>(item.pi_index - 1)]) {
                  throw domain_error("pi(" + std::to_string(item.pi_index) + ") named twice");
                }
                seen[static_cast<std::size_t>(item.pi_index - 1)] = true;
                names[static_cast<std::size_t>(item.pi_index - 1)] = item.name;
              }
              for (bool s2 : seen) {
                if (!s2) {
                  throw domain_error("a projection rename must cover every coordinate");
                }
              }
              return DifferentialSpace::over_finite_dim(space.carrier(), std::move(names));
            }
            std::vector<std::pair<std::string, SmoothMap>> gens;
            gens.reserve(g->items.size());
            for (const auto& item : g->items) {
              if (item.kind == GenStmt::Item::Kind::Pi) {
                if (item.pi_index < 1 || item.pi_index > dim) {
                  throw domain_error("pi(" + std::to_string(item.pi_index) +
                                     ") is outside the coordinates 1.." + std::to_string(dim));
                }
                gens.emplace_back(item.name, SmoothMap::slot(dim, item.pi_index - 1));
              } else {
                gens.emplace_back(item.name, build_coord_map(*item.map, dim));
              }
            }
            return DifferentialSpace::with_map_generators(space.carrier(), gens);
          }();
          rebuilt.set_sampler_seed(space.sampler_seed());
          spaces_.insert_or_assign(active_, std::move(rebuilt));
        }
      } else if (const auto* f = std::get_if<FnStmt>(&st.node)) {
        if (active_.empty()) {
          throw domain_error("no active space; define one with 'space' first");
        }
        DifferentialSpace& space = spaces_.at(active_);
        switch (f->kind) {
          case FnStmt::Kind::Xi:
            space.register_xi(f->name, to_point(f->center));
            break;
          case FnStmt::Kind::XiAtlas:
            seqspace::xi_atlas(space, f->name, f->atlas_depth);
            break;
          case FnStmt::Kind::Expr: {
            std::vector<std::string> inputs;
            collect_inputs(*f->expr, space, inputs);
            SmoothMap map = build_map(*f->expr, space, inputs);
            space.superpose(f->name, map, inputs);
            break;
          }
        }
      } else if (const auto* a = std::get_if<AssignStmt>(&st.node)) {
        assigns_.insert_or_assign(a->name, to_assignment(a->value));
      } else if (const auto* u = std::get_if<UseStmt>(&st.node)) {
        if (!spaces_.count(u->name)) throw lookup_error("unknown space '" + u->name + "'");
        active_ = u->name;
      } else {
        const auto& c = std::get<CommandStmt>(st.node);
        Json record = Json::object();
        record.set("op", Json::str(verb_word(c.verb)));
        record.set("line", Json::integer(st.line));
        record.set("seed", Json::integer(static_cast<long long>(seed_)));
        run_command(c, record);
        result.records.push_back(std::move(record));
      }
    } catch (const std::exception& e) {
      Json record = Json::object();
      record.set("op", Json::str(std::visit(StatementOp{}, st.node)));
      record.set("line", Json::integer(st.line));
      record.set("seed", Json::integer(static_cast<long long>(seed_)));
      record.set("outcome", Json::str("error"));
      record.set("error", Json::str(e.what()));
      result.records.push_back(std::move(record));
      result.ok = false;
      if (!is_command) break;  // later statements depend on the failed name
    }
  }
  return result;
}

std::string RunResult::render(bool hex_floats) const {
  std::string out;
  for (const auto& record : records) {
    out += record.print(hex_floats);
    out += '\n';
  }
  return out;
}

}  // namespace diffspace::dsl
