#include "diffspace/spectrum.hpp"

#include <cmath>
#include <vector>

#include "diffspace/carrier.hpp"
#include "diffspace/errors.hpp"
#include "diffspace/rng.hpp"
#include "diffspace/seqspace.hpp"
#include "diffspace/smooth_map.hpp"
#include "diffspace/structure.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace diffspace;
namespace sp = diffspace::spectrum;

namespace {

DifferentialSpace plane_without_origin() {
  auto s = DifferentialSpace::over_finite_dim(
      Carrier::finite_dim(2, {}, {Point::finite_vec({0.0, 0.0})}));
  return s;
}

DifferentialSpace unit_circle() {
  SmoothMap r2 = SmoothMap::slot(2, 0).pow(2) + SmoothMap::slot(2, 1).pow(2) -
                 SmoothMap::constant(2, 1.0);
  return DifferentialSpace::over_finite_dim(Carrier::finite_dim(2, {{r2, Relation::EqZero}}));
}

sp::GeneratorAssignment ev_values(const DifferentialSpace& s, const Point& p) {
  sp::GeneratorAssignment a;
  for (const auto& g : s.generators().named()) {
    a.values[g.name] = s.eval_element(g.name, p);
  }
  return a;
}

}  // namespace

TEST_CASE("evaluation homomorphisms delegate to element evaluation") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(2));
  s.superpose("f", SmoothMap::slot(2, 0).pow(2) + SmoothMap::slot(2, 1), {"x1", "x2"});
  s.superpose("one", SmoothMap::constant(0, 1.0), {});

  auto h = sp::ev(s, Point::finite_vec({2.0, 3.0}));
  CHECK(sp::apply_hom(s, h, "f") == 7.0);
  CHECK(sp::apply_hom(s, h, "one") == 1.0);
  CHECK(sp::apply_hom(s, h, "x1") == 2.0);

  CHECK_THROWS_AS(sp::ev(plane_without_origin(), Point::finite_vec({0.0, 0.0})),
                  diffspace::domain_error);
}

TEST_CASE("evaluation respects sums and products exactly") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(2));
  auto eng = stream_engine(31, 0);
  for (int trial = 0; trial < 100; ++trial) {
    SmoothMap f = testsupport::random_poly(eng, 2);
    SmoothMap g = testsupport::random_poly(eng, 2);
    std::string fn = "f" + std::to_string(trial);
    std::string gn = "g" + std::to_string(trial);
    s.superpose(fn, f, {"x1", "x2"});
    s.superpose(gn, g, {"x1", "x2"});
    s.superpose(fn + "+" + gn, SmoothMap::slot(2, 0) + SmoothMap::slot(2, 1), {fn, gn});
    s.superpose(fn + "*" + gn, SmoothMap::slot(2, 0) * SmoothMap::slot(2, 1), {fn, gn});

    Point p = s.carrier().sample_at(31, trial);
    auto h = sp::ev(s, p);
    double fv = sp::apply_hom(s, h, fn);
    double gv = sp::apply_hom(s, h, gn);
    CHECK(sp::apply_hom(s, h, fn + "+" + gn) == fv + gv);
    CHECK(sp::apply_hom(s, h, fn + "*" + gn) == fv * gv);
  }
}

TEST_CASE("assignments extend through superpositions by the composition law") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(2));
  s.superpose("f", exp(SmoothMap::slot(2, 0)) * SmoothMap::slot(2, 1), {"x1", "x2"});

  sp::GeneratorAssignment a;
  a.values["x1"] = 2.0;
  a.values["x2"] = 3.0;
  auto h = sp::Homomorphism::from_assignment(a);
  CHECK(sp::apply_hom(s, h, "f") == doctest::Approx(3.0 * std::exp(2.0)).epsilon(1e-12));
  CHECK(sp::apply_hom(s, h, "f") == 3.0 * std::exp(2.0));

  // An assignment matching an evaluation agrees with it on superposed
  // elements, bit for bit.
  auto eng = stream_engine(7, 3);
  for (int trial = 0; trial < 200; ++trial) {
    SmoothMap f = testsupport::random_poly(eng, 2);
    std::string fn = "p" + std::to_string(trial);
    s.superpose(fn, f, {"x1", "x2"});
    Point p = s.carrier().sample_at(17, trial);
    auto matching = sp::Homomorphism::from_assignment(ev_values(s, p));
    CHECK(sp::apply_hom(s, matching, fn) == sp::apply_hom(s, sp::ev(s, p), fn));
  }
}

TEST_CASE("assignments reject localized elements and missing generators") {
  auto s = DifferentialSpace::over_seq(Carrier::seq_space({Point::zero_seq()}));
  s.register_xi("xi", Point::zero_seq());

  sp::GeneratorAssignment a;
  a.values["pi1"] = 0.5;
  auto h = sp::Homomorphism::from_assignment(a);
  CHECK_THROWS_AS(sp::apply_hom(s, h, "xi"), diffspace::domain_error);
  // Unnamed sequence projections fall back to the default tail.
  CHECK(sp::apply_hom(s, h, "pi1") == 0.5);
  CHECK(sp::apply_hom(s, h, "pi7") == 0.0);

  auto line = DifferentialSpace::over_finite_dim(Carrier::finite_dim(2));
  sp::GeneratorAssignment partial;
  partial.values["x1"] = 1.0;
  auto hp = sp::Homomorphism::from_assignment(partial);
  CHECK_THROWS_AS(sp::apply_hom(line, hp, "x2"), diffspace::domain_error);
  CHECK_THROWS_AS(sp::apply_hom(line, hp, "missing"), diffspace::lookup_error);
}

TEST_CASE("point recovery reads projection values") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(2));
  auto h = sp::ev(s, Point::finite_vec({1.0, 2.0}));
  CHECK(sp::recover_point(s, h) == Point::finite_vec({1.0, 2.0}));

  sp::GeneratorAssignment a;
  a.values["x1"] = 0.5;
  a.values["x2"] = -1.0;
  CHECK(sp::recover_point(s, sp::Homomorphism::from_assignment(a)) ==
        Point::finite_vec({0.5, -1.0}));

  sp::GeneratorAssignment partial;
  partial.values["x1"] = 0.5;
  CHECK_THROWS_AS(sp::recover_point(s, sp::Homomorphism::from_assignment(partial)),
                  diffspace::domain_error);

  auto seq = DifferentialSpace::over_seq(Carrier::seq_space({}));
  sp::GeneratorAssignment sa;
  sa.values["pi2"] = 4.0;
  sa.values["pi5"] = 0.0;
  CHECK(sp::recover_point(seq, sp::Homomorphism::from_assignment(sa)) ==
        Point::seq({{2, 4.0}}));
  sa.default_tail = 1.0;
  CHECK_THROWS_AS(sp::recover_point(seq, sp::Homomorphism::from_assignment(sa)),
                  diffspace::domain_error);
}

TEST_CASE("recovered points satisfy the difference decomposition") {
  // chi(f) = f(p) once chi agrees with ev_p on projections: each factored
  // difference term carries a (chi(x_i) - p_i) factor that vanishes.
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(3));
  auto eng = stream_engine(41, 0);
  for (int trial = 0; trial < 100; ++trial) {
    SmoothMap f = testsupport::random_poly(eng, 3);
    Point p = s.carrier().sample_at(43, trial);
    auto a = ev_values(s, p);
    auto h = sp::Homomorphism::from_assignment(a);
    Point q = sp::recover_point(s, h);
    CHECK(q == p);

    auto factors = hadamard_factors(f, p.coords());
    double residual = 0.0;
    for (std::size_t i = 0; i < factors.factors.size(); ++i) {
      double xi = a.values.at("x" + std::to_string(i + 1));
      residual += factors.factors[i].eval(p.coords()) * (xi - p.coordinate(int(i) + 1));
    }
    CHECK(residual == 0.0);
    CHECK(factors.base_value == f.eval(p.coords()));
  }
}

TEST_CASE("classification accepts interior candidates") {
  auto s = plane_without_origin();
  sp::GeneratorAssignment a;
  a.values["x1"] = 1.0;
  a.values["x2"] = 0.0;
  auto out = sp::classify(s, a);
  REQUIRE(out.kind == sp::HomOutcome::Kind::Evaluation);
  REQUIRE(out.points.size() == 1);
  CHECK(out.points[0] == Point::finite_vec({1.0, 0.0}));
}

TEST_CASE("classification refutes the deleted origin algebraically") {
  auto s = plane_without_origin();
  sp::GeneratorAssignment a;
  a.values["x1"] = 0.0;
  a.values["x2"] = 0.0;
  auto out = sp::classify(s, a);
  REQUIRE(out.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(out.diagnosis == sp::Diagnosis::AlgebraicContradiction);
  CHECK(out.witness.find("1/|x - ") != std::string::npos);
  REQUIRE(out.witness_element);
  // The witness is a genuine element of the deleted plane: evaluable on
  // members, and reciprocal to the squared distance.
  Point q = Point::finite_vec({3.0, 4.0});
  CHECK(s.eval(*out.witness_element, q) == 1.0 / 25.0);
  CHECK(out.detail.find("chi(1)") != std::string::npos);
}

TEST_CASE("classification is sound over unconstrained tuples") {
  for (int dim = 1; dim <= 6; ++dim) {
    auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(dim));
    for (int trial = 0; trial < 17; ++trial) {
      Point p = s.carrier().sample_at(100 + dim, trial);
      auto out = sp::classify(s, ev_values(s, p));
      REQUIRE(out.kind == sp::HomOutcome::Kind::Evaluation);
      REQUIRE(out.points.size() == 1);
      CHECK(out.points[0] == p);
    }
  }
}

TEST_CASE("classification rejects candidates off a constraint surface") {
  auto s = unit_circle();
  sp::GeneratorAssignment a;
  a.values["x1"] = 0.5;
  a.values["x2"] = 0.5;
  auto out = sp::classify(s, a);
  REQUIRE(out.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(out.diagnosis == sp::Diagnosis::AlgebraicContradiction);

  sp::GeneratorAssignment on;
  on.values["x1"] = std::sqrt(0.5);
  on.values["x2"] = std::sqrt(0.5);
  auto ok = sp::classify(s, on);
  CHECK(ok.kind == sp::HomOutcome::Kind::Evaluation);
}

TEST_CASE("non-separating generators report the whole fiber") {
  auto carrier = Carrier::finite_set({Point::finite_vec({-1.0}), Point::finite_vec({1.0}),
                                      Point::finite_vec({2.0})});
  auto s = DifferentialSpace::with_map_generators(carrier,
                                                  {{"q", SmoothMap::slot(1, 0).pow(2)}});
  sp::GeneratorAssignment a;
  a.values["q"] = 1.0;
  auto out = sp::classify(s, a);
  REQUIRE(out.kind == sp::HomOutcome::Kind::Evaluation);
  REQUIRE(out.points.size() == 2);
  CHECK(out.points[0] == Point::finite_vec({-1.0}));
  CHECK(out.points[1] == Point::finite_vec({1.0}));

  a.values["q"] = 9.0;
  auto none = sp::classify(s, a);
  CHECK(none.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(none.diagnosis == sp::Diagnosis::NotInCarrier);
}

TEST_CASE("sequence assignments either evaluate or diverge along the probe") {
  auto s = DifferentialSpace::over_seq(Carrier::seq_space({Point::zero_seq()}));
  s.register_xi("xi", Point::zero_seq());

  // All projections to zero: the origin is deleted, and the registered
  // cutoff sum blows up along the probe path.
  sp::GeneratorAssignment zero;
  auto out = sp::classify(s, zero);
  REQUIRE(out.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(out.diagnosis == sp::Diagnosis::DivergentAlongProbe);
  CHECK(out.witness == "xi");
  REQUIRE(out.probe.size() == 20);
  CHECK(out.probe.back() == seqspace::z(1000000));

  // A finitely supported assignment lands on a member.
  sp::GeneratorAssignment inside;
  inside.values["pi3"] = 1.25;
  auto ok = sp::classify(s, inside);
  REQUIRE(ok.kind == sp::HomOutcome::Kind::Evaluation);
  CHECK(ok.points[0] == Point::seq({{3, 1.25}}));

  // Nonzero default tail: not finitely supported.
  sp::GeneratorAssignment tail;
  tail.default_tail = 0.5;
  auto bad = sp::classify(s, tail);
  REQUIRE(bad.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(bad.diagnosis == sp::Diagnosis::NotInCarrier);
}

TEST_CASE("unregistered cutoff witnesses are constructed on demand") {
  Point hole = Point::seq({{2, 1.0}});
  auto s = DifferentialSpace::over_seq(Carrier::seq_space({hole}));
  sp::GeneratorAssignment a;
  a.values["pi2"] = 1.0;
  auto out = sp::classify(s, a);
  REQUIRE(out.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(out.diagnosis == sp::Diagnosis::DivergentAlongProbe);
  CHECK(out.witness.find("xi[") != std::string::npos);
  REQUIRE(out.witness_element);
  // The witness is centered at the hole, so it evaluates finitely at
  // members and its probe values grow without bound.
  CHECK(s.eval(*out.witness_element, Point::seq({{2, 1.0}, {5, 0.3}})) >= 0.0);
}

TEST_CASE("characteristic generators force their value at the candidate") {
  Point p = Point::seq({{1, 0.5}, {4, -2.0}});
  auto v = seqspace::tilde_structure(p);

  sp::GeneratorAssignment match;
  match.values["pi1"] = 0.5;
  match.values["pi4"] = -2.0;
  match.values["theta"] = 1.0;
  auto ok = sp::classify(v, match);
  REQUIRE(ok.kind == sp::HomOutcome::Kind::Evaluation);
  CHECK(ok.points[0] == p);

  match.values["theta"] = 0.0;
  auto bad = sp::classify(v, match);
  REQUIRE(bad.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(bad.diagnosis == sp::Diagnosis::AlgebraicContradiction);
  CHECK(bad.witness == "theta");

  // Off-candidate theta value must be 0.
  sp::GeneratorAssignment off;
  off.values["pi1"] = 0.25;
  off.values["theta"] = 1.0;
  auto bad2 = sp::classify(v, off);
  REQUIRE(bad2.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(bad2.witness == "theta");

  off.values["theta"] = 0.0;
  auto fine = sp::classify(v, off);
  CHECK(fine.kind == sp::HomOutcome::Kind::Evaluation);
}

TEST_CASE("hat functions act on homomorphisms") {
  auto s = unit_circle();
  s.superpose("f", SmoothMap::slot(2, 0) * SmoothMap::slot(2, 1), {"x1", "x2"});
  s.superpose("one", SmoothMap::constant(0, 1.0), {});
  auto fhat = sp::hat(s, "f");
  auto onehat = sp::hat(s, "one");

  for (int trial = 0; trial < 100; ++trial) {
    Point p = s.carrier().sample_at(3, trial);
    auto h = sp::ev(s, p);
    CHECK(fhat(h) == s.eval_element("f", p));
    CHECK(onehat(h) == 1.0);
  }
  CHECK_THROWS_AS(sp::hat(s, "nope"), diffspace::lookup_error);

  // hat(omega o (f1, f2)) = omega(hat f1, hat f2) on homomorphisms.
  s.superpose("g", SmoothMap::slot(2, 0) + exp(SmoothMap::slot(2, 1)), {"f", "x2"});
  auto ghat = sp::hat(s, "g");
  auto x2hat = sp::hat(s, "x2");
  for (int trial = 0; trial < 50; ++trial) {
    Point p = s.carrier().sample_at(9, trial);
    auto h = sp::ev(s, p);
    CHECK(ghat(h) == fhat(h) + std::exp(x2hat(h)));
  }
}

TEST_CASE("generator determinacy: equal on generators means equal on elements") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(2));
  auto eng = stream_engine(77, 0);
  std::vector<std::string> names;
  for (int i = 0; i < 40; ++i) {
    std::string n = "e" + std::to_string(i);
    s.superpose(n, testsupport::random_poly(eng, 2), {"x1", "x2"});
    names.push_back(n);
  }
  for (int trial = 0; trial < 25; ++trial) {
    Point p = s.carrier().sample_at(78, trial);
    auto via_point = sp::ev(s, p);
    auto via_values = sp::Homomorphism::from_assignment(ev_values(s, p));
    for (const auto& n : names) {
      CHECK(sp::apply_hom(s, via_point, n) == sp::apply_hom(s, via_values, n));
    }
  }
}

TEST_CASE("the spectrum over a finite-dimensional space reproduces the carrier") {
  auto s = unit_circle();
  auto spec = sp::spec_space(s);
  const auto& accepted = spec.carrier().members();
  CHECK(accepted.size() >= 20);
  for (const auto& p : accepted) {
    CHECK(s.carrier().contains(p));
    // iota = kappa o ev: the hat generator at the accepted point equals
    // the original generator at the carrier point.
    CHECK(spec.eval_element("hat.x1", p) == s.eval_element("x1", p));
    CHECK(spec.eval_element("hat.x2", p) == s.eval_element("x2", p));
  }

  // Idempotence at desk scale: the spectrum of the spectrum keeps the
  // same accepted set.
  auto spec2 = sp::spec_space(spec);
  CHECK(spec2.carrier().members() == accepted);
}

TEST_CASE("extra accepted assignments join the spectrum carrier") {
  auto s = plane_without_origin();
  sp::GeneratorAssignment a;
  a.values["x1"] = 0.125;
  a.values["x2"] = -0.25;
  auto spec = sp::spec_space(s, {a}, 8);
  Point expected = Point::finite_vec({0.125, -0.25});
  bool found = false;
  for (const auto& p : spec.carrier().members()) {
    if (p == expected) found = true;
  }
  CHECK(found);

  // Obstructed extras never enter the carrier.
  sp::GeneratorAssignment origin;
  origin.values["x1"] = 0.0;
  origin.values["x2"] = 0.0;
  auto spec2 = sp::spec_space(s, {origin}, 8);
  for (const auto& p : spec2.carrier().members()) {
    CHECK(p != Point::finite_vec({0.0, 0.0}));
  }

  // Sequence carriers have no finite realization.
  auto seq = DifferentialSpace::over_seq(Carrier::seq_space({}));
  CHECK_THROWS_AS(sp::spec_space(seq), diffspace::domain_error);
}

TEST_CASE("density witnesses approximate accepted assignments") {
  auto s = unit_circle();
  // Build the assignment from a sampled point: the search window then
  // holds an exact match.
  Point q = s.carrier().sample_at(s.sampler_seed(), 2);
  auto a = ev_values(s, q);
  Point w = sp::density_witness(s, a, 1e-3, {"x1", "x2"});
  CHECK(std::abs(s.eval_element("x1", w) - a.values["x1"]) <= 1e-3);
  CHECK(std::abs(s.eval_element("x2", w) - a.values["x2"]) <= 1e-3);

  // A non-sampled accepted assignment still has its own candidate.
  sp::GeneratorAssignment top;
  top.values["x1"] = 0.0;
  top.values["x2"] = 1.0;
  Point w2 = sp::density_witness(s, top, 1e-6, {"x1", "x2"});
  CHECK(std::abs(s.eval_element("x2", w2) - 1.0) <= 1e-6);

  CHECK_THROWS_AS(sp::density_witness(s, a, 1e-3, {}), diffspace::domain_error);
  sp::GeneratorAssignment origin;
  origin.values["x1"] = 0.0;
  origin.values["x2"] = 0.0;
  CHECK_THROWS_AS(sp::density_witness(s, origin, 1e-3, {"x1"}), diffspace::domain_error);
}

TEST_CASE("union classification selects a side by the idempotents") {
  auto left = plane_without_origin();
  auto right = DifferentialSpace::over_finite_dim(Carrier::finite_dim(1));
  auto u = DifferentialSpace::union_space(std::move(left), std::move(right));

  sp::GeneratorAssignment a;
  a.values["(1,0)"] = 1.0;
  a.values["(0,1)"] = 0.0;
  a.values["left.x1"] = 1.0;
  a.values["left.x2"] = 2.0;
  auto out = sp::union_classify(u, a);
  REQUIRE(out.side.has_value());
  CHECK(*out.side == Side::Left);
  REQUIRE(out.outcome.kind == sp::HomOutcome::Kind::Evaluation);
  CHECK(out.outcome.points[0] == Point::tagged(Side::Left, Point::finite_vec({1.0, 2.0})));

  // The deleted origin still obstructs through the union.
  a.values["left.x1"] = 0.0;
  a.values["left.x2"] = 0.0;
  auto blocked = sp::union_classify(u, a);
  CHECK(*blocked.side == Side::Left);
  CHECK(blocked.outcome.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(blocked.outcome.witness.rfind("left.", 0) == 0);

  sp::GeneratorAssignment b;
  b.values["(1,0)"] = 0.0;
  b.values["(0,1)"] = 1.0;
  b.values["right.x1"] = -3.5;
  auto r = sp::union_classify(u, b);
  CHECK(*r.side == Side::Right);
  REQUIRE(r.outcome.kind == sp::HomOutcome::Kind::Evaluation);
  CHECK(r.outcome.points[0] == Point::tagged(Side::Right, Point::finite_vec({-3.5})));
}

TEST_CASE("union idempotent values outside {0,1} are contradictions") {
  auto u = DifferentialSpace::union_space(
      DifferentialSpace::over_finite_dim(Carrier::finite_dim(1)),
      DifferentialSpace::over_finite_dim(Carrier::finite_dim(1)));

  sp::GeneratorAssignment a;
  a.values["(1,0)"] = 0.5;
  a.values["(0,1)"] = 0.5;
  auto out = sp::union_classify(u, a);
  CHECK(!out.side.has_value());
  REQUIRE(out.outcome.kind == sp::HomOutcome::Kind::Obstructed);
  CHECK(out.outcome.diagnosis == sp::Diagnosis::AlgebraicContradiction);

  sp::GeneratorAssignment both;
  both.values["(1,0)"] = 1.0;
  both.values["(0,1)"] = 1.0;
  CHECK(sp::union_classify(u, both).outcome.kind == sp::HomOutcome::Kind::Obstructed);

  sp::GeneratorAssignment missing;
  missing.values["(1,0)"] = 1.0;
  CHECK_THROWS_AS(sp::union_classify(u, missing), diffspace::domain_error);

  sp::GeneratorAssignment stray;
  stray.values["(1,0)"] = 1.0;
  stray.values["(0,1)"] = 0.0;
  stray.values["x1"] = 1.0;
  CHECK_THROWS_AS(sp::union_classify(u, stray), diffspace::lookup_error);
}

TEST_CASE("union classification of tagged evaluations") {
  auto u = DifferentialSpace::union_space(
      DifferentialSpace::over_finite_dim(Carrier::finite_dim(2)),
      DifferentialSpace::over_finite_dim(Carrier::finite_dim(1)));
  Point q = Point::tagged(Side::Right, Point::finite_vec({4.0}));
  auto out = sp::union_classify(u, sp::ev(u, q));
  CHECK(*out.side == Side::Right);
  REQUIRE(out.outcome.kind == sp::HomOutcome::Kind::Evaluation);
  CHECK(out.outcome.points[0] == q);
}
