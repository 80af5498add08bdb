#include "diffspace/structure.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "diffspace/errors.hpp"
#include "doctest.h"
#include "test_support.hpp"

using diffspace::AlgebraElement;
using diffspace::Carrier;
using diffspace::DifferentialSpace;
using diffspace::Guard;
using diffspace::Point;
using diffspace::Region;
using diffspace::RegionTerm;
using diffspace::Relation;
using diffspace::Side;
using diffspace::SmoothMap;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DifferentialSpace plane_space() {
  return DifferentialSpace::over_finite_dim(Carrier::finite_dim(2));
}

SmoothMap add2() { return SmoothMap::slot(2, 0) + SmoothMap::slot(2, 1); }
SmoothMap mul2() { return SmoothMap::slot(2, 0) * SmoothMap::slot(2, 1); }

}  // namespace

TEST_CASE("generators are pre-registered and evaluate as projections") {
  auto s = plane_space();
  CHECK(s.eval_element("x1", Point::finite_vec({2.0, 3.0})) == 2.0);
  CHECK(s.eval_element("x2", Point::finite_vec({2.0, 3.0})) == 3.0);
  CHECK_THROWS_AS(s.eval_element("x3", Point::finite_vec({2.0, 3.0})), diffspace::lookup_error);
}

TEST_CASE("superpose builds named elements over generators and elements") {
  auto s = plane_space();
  SmoothMap outer = SmoothMap::slot(2, 0).pow(2) + SmoothMap::slot(2, 1);
  s.superpose("f", outer, {"x1", "x2"});
  CHECK(s.eval_element("f", Point::finite_vec({2.0, 3.0})) == 7.0);

  // Elements can feed further superpositions.
  s.superpose("g", SmoothMap::slot(1, 0) * SmoothMap::constant(1, 2.0), {"f"});
  CHECK(s.eval_element("g", Point::finite_vec({2.0, 3.0})) == 14.0);
}

TEST_CASE("superposition coherence: element eval equals the map of input evals") {
  auto s = plane_space();
  for (int trial = 0; trial < 10; ++trial) {
    auto eng = diffspace::stream_engine(21, static_cast<std::uint64_t>(trial));
    SmoothMap outer = testsupport::random_poly(eng, 2);
    std::string name = "c" + std::to_string(trial);
    s.superpose(name, outer, {"x1", "x2"});
    for (int rep = 0; rep < 10; ++rep) {
      auto xs = testsupport::random_args(eng, 2);
      Point p = Point::finite_vec(xs);
      double via_element = s.eval_element(name, p);
      double direct = outer.eval(std::vector<double>{xs[0], xs[1]});
      CHECK(via_element == direct);  // bitwise: same tree, same arguments
    }
  }
}

TEST_CASE("pointwise algebra laws hold exactly through superpose") {
  auto s = plane_space();
  s.superpose("f", SmoothMap::slot(2, 0).pow(2), {"x1", "x2"});
  s.superpose("g", sin(SmoothMap::slot(2, 1)), {"x1", "x2"});
  s.superpose("f_plus_g", add2(), {"f", "g"});
  s.superpose("f_times_g", mul2(), {"f", "g"});
  s.superpose("one", SmoothMap::constant(0, 1.0), {});
  for (const auto& p : Carrier::finite_dim(2).sample(4, 25)) {
    double f = s.eval_element("f", p);
    double g = s.eval_element("g", p);
    CHECK(s.eval_element("f_plus_g", p) == f + g);
    CHECK(s.eval_element("f_times_g", p) == f * g);
    CHECK(s.eval_element("one", p) == 1.0);
  }
}

TEST_CASE("reciprocal of a positive element registers on the punctured plane") {
  Carrier m = Carrier::finite_dim(2, {}, {Point::finite_vec({0.0, 0.0})});
  auto s = DifferentialSpace::over_finite_dim(m);
  SmoothMap omega = SmoothMap::slot(2, 0).pow(2) + SmoothMap::slot(2, 1).pow(2);
  s.superpose("omega", omega, {"x1", "x2"});
  s.superpose("inv_omega", SmoothMap::slot(1, 0).reciprocal(Guard::Positive), {"omega"});
  CHECK(s.eval_element("inv_omega", Point::finite_vec({1.0, 0.0})) == 1.0);
  CHECK(s.eval_element("inv_omega", Point::finite_vec({2.0, 0.0})) == 0.25);
  // The removed point is not a member, so evaluation there is refused.
  CHECK_THROWS_AS(s.eval_element("inv_omega", Point::finite_vec({0.0, 0.0})),
                  diffspace::domain_error);
}

TEST_CASE("registration validates elements on sampled carrier points") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(1));
  // 1/x1 with a positivity guard fails on a carrier whose samples reach
  // negative values, so the registration itself refuses.
  CHECK_THROWS_AS(
      s.superpose("bad", SmoothMap::slot(1, 0).reciprocal(Guard::Positive), {"x1"}),
      diffspace::guard_violation);
  CHECK_FALSE(s.has_element("bad"));
}

TEST_CASE("superpose rejects unknown names and arity mismatches") {
  auto s = plane_space();
  CHECK_THROWS_AS(s.superpose("f", add2(), {"x1", "nope"}), diffspace::lookup_error);
  CHECK_THROWS_AS(s.superpose("f", add2(), {"x1"}), diffspace::arity_error);
  s.superpose("f", add2(), {"x1", "x2"});
  CHECK_THROWS_AS(s.superpose("f", add2(), {"x1", "x2"}), diffspace::domain_error);
  CHECK_THROWS_AS(s.superpose("x1", add2(), {"x1", "x2"}), diffspace::domain_error);
}

TEST_CASE("a single full-region atlas piece behaves as a global element") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(1));
  DifferentialSpace::PieceSpec piece{Region{RegionTerm{"x1", -kInf, kInf}},
                                     SmoothMap::slot(1, 0).pow(2),
                                     {"x1"}};
  s.from_atlas("sq", {piece});
  CHECK(s.eval_element("sq", Point::finite_vec({3.0})) == 9.0);
  CHECK(s.eval_element("sq", Point::finite_vec({-0.5})) == 0.25);
}

TEST_CASE("overlapping atlas pieces must agree at sampled points") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(1));
  DifferentialSpace::PieceSpec lo{Region{RegionTerm{"x1", -kInf, 1.0}},
                                  SmoothMap::constant(1, 0.0),
                                  {"x1"}};
  DifferentialSpace::PieceSpec hi{Region{RegionTerm{"x1", -1.0, kInf}},
                                  SmoothMap::constant(1, 0.5),
                                  {"x1"}};
  CHECK_THROWS_AS(s.from_atlas("bad", {lo, hi}), diffspace::atlas_error);
}

TEST_CASE("atlas coverage gaps are reported with the offending point") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(1));
  DifferentialSpace::PieceSpec far{Region{RegionTerm{"x1", 2.0, kInf}},
                                   SmoothMap::constant(1, 1.0),
                                   {"x1"}};
  CHECK_THROWS_AS(s.from_atlas("gap", {far}), diffspace::atlas_error);
}

TEST_CASE("consistent two-piece atlases select the lowest covering piece") {
  auto s = DifferentialSpace::over_finite_dim(Carrier::finite_dim(1));
  // Same function in two different but exactly agreeing forms.
  DifferentialSpace::PieceSpec left{Region{RegionTerm{"x1", -kInf, 0.1}},
                                    SmoothMap::slot(1, 0).pow(2),
                                    {"x1"}};
  DifferentialSpace::PieceSpec right{Region{RegionTerm{"x1", -0.1, kInf}},
                                     SmoothMap::slot(1, 0) * SmoothMap::slot(1, 0),
                                     {"x1"}};
  s.from_atlas("sq", {left, right});
  CHECK(s.eval_element("sq", Point::finite_vec({-1.0})) == 1.0);
  CHECK(s.eval_element("sq", Point::finite_vec({0.0})) == 0.0);
  CHECK(s.eval_element("sq", Point::finite_vec({2.0})) == 4.0);
  // A point covered by no region is an evaluation error for the element
  // itself. Regions below stop at 100, past every validation sample, so the
  // atlas registers fine but leaves a hole at 1e9.
  DifferentialSpace::PieceSpec bounded{Region{RegionTerm{"x1", -0.1, 100.0}},
                                       SmoothMap::slot(1, 0) * SmoothMap::slot(1, 0),
                                       {"x1"}};
  s.from_atlas("sq_holed", {left, bounded});
  CHECK(s.eval_element("sq_holed", Point::finite_vec({2.0})) == 4.0);
  CHECK_THROWS_AS(s.eval_element("sq_holed", Point::finite_vec({1e9})),
                  diffspace::atlas_error);
}

TEST_CASE("restriction keeps elements evaluable and commutes with evaluation") {
  auto s = plane_space();
  SmoothMap omega = SmoothMap::slot(2, 0).pow(2) + SmoothMap::slot(2, 1).pow(2);
  s.superpose("omega", omega, {"x1", "x2"});

  std::vector<double> origin = {0.0, 0.0};
  diffspace::Constraint on_circle{diffspace::distance_sq(origin) - SmoothMap::constant(2, 1.0),
                                  Relation::EqZero};
  Carrier circle = Carrier::finite_dim(2, {on_circle});
  auto sub = s.restrict(circle);

  CHECK(sub.is_restricted());
  CHECK(sub.generator_display("x1") == "x1|M");
  CHECK(sub.eval_element("x1", Point::finite_vec({1.0, 0.0})) == 1.0);
  for (const auto& p : circle.sample(9, 25)) {
    CHECK(sub.eval_element("omega", p) == s.eval_element("omega", p));
  }
  // Points off the circle are not members of the restricted space.
  CHECK_THROWS_AS(sub.eval_element("omega", Point::finite_vec({2.0, 0.0})),
                  diffspace::domain_error);
}

TEST_CASE("restriction to a non-subset is rejected") {
  Carrier m = Carrier::finite_dim(2, {}, {Point::finite_vec({0.0, 0.0})});
  auto s = DifferentialSpace::over_finite_dim(m);
  Carrier bad = Carrier::finite_set({Point::finite_vec({0.0, 0.0})});
  CHECK_THROWS_AS(s.restrict(bad), diffspace::domain_error);
}

TEST_CASE("union spaces carry the idempotent pair constants") {
  auto u = DifferentialSpace::union_space(plane_space(),
                                          DifferentialSpace::over_finite_dim(Carrier::finite_dim(1)));
  Point pl = Point::tagged(Side::Left, Point::finite_vec({2.0, 3.0}));
  Point pr = Point::tagged(Side::Right, Point::finite_vec({5.0}));
  CHECK(u.eval_element("(1,0)", pl) == 1.0);
  CHECK(u.eval_element("(1,0)", pr) == 0.0);
  CHECK(u.eval_element("(0,1)", pl) == 0.0);
  CHECK(u.eval_element("(0,1)", pr) == 1.0);

  u.superpose("unit_sum", add2(), {"(1,0)", "(0,1)"});
  u.superpose("unit_prod", mul2(), {"(1,0)", "(0,1)"});
  for (const auto& p : u.carrier().sample(13, 30)) {
    CHECK(u.eval_element("unit_sum", p) == 1.0);
    CHECK(u.eval_element("unit_prod", p) == 0.0);
  }
}

TEST_CASE("pair elements decompose through the idempotents") {
  auto a = plane_space();
  a.superpose("f", mul2(), {"x1", "x2"});
  a.superpose("zero", SmoothMap::constant(0, 0.0), {});
  auto b = DifferentialSpace::over_finite_dim(Carrier::finite_dim(1));
  b.superpose("g", sin(SmoothMap::slot(1, 0)), {"x1"});
  b.superpose("zero", SmoothMap::constant(0, 0.0), {});

  auto u = DifferentialSpace::union_space(std::move(a), std::move(b));
  u.register_pair("fg", "f", "g");
  u.register_pair("f0", "f", "zero");
  u.register_pair("0g", "zero", "g");
  u.superpose("lhs", mul2(), {"f0", "(1,0)"});
  u.superpose("rhs", mul2(), {"0g", "(0,1)"});
  u.superpose("recombined", add2(), {"lhs", "rhs"});

  for (const auto& p : u.carrier().sample(17, 40)) {
    CHECK(u.eval_element("recombined", p) == u.eval_element("fg", p));
  }
  // Routing: pairs take the side of the tag.
  Point pl = Point::tagged(Side::Left, Point::finite_vec({2.0, 3.0}));
  CHECK(u.eval_element("fg", pl) == 6.0);
  Point pr = Point::tagged(Side::Right, Point::finite_vec({0.0}));
  CHECK(u.eval_element("fg", pr) == 0.0);
}

TEST_CASE("union superpose requires pair inputs") {
  auto u = DifferentialSpace::union_space(plane_space(),
                                          DifferentialSpace::over_finite_dim(Carrier::finite_dim(1)));
  CHECK_THROWS_AS(u.superpose("h", SmoothMap::slot(1, 0), {"missing"}), diffspace::lookup_error);
  CHECK_THROWS_AS(u.register_pair("p", "x9", "x1"), diffspace::lookup_error);
}

TEST_CASE("theta generators are exact characteristic functions") {
  auto s = DifferentialSpace::over_seq(Carrier::seq_space());
  Point p = Point::seq({{2, 0.5}, {4, -1.0}});
  s.add_theta("theta", p);
  CHECK(s.eval_element("theta", p) == 1.0);
  CHECK(s.eval_element("theta", Point::seq({{2, 0.5}})) == 0.0);
  CHECK(s.eval_element("theta", Point::seq({{2, 0.5}, {4, -1.0 + 1e-12}})) == 0.0);
  CHECK(s.eval_element("pi2", p) == 0.5);
  CHECK(s.eval_element("pi4", p) == -1.0);
  CHECK(s.eval_element("pi17", p) == 0.0);
  // Family names cannot be shadowed by registrations.
  CHECK_THROWS_AS(s.superpose("pi3", SmoothMap::slot(1, 0), {"pi1"}), diffspace::domain_error);
}

TEST_CASE("the truncated cutoff sum matches its closed forms on single-support points") {
  // Support 1/sqrt(2) at index 1: first term is phi(1/2) = 1, and the
  // scaled sums pass 1 at k = 2.
  double a = 1.0 / std::sqrt(2.0);
  auto r1 = diffspace::detail::xi_sum(Point::seq({{1, a}}), Point::zero_seq());
  CHECK(r1.value == 1.0);
  CHECK(r1.k0 == 2);
  CHECK(r1.terms_evaluated == 1);

  double b = 1.0 / (2.0 * std::sqrt(2.0));
  auto r2 = diffspace::detail::xi_sum(Point::seq({{2, b}}), Point::zero_seq());
  CHECK(r2.value == 2.0);
  CHECK(r2.k0 == 3);

  // At the center the sum has no finite truncation.
  CHECK_THROWS_AS(diffspace::detail::xi_sum(Point::zero_seq(), Point::zero_seq()),
                  diffspace::domain_error);
  // Translation: centered at p, the sum at p + z1-like offset behaves as r1.
  Point center = Point::seq({{3, 1.0}});
  Point q = Point::seq({{1, a}, {3, 1.0}});
  auto r3 = diffspace::detail::xi_sum(q, center);
  CHECK(r3.value == 1.0);
  CHECK(r3.k0 == 2);
}

TEST_CASE("registered cutoff-sum elements evaluate through the space") {
  auto s = DifferentialSpace::over_seq(Carrier::seq_space({Point::zero_seq()}));
  s.register_xi("xi", Point::zero_seq());
  double a = 1.0 / std::sqrt(2.0);
  CHECK(s.eval_element("xi", Point::seq({{1, a}})) == 1.0);
  // The all-zero point is excluded from the carrier, so evaluation refuses
  // on membership grounds before the sum is attempted.
  CHECK_THROWS_AS(s.eval_element("xi", Point::zero_seq()), diffspace::domain_error);
}

TEST_CASE("spaces describe themselves") {
  auto s = plane_space();
  CHECK(s.describe().find("R^2") != std::string::npos);
  CHECK(s.describe().find("x1") != std::string::npos);
  auto q = DifferentialSpace::over_seq(Carrier::seq_space());
  CHECK(q.describe().find("pi1, pi2, ...") != std::string::npos);
}
