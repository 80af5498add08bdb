#include "diffspace/seqspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "diffspace/errors.hpp"
#include "diffspace/format.hpp"
#include "diffspace/smooth_map.hpp"

namespace diffspace::seqspace {

double rho(int k, const Point& p) {
  if (k < 1) throw domain_error("rho needs a positive index, got " + std::to_string(k));
  if (p.kind() != Point::Kind::Seq) {
    throw domain_error("rho is defined on sequence points");
  }
  // Same accumulation order as the cutoff sum: ascending support indices,
  // left-associated adds. Zero coordinates contribute an exact 0.
  double acc = 0.0;
  for (const auto& [index, value] : p.support()) {
    if (index > k) break;
    acc += value * value;
  }
  return acc;
}

Point z(int k) {
  if (k < 1) throw domain_error("z needs a positive index, got " + std::to_string(k));
  return Point::seq({{k, 1.0 / (static_cast<double>(k) * std::sqrt(2.0))}});
}

TruncationReport xi(const Point& p) {
  TruncationReport report;
  detail::XiResult r = detail::xi_sum(p, Point::zero_seq(), &report.trace);
  report.k0 = r.k0;
  report.terms_evaluated = r.terms_evaluated;
  report.value = r.value;
  return report;
}

const ElementPtr& xi_atlas(DifferentialSpace& space, const std::string& name, int max_k) {
  if (max_k < 2) {
    throw domain_error("xi_atlas needs at least two pieces, got max_k = " +
                       std::to_string(max_k));
  }
  if (space.carrier().kind() != Carrier::Kind::SeqSpace) {
    throw domain_error("xi_atlas is defined over sequence carriers");
  }

  // Helper elements <name>.rho<j>: left-associated sums of squared
  // projections, matching the direct sum's accumulation bit for bit.
  std::vector<std::string> rho_names;
  rho_names.reserve(static_cast<std::size_t>(max_k));
  for (int j = 1; j <= max_k; ++j) {
    SmoothMap acc = SmoothMap::slot(j, 0).pow(2);
    for (int i = 1; i < j; ++i) acc = acc + SmoothMap::slot(j, i).pow(2);
    std::vector<std::string> projections;
    projections.reserve(static_cast<std::size_t>(j));
    for (int i = 1; i <= j; ++i) projections.push_back("pi" + std::to_string(i));
    std::string rho_name = name + ".rho" + std::to_string(j);
    space.superpose(rho_name, acc, projections);
    rho_names.push_back(std::move(rho_name));
  }

  // Piece k: on the region rho_k > 1/k^2 the terms at indices >= k are
  // exactly zero, so the truncated sum of the first k-1 terms is the
  // whole value.
  std::vector<DifferentialSpace::PieceSpec> pieces;
  pieces.reserve(static_cast<std::size_t>(max_k - 1));
  for (int k = 2; k <= max_k; ++k) {
    double lo = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
    Region region{RegionTerm{rho_names[static_cast<std::size_t>(k - 1)], lo,
                             std::numeric_limits<double>::infinity()}};
    // Term j reads slot j-1 (the value of rho_j) scaled by j^2, exactly
    // the product the direct sum forms.
    auto term = [&](int j) {
      double j2 = static_cast<double>(j) * static_cast<double>(j);
      return cutoff(SmoothMap::constant(k - 1, j2) * SmoothMap::slot(k - 1, j - 1));
    };
    SmoothMap body = term(1);
    for (int j = 2; j < k; ++j) body = body + term(j);
    std::vector<std::string> inputs(rho_names.begin(), rho_names.begin() + (k - 1));
    pieces.push_back(DifferentialSpace::PieceSpec{std::move(region), std::move(body),
                                                  std::move(inputs)});
  }

  try {
    return space.from_atlas(name, pieces);
  } catch (const atlas_error& e) {
    throw atlas_error(std::string(e.what()) + " (increase the atlas depth max_k)");
  }
}

DifferentialSpace tilde_structure(const Point& p) {
  if (p.kind() != Point::Kind::Seq) {
    throw domain_error("tilde_structure marks a sequence point, got " + p.to_string());
  }
  auto space = DifferentialSpace::over_seq(Carrier::seq_space({}));
  space.add_theta("theta", p);
  return space;
}

namespace {

/// Largest coordinatewise distance between two points of the same kind.
double sup_distance(const Point& a, const Point& b) {
  int top = std::max(a.max_index(), b.max_index());
  double d = 0.0;
  for (int k = 1; k <= top; ++k) {
    d = std::max(d, std::abs(a.coordinate(k) - b.coordinate(k)));
  }
  return d;
}

constexpr double kDivergenceThreshold = 1e6;
constexpr int kDivergenceRunLength = 20;
constexpr int kLimitWindow = 5;
constexpr double kLimitAgreementTol = 1e-6;

double tail_average(const std::vector<double>& values) {
  std::size_t n = std::min<std::size_t>(kLimitWindow, values.size());
  double acc = 0.0;
  for (std::size_t i = values.size() - n; i < values.size(); ++i) acc += values[i];
  return acc / static_cast<double>(n);
}

}  // namespace

bool diverges_along(const std::vector<double>& values) {
  if (values.empty() || !(values.back() > kDivergenceThreshold)) return false;
  int run = 1;
  for (std::size_t i = values.size(); i-- > 1;) {
    if (values[i] > values[i - 1]) {
      ++run;
      if (run >= kDivergenceRunLength) return true;
    } else {
      break;
    }
  }
  return false;
}

ProlongationReport tilde_membership(const DifferentialSpace& space, const Point& candidate,
                                    const std::vector<std::string>& witnesses,
                                    const std::vector<std::vector<Point>>& probes) {
  if (witnesses.empty()) {
    throw domain_error("tilde_membership needs at least one witness element");
  }
  for (const auto& w : witnesses) space.element(w);  // surface unknown names early

  ProlongationReport report;
  if (space.carrier().contains(candidate)) {
    for (const auto& w : witnesses) {
      report.values[w] = space.eval_element(w, candidate);
    }
    return report;
  }

  if (probes.empty()) {
    throw domain_error("candidate " + candidate.to_string() +
                       " lies outside the carrier and no probe approaches it");
  }
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    const auto& probe = probes[pi];
    if (probe.size() < static_cast<std::size_t>(kLimitWindow) + 1) {
      throw domain_error("probe " + std::to_string(pi) + " is too short (" +
                         std::to_string(probe.size()) + " points)");
    }
    double first = sup_distance(probe.front(), candidate);
    double last = sup_distance(probe.back(), candidate);
    if (!(last <= 0.5 * first)) {
      throw domain_error("probe " + std::to_string(pi) + " does not converge to " +
                         candidate.to_string() + " (distance " + fmt_g(first, 10) +
                         " -> " + fmt_g(last, 10) + ")");
    }
  }

  for (const auto& w : witnesses) {
    std::vector<double> limits;
    limits.reserve(probes.size());
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      std::vector<double> values;
      values.reserve(probes[pi].size());
      for (const auto& point : probes[pi]) {
        values.push_back(space.eval_element(w, point));
      }
      if (diverges_along(values)) {
        report.status = ProlongationStatus::Obstructed;
        report.obstructing_witness = w;
        report.obstructing_probe = static_cast<int>(pi);
        report.reason = "witness '" + w + "' climbs past " +
                        fmt_g(kDivergenceThreshold, 10) + " along probe " +
                        std::to_string(pi);
        return report;
      }
      limits.push_back(tail_average(values));
    }
    auto [lo, hi] = std::minmax_element(limits.begin(), limits.end());
    if (*hi - *lo > kLimitAgreementTol) {
      report.status = ProlongationStatus::Obstructed;
      report.obstructing_witness = w;
      report.obstructing_probe =
          static_cast<int>(std::distance(limits.begin(), hi));
      report.reason = "witness '" + w + "' has probe limits spread " +
                      fmt_g(*hi - *lo, 10) + " apart";
      return report;
    }
    double acc = 0.0;
    for (double v : limits) acc += v;
    report.values[w] = acc / static_cast<double>(limits.size());
  }
  return report;
}

}  // namespace diffspace::seqspace
