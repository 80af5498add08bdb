#pragma once

#include <map>
#include <string>
#include <vector>

#include "diffspace/carrier.hpp"
#include "diffspace/structure.hpp"

namespace diffspace::seqspace {

/// Sum of the squares of the first k coordinates of a sequence point.
/// Nondecreasing in k; accumulation order matches the cutoff sum below,
/// so shared values are bit-identical.
double rho(int k, const Point& p);

/// The canonical single-support probe point: coordinate k holds
/// 1/(k*sqrt(2)), every other coordinate is zero.
Point z(int k);

/// Outcome of the locally finite cutoff sum at one point: the first index
/// k0 whose scaled tail k0^2 * rho_k0 exceeds 1 (every later term is
/// exactly zero), the number of terms that were evaluated, the value, and
/// a capped trace of the terms that were not exactly 1.
struct TruncationReport {
  int k0 = 0;
  long long terms_evaluated = 0;
  double value = 0.0;
  std::vector<detail::XiTerm> trace;
};

/// Evaluates the cutoff sum at p. The all-zero point is rejected: every
/// term is 1 there and the sum diverges.
TruncationReport xi(const Point& p);

/// Registers a localized form of the cutoff sum on `space` under `name`:
/// piece k (2 <= k <= max_k) lives on the region rho_k > 1/k^2 and sums
/// the first k-1 cutoff terms. The helper elements "<name>.rho<j>" are
/// registered as superpositions of projections. Piece agreement is exact:
/// on piece k every term at index >= k is exactly zero.
const ElementPtr& xi_atlas(DifferentialSpace& space, const std::string& name, int max_k);

/// The structure on all of R^N generated by the projections together with
/// the characteristic generator "theta" of the single point p.
DifferentialSpace tilde_structure(const Point& p);

/// The finite divergence test shared by prolongation and classification:
/// true when the tail of `values` climbs strictly for at least 20 steps
/// and ends beyond 1e6.
bool diverges_along(const std::vector<double>& values);

enum class ProlongationStatus { Prolongable, Obstructed };

struct ProlongationReport {
  ProlongationStatus status = ProlongationStatus::Prolongable;
  /// Prolongable: witness name -> prolonged value. For an inside candidate
  /// these are plain evaluations; for an outside candidate, probe limits.
  std::map<std::string, double> values;
  /// Obstructed: which witness failed, along which probe (0-based), why.
  std::string obstructing_witness;
  int obstructing_probe = -1;
  std::string reason;
};

/// Decides whether every listed witness element extends continuously to
/// `candidate`. A candidate inside the carrier is always prolongable with
/// the direct values. Otherwise each witness is evaluated along each
/// probe (a prefix of points approaching the candidate); a witness that
/// climbs past 1e6 over at least 20 strictly increasing evaluations, or
/// whose probe limits disagree by more than 1e-6, obstructs. Limits are
/// plain averages of the last 5 probe values.
ProlongationReport tilde_membership(const DifferentialSpace& space, const Point& candidate,
                                    const std::vector<std::string>& witnesses,
                                    const std::vector<std::vector<Point>>& probes);

}  // namespace diffspace::seqspace
