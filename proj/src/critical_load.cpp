#include "trafficlab/critical_load.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "trafficlab/numerics.hpp"
#include "trafficlab/qnet.hpp"

namespace traffic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bisection for an increasing f on (lo, hi) whose endpoint signs are known
// (f < 0 near lo, f > 0 near hi); the endpoints themselves are never
// evaluated, so integrable endpoint blowups are safe.
double bisect_interior(const std::function<double(double)>& f, double lo,
                       double hi, double xtol) {
  for (int it = 0; it < 200 && hi - lo > xtol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// p(r) = (1 - r) q(r) + p(1); returns q, stores p(1) in remainder.
std::vector<double> divide_out_one_minus_r(const std::vector<double>& p,
                                           double* remainder) {
  std::size_t n = p.size();
  if (n <= 1) {
    *remainder = p.empty() ? 0.0 : p[0];
    return {};
  }
  // synthetic division by (r - 1), then flip sign
  std::vector<double> b(n - 1, 0.0);
  b[n - 2] = p[n - 1];
  for (std::size_t k = n - 2; k-- > 0;) b[k] = p[k + 1] + b[k + 1];
  *remainder = p[0] + b[0];
  for (double& c : b) c = -c;
  return b;
}

// integral of r * q(r) over [a, b], exact
double integral_r_times_poly(const std::vector<double>& q, double a, double b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    double e = static_cast<double>(k) + 2.0;
    acc += q[k] * (std::pow(b, e) - std::pow(a, e)) / e;
  }
  return acc;
}

double support_max(const LimitMeasure& measure) {
  double s = 0.0;
  for (const auto& [r, m] : measure.atoms)
    if (m > 0.0) s = std::max(s, r);
  for (const auto& piece : measure.pieces)
    if (piece.mass() > 1e-15) s = std::max(s, piece.hi);
  return s;
}

}  // namespace

double DensityPiece::eval(double r) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * r + coeffs[k];
  return acc;
}

double DensityPiece::mass() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    double e = static_cast<double>(k) + 1.0;
    acc += coeffs[k] * (std::pow(hi, e) - std::pow(lo, e)) / e;
  }
  return acc;
}

double LimitMeasure::total_mass() const {
  double acc = 0.0;
  for (const auto& [r, m] : atoms) {
    (void)r;
    acc += m;
  }
  for (const auto& piece : pieces) acc += piece.mass();
  return acc;
}

LimitMeasure LimitMeasure::point(double r) {
  LimitMeasure out;
  out.atoms.emplace_back(r, 1.0);
  return out;
}

LimitMeasure LimitMeasure::two_point(double r1, double w1, double r2,
                                     double w2) {
  LimitMeasure out;
  out.atoms.emplace_back(r1, w1);
  out.atoms.emplace_back(r2, w2);
  return out;
}

LimitMeasure LimitMeasure::uniform01() {
  LimitMeasure out;
  out.pieces.push_back(DensityPiece{{1.0}, 0.0, 1.0});
  return out;
}

void validate(const LimitMeasure& measure) {
  if (measure.atoms.empty() && measure.pieces.empty())
    throw std::invalid_argument("measure has no atoms and no density");
  for (const auto& [r, m] : measure.atoms) {
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("atom location outside [0, 1]");
    if (!(m > 0.0)) throw std::invalid_argument("atom mass must be positive");
  }
  for (const auto& piece : measure.pieces) {
    if (piece.coeffs.empty())
      throw std::invalid_argument("density piece needs coefficients");
    if (!(piece.lo >= 0.0 && piece.hi <= 1.0 && piece.lo < piece.hi))
      throw std::invalid_argument("density piece interval invalid");
    for (int k = 0; k <= 1000; ++k) {
      double r = piece.lo + (piece.hi - piece.lo) * k / 1000.0;
      if (piece.eval(r) < -1e-12)
        throw std::invalid_argument("density is negative on its interval");
    }
  }
  if (std::abs(measure.total_mass() - 1.0) > 1e-12)
    throw std::invalid_argument("total mass must be 1");
}

LimitMeasure parse_measure(std::istream& in) {
  LimitMeasure out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "atom") {
      double r, m;
      if (!(ls >> r >> m))
        throw std::invalid_argument("measure line " + std::to_string(lineno) +
                                    ": atom needs location and mass");
      out.atoms.emplace_back(r, m);
    } else if (kind == "piece") {
      DensityPiece piece;
      if (!(ls >> piece.lo >> piece.hi))
        throw std::invalid_argument("measure line " + std::to_string(lineno) +
                                    ": piece needs an interval");
      double c;
      while (ls >> c) piece.coeffs.push_back(c);
      if (piece.coeffs.empty())
        throw std::invalid_argument("measure line " + std::to_string(lineno) +
                                    ": piece needs coefficients");
      out.pieces.push_back(std::move(piece));
    } else {
      throw std::invalid_argument("measure line " + std::to_string(lineno) +
                                  ": unknown entry '" + kind + "'");
    }
  }
  validate(out);
  return out;
}

LimitMeasure parse_measure_text(const std::string& text) {
  std::istringstream in(text);
  return parse_measure(in);
}

std::string format_measure(const LimitMeasure& measure) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [r, m] : measure.atoms) out << "atom " << r << ' ' << m << '\n';
  for (const auto& piece : measure.pieces) {
    out << "piece " << piece.lo << ' ' << piece.hi;
    for (double c : piece.coeffs) out << ' ' << c;
    out << '\n';
  }
  return out.str();
}

LimitMeasure sample_measure(const std::vector<double>& loads) {
  if (loads.empty()) throw std::invalid_argument("empty load vector");
  for (double r : loads)
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("loads must lie in [0, 1]");
  std::vector<double> sorted = loads;
  std::sort(sorted.begin(), sorted.end());
  LimitMeasure out;
  double unit = 1.0 / static_cast<double>(loads.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.atoms.emplace_back(sorted[i], static_cast<double>(j - i) * unit);
    i = j;
  }
  return out;
}

double h_of_z(const LimitMeasure& measure, double z) {
  if (!(z >= 0.0 && z < 1.0))
    throw std::domain_error("h(z) is defined on [0, 1)");
  double acc = 0.0;
  for (const auto& [r, m] : measure.atoms) acc += m * r / (1.0 - z * r);
  for (const auto& piece : measure.pieces)
    acc += adaptive_simpson(
        [&piece, z](double r) { return piece.eval(r) * r / (1.0 - z * r); },
        piece.lo, piece.hi, 1e-12);
  return acc;
}

double lambda_critical(const LimitMeasure& measure) {
  double acc = 0.0;
  for (const auto& [r, m] : measure.atoms) {
    if (r >= 1.0 - 1e-12) {
      if (m > 0.0) return kInf;
      continue;
    }
    acc += m * r / (1.0 - r);
  }
  for (const auto& piece : measure.pieces) {
    if (piece.hi < 1.0 - 1e-12) {
      acc += adaptive_simpson(
          [&piece](double r) { return piece.eval(r) * r / (1.0 - r); },
          piece.lo, piece.hi, 1e-12);
      continue;
    }
    // piece reaches 1: integral diverges unless the density vanishes there
    double at_one = 0.0;
    auto q = divide_out_one_minus_r(piece.coeffs, &at_one);
    double scale = 0.0;
    for (double c : piece.coeffs) scale = std::max(scale, std::abs(c));
    if (std::abs(at_one) > 1e-12 * std::max(scale, 1.0)) return kInf;
    acc += integral_r_times_poly(q, piece.lo, piece.hi);
  }
  return acc;
}

double lambda_critical_infinite_server(const LimitMeasure& measure,
                                       double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("pool service rate must be positive");
  if (std::isinf(alpha)) return lambda_critical(measure);
  return 1.0 / alpha + lambda_critical(measure);
}

double GrandPartitionFrame::log_grand_partition(double w) const {
  double acc = w / p;
  for (double qi : q) {
    if (w * qi >= 1.0)
      throw std::domain_error("grand partition diverges at w q >= 1");
    acc -= std::log1p(-w * qi);
  }
  return acc;
}

GrandPartitionFrame infinite_server_frame(const std::vector<double>& loads,
                                          double p) {
  if (!(p > 0.0)) throw std::invalid_argument("pool weight must be positive");
  GrandPartitionFrame frame;
  frame.p = p;
  frame.q.reserve(loads.size());
  for (double r : loads) frame.q.push_back(r / p);
  return frame;
}

void validate(const LoadProfile& profile) {
  if (profile.loads.empty())
    throw std::invalid_argument("profile needs at least one node");
  double mx = 0.0;
  for (double r : profile.loads) {
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("relative loads must lie in [0, 1]");
    mx = std::max(mx, r);
  }
  if (std::abs(mx - 1.0) > 1e-12)
    throw std::invalid_argument("maximal relative load must equal 1");
}

double saddle_point_finite(const LoadProfile& profile) {
  validate(profile);
  if (profile.customers == 0) return 0.0;
  double n = static_cast<double>(profile.size());
  double target = static_cast<double>(profile.customers) / n;
  // z * (1/N) sum r/(1 - z r) increases from 0 to infinity on (0, 1)
  auto f = [&](double z) {
    double acc = 0.0;
    for (double r : profile.loads) acc += r / (1.0 - z * r);
    return z * acc / n - target;
  };
  return bisect_interior(f, 0.0, 1.0, 1e-13);
}

double z0_limit(const LimitMeasure& measure, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("density must be positive");
  validate(measure);
  if (lambda >= lambda_critical(measure)) return 1.0;
  auto g = [&](double z) { return z * h_of_z(measure, z) - lambda; };
  return bisect_interior(g, 0.0, 1.0, 1e-14);
}

SaddleReport partition_asymptotics(const LoadProfile& profile) {
  validate(profile);
  SaddleReport rep;
  if (profile.customers == 0) {
    rep.log_partition = 0.0;  // Z_{N,0} = 1 exactly
    return rep;
  }
  double n = static_cast<double>(profile.size());
  double m = static_cast<double>(profile.customers);
  double z0 = saddle_point_finite(profile);
  double s = -(m / n) * std::log(z0);
  double s2 = (m / n) / (z0 * z0);
  for (double r : profile.loads) {
    s -= std::log1p(-z0 * r) / n;
    double t = r / (1.0 - z0 * r);
    s2 += t * t / n;
  }
  rep.z0 = z0;
  rep.s_at_z0 = s;
  rep.s2_at_z0 = s2;
  rep.log_partition =
      n * s - std::log(z0) - 0.5 * std::log(2.0 * std::numbers::pi * n * s2);
  rep.near_critical = z0 > 1.0 - 1e-6;
  rep.subcritical = !rep.near_critical;
  return rep;
}

MarginalReport limiting_marginals(const LimitMeasure& measure, double lambda,
                                  const std::vector<double>& loads) {
  for (double r : loads)
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("relative loads must lie in [0, 1]");
  if (!(lambda < lambda_critical(measure)))
    throw std::domain_error(
        "no limiting marginals at or above the critical density");
  MarginalReport rep;
  rep.z0 = z0_limit(measure, lambda);
  rep.loads = loads;
  rep.means.reserve(loads.size());
  for (double r : loads) {
    double zr = rep.z0 * r;
    rep.means.push_back(zr / (1.0 - zr));
  }
  return rep;
}

JamReport classify_jams(const LimitMeasure& measure, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("density must be positive");
  validate(measure);
  JamReport rep;
  double lcr = lambda_critical(measure);
  if (lambda < lcr) {
    rep.bounded = true;
    rep.z0 = z0_limit(measure, lambda);
    double zr = rep.z0 * support_max(measure);
    rep.witness_bound = zr / (1.0 - zr);
  } else {
    rep.bounded = false;
    rep.z0 = 1.0;
    rep.witness_bound = kInf;
  }
  return rep;
}

JamReport classify_jams(const LoadProfile& profile,
                        const std::vector<std::size_t>& customer_sweep) {
  validate(profile);
  JamReport rep;
  for (std::size_t i = 0; i < profile.loads.size(); ++i)
    if (profile.loads[i] >= 1.0 - 1e-12) rep.jam_nodes.push_back(i);
  rep.z0 = saddle_point_finite(profile);
  rep.bounded = rep.z0 <= 1.0 - 1e-6;
  if (rep.bounded) {
    double zr = rep.z0;  // witness at a maximal-load node, r = 1
    rep.witness_bound = zr / (1.0 - zr);
  } else {
    rep.witness_bound = kInf;
  }
  rep.sweep_customers = customer_sweep;
  if (rep.sweep_customers.empty()) {
    std::size_t base = std::max<std::size_t>(profile.customers, 1);
    rep.sweep_customers = {base, 2 * base, 4 * base, 8 * base};
  }
  std::size_t witness = rep.jam_nodes.front();
  for (std::size_t m : rep.sweep_customers) {
    auto means = closed_mean_occupancy(profile.loads, m);
    rep.sweep_means.push_back(means[witness]);
  }
  return rep;
}

}  // namespace traffic
