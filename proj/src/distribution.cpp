#include "trafficlab/distribution.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace traffic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

void sort_pairs(std::vector<double>& atoms, std::vector<double>& weights) {
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
  std::vector<double> a2(atoms.size()), w2(weights.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    a2[k] = atoms[order[k]];
    w2[k] = weights[order[k]];
  }
  atoms = std::move(a2);
  weights = std::move(w2);
}
}  // namespace

DistributionSpec DistributionSpec::make_exponential(double rate) {
  DistributionSpec d;
  d.kind = DistKind::exponential;
  d.rate = rate;
  validate(d);
  return d;
}

DistributionSpec DistributionSpec::make_deterministic(double value) {
  DistributionSpec d;
  d.kind = DistKind::deterministic;
  d.value = value;
  validate(d);
  return d;
}

DistributionSpec DistributionSpec::make_uniform(double lo, double hi) {
  DistributionSpec d;
  d.kind = DistKind::uniform;
  d.lo = lo;
  d.hi = hi;
  validate(d);
  return d;
}

DistributionSpec DistributionSpec::make_discrete(std::vector<double> atoms,
                                                 std::vector<double> weights) {
  DistributionSpec d;
  d.kind = DistKind::discrete;
  d.atoms = std::move(atoms);
  d.weights = std::move(weights);
  validate(d);
  return d;
}

DistributionSpec DistributionSpec::make_empirical(std::vector<double> sample) {
  DistributionSpec d;
  d.kind = DistKind::empirical;
  d.atoms = std::move(sample);
  validate(d);
  return d;
}

bool DistributionSpec::is_never() const {
  return kind == DistKind::deterministic && std::isinf(value);
}

void validate(const DistributionSpec& d) {
  switch (d.kind) {
    case DistKind::exponential:
      if (!(d.rate > 0.0) || std::isinf(d.rate)) bad("exponential: rate must be positive finite");
      break;
    case DistKind::deterministic:
      if (!(d.value >= 0.0)) bad("deterministic: value must be nonnegative");
      break;
    case DistKind::uniform:
      if (!(d.lo >= 0.0)) bad("uniform: lo must be nonnegative");
      if (!(d.hi > d.lo)) bad("uniform: hi must exceed lo");
      if (std::isinf(d.hi)) bad("uniform: hi must be finite");
      break;
    case DistKind::discrete: {
      DistributionSpec& m = const_cast<DistributionSpec&>(d);
      if (m.atoms.empty()) bad("discrete: no atoms");
      if (m.atoms.size() != m.weights.size()) bad("discrete: atoms/weights size mismatch");
      for (double a : m.atoms)
        if (!(a >= 0.0) || std::isinf(a)) bad("discrete: atoms must be nonnegative finite");
      double sum = 0.0;
      for (double w : m.weights) {
        if (!(w > 0.0)) bad("discrete: weights must be positive");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-12) bad("discrete: weights must sum to 1 within 1e-12");
      sort_pairs(m.atoms, m.weights);
      m.cum.resize(m.weights.size());
      std::partial_sum(m.weights.begin(), m.weights.end(), m.cum.begin());
      m.cum.back() = 1.0;
      break;
    }
    case DistKind::empirical: {
      DistributionSpec& m = const_cast<DistributionSpec&>(d);
      if (m.atoms.empty()) bad("empirical: sample must be nonempty");
      for (double a : m.atoms)
        if (!(a >= 0.0) || std::isinf(a)) bad("empirical: sample values must be nonnegative finite");
      std::sort(m.atoms.begin(), m.atoms.end());
      break;
    }
  }
}

void require_positive_gap(const DistributionSpec& d, const std::string& what) {
  if (d.is_never() || std::isinf(d.mean())) bad(what + ": gap law must have finite mean");
  if (!(d.mean() > 0.0)) bad(what + ": gap law must have positive mean");
  switch (d.kind) {
    case DistKind::deterministic:
      if (!(d.value > 0.0)) bad(what + ": deterministic gap must be positive");
      break;
    case DistKind::discrete:
    case DistKind::empirical:
      if (!(d.atoms.front() > 0.0)) bad(what + ": gap atoms must be positive");
      break;
    default:
      break;  // exponential and uniform with lo >= 0 put no mass at 0
  }
}

double DistributionSpec::mean() const {
  switch (kind) {
    case DistKind::exponential:
      return 1.0 / rate;
    case DistKind::deterministic:
      return value;
    case DistKind::uniform:
      return 0.5 * (lo + hi);
    case DistKind::discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) s += atoms[i] * weights[i];
      return s;
    }
    case DistKind::empirical: {
      double s = 0.0;
      for (double a : atoms) s += a;
      return s / static_cast<double>(atoms.size());
    }
  }
  return 0.0;
}

double DistributionSpec::second_moment() const {
  switch (kind) {
    case DistKind::exponential:
      return 2.0 / (rate * rate);
    case DistKind::deterministic:
      return value * value;
    case DistKind::uniform:
      return (hi * hi * hi - lo * lo * lo) / (3.0 * (hi - lo));
    case DistKind::discrete: {
      double s = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) s += atoms[i] * atoms[i] * weights[i];
      return s;
    }
    case DistKind::empirical: {
      double s = 0.0;
      for (double a : atoms) s += a * a;
      return s / static_cast<double>(atoms.size());
    }
  }
  return 0.0;
}

double DistributionSpec::cdf(double x) const {
  switch (kind) {
    case DistKind::exponential:
      return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
    case DistKind::deterministic:
      return x >= value ? 1.0 : 0.0;
    case DistKind::uniform:
      if (x <= lo) return 0.0;
      if (x >= hi) return 1.0;
      return (x - lo) / (hi - lo);
    case DistKind::discrete: {
      auto it = std::upper_bound(atoms.begin(), atoms.end(), x);
      if (it == atoms.begin()) return 0.0;
      return cum[static_cast<std::size_t>(it - atoms.begin()) - 1];
    }
    case DistKind::empirical: {
      auto it = std::upper_bound(atoms.begin(), atoms.end(), x);
      return static_cast<double>(it - atoms.begin()) / static_cast<double>(atoms.size());
    }
  }
  return 0.0;
}

double DistributionSpec::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) bad("quantile: p outside [0,1]");
  switch (kind) {
    case DistKind::exponential:
      return p >= 1.0 ? kInf : -std::log1p(-p) / rate;
    case DistKind::deterministic:
      return value;
    case DistKind::uniform:
      return lo + p * (hi - lo);
    case DistKind::discrete: {
      auto it = std::lower_bound(cum.begin(), cum.end(), p);
      if (it == cum.end()) return atoms.back();
      return atoms[static_cast<std::size_t>(it - cum.begin())];
    }
    case DistKind::empirical: {
      if (p <= 0.0) return atoms.front();
      std::size_t n = atoms.size();
      std::size_t k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
      if (k == 0) k = 1;
      if (k > n) k = n;
      return atoms[k - 1];
    }
  }
  return 0.0;
}

double DistributionSpec::support_max() const {
  switch (kind) {
    case DistKind::exponential:
      return kInf;
    case DistKind::deterministic:
      return value;
    case DistKind::uniform:
      return hi;
    case DistKind::discrete:
    case DistKind::empirical:
      return atoms.back();
  }
  return 0.0;
}

double DistributionSpec::support_min() const {
  switch (kind) {
    case DistKind::exponential:
      return 0.0;
    case DistKind::deterministic:
      return value;
    case DistKind::uniform:
      return lo;
    case DistKind::discrete:
    case DistKind::empirical:
      return atoms.front();
  }
  return 0.0;
}

double DistributionSpec::sample(Rng& rng) const {
  switch (kind) {
    case DistKind::exponential:
      return rng.exponential(rate);
    case DistKind::deterministic:
      return value;
    case DistKind::uniform:
      return rng.uniform(lo, hi);
    case DistKind::discrete: {
      double u = rng.uniform();
      auto it = std::lower_bound(cum.begin(), cum.end(), u);
      if (it == cum.end()) return atoms.back();
      return atoms[static_cast<std::size_t>(it - cum.begin())];
    }
    case DistKind::empirical:
      return atoms[rng.index(atoms.size())];
  }
  return 0.0;
}

DistributionSpec DistributionSpec::scaled(double c) const {
  if (!(c > 0.0) || std::isinf(c)) bad("scaled: factor must be positive finite");
  DistributionSpec d = *this;
  switch (kind) {
    case DistKind::exponential:
      d.rate = rate / c;
      break;
    case DistKind::deterministic:
      d.value = value * c;
      break;
    case DistKind::uniform:
      d.lo = lo * c;
      d.hi = hi * c;
      break;
    case DistKind::discrete:
    case DistKind::empirical:
      for (double& a : d.atoms) a *= c;
      break;
  }
  return d;
}

std::string DistributionSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case DistKind::exponential:
      os << "exponential(" << rate << ")";
      break;
    case DistKind::deterministic:
      if (is_never())
        os << "inf";
      else
        os << "deterministic(" << value << ")";
      break;
    case DistKind::uniform:
      os << "uniform(" << lo << "," << hi << ")";
      break;
    case DistKind::discrete:
      os << "discrete(";
      for (std::size_t i = 0; i < atoms.size(); ++i)
        os << (i ? "," : "") << atoms[i] << ":" << weights[i];
      os << ")";
      break;
    case DistKind::empirical:
      os << "empirical(";
      for (std::size_t i = 0; i < atoms.size(); ++i) os << (i ? "," : "") << atoms[i];
      os << ")";
      break;
  }
  return os.str();
}

namespace {
std::vector<double> parse_number_list(const std::string& body, const std::string& ctx) {
  std::vector<double> out;
  std::string cur;
  std::istringstream is(body);
  while (std::getline(is, cur, ',')) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(cur, &pos);
    } catch (const std::exception&) {
      bad(ctx + ": cannot parse number '" + cur + "'");
    }
    while (pos < cur.size() && std::isspace(static_cast<unsigned char>(cur[pos]))) ++pos;
    if (pos != cur.size()) bad(ctx + ": trailing characters in '" + cur + "'");
    out.push_back(v);
  }
  if (out.empty()) bad(ctx + ": empty argument list");
  return out;
}
}  // namespace

DistributionSpec DistributionSpec::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s == "inf" || s == "deterministic(inf)") return make_deterministic(kInf);
  auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    bad("distribution: expected kind(args), got '" + text + "'");
  std::string kind = s.substr(0, open);
  std::string body = s.substr(open + 1, s.size() - open - 2);
  if (kind == "exponential") {
    auto v = parse_number_list(body, kind);
    if (v.size() != 1) bad("exponential: expected one parameter");
    return make_exponential(v[0]);
  }
  if (kind == "deterministic") {
    auto v = parse_number_list(body, kind);
    if (v.size() != 1) bad("deterministic: expected one parameter");
    return make_deterministic(v[0]);
  }
  if (kind == "uniform") {
    auto v = parse_number_list(body, kind);
    if (v.size() != 2) bad("uniform: expected two parameters");
    return make_uniform(v[0], v[1]);
  }
  if (kind == "discrete") {
    std::vector<double> atoms, weights;
    std::string item;
    std::istringstream is(body);
    while (std::getline(is, item, ',')) {
      auto colon = item.find(':');
      if (colon == std::string::npos) bad("discrete: expected atom:weight, got '" + item + "'");
      atoms.push_back(std::stod(item.substr(0, colon)));
      weights.push_back(std::stod(item.substr(colon + 1)));
    }
    return make_discrete(std::move(atoms), std::move(weights));
  }
  if (kind == "empirical") return make_empirical(parse_number_list(body, kind));
  bad("distribution: unknown kind '" + kind + "'");
}

double equilibrium_mean(const DistributionSpec& d) {
  double m = d.mean();
  if (!(m > 0.0) || std::isinf(m)) bad("equilibrium: needs positive finite mean");
  return d.second_moment() / (2.0 * m);
}

double equilibrium_density(const DistributionSpec& d, double t) {
  if (t < 0.0) return 0.0;
  return d.survival(t) / d.mean();
}

double equilibrium_cdf(const DistributionSpec& d, double t) {
  if (t <= 0.0) return 0.0;
  const double m = d.mean();
  switch (d.kind) {
    case DistKind::exponential:
      return 1.0 - std::exp(-d.rate * t);
    case DistKind::deterministic:
      return std::min(t / d.value, 1.0);
    case DistKind::uniform: {
      if (t >= d.hi) return 1.0;
      if (t <= d.lo) return t / m;
      double seg = (d.hi * (t - d.lo) - 0.5 * (t * t - d.lo * d.lo)) / (d.hi - d.lo);
      return (d.lo + seg) / m;
    }
    case DistKind::discrete:
    case DistKind::empirical: {
      // integral of the piecewise-constant survival function up to t
      double total = static_cast<double>(
          d.kind == DistKind::empirical ? static_cast<double>(d.atoms.size()) : 1.0);
      double integral = 0.0, prev = 0.0, passed = 0.0;
      for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        double a = d.atoms[i];
        double w = d.kind == DistKind::empirical ? 1.0 : d.weights[i];
        double surv = 1.0 - passed / total;  // survival on [prev, a)
        if (t <= a) {
          integral += surv * (t - prev);
          return integral / m;
        }
        integral += surv * (a - prev);
        passed += w;
        prev = a;
      }
      return integral / m;  // t beyond the last atom: integral equals the mean
    }
  }
  return 0.0;
}

double equilibrium_sample(const DistributionSpec& d, Rng& rng) {
  switch (d.kind) {
    case DistKind::exponential:
      return rng.exponential(d.rate);  // memoryless: excess law equals the law itself
    case DistKind::deterministic:
      return rng.uniform() * d.value;
    case DistKind::uniform: {
      // length-biased draw has cdf (x^2-lo^2)/(hi^2-lo^2)
      double x = std::sqrt(d.lo * d.lo + rng.uniform() * (d.hi * d.hi - d.lo * d.lo));
      return rng.uniform() * x;
    }
    case DistKind::discrete: {
      double total = 0.0;
      for (std::size_t i = 0; i < d.atoms.size(); ++i) total += d.atoms[i] * d.weights[i];
      double u = rng.uniform() * total, acc = 0.0;
      for (std::size_t i = 0; i < d.atoms.size(); ++i) {
        acc += d.atoms[i] * d.weights[i];
        if (u <= acc) return rng.uniform() * d.atoms[i];
      }
      return rng.uniform() * d.atoms.back();
    }
    case DistKind::empirical: {
      double total = 0.0;
      for (double a : d.atoms) total += a;
      double u = rng.uniform() * total, acc = 0.0;
      for (double a : d.atoms) {
        acc += a;
        if (u <= acc) return rng.uniform() * a;
      }
      return rng.uniform() * d.atoms.back();
    }
  }
  return 0.0;
}

}  // namespace traffic
