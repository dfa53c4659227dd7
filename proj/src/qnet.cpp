#include "trafficlab/qnet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace traffic {

namespace {
constexpr double kRowTol = 1e-9;

std::vector<std::vector<bool>> support(const std::vector<std::vector<double>>& P) {
  std::size_t n = P.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adj[i][j] = P[i][j] > 0.0;
  return adj;
}

std::vector<bool> reach_from(const std::vector<std::vector<bool>>& adj,
                             const std::vector<std::size_t>& sources, bool reversed) {
  std::size_t n = adj.size();
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (auto s : sources) {
    seen[s] = true;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      bool edge = reversed ? adj[v][u] : adj[u][v];
      if (edge && !seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

bool strongly_connected(const std::vector<std::vector<double>>& P) {
  auto adj = support(P);
  auto fwd = reach_from(adj, {0}, false);
  auto bwd = reach_from(adj, {0}, true);
  for (std::size_t i = 0; i < P.size(); ++i)
    if (!fwd[i] || !bwd[i]) return false;
  return true;
}

double row_sum(const std::vector<double>& row) {
  double s = 0.0;
  for (double p : row) s += p;
  return s;
}

void check_square(const std::vector<std::vector<double>>& P) {
  if (P.empty()) throw std::invalid_argument("routing matrix is empty");
  for (const auto& row : P) {
    if (row.size() != P.size()) throw std::invalid_argument("routing matrix is not square");
    for (double p : row)
      if (!(p >= 0.0) || p > 1.0 + kRowTol)
        throw std::invalid_argument("routing probabilities must lie in [0,1]");
  }
}
}  // namespace

bool NetworkSpec::closed() const {
  for (double l : lambda_ext)
    if (l != 0.0) return false;
  for (const auto& row : P)
    if (std::abs(row_sum(row) - 1.0) > 1e-12) return false;
  return true;
}

double NetworkSpec::exit_probability(std::size_t i) const {
  return std::max(0.0, 1.0 - row_sum(P[i]));
}

void validate(const NetworkSpec& spec) {
  if (spec.nodes == 0) throw std::invalid_argument("network needs at least one node");
  if (spec.P.size() != spec.nodes || spec.service.size() != spec.nodes ||
      spec.lambda_ext.size() != spec.nodes)
    throw std::invalid_argument("network field sizes disagree with the node count");
  check_square(spec.P);
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    if (row_sum(spec.P[i]) > 1.0 + kRowTol)
      throw std::invalid_argument("routing row sums must not exceed 1");
    if (!(spec.lambda_ext[i] >= 0.0))
      throw std::invalid_argument("external arrival rates must be nonnegative");
    if (!(spec.service[i](1) > 0.0))
      throw std::invalid_argument("service rate must be positive for occupied nodes");
  }
  if (spec.closed()) {
    if (!strongly_connected(spec.P))
      throw std::domain_error("closed network routing must be strongly connected");
  } else {
    std::vector<std::size_t> exits;
    for (std::size_t i = 0; i < spec.nodes; ++i)
      if (row_sum(spec.P[i]) < 1.0 - 1e-12) exits.push_back(i);
    if (exits.empty())
      throw std::domain_error("open network needs at least one node with an exit flow");
    auto seen = reach_from(support(spec.P), exits, true);
    for (std::size_t i = 0; i < spec.nodes; ++i)
      if (!seen[i]) throw std::domain_error("every node must be able to reach an exit");
  }
}

NetworkSpec parse_network(std::istream& in) {
  NetworkSpec spec;
  bool sized = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("network file line " + std::to_string(lineno) + ": " + msg);
  };
  auto node_index = [&](long v) -> std::size_t {
    if (v < 1 || static_cast<std::size_t>(v) > spec.nodes)
      fail("node id out of range (ids are 1-based)");
    return static_cast<std::size_t>(v - 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "N") {
      long n = 0;
      if (!(ls >> n) || n < 1) fail("N needs a positive node count");
      spec.nodes = static_cast<std::size_t>(n);
      spec.P.assign(spec.nodes, std::vector<double>(spec.nodes, 0.0));
      spec.service.assign(spec.nodes, {});
      spec.lambda_ext.assign(spec.nodes, 0.0);
      sized = true;
      continue;
    }
    if (!sized) fail("N must come before any other directive");
    if (word == "edge") {
      long a = 0, b = 0;
      double p = 0.0;
      if (!(ls >> a >> b >> p)) fail("edge needs: from to probability");
      if (b == 0) fail("exit flow is implicit: leave the row sum below 1 instead of edge to 0");
      spec.P[node_index(a)][node_index(b)] = p;
    } else if (word == "mu") {
      long a = 0;
      if (!(ls >> a)) fail("mu needs a node id");
      std::size_t i = node_index(a);
      std::string form;
      if (!(ls >> form)) fail("mu needs a rate or a form keyword");
      if (form == "table") {
        std::vector<double> table;
        double v;
        while (ls >> v) table.push_back(v);
        if (table.empty()) fail("mu table needs at least one value");
        spec.service[i].fn = [table](std::size_t n) {
          return table[std::min(n, table.size()) - 1];
        };
        spec.service[i].rate = table.front();
      } else if (form == "infinite-server") {
        double nu = 0.0;
        if (!(ls >> nu)) fail("infinite-server needs a per-car rate");
        spec.service[i].fn = [nu](std::size_t n) { return static_cast<double>(n) * nu; };
        spec.service[i].rate = nu;
      } else {
        try {
          spec.service[i].rate = std::stod(form);
        } catch (const std::exception&) {
          fail("unknown mu form '" + form + "'");
        }
        spec.service[i].fn = nullptr;
      }
    } else if (word == "lambda") {
      long a = 0;
      double r = 0.0;
      if (!(ls >> a >> r)) fail("lambda needs: node rate");
      spec.lambda_ext[node_index(a)] = r;
    } else if (word == "discipline") {
      if (!(ls >> spec.discipline)) fail("discipline needs a name");
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  validate(spec);
  return spec;
}

NetworkSpec parse_network_text(const std::string& text) {
  std::istringstream is(text);
  return parse_network(is);
}

TrafficSolution solve_traffic_closed(const std::vector<std::vector<double>>& P) {
  check_square(P);
  const std::size_t n = P.size();
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(row_sum(P[i]) - 1.0) > kRowTol)
      throw std::invalid_argument("closed routing matrix rows must sum to 1");
  if (!strongly_connected(P)) throw std::domain_error("routing matrix is reducible");

  Eigen::MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = P[j][i] - (i == j ? 1.0 : 0.0);
  // replace the redundant last balance row by the normalization sum(x) = 1
  for (std::size_t j = 0; j < n; ++j) A(n - 1, j) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd x = A.partialPivLu().solve(b);

  TrafficSolution out;
  out.closed_normalization = true;
  out.pi.resize(n);
  out.rho.resize(n);
  double sum = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x(i) < -1e-9) throw std::domain_error("fixed vector came out negative; matrix degenerate");
    double v = std::max(x(i), 0.0);
    sum += v;
    mx = std::max(mx, v);
  }
  if (!(mx > 0.0)) throw std::domain_error("fixed vector vanished");
  for (std::size_t i = 0; i < n; ++i) {
    out.pi[i] = std::max(x(i), 0.0) / sum;
    out.rho[i] = std::max(x(i), 0.0) / mx;
  }
  return out;
}

TrafficSolution solve_traffic_open(const std::vector<double>& lambda_ext,
                                   const std::vector<std::vector<double>>& P) {
  check_square(P);
  const std::size_t n = P.size();
  if (lambda_ext.size() != n)
    throw std::invalid_argument("arrival vector size disagrees with routing matrix");
  for (double l : lambda_ext)
    if (!(l >= 0.0)) throw std::invalid_argument("arrival rates must be nonnegative");

  Eigen::MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = (i == j ? 1.0 : 0.0) - P[j][i];
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) b(i) = lambda_ext[i];
  Eigen::VectorXd x = A.partialPivLu().solve(b);
  double resid = (A * x - b).lpNorm<Eigen::Infinity>();
  double scale = 1.0 + b.lpNorm<Eigen::Infinity>();
  if (!(resid <= 1e-10 * scale))
    throw std::domain_error("arrival equations are singular; routing is not properly open");

  // Neumann cross-check: rho = lambda sum_k P^k
  std::vector<double> acc(lambda_ext), cur(lambda_ext);
  bool converged = false;
  for (int it = 0; it < 50000 && !converged; ++it) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (cur[i] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) next[j] += cur[i] * P[i][j];
    }
    double inc = 0.0, tot = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc[j] += next[j];
      inc = std::max(inc, next[j]);
      tot = std::max(tot, acc[j]);
    }
    cur.swap(next);
    converged = inc <= 1e-15 * (1.0 + tot);
  }
  if (converged) {
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(acc[i] - x(i)) > 1e-8 * (1.0 + std::abs(x(i))))
        throw std::domain_error("direct solve and series expansion disagree");
  }

  TrafficSolution out;
  out.rho.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (x(i) < -1e-9) throw std::domain_error("negative throughput; routing is not substochastic");
    out.rho[i] = std::max(x(i), 0.0);
  }
  return out;
}

namespace {
// In-place geometric-factor convolution; all entries share one log offset.
struct ScaledVector {
  std::vector<double> v;
  double log_offset = 0.0;

  void rescale() {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, x);
    if (mx > 1e250) {
      for (double& x : v) x /= mx;
      log_offset += std::log(mx);
    }
  }
};

ScaledVector z_table(const std::vector<double>& r, std::size_t M) {
  for (double ri : r)
    if (!(ri >= 0.0)) throw std::invalid_argument("load factors must be nonnegative");
  ScaledVector z;
  z.v.assign(M + 1, 0.0);
  z.v[0] = 1.0;
  for (double ri : r) {
    for (std::size_t m = 1; m <= M; ++m) z.v[m] += ri * z.v[m - 1];
    z.rescale();
  }
  return z;
}
}  // namespace

double partition_function(const std::vector<double>& r, std::size_t M) {
  auto z = z_table(r, M);
  return z.v[M] * std::exp(z.log_offset);
}

double log_partition_function(const std::vector<double>& r, std::size_t M) {
  auto z = z_table(r, M);
  if (z.v[M] == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(z.v[M]) + z.log_offset;
}

std::vector<double> closed_mean_occupancy(const std::vector<double>& r,
                                          std::size_t M) {
  if (r.empty()) throw std::invalid_argument("need at least one load factor");
  double rmax = 0.0;
  for (double ri : r) {
    if (!(ri >= 0.0)) throw std::invalid_argument("load factors must be nonnegative");
    rmax = std::max(rmax, ri);
  }
  if (rmax == 0.0) throw std::invalid_argument("all load factors are zero");
  std::vector<double> rn(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) rn[i] = r[i] / rmax;
  auto z = z_table(rn, M);
  if (z.v[M] == 0.0) throw std::domain_error("partition function underflowed");
  std::vector<double> means(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    double rk = 1.0;
    double acc = 0.0;
    for (std::size_t k = 1; k <= M; ++k) {
      rk *= rn[i];
      if (rk == 0.0) break;
      acc += rk * z.v[M - k];
    }
    means[i] = acc / z.v[M];
  }
  return means;
}

double partition_function_general(const std::vector<std::function<double(std::size_t)>>& f,
                                  std::size_t nodes, std::size_t M) {
  if (f.size() != nodes) throw std::invalid_argument("factor count disagrees with node count");
  std::vector<double> prev(M + 1, 0.0);
  prev[0] = 1.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    std::vector<double> next(M + 1, 0.0);
    for (std::size_t m = 0; m <= M; ++m) {
      double fi = f[i](m);
      if (!(fi >= 0.0)) throw std::invalid_argument("factors must be nonnegative");
      for (std::size_t t = m; t <= M; ++t) next[t] += fi * prev[t - m];
    }
    prev.swap(next);
  }
  return prev[M];
}

namespace {
std::vector<double> conv(const std::vector<double>& a, const std::vector<double>& b,
                         std::size_t M) {
  std::vector<double> c(M + 1, 0.0);
  for (std::size_t i = 0; i <= M; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; i + j <= M; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

double composition_count(std::size_t N, std::size_t M) {
  // C(M+N-1, N-1), saturating
  double c = 1.0;
  for (std::size_t k = 1; k < N; ++k) {
    c *= static_cast<double>(M + k) / static_cast<double>(k);
    if (c > 1e18) return 1e18;
  }
  return c;
}

void enumerate_states(std::size_t node, std::size_t left, std::vector<int>& cur,
                      const std::vector<std::vector<double>>& F,
                      std::vector<std::vector<int>>& states, std::vector<double>& weights,
                      double w) {
  if (node + 1 == cur.size()) {
    cur[node] = static_cast<int>(left);
    states.push_back(cur);
    weights.push_back(w * F[node][left]);
    return;
  }
  for (std::size_t k = 0; k <= left; ++k) {
    cur[node] = static_cast<int>(k);
    enumerate_states(node + 1, left - k, cur, F, states, weights, w * F[node][k]);
  }
}
}  // namespace

ClosedStationary stationary_closed(const NetworkSpec& spec, std::size_t M,
                                   std::size_t enumeration_cap) {
  validate(spec);
  if (!spec.closed()) throw std::invalid_argument("stationary_closed needs a closed network");
  auto ts = solve_traffic_closed(spec.P);
  const std::size_t n = spec.nodes;

  ClosedStationary out;
  out.r.resize(n);
  bool allconst = true;
  for (std::size_t i = 0; i < n; ++i) {
    allconst = allconst && spec.service[i].constant();
    out.r[i] = ts.rho[i] / spec.service[i](1);
  }
  double rmax = *std::max_element(out.r.begin(), out.r.end());
  for (auto& ri : out.r) ri /= rmax;

  // per-node weight vectors F_i(k) = rho_i^k / (mu_i(1)...mu_i(k)), max-scaled
  std::vector<std::vector<double>> F(n, std::vector<double>(M + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= M; ++k) {
      double step = spec.service[i].constant() ? out.r[i]
                                               : ts.rho[i] / (rmax * spec.service[i](k));
      F[i][k] = F[i][k - 1] * step;
    }

  out.means.assign(n, 0.0);
  if (allconst) {
    auto z = z_table(out.r, M);
    out.log_Z = std::log(z.v[M]) + z.log_offset;
    // tail identity: P(n_i >= k) = r_i^k Z_{N,M-k} / Z_{N,M}
    for (std::size_t i = 0; i < n; ++i) {
      double rk = 1.0;
      for (std::size_t k = 1; k <= M; ++k) {
        rk *= out.r[i];
        out.means[i] += rk * z.v[M - k] / z.v[M];
      }
    }
  } else {
    // prefix/suffix convolutions give each node's complement in one sweep
    std::vector<std::vector<double>> pre(n + 1), suf(n + 1);
    pre[0].assign(M + 1, 0.0);
    pre[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = conv(pre[i], F[i], M);
    suf[n].assign(M + 1, 0.0);
    suf[n][0] = 1.0;
    for (std::size_t i = n; i-- > 0;) suf[i] = conv(F[i], suf[i + 1], M);
    const double Z = pre[n][M];
    if (!(Z > 0.0)) throw std::domain_error("partition function vanished");
    out.log_Z = std::log(Z);
    for (std::size_t i = 0; i < n; ++i) {
      auto comp = conv(pre[i], suf[i + 1], M);
      for (std::size_t k = 1; k <= M; ++k)
        out.means[i] += static_cast<double>(k) * F[i][k] * comp[M - k] / Z;
    }
  }

  if (composition_count(n, M) <= static_cast<double>(enumeration_cap)) {
    std::vector<int> cur(n, 0);
    std::vector<double> weights;
    enumerate_states(0, M, cur, F, out.states, weights, 1.0);
    double total = 0.0;
    for (double w : weights) total += w;
    out.probs.resize(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) out.probs[k] = weights[k] / total;
    out.enumerated = true;
  }
  return out;
}

OpenStationary stationary_open(const NetworkSpec& spec) {
  validate(spec);
  if (spec.closed()) throw std::invalid_argument("stationary_open needs an open network");
  for (const auto& s : spec.service)
    if (!s.constant())
      throw std::logic_error("open-network product form requires constant service rates");
  auto ts = solve_traffic_open(spec.lambda_ext, spec.P);

  OpenStationary out;
  out.r.resize(spec.nodes);
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    out.r[i] = ts.rho[i] / spec.service[i].rate;
    if (out.r[i] >= 1.0) out.transient_nodes.push_back(i);
  }
  out.ergodic = out.transient_nodes.empty();
  if (out.ergodic) {
    out.means.resize(spec.nodes);
    for (std::size_t i = 0; i < spec.nodes; ++i) out.means[i] = out.r[i] / (1.0 - out.r[i]);
  }
  return out;
}

CtmcResult simulate_ctmc(const NetworkSpec& spec, std::vector<int> initial, double t_max,
                         Rng& rng, const StateObserver& observer) {
  validate(spec);
  const std::size_t n = spec.nodes;
  if (initial.size() != n) throw std::invalid_argument("initial state size mismatch");
  for (int v : initial)
    if (v < 0) throw std::invalid_argument("initial queue lengths must be nonnegative");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");

  CtmcResult res;
  res.occupancy.assign(n, {});
  res.jump_counts.assign(n + 1, std::vector<double>(n + 1, 0.0));
  res.busy_time.assign(n, 0.0);
  std::vector<int> state = std::move(initial);

  auto account = [&](double dt) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& occ = res.occupancy[i];
      std::size_t ni = static_cast<std::size_t>(state[i]);
      if (occ.size() <= ni) occ.resize(ni + 1, 0.0);
      occ[ni] += dt;
      if (ni > 0) res.busy_time[i] += dt;
    }
    if (observer) observer(state, dt);
  };

  double lambda_total = 0.0;
  for (double l : spec.lambda_ext) lambda_total += l;

  double t = 0.0;
  std::vector<double> srate(n);
  while (true) {
    double total = lambda_total;
    for (std::size_t i = 0; i < n; ++i) {
      srate[i] = spec.service[i](static_cast<std::size_t>(state[i]));
      total += srate[i];
    }
    if (total == 0.0) {
      account(t_max - t);
      break;
    }
    double dt = rng.exponential(total);
    if (t + dt >= t_max) {
      account(t_max - t);
      break;
    }
    account(dt);
    t += dt;
    ++res.events;

    double u = rng.uniform() * total;
    std::size_t src = n;  // n means external arrival
    for (std::size_t i = 0; i < n; ++i) {
      if (u < srate[i]) {
        src = i;
        break;
      }
      u -= srate[i];
    }
    if (src < n) {
      double v = rng.uniform();
      std::size_t dst = n;  // n means exit
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += spec.P[src][j];
        if (v < acc) {
          dst = j;
          break;
        }
      }
      --state[src];
      if (dst < n) {
        ++state[dst];
        res.jump_counts[src + 1][dst + 1] += 1.0;
      } else {
        res.jump_counts[src + 1][0] += 1.0;
      }
    } else {
      // external arrival; pick the entry node proportionally to lambda
      double v = u;  // remainder after subtracting all service rates, < lambda_total
      std::size_t dst = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (spec.lambda_ext[j] == 0.0) continue;
        dst = j;  // last positive-rate node absorbs rounding overshoot
        if (v < spec.lambda_ext[j]) break;
        v -= spec.lambda_ext[j];
      }
      ++state[dst];
      res.jump_counts[0][dst + 1] += 1.0;
    }
  }

  res.total_time = t_max;
  res.final_state = state;
  res.occupation_mean.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& frac : res.occupancy[i]) frac /= t_max;
    for (std::size_t k = 0; k < res.occupancy[i].size(); ++k)
      res.occupation_mean[i] += static_cast<double>(k) * res.occupancy[i][k];
  }
  return res;
}

CtmcResult simulate_ctmc(const NetworkSpec& spec, std::size_t M, double t_max, Rng& rng,
                         const StateObserver& observer) {
  std::vector<int> initial(spec.nodes, 0);
  for (std::size_t k = 0; k < M; ++k) ++initial[k % spec.nodes];
  return simulate_ctmc(spec, std::move(initial), t_max, rng, observer);
}

EstimatedParams estimate_parameters(const std::vector<std::vector<double>>& jump_counts,
                                    double T, const std::vector<double>* busy_time) {
  if (jump_counts.empty() || !(T > 0.0))
    throw std::invalid_argument("estimation needs jump counts and a positive horizon");
  const std::size_t n = jump_counts.size() - 1;
  for (const auto& row : jump_counts)
    if (row.size() != n + 1) throw std::invalid_argument("jump count matrix is not square");
  if (busy_time && busy_time->size() != n)
    throw std::invalid_argument("busy time vector size mismatch");

  EstimatedParams est;
  est.P_hat.assign(n, std::vector<double>(n + 1, 0.0));
  est.mu_hat.assign(n, 0.0);
  est.identifiable.assign(n, false);
  if (busy_time) est.mu_hat_busy.assign(n, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j <= n; ++j) total += jump_counts[i][j];
    est.mu_hat[i - 1] = total / T;
    if (total > 0.0) {
      est.identifiable[i - 1] = true;
      for (std::size_t j = 0; j <= n; ++j) est.P_hat[i - 1][j] = jump_counts[i][j] / total;
    }
    if (busy_time)
      est.mu_hat_busy[i - 1] = (*busy_time)[i - 1] > 0.0 ? total / (*busy_time)[i - 1] : 0.0;
  }
  return est;
}

}  // namespace traffic
