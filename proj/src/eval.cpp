#include "gob/eval.hpp"

#include "gob/bandit.hpp"
#include "gob/linalg.hpp"
#include "gob/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gob {

void RunRecord::append(RunRow row) {
  if (!rows.empty() && row.t <= rows.back().t)
    throw std::invalid_argument("RunRecord: rounds must be strictly increasing");
  rows.push_back(row);
}

double RunRecord::final_cum_reward() const {
  double sum = 0.0;
  for (const RunRow& r : rows) sum += r.payoff;
  return sum;
}

double RunRecord::final_cum_norm_reward() const {
  double sum = 0.0;
  for (const RunRow& r : rows) sum += r.payoff - r.baseline;
  return sum;
}

bool RunRecord::has_regret() const {
  for (const RunRow& r : rows)
    if (std::isnan(r.regret)) return false;
  return !rows.empty();
}

double RunRecord::cum_regret() const {
  if (!has_regret()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const RunRow& r : rows) sum += r.regret;
  return sum;
}

namespace {
void print_double(std::ostream& out, double v) {
  if (std::isnan(v)) return;  // empty field
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}
}  // namespace

void RunRecord::write_csv(std::ostream& out) const {
  out << "t,algo,seed,user,chosen,payoff,baseline,regret,cum_reward,cum_norm_reward,logdet\n";
  double cum_reward = 0.0, cum_norm = 0.0;
  for (const RunRow& r : rows) {
    cum_reward += r.payoff;
    cum_norm += r.payoff - r.baseline;
    out << r.t << ',' << algo << ',' << seed << ',' << r.user << ',' << r.chosen << ',';
    print_double(out, r.payoff);
    out << ',';
    print_double(out, r.baseline);
    out << ',';
    print_double(out, r.regret);
    out << ',';
    print_double(out, cum_reward);
    out << ',';
    print_double(out, cum_norm);
    out << ',';
    print_double(out, r.logdet);
    out << '\n';
  }
}

RunRecord RunRecord::read_csv(std::istream& in) {
  RunRecord rec;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("RunRecord: empty CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() < 11) throw std::runtime_error("RunRecord: malformed CSV row");
    RunRow r;
    r.t = std::stol(fields[0]);
    rec.algo = fields[1];
    rec.seed = std::stoull(fields[2]);
    r.user = std::stoi(fields[3]);
    r.chosen = std::stoi(fields[4]);
    r.payoff = std::stod(fields[5]);
    r.baseline = std::stod(fields[6]);
    r.regret = fields[7].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[7]);
    r.logdet = std::stod(fields[10]);
    rec.rows.push_back(r);
  }
  return rec;
}

std::vector<double> normalized_cumreward(const RunRecord& record) {
  std::vector<double> out;
  out.reserve(record.rows.size());
  double sum = 0.0;
  for (const RunRow& r : record.rows) {
    sum += r.payoff - r.baseline;
    out.push_back(sum);
  }
  return out;
}

double instantaneous_regret(const GroundTruth& gt, const ContextEvent& event, int chosen) {
  if (chosen < 0 || chosen >= event.arm_count())
    throw std::invalid_argument("instantaneous_regret: chosen arm out of range");
  const Vector means = event.candidates.transpose() * gt.vectors.col(event.user);
  return means.maxCoeff() - means[chosen];
}

double multitask_norm(const GroundTruth& gt, const UserGraph& g) {
  if (gt.num_nodes() != g.num_nodes())
    throw std::invalid_argument("multitask_norm: size mismatch");
  double sum = gt.vectors.squaredNorm();
  for (const Edge& e : g.edges())
    sum += e.weight * (gt.vectors.col(e.i) - gt.vectors.col(e.j)).squaredNorm();
  return sum;
}

double theorem1_bound(long T, double sigma, double delta, double multitask_norm_value, double B,
                      double logdet_mt) {
  if (T < 1) throw std::invalid_argument("theorem1_bound: T must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("theorem1_bound: delta must be in (0,1)");
  if (sigma < 0.0 || multitask_norm_value < 0.0 || B < 0.0 || logdet_mt < 0.0)
    throw std::invalid_argument("theorem1_bound: inputs must be nonnegative");
  const double inner = 2.0 * sigma * sigma * (logdet_mt - std::log(delta)) +
                       2.0 * multitask_norm_value;
  return 2.0 * std::sqrt(static_cast<double>(T) * inner * (1.0 + B * B) * logdet_mt);
}

IdentityReport identity_checks(const GroundTruth& gt, const UserGraph& g, int samples,
                               std::uint64_t seed, double fault) {
  IdentityReport report;
  report.samples = samples;

  const SharingTransform st(g);
  const Index d = gt.dim();
  const int n = g.num_nodes();

  Matrix lift_matrix = st.a_inv_sqrt();
  if (fault != 0.0) {
    lift_matrix(0, n - 1) += fault;
    lift_matrix(n - 1, 0) += fault;
  }
  auto lift = [&](int i, const Vector& x) {
    Vector out(static_cast<Index>(n) * d);
    for (int j = 0; j < n; ++j) out.segment(static_cast<Index>(j) * d, d) = lift_matrix(j, i) * x;
    return out;
  };

  // U_tilde = (A^{1/2} (x) I_d) U, assembled block-wise
  const Matrix a_sqrt = linalg::sqrt_pd(st.a());
  Vector u_tilde(static_cast<Index>(n) * d);
  for (int j = 0; j < n; ++j) {
    Vector block = Vector::Zero(d);
    for (int i = 0; i < n; ++i) block += a_sqrt(j, i) * gt.vectors.col(i);
    u_tilde.segment(static_cast<Index>(j) * d, d) = block;
  }

  // (c) ||U_tilde||^2 vs the explicit multitask sum
  {
    const double lhs = u_tilde.squaredNorm();
    const double rhs = multitask_norm(gt, g);
    const double rel = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
    report.max_rel_err_c = rel;
    if (rel > 1e-9) {
      ++report.failures_c;
      report.itemized.push_back("(c) ||U_tilde||^2 = " + std::to_string(lhs) +
                                " but L(u_1..u_n) = " + std::to_string(rhs));
    }
  }

  auto gen = rng::make_stream(seed, rng::Stream::Generic);
  std::uniform_int_distribution<int> pick_node(0, n - 1);
  for (int s = 0; s < samples; ++s) {
    const int i = pick_node(gen);
    const Vector x = rng::unit_vector(gen, d);
    const Vector lifted = lift(i, x);

    const double dot_lifted = u_tilde.dot(lifted);
    const double dot_plain = gt.vectors.col(i).dot(x);
    const double err_a = std::abs(dot_lifted - dot_plain);
    report.max_err_a = std::max(report.max_err_a, err_a);
    if (err_a > 1e-9) {
      ++report.failures_a;
      if (report.itemized.size() < 20)
        report.itemized.push_back("(a) node " + std::to_string(i) + ": U_tilde'phi = " +
                                  std::to_string(dot_lifted) + " vs u'x = " +
                                  std::to_string(dot_plain));
    }

    // ||phi_tilde|| <= ||x||, up to round-off in the transform
    const double excess = lifted.norm() - x.norm() * (1.0 + 1e-12);
    report.max_excess_b = std::max(report.max_excess_b, lifted.norm() - x.norm());
    if (excess > 0.0) {
      ++report.failures_b;
      if (report.itemized.size() < 20)
        report.itemized.push_back("(b) node " + std::to_string(i) +
                                  ": ||phi_tilde|| = " + std::to_string(lifted.norm()) +
                                  " exceeds ||x|| = " + std::to_string(x.norm()));
    }
  }
  return report;
}

TraceReport trace_extremes_check(const UserGraph& g, Index d, long T, std::uint64_t seed) {
  const int n = g.num_nodes();
  const long pairs = static_cast<long>(n) * (n - 1) / 2;
  TraceReport report;
  if (g.num_edges() == 0) {
    report.expected = static_cast<double>(n) * static_cast<double>(d) + static_cast<double>(T);
  } else if (static_cast<long>(g.num_edges()) == pairs) {
    report.expected = static_cast<double>(n) * static_cast<double>(d) +
                      2.0 * static_cast<double>(T) / (n + 1);
  }

  GobLinRunner runner(g, d, ConfidencePolicy::simplified(1.0));
  GroundTruth dummy;
  dummy.vectors = Matrix::Zero(d, n);  // users drawn uniformly; payoffs irrelevant here
  double trace = static_cast<double>(n) * static_cast<double>(d);
  for (long t = 1; t <= T; ++t) {
    ContextEvent ev = sample_synth_context_set(dummy, 5, seed, t);
    const int arm = runner.choose(ev);
    trace += runner.transform().lift_context(ev.user, ev.candidates.col(arm)).squaredNorm();
    runner.feedback(ev, arm, 0.0);
  }
  report.trace = trace;
  return report;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  out.n = static_cast<int>(xs.size());
  if (out.n == 0) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / out.n;
  if (out.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (out.n - 1)) / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

}  // namespace gob
