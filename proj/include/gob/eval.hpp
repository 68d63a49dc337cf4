#pragma once

#include "gob/data.hpp"
#include "gob/graph.hpp"
#include "gob/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gob {

// Per-round log of one experiment. Rows are strictly increasing in t and all
// cumulative numbers are recomputable from them.
struct RunRow {
  long t = 0;
  int user = 0;
  int chosen = 0;
  double payoff = 0.0;    // observed (clipped) payoff of the chosen arm
  double baseline = 0.0;  // mean payoff over the arms (random predictor)
  double regret = std::numeric_limits<double>::quiet_NaN();  // NaN without ground truth
  double logdet = 0.0;    // runner log-determinant after the update
};

struct RunRecord {
  std::string algo;
  std::uint64_t seed = 0;
  std::uint64_t config_fingerprint = 0;
  std::vector<RunRow> rows;
  long clipped_payoffs = 0;
  double max_candidate_norm = 0.0;

  void append(RunRow row);
  double final_cum_reward() const;
  double final_cum_norm_reward() const;
  double cum_regret() const;  // NaN if any row lacks regret
  bool has_regret() const;

  // CSV columns: t,algo,seed,user,chosen,payoff,baseline,regret,
  // cum_reward,cum_norm_reward,logdet  (UTF-8, LF)
  void write_csv(std::ostream& out) const;
  static RunRecord read_csv(std::istream& in);
};

// Prefix sums of (payoff - baseline).
std::vector<double> normalized_cumreward(const RunRecord& record);

// max_k u_i' x_k  -  u_i' x_chosen, from the ground truth.
double instantaneous_regret(const GroundTruth& gt, const ContextEvent& event, int chosen);

// L(u_1..u_n) = sum_i ||u_i||^2 + sum_{(i,j) in E} w_ij ||u_i - u_j||^2,
// equal to U' (I+L)(x)I U.
double multitask_norm(const GroundTruth& gt, const UserGraph& g);

// Cumulative regret bound
//   2 sqrt( T (2 sigma^2 (ln|M_T| - ln delta) + 2 L) (1 + B^2) ln|M_T| ).
double theorem1_bound(long T, double sigma, double delta, double multitask_norm_value, double B,
                      double logdet_mt);

// Algebraic consistency of the sharing transform on sampled (node, context)
// pairs: (a) U_tilde' phi_tilde == u_i' x, (b) ||phi_tilde|| <= ||x||,
// (c) ||U_tilde||^2 == L(u_1..u_n).
struct IdentityReport {
  int samples = 0;
  int failures_a = 0;
  int failures_b = 0;
  int failures_c = 0;
  double max_err_a = 0.0;      // absolute
  double max_excess_b = 0.0;   // ||phi|| - ||x||, positive means violation
  double max_rel_err_c = 0.0;  // relative
  std::vector<std::string> itemized;

  bool pass() const { return failures_a + failures_b + failures_c == 0; }
};

// `fault` perturbs the lift matrix (diagnostic hook for the verify suite's
// negative test); 0 checks the real transform.
IdentityReport identity_checks(const GroundTruth& gt, const UserGraph& g, int samples,
                               std::uint64_t seed, double fault = 0.0);

// Runs GOB.Lin updates with unit contexts and checks tr(M_T) against the
// closed forms for the edgeless (nd + T) and complete (nd + 2T/(n+1)) graphs.
struct TraceReport {
  double trace = 0.0;
  std::optional<double> expected;
  double tol = 1e-6;
  bool pass() const { return !expected || std::abs(trace - *expected) <= tol; }
};

TraceReport trace_extremes_check(const UserGraph& g, Index d, long T, std::uint64_t seed);

// mean and standard error across a sample
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

}  // namespace gob
