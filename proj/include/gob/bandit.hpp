#pragma once

#include "gob/linalg.hpp"
#include "gob/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace gob {

// Optimism bonus added to the estimated payoff of a candidate.
//
// simplified:   alpha * sqrt(v' M^{-1} v * ln(t+1))
// theoretical:  sqrt(v' M^{-1} v) * (sigma * sqrt(ln|M_t| - ln(delta)) + norm_bound)
//
// The theoretical form references the determinant after the candidate's own
// would-be update, i.e. ln|M_t| = ln|M_{t-1}| + ln(1 + v' M^{-1} v), which is
// well defined candidate-wise at selection time.
class ConfidencePolicy {
 public:
  enum class Kind { Simplified, Theoretical };

  static ConfidencePolicy simplified(double alpha);
  static ConfidencePolicy theoretical(double sigma, double delta, double norm_bound);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double sigma() const { return sigma_; }
  double delta() const { return delta_; }
  double norm_bound() const { return norm_bound_; }

  // quad = v' M^{-1} v, logdet_prev = ln|M_{t-1}|, t = 1-based round.
  double bonus(double quad, double logdet_prev, long t) const;

 private:
  ConfidencePolicy() = default;
  Kind kind_ = Kind::Simplified;
  double alpha_ = 1.0;
  double sigma_ = 0.0;
  double delta_ = 0.05;
  double norm_bound_ = 0.0;
};

struct Selection {
  int index = -1;
  Vector inv_times_v;  // M^{-1} v for the chosen candidate
  double quad = 0.0;   // v' M^{-1} v
  double score = 0.0;
};

// Lowest index within round-off of the maximal score. A strict float argmax
// would let summation-order jitter break mathematically exact ties.
int argmax_score(const Vector& scores);

// Regularized least-squares state of one linear bandit: M^{-1} kept by
// rank-one updates, bias b, and the weight vector w = M^{-1} b. Starts at
// M = I, b = 0.
class BanditState {
 public:
  explicit BanditState(Index dim);

  Index dim() const { return inverse_.dim(); }
  const linalg::IncrementalInversed& inverse() const { return inverse_; }
  const Vector& bias() const { return bias_; }
  const Vector& weights() const { return weights_; }
  double logdet() const { return inverse_.logdet(); }
  std::uint64_t updates() const { return inverse_.updates(); }

  // Scores w'v_k + cb(v_k) for every column of `candidates`.
  Vector scores(const ConfidencePolicy& policy, const Matrix& candidates, long t) const;

  // Lowest index attaining the maximal score, with its update ingredients.
  Selection select(const ConfidencePolicy& policy, const Matrix& candidates, long t) const;

  double confidence_bonus(const ConfidencePolicy& policy, const Vector& v, long t) const;

  // M += v v', b += payoff * v, w refreshed. Payoff must lie in [-1, 1].
  void update(const Vector& v, double payoff);
  void update(const Vector& v, double payoff, const Vector& inv_times_v, double quad);

  // exact w = M^{-1} b (the incremental weight recursion is used otherwise)
  void refresh_weights();

  void save(std::ostream& out) const;
  static BanditState load(std::istream& in);

  bool equals(const BanditState& other, double tol) const;

 private:
  linalg::IncrementalInversed inverse_;
  Vector bias_;
  Vector weights_;
};

}  // namespace gob
