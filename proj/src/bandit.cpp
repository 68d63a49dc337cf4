#include "gob/bandit.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace gob {

ConfidencePolicy ConfidencePolicy::simplified(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("ConfidencePolicy: alpha must be > 0");
  ConfidencePolicy p;
  p.kind_ = Kind::Simplified;
  p.alpha_ = alpha;
  return p;
}

ConfidencePolicy ConfidencePolicy::theoretical(double sigma, double delta, double norm_bound) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("ConfidencePolicy: sigma must be >= 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("ConfidencePolicy: delta must be in (0,1)");
  if (!(norm_bound >= 0.0)) throw std::invalid_argument("ConfidencePolicy: norm bound must be >= 0");
  ConfidencePolicy p;
  p.kind_ = Kind::Theoretical;
  p.sigma_ = sigma;
  p.delta_ = delta;
  p.norm_bound_ = norm_bound;
  return p;
}

double ConfidencePolicy::bonus(double quad, double logdet_prev, long t) const {
  if (t < 1) throw std::invalid_argument("ConfidencePolicy: rounds are 1-based");
  if (quad < 0.0) quad = 0.0;  // guard tiny negative round-off
  if (kind_ == Kind::Simplified) return alpha_ * std::sqrt(quad * std::log(static_cast<double>(t) + 1.0));
  const double logdet_t = logdet_prev + std::log1p(quad);
  return std::sqrt(quad) * (sigma_ * std::sqrt(logdet_t - std::log(delta_)) + norm_bound_);
}

BanditState::BanditState(Index dim)
    : inverse_(dim), bias_(Vector::Zero(dim)), weights_(Vector::Zero(dim)) {}

Vector BanditState::scores(const ConfidencePolicy& policy, const Matrix& candidates, long t) const {
  if (candidates.cols() < 1) throw std::invalid_argument("select: empty candidate set");
  if (candidates.rows() != dim()) throw std::invalid_argument("select: candidate dimension mismatch");
  const Matrix inv_times = inverse_.apply_cols(candidates);
  Vector out(candidates.cols());
  for (Index k = 0; k < candidates.cols(); ++k) {
    const double quad = candidates.col(k).dot(inv_times.col(k));
    out[k] = weights_.dot(candidates.col(k)) + policy.bonus(quad, inverse_.logdet(), t);
  }
  return out;
}

int argmax_score(const Vector& scores) {
  const double top = scores.maxCoeff();
  const double tie_tol = 1e-12 * std::max(1.0, std::abs(top));
  for (Index k = 0; k < scores.size(); ++k)
    if (scores[k] >= top - tie_tol) return static_cast<int>(k);
  return 0;
}

Selection BanditState::select(const ConfidencePolicy& policy, const Matrix& candidates,
                              long t) const {
  if (candidates.cols() < 1) throw std::invalid_argument("select: empty candidate set");
  if (candidates.rows() != dim()) throw std::invalid_argument("select: candidate dimension mismatch");
  const Matrix inv_times = inverse_.apply_cols(candidates);

  std::vector<double> quads(static_cast<std::size_t>(candidates.cols()));
  Vector score(candidates.cols());
  for (Index k = 0; k < candidates.cols(); ++k) {
    const double quad = candidates.col(k).dot(inv_times.col(k));
    quads[static_cast<std::size_t>(k)] = quad;
    score[k] = weights_.dot(candidates.col(k)) + policy.bonus(quad, inverse_.logdet(), t);
  }
  Selection best;
  best.index = argmax_score(score);
  best.score = score[best.index];
  best.inv_times_v = inv_times.col(best.index);
  best.quad = quads[static_cast<std::size_t>(best.index)];
  return best;
}

double BanditState::confidence_bonus(const ConfidencePolicy& policy, const Vector& v, long t) const {
  return policy.bonus(inverse_.quad(v), inverse_.logdet(), t);
}

void BanditState::update(const Vector& v, double payoff) {
  Vector y = inverse_.apply(v);
  update(v, payoff, y, v.dot(y));
}

void BanditState::update(const Vector& v, double payoff, const Vector& inv_times_v, double quad) {
  if (v.size() != dim()) throw std::invalid_argument("update: dimension mismatch");
  if (!(payoff >= -1.0 && payoff <= 1.0))
    throw std::invalid_argument("update: payoff outside [-1, 1]");
  const double beta = 1.0 + quad;
  inverse_.rank_one_update_precomputed(inv_times_v, quad);
  bias_.noalias() += payoff * v;
  // w_t = M_t^{-1} b_t via the same rank-one identity (exact RLS recursion)
  weights_.noalias() += inv_times_v * ((payoff - v.dot(weights_)) / beta);
}

void BanditState::refresh_weights() { weights_ = inverse_.apply(bias_); }

namespace {
constexpr char kStateMagic[8] = {'G', 'O', 'B', 'S', 'T', 'A', 'T', '1'};

void write_raw(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_raw(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("state snapshot: truncated input");
}
}  // namespace

void BanditState::save(std::ostream& out) const {
  write_raw(out, kStateMagic, sizeof(kStateMagic));
  const std::uint64_t dim64 = static_cast<std::uint64_t>(dim());
  const std::uint64_t ups = inverse_.updates();
  const double logdet = inverse_.logdet();
  write_raw(out, &dim64, sizeof(dim64));
  write_raw(out, &ups, sizeof(ups));
  write_raw(out, &logdet, sizeof(logdet));
  const Matrix& inv = inverse_.matrix();
  write_raw(out, inv.data(), sizeof(double) * static_cast<std::size_t>(inv.size()));
  write_raw(out, bias_.data(), sizeof(double) * static_cast<std::size_t>(bias_.size()));
  write_raw(out, weights_.data(), sizeof(double) * static_cast<std::size_t>(weights_.size()));
}

BanditState BanditState::load(std::istream& in) {
  char magic[8];
  read_raw(in, magic, sizeof(magic));
  if (std::memcmp(magic, kStateMagic, sizeof(magic)) != 0)
    throw std::runtime_error("state snapshot: bad magic");
  std::uint64_t dim64 = 0, ups = 0;
  double logdet = 0.0;
  read_raw(in, &dim64, sizeof(dim64));
  read_raw(in, &ups, sizeof(ups));
  read_raw(in, &logdet, sizeof(logdet));
  const Index dim = static_cast<Index>(dim64);
  if (dim <= 0 || dim > (1 << 20)) throw std::runtime_error("state snapshot: bad dimension");

  BanditState s(dim);
  Matrix inv(dim, dim);
  read_raw(in, inv.data(), sizeof(double) * static_cast<std::size_t>(inv.size()));
  read_raw(in, s.bias_.data(), sizeof(double) * static_cast<std::size_t>(dim));
  read_raw(in, s.weights_.data(), sizeof(double) * static_cast<std::size_t>(dim));
  s.inverse_ = linalg::IncrementalInversed::restore(inv, logdet, ups);
  return s;
}

bool BanditState::equals(const BanditState& other, double tol) const {
  if (dim() != other.dim()) return false;
  if (std::abs(logdet() - other.logdet()) > tol) return false;
  if ((bias_ - other.bias_).cwiseAbs().maxCoeff() > tol) return false;
  if ((weights_ - other.weights_).cwiseAbs().maxCoeff() > tol) return false;
  return (inverse_.matrix() - other.inverse_.matrix()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace gob
