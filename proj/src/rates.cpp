#include "cpgd/rates.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cpgd::rates {
namespace {

constexpr int kMaxRecurrenceIterations = 200;
constexpr double kRecurrenceTol = 1e-12;
constexpr std::size_t kMinFitCycles = 20;
constexpr std::size_t kMinFitPoints = 5;
// Gaps within this many ulps of F_* are indistinguishable from rounding.
constexpr double kGapNoiseUlps = 1e3;

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Root of D + c D^(alpha+1) = prev on (0, prev].
double next_delta(double prev, double c, double alpha) {
  if (alpha == 0.0) {
    return prev / (1.0 + c);
  }
  const double e = alpha + 1.0;
  auto f = [&](double d) { return d + c * std::pow(d, e) - prev; };
  if (f(std::numeric_limits<double>::min()) >= 0.0) {
    return 0.0;  // root below the normal range; the caller truncates
  }
  // One of the two terms carries at least half of prev, and neither exceeds
  // it, which brackets the root within a constant factor.
  double lo = std::min(0.5 * prev, std::pow(0.5 * prev / c, 1.0 / e));
  double hi = std::min(prev, std::pow(prev / c, 1.0 / e));
  if (!(lo > 0.0) || f(lo) > 0.0) {
    lo = 0.0;
  }
  double d = hi;
  const double target = 4.0 * std::numeric_limits<double>::epsilon() * prev;
  for (int it = 0; it < kMaxRecurrenceIterations; ++it) {
    const double v = f(d);
    if (std::abs(v) <= target) {
      return d;
    }
    if (v > 0.0) {
      hi = d;
    } else {
      lo = d;
    }
    const double slope = 1.0 + c * e * std::pow(d, alpha);
    double nd = d - v / slope;
    if (!(nd > lo && nd < hi)) {
      nd = 0.5 * (lo + hi);
    }
    if (nd == d) {
      break;
    }
    d = nd;
  }
  if (std::abs(f(d)) <= kRecurrenceTol * prev) {
    return d;
  }
  throw std::runtime_error("recurrence step did not converge");
}

void check_regime_args(double c, double alpha) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("recurrence constant c must be positive");
  }
  if (!(alpha > -1.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("no decay bound for alpha outside (-1, 1)");
  }
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = std::numeric_limits<double>::infinity();
  // rms / std(y), i.e. sqrt(1 - R^2); scale-free, so usable to compare F_* candidates.
  double rel = std::numeric_limits<double>::infinity();
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit out;
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) {
    return out;
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    mx += x[j];
    my += y[j];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxx += (x[j] - mx) * (x[j] - mx);
    sxy += (x[j] - mx) * (y[j] - my);
    syy += (y[j] - my) * (y[j] - my);
  }
  if (!(sxx > 0.0)) {
    return out;
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double r = y[j] - (out.intercept + out.slope * x[j]);
    ss += r * r;
  }
  out.rms = std::sqrt(ss / n);
  if (syy > 0.0) {
    out.rel = std::sqrt(ss / syy);
  }
  return out;
}

struct TailData {
  std::vector<double> F;
  std::vector<double> S;
};

// Log-log regression for a given F_*; gaps buried in rounding are skipped.
LineFit fit_for_fstar(const TailData& tail, double f_star, std::size_t* used) {
  const double floor =
      kGapNoiseUlps * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f_star));
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t j = 0; j < tail.F.size(); ++j) {
    const double gap = tail.F[j] - f_star;
    if (gap > floor && tail.S[j] > 0.0) {
      x.push_back(std::log(tail.S[j]));
      y.push_back(std::log(gap));
    }
  }
  if (used != nullptr) {
    *used = x.size();
  }
  if (x.size() < kMinFitPoints) {
    return {};
  }
  return least_squares(x, y);
}

// F_* = F_min - t * scale, searched over t on a log grid then refined.
double extrapolate_fstar(const TailData& tail, double F_min, double scale) {
  auto cost = [&](double log_t) {
    return fit_for_fstar(tail, F_min - std::exp(log_t) * scale, nullptr).rel;
  };
  double best_lt = -30.0;
  double best = cost(best_lt);
  const double step = 0.25;
  for (double lt = -30.0; lt <= 15.0; lt += step) {
    const double v = cost(lt);
    if (v < best) {
      best = v;
      best_lt = lt;
    }
  }
  // Golden-section refinement around the grid minimum.
  double a = best_lt - step;
  double b = best_lt + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = b - g * (b - a);
  double c2 = a + g * (b - a);
  double f1 = cost(c1);
  double f2 = cost(c2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - g * (b - a);
      f1 = cost(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + g * (b - a);
      f2 = cost(c2);
    }
  }
  const double lt = 0.5 * (a + b);
  return cost(lt) <= best ? F_min - std::exp(lt) * scale : F_min - std::exp(best_lt) * scale;
}

}  // namespace

void RecurrenceSpec::validate() const {
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) {
    throw std::invalid_argument("delta0 must be finite and positive");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("recurrence constant c must be positive");
  }
  if (!(alpha > -1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("recurrence exponent must exceed -1");
  }
}

std::vector<double> simulate_recurrence(const RecurrenceSpec& spec) {
  spec.validate();
  std::vector<double> out;
  out.reserve(spec.K + 1);
  out.push_back(spec.delta0);
  for (std::size_t k = 0; k < spec.K; ++k) {
    const double next = next_delta(out.back(), spec.c, spec.alpha);
    if (!(next >= std::numeric_limits<double>::min())) {
      break;
    }
    out.push_back(next);
  }
  return out;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::sublinear:
      return "sublinear";
    case Regime::linear:
      return "linear";
    case Regime::superlinear:
      return "superlinear";
    case Regime::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

bool BoundCheck::all_hold() const {
  return std::all_of(holds.begin(), holds.end(), [](bool h) { return h; });
}

BoundCheck check_rate_bounds(std::span<const double> seq, double c, double alpha,
                             double rel_slack) {
  check_regime_args(c, alpha);
  if (seq.empty()) {
    throw std::invalid_argument("empty sequence");
  }
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (!(seq[k] > 0.0) || (k > 0 && seq[k] > seq[k - 1])) {
      throw std::invalid_argument("sequence must be positive and nonincreasing");
    }
  }

  BoundCheck out;
  const double d0 = seq[0];
  for (std::size_t k = 0; k < seq.size(); ++k) {
    double bound = d0;
    if (alpha > 0.0) {
      out.regime = Regime::sublinear;
      // c = 1 form applied to c^(1/alpha) * Delta.
      const double scale = std::pow(c, 1.0 / alpha);
      const double s0 = scale * d0;
      const double kk = static_cast<double>(k);
      const double base = 1.0 + (alpha * kk / (1.0 + alpha)) * std::log1p(std::pow(s0, alpha));
      bound = s0 / std::pow(base, 1.0 / alpha) / scale;
    } else if (alpha == 0.0) {
      out.regime = Regime::linear;
      bound = std::pow(1.0 / (1.0 + c), static_cast<double>(k)) * d0;
    } else {
      out.regime = Regime::superlinear;
      if (k > 0) {
        bound = seq[k - 1] / (1.0 + c * std::pow(seq[k], alpha));
      }
    }
    out.bound.push_back(bound);
    out.margin.push_back((bound - seq[k]) / bound);
    out.holds.push_back(seq[k] <= bound * (1.0 + rel_slack));
  }
  return out;
}

double compute_D(double eta_min, std::size_t N, double L, double H_psi_max, double H_F_max) {
  const double C = stationarity_constant({N, L, H_psi_max, H_F_max});
  if (!(C > 0.0)) {
    return 0.0;
  }
  return eta_min / (2.0 * C);
}

double superlinear_factor(double q, double sigma_q, double D, double gap) {
  return 1.0 / (1.0 + D * std::pow(sigma_q, -2.0 / q) * std::pow(gap, (2.0 - q) / q));
}

double kl_rate_bound(double q, double sigma_q, double D, double gap0, std::size_t k) {
  if (!(q > 1.0)) {
    throw std::invalid_argument("KL exponent must exceed 1");
  }
  if (!(sigma_q > 0.0) || !(D > 0.0) || !(gap0 > 0.0)) {
    throw std::invalid_argument("sigma_q, D and the initial gap must be positive");
  }
  if (k == 0) {
    return gap0;
  }
  const double kk = static_cast<double>(k);
  if (q == 2.0) {
    return std::pow(sigma_q / (sigma_q + D), kk) * gap0;
  }
  const double c = D * std::pow(sigma_q, -2.0 / q);
  if (q < 2.0) {
    const double inner = std::log1p(c * std::pow(gap0, (2.0 - q) / q));
    return gap0 / std::pow(1.0 + 0.5 * (2.0 - q) * kk * inner, q / (2.0 - q));
  }
  // q > 2: the bound is implicit in gap_k; iterate it with equality, which is
  // the recurrence with alpha = (2 - q) / q in (-1, 0).
  const auto seq = simulate_recurrence({gap0, c, (2.0 - q) / q, k});
  if (seq.size() <= k) {
    return std::numeric_limits<double>::min();
  }
  return seq[k];
}

Regime classify_exponent(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) {
    return Regime::inconclusive;
  }
  if (std::abs(q - 2.0) <= 0.15) {
    return Regime::linear;
  }
  return q < 2.0 ? Regime::sublinear : Regime::superlinear;
}

RateFit fit_kl_exponent(const RunLog& log, const FitOptions& options) {
  RateFit fit;
  if (!(options.tail_fraction > 0.0) || options.tail_fraction > 1.0) {
    throw std::invalid_argument("tail_fraction must be in (0, 1]");
  }
  const auto& rec = log.records;
  if (rec.size() < kMinFitCycles) {
    fit.note = "fewer than 20 cycles";
    return fit;
  }
  const auto tail_len = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(options.tail_fraction * rec.size())));
  const std::size_t start = rec.size() - std::min(tail_len, rec.size());

  TailData tail;
  double F_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = start; k < rec.size(); ++k) {
    tail.F.push_back(rec[k].F);
    tail.S.push_back(rec[k].stat_bound);
    F_min = std::min(F_min, rec[k].F);
  }

  switch (options.f_star_mode) {
    case FStarMode::final_value:
      fit.f_star = rec.back().F;
      break;
    case FStarMode::known:
      fit.f_star = options.f_star;
      break;
    case FStarMode::extrapolate: {
      const double spread = tail.F.front() - F_min;
      if (!(spread > 0.0)) {
        fit.f_star = F_min;
        break;
      }
      fit.f_star = extrapolate_fstar(tail, F_min, spread);
      break;
    }
  }

  const auto lf = fit_for_fstar(tail, fit.f_star, &fit.points);
  if (fit.points < kMinFitPoints || !std::isfinite(lf.rms)) {
    fit.note = "too few usable gaps above rounding level";
    return fit;
  }
  fit.q = lf.slope;
  fit.sigma_q = std::exp(lf.intercept);
  fit.goodness = lf.rms;
  const auto& k = log.constants;
  fit.D = compute_D(log.eta_min, k.N, k.L, k.H_psi_max, k.H_F_max);
  if (fit.goodness > options.max_log_residual) {
    fit.note = "log-log residual above threshold";
    fit.regime = Regime::inconclusive;
  } else {
    fit.regime = classify_exponent(fit.q);
  }
  return fit;
}

void write_report(std::ostream& os, const RateFit& fit) {
  os << "q: " << fmt_double(fit.q) << '\n'
     << "sigma_q: " << fmt_double(fit.sigma_q) << '\n'
     << "regime: " << to_string(fit.regime) << '\n'
     << "D: " << fmt_double(fit.D) << '\n'
     << "goodness: " << fmt_double(fit.goodness) << '\n'
     << "f_star: " << fmt_double(fit.f_star) << '\n'
     << "points: " << fit.points << '\n';
  if (!fit.note.empty()) {
    os << "note: " << fit.note << '\n';
  }
}

void write_bounds_csv(std::ostream& os, double q, double sigma_q, double D, double gap0,
                      std::size_t K) {
  os << "k,bound\n";
  for (std::size_t k = 0; k <= K; ++k) {
    os << k << ',' << fmt_double(kl_rate_bound(q, sigma_q, D, gap0, k)) << '\n';
  }
}

}  // namespace cpgd::rates
