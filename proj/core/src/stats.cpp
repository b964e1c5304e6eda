#include "facet/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "facet/errors.hpp"

namespace facet::stats {

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 10.0 * kEps) return h;
  }
  throw Error(fmt::format("incomplete beta did not converge (x={}, a={}, b={})", x, a, b));
}

// Series expansion of P(a,x), valid for x < a+1.
double gamma_p_series(double a, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw Error(fmt::format("incomplete gamma series did not converge (a={}, x={})", a, x));
}

// Continued fraction of Q(a,x), valid for x >= a+1.
double gamma_q_cf(double a, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 10.0 * kEps)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw Error(fmt::format("incomplete gamma fraction did not converge (a={}, x={})", a, x));
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double median(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("median of an empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  if (p < 0.0 || p > 1.0) throw ValidationError(fmt::format("quantile level {} outside [0,1]", p));
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> midranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of positions i..j, 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double regularized_beta(double x, double a, double b) {
  if (a <= 0.0 || b <= 0.0)
    throw ValidationError(fmt::format("beta parameters must be positive (a={}, b={})", a, b));
  if (x < 0.0 || x > 1.0)
    throw ValidationError(fmt::format("beta argument {} outside [0,1]", x));
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(x, a, b) / a;
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0) throw ValidationError(fmt::format("gamma shape must be positive, got {}", a));
  if (x < 0.0) throw ValidationError(fmt::format("gamma argument must be non-negative, got {}", x));
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0) throw ValidationError(fmt::format("gamma shape must be positive, got {}", a));
  if (x < 0.0) throw ValidationError(fmt::format("gamma argument must be non-negative, got {}", x));
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double f_survival(double f, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0)
    throw ValidationError(fmt::format("F degrees of freedom must be positive ({}, {})", df1, df2));
  if (f <= 0.0) return 1.0;
  return regularized_beta(df2 / (df2 + df1 * f), 0.5 * df2, 0.5 * df1);
}

double chi_squared_survival(double x, double df) {
  if (df <= 0.0)
    throw ValidationError(fmt::format("chi-squared degrees of freedom must be positive, got {}", df));
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double t_two_sided(double t, double df) {
  if (df <= 0.0)
    throw ValidationError(fmt::format("t degrees of freedom must be positive, got {}", df));
  return regularized_beta(df / (df + t * t), 0.5 * df, 0.5);
}

}  // namespace facet::stats
