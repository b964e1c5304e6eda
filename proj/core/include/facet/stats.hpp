#pragma once

#include <span>
#include <vector>

namespace facet::stats {

double mean(std::span<const double> xs);
double median(std::span<const double> xs);

// Quantile type 7 (linear interpolation of order statistics), p in [0,1].
// `sorted` must be ascending and non-empty.
double quantile(std::span<const double> sorted, double p);

// Average ranks, 1-based; tied values share the mean of their positions.
std::vector<double> midranks(std::span<const double> xs);

// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double regularized_beta(double x, double a, double b);

// Regularized lower incomplete gamma P(a,x) and upper Q(a,x)=1-P(a,x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Upper-tail probabilities.
double f_survival(double f, double df1, double df2);
double chi_squared_survival(double x, double df);
// Two-sided p-value of a Student-t statistic.
double t_two_sided(double t, double df);

}  // namespace facet::stats
