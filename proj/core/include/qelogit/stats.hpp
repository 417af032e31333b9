#pragma once

#include <vector>

namespace qelogit {

double sigmoid(double x);

// log(1 + e^x) without overflow.
double log1pexp(double x);

double logsumexp(const std::vector<double>& xs);
double logsumexp2(double a, double b);

double normal_cdf(double x);

// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

double median(std::vector<double> xs);

}  // namespace qelogit
