#pragma once

#include <vector>

namespace metalms {

double mean(const std::vector<double>& v);
double median(std::vector<double> v);
// Linear interpolation between order statistics, q ∈ [0, 1].
double percentile(std::vector<double> v, double q);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
// Ordinary least squares y ≈ slope·x + intercept.
LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace metalms
