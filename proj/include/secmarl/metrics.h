#pragma once

#include <vector>

#include "secmarl/errors.h"

namespace secmarl {

// trailing mean over min(window, prefix length)
std::vector<double> moving_average(const std::vector<double>& series, int window);

double mae(const std::vector<double>& a, const std::vector<double>& b);
double rmse(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& a);

}  // namespace secmarl
