#include "secmarl/metrics.h"

#include <cmath>

namespace secmarl {

std::vector<double> moving_average(const std::vector<double>& series, int window) {
    if (series.empty()) throw EmptySeries("moving_average");
    if (window < 1) throw ValidationError("window must be >= 1");
    std::vector<double> out(series.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        if (i >= static_cast<std::size_t>(window)) acc -= series[i - static_cast<std::size_t>(window)];
        const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
        out[i] = acc / static_cast<double>(n);
    }
    return out;
}

double mae(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw LengthMismatch("mae");
    if (a.empty()) throw EmptySeries("mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw LengthMismatch("rmse");
    if (a.empty()) throw EmptySeries("rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc / static_cast<double>(a.size()));
}

double mean(const std::vector<double>& a) {
    if (a.empty()) throw EmptySeries("mean");
    double acc = 0.0;
    for (double x : a) acc += x;
    return acc / static_cast<double>(a.size());
}

}  // namespace secmarl
