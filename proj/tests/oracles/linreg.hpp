#pragma once

// Ordinary least squares for y = a + b x with the textbook standard errors.

#include <cmath>
#include <vector>

namespace oracle
{
struct LineFit
{
    double a, b, sigma_a, sigma_b;
};

inline LineFit linear_regression(const std::vector<double> &x, const std::vector<double> &y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxy / sxx, a = my - b * mx;
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double r = y[i] - a - b * x[i];
        rss += r * r;
    }
    const double s2 = rss / (n - 2.0);
    return {a, b, std::sqrt(s2 * (1.0 / n + mx * mx / sxx)), std::sqrt(s2 / sxx)};
}
} // namespace oracle
