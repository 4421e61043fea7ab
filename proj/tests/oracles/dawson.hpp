#pragma once

// Dawson integral D(x) = int_0^x exp(t^2 - x^2) dt by composite Simpson on
// the bounded integrand exp(-(x - t)(x + t)).

#include <cmath>

namespace oracle
{
inline double dawson(double x)
{
    if (x == 0.0)
        return 0.0;
    const double sign = x < 0 ? -1.0 : 1.0;
    x = std::abs(x);
    const int n = 40000;
    const double h = x / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i)
    {
        const double t = i * h;
        const double f = std::exp(-(x - t) * (x + t));
        sum += (i == 0 || i == n) ? f : (i % 2 ? 4.0 * f : 2.0 * f);
    }
    return sign * sum * h / 3.0;
}
} // namespace oracle
