#pragma once

#include <doctest.h>

namespace spinres_test
{
// doctest::Approx adds a default scale of 1 to the tolerance, which makes
// epsilon meaningless for quantities far below unity (seconds, farads, ...).
inline doctest::Approx rel(double value) { return doctest::Approx(value).scale(0.0); }
} // namespace spinres_test
