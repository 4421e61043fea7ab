#include <spinres/error.hpp>
#include <spinres/spectra.hpp>

#include <cmath>

namespace spinres
{
namespace
{
void require_strictly_increasing(const std::vector<double> &axis, const char *name)
{
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1]))
            throw DomainError(std::string(name) + " must be strictly increasing (index " + std::to_string(i) + ")");
}
} // namespace

std::vector<double> ComplexTrace::magnitude() const
{
    std::vector<double> out(s11.size());
    for (std::size_t i = 0; i < s11.size(); ++i)
        out[i] = std::abs(s11[i]);
    return out;
}

void ComplexTrace::validate() const
{
    if (frequency_hz.size() != s11.size())
        throw DomainError("trace frequency and value counts differ");
    if (frequency_hz.size() < 2)
        throw DomainError("trace needs at least two samples");
    require_strictly_increasing(frequency_hz, "trace frequencies");
}

double FieldSweepMap::linear(std::size_t row, std::size_t col) const
{
    const double v = value(row, col);
    return scale == MagnitudeScale::Decibel ? std::pow(10.0, v / 20.0) : v;
}

std::vector<double> FieldSweepMap::spectrum(std::size_t row) const
{
    std::vector<double> out(cols());
    for (std::size_t c = 0; c < cols(); ++c)
        out[c] = linear(row, c);
    return out;
}

void FieldSweepMap::validate() const
{
    if (field_t.empty() || frequency_hz.size() < 2)
        throw DomainError("field map needs at least one field and two frequencies");
    if (values.size() != field_t.size() * frequency_hz.size())
        throw DomainError("field map value count does not match its axes");
    require_strictly_increasing(field_t, "field axis");
    require_strictly_increasing(frequency_hz, "frequency axis");
}

std::vector<double> linspace(double start, double stop, std::size_t count)
{
    std::vector<double> out(count);
    if (count == 1)
    {
        out[0] = start;
        return out;
    }
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = start + step * static_cast<double>(i);
    out.back() = stop;
    return out;
}
} // namespace spinres
