#pragma once

// Frequency-domain data containers shared by the models, fitters and I/O.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace spinres
{
struct TraceMetadata
{
    std::string field;
    std::string power;
    std::string temperature;
    std::string source;
};

/// Complex S11 samples on a strictly increasing frequency grid. Scalar
/// (magnitude-only) data is stored with zero phase and has_phase = false.
struct ComplexTrace
{
    std::vector<double> frequency_hz;
    std::vector<std::complex<double>> s11;
    bool has_phase = true;
    TraceMetadata metadata;

    std::size_t size() const { return frequency_hz.size(); }
    std::vector<double> magnitude() const;

    /// Throws DomainError unless sizes match, length >= 2 and the grid is
    /// strictly increasing.
    void validate() const;
};

enum class MagnitudeScale
{
    Decibel,
    Linear
};

/// |S11| over a field x frequency grid, stored row-major (one row per field).
struct FieldSweepMap
{
    std::vector<double> field_t;
    std::vector<double> frequency_hz;
    std::vector<double> values;
    MagnitudeScale scale = MagnitudeScale::Decibel;
    bool degenerate = false; // single field row

    std::size_t rows() const { return field_t.size(); }
    std::size_t cols() const { return frequency_hz.size(); }

    double value(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
    double linear(std::size_t row, std::size_t col) const;

    /// Linear magnitude spectrum at field row `row`.
    std::vector<double> spectrum(std::size_t row) const;

    void validate() const;
};

std::vector<double> linspace(double start, double stop, std::size_t count);
} // namespace spinres
