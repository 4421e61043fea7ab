#pragma once

// Text file formats: VNA traces, field-sweep maps, relaxation curves, and
// the columnar plot files written by every subcommand.

#include <spinres/spectra.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spinres::cli
{
enum class TraceFormat
{
    Auto,
    ReIm,           // freq, re, im
    MagDb,          // freq, mag_dB
    MagLinear,      // freq, mag_linear
    MagLinearPhase  // freq, mag_linear, phase_deg
};

TraceFormat trace_format_from_string(const std::string &name);
std::string to_string(TraceFormat f);

struct TraceFile
{
    ComplexTrace trace;
    std::filesystem::path source;
    TraceFormat format = TraceFormat::Auto;
    std::vector<std::string> columns; // header names as read (empty without header)
    double frequency_multiplier = 1.0;
    std::size_t skipped_rows = 0;  // non-numeric rows after the header
    std::size_t comment_lines = 0;
};

TraceFile load_trace(const std::filesystem::path &path, TraceFormat format = TraceFormat::Auto);
TraceFile parse_trace(const std::string &text, TraceFormat format = TraceFormat::Auto,
                      const std::filesystem::path &source = {});

FieldSweepMap load_field_map(const std::filesystem::path &path, MagnitudeScale scale = MagnitudeScale::Decibel);
FieldSweepMap parse_field_map(const std::string &text, MagnitudeScale scale = MagnitudeScale::Decibel);

/// Two or three numeric columns: abscissa (unit-suffixed header allowed, e.g. time_ms), value, optional sigma.
struct CurveFile
{
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma;
    std::vector<std::string> columns;
    std::size_t skipped_rows = 0;
};

CurveFile load_curve(const std::filesystem::path &path);
CurveFile parse_curve(const std::string &text);

/// Multiplier for a unit-suffixed column name (freq_GHz -> 1e9, time_us -> 1e-6).
double unit_multiplier(const std::string &column);

/// Shortest round-trip decimal representation.
std::string format_number(double v);

std::string serialize_trace(const ComplexTrace &trace);
std::string serialize_field_map(const FieldSweepMap &map);

/// Whitespace-separated columns with a '#' header line.
std::string serialize_columns(const std::vector<std::string> &names, const std::vector<std::vector<double>> &columns);

std::string read_file(const std::filesystem::path &path);

/// Writes to a temporary sibling and renames it over `path`.
void atomic_write(const std::filesystem::path &path, const std::string &content);

/// 64-bit FNV-1a of the bytes.
std::uint64_t fnv1a64(const std::string &bytes);
std::string hex64(std::uint64_t v);
} // namespace spinres::cli
