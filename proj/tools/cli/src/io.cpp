#include <spinres/error.hpp>
#include <spinres_cli/io.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <system_error>

namespace spinres::cli
{
namespace
{
std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string &s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string &line)
{
    std::vector<std::string> out;
    if (line.find(',') != std::string::npos)
    {
        std::string cell;
        std::istringstream is(line);
        while (std::getline(is, cell, ','))
            out.push_back(trim(cell));
        if (!line.empty() && line.back() == ',')
            out.emplace_back();
    }
    else
    {
        std::istringstream is(line);
        std::string cell;
        while (is >> cell)
            out.push_back(cell);
    }
    return out;
}

std::optional<double> to_number(const std::string &s)
{
    if (s.empty())
        return std::nullopt;
    double v = 0.0;
    const char *first = s.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

struct Row
{
    std::size_t line;
    std::vector<double> values;
};

struct Table
{
    std::vector<std::string> header;
    std::size_t header_line = 0;
    std::vector<Row> rows;
    std::size_t skipped = 0;
    std::size_t comments = 0;
};

// Comments ('#') and blank lines are dropped; the first non-numeric row
// before any data is the header; later non-numeric rows are skipped.
Table read_table(const std::string &text)
{
    Table t;
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line))
    {
        ++n;
        const std::string s = trim(line);
        if (s.empty())
            continue;
        if (s.front() == '#')
        {
            ++t.comments;
            continue;
        }
        const auto fields = split_fields(s);
        std::vector<double> values;
        bool numeric = true;
        for (const auto &f : fields)
        {
            const auto v = to_number(f);
            if (!v)
            {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (numeric)
            t.rows.push_back({n, std::move(values)});
        else if (t.rows.empty() && t.header.empty())
        {
            t.header = fields;
            t.header_line = n;
        }
        else
            ++t.skipped;
    }
    return t;
}

std::string base_name(const std::string &column)
{
    const std::string c = lower(column);
    for (const char *unit : {"_hz", "_khz", "_mhz", "_ghz", "_s", "_ms", "_us", "_ns"})
    {
        const std::string u(unit);
        if (c.size() > u.size() && c.compare(c.size() - u.size(), u.size(), u) == 0)
            return c.substr(0, c.size() - u.size());
    }
    return c;
}

TraceFormat detect_format(const std::vector<std::string> &header, std::size_t width)
{
    if (header.empty())
    {
        if (width >= 3)
            return TraceFormat::ReIm;
        if (width == 2)
            return TraceFormat::MagDb;
        throw ParseError("trace needs at least two columns");
    }
    std::vector<std::string> names;
    for (const auto &h : header)
        names.push_back(lower(h));
    auto has = [&](const char *name) { return std::find(names.begin(), names.end(), name) != names.end(); };
    if (has("re") && has("im"))
        return TraceFormat::ReIm;
    if (has("mag_db"))
        return TraceFormat::MagDb;
    if ((has("mag_linear") || has("mag")) && (has("phase_deg") || has("phase_rad")))
        return TraceFormat::MagLinearPhase;
    if (has("mag_linear") || has("mag"))
        return TraceFormat::MagLinear;
    throw ParseError("unrecognised trace header; expected re/im, mag_dB or mag_linear[/phase_deg] columns");
}

std::size_t column_index(const std::vector<std::string> &header, std::initializer_list<const char *> names,
                         std::size_t fallback)
{
    for (std::size_t i = 0; i < header.size(); ++i)
        for (const char *n : names)
            if (lower(header[i]) == n)
                return i;
    return fallback;
}
} // namespace

TraceFormat trace_format_from_string(const std::string &name)
{
    const std::string n = lower(name);
    if (n == "auto")
        return TraceFormat::Auto;
    if (n == "re_im")
        return TraceFormat::ReIm;
    if (n == "mag_db")
        return TraceFormat::MagDb;
    if (n == "mag_linear")
        return TraceFormat::MagLinear;
    if (n == "mag_linear_phase_deg")
        return TraceFormat::MagLinearPhase;
    throw DomainError("unknown trace format '" + name + "' (auto, re_im, mag_db, mag_linear, mag_linear_phase_deg)");
}

std::string to_string(TraceFormat f)
{
    switch (f)
    {
    case TraceFormat::Auto:
        return "auto";
    case TraceFormat::ReIm:
        return "re_im";
    case TraceFormat::MagDb:
        return "mag_db";
    case TraceFormat::MagLinear:
        return "mag_linear";
    case TraceFormat::MagLinearPhase:
        return "mag_linear_phase_deg";
    }
    return "auto";
}

double unit_multiplier(const std::string &column)
{
    const std::string c = lower(column);
    auto ends = [&](const char *s) {
        const std::string u(s);
        return c.size() > u.size() && c.compare(c.size() - u.size(), u.size(), u) == 0;
    };
    if (ends("_ghz"))
        return 1e9;
    if (ends("_mhz"))
        return 1e6;
    if (ends("_khz"))
        return 1e3;
    if (ends("_hz"))
        return 1.0;
    if (ends("_ms"))
        return 1e-3;
    if (ends("_us"))
        return 1e-6;
    if (ends("_ns"))
        return 1e-9;
    return 1.0;
}

TraceFile parse_trace(const std::string &text, TraceFormat format, const std::filesystem::path &source)
{
    const Table t = read_table(text);
    if (t.rows.size() < 2)
        throw ParseError("trace has fewer than two numeric rows");
    const std::size_t width = t.rows.front().values.size();

    TraceFile out;
    out.source = source;
    out.columns = t.header;
    out.skipped_rows = t.skipped;
    out.comment_lines = t.comments;
    out.format = format == TraceFormat::Auto ? detect_format(t.header, width) : format;
    if (!t.header.empty() && base_name(t.header.front()) != "freq" && base_name(t.header.front()) != "frequency")
        throw ParseError("first trace column must be the frequency (freq, freq_Hz, freq_GHz, ...)", t.header_line);
    out.frequency_multiplier = t.header.empty() ? 1.0 : unit_multiplier(t.header.front());

    std::size_t c1 = 1, c2 = 2;
    bool phase_rad = false;
    switch (out.format)
    {
    case TraceFormat::ReIm:
        c1 = column_index(t.header, {"re"}, 1);
        c2 = column_index(t.header, {"im"}, 2);
        break;
    case TraceFormat::MagDb:
        c1 = column_index(t.header, {"mag_db"}, 1);
        break;
    case TraceFormat::MagLinear:
        c1 = column_index(t.header, {"mag_linear", "mag"}, 1);
        break;
    case TraceFormat::MagLinearPhase:
        c1 = column_index(t.header, {"mag_linear", "mag"}, 1);
        c2 = column_index(t.header, {"phase_deg", "phase_rad"}, 2);
        phase_rad = c2 < t.header.size() && lower(t.header[c2]) == "phase_rad";
        break;
    case TraceFormat::Auto:
        break;
    }
    const std::size_t needed = std::max(c1, (out.format == TraceFormat::ReIm || out.format == TraceFormat::MagLinearPhase) ? c2 : 0) + 1;

    auto &tr = out.trace;
    tr.has_phase = out.format == TraceFormat::ReIm || out.format == TraceFormat::MagLinearPhase;
    for (const auto &row : t.rows)
    {
        if (row.values.size() < needed || (!t.header.empty() && row.values.size() != t.header.size()))
            throw ParseError("row has " + std::to_string(row.values.size()) + " columns, expected " +
                                 std::to_string(t.header.empty() ? needed : t.header.size()),
                             row.line);
        const double f = row.values[0] * out.frequency_multiplier;
        if (!tr.frequency_hz.empty() && !(f > tr.frequency_hz.back()))
            throw ParseError("frequencies must be strictly increasing (duplicate or out-of-order value)", row.line);
        tr.frequency_hz.push_back(f);
        switch (out.format)
        {
        case TraceFormat::ReIm:
            tr.s11.emplace_back(row.values[c1], row.values[c2]);
            break;
        case TraceFormat::MagDb:
            tr.s11.emplace_back(std::pow(10.0, row.values[c1] / 20.0), 0.0);
            break;
        case TraceFormat::MagLinear:
            tr.s11.emplace_back(row.values[c1], 0.0);
            break;
        case TraceFormat::MagLinearPhase:
            tr.s11.push_back(std::polar(row.values[c1], phase_rad ? row.values[c2]
                                                                  : row.values[c2] * std::numbers::pi / 180.0));
            break;
        case TraceFormat::Auto:
            break;
        }
    }
    tr.metadata.source = source.string();
    return out;
}

TraceFile load_trace(const std::filesystem::path &path, TraceFormat format)
{
    return parse_trace(read_file(path), format, path);
}

FieldSweepMap parse_field_map(const std::string &text, MagnitudeScale scale)
{
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    FieldSweepMap map;
    map.scale = scale;
    bool have_header = false;
    while (std::getline(is, line))
    {
        ++n;
        const std::string s = trim(line);
        if (s.empty() || s.front() == '#')
            continue;
        const auto fields = split_fields(s);
        if (!have_header)
        {
            if (fields.size() < 3 || !trim(fields[0]).empty())
                throw ParseError("field map header must start with an empty cell followed by frequencies", n);
            for (std::size_t i = 1; i < fields.size(); ++i)
            {
                const auto v = to_number(fields[i]);
                if (!v)
                    throw ParseError("non-numeric frequency '" + fields[i] + "' in field map header", n);
                if (!map.frequency_hz.empty() && !(*v > map.frequency_hz.back()))
                    throw ParseError("field map frequencies must be strictly increasing", n);
                map.frequency_hz.push_back(*v);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != map.frequency_hz.size() + 1)
            throw ParseError("ragged field map row: " + std::to_string(fields.size()) + " cells, expected " +
                                 std::to_string(map.frequency_hz.size() + 1),
                             n);
        std::vector<double> row;
        for (const auto &f : fields)
        {
            const auto v = to_number(f);
            if (!v)
                throw ParseError("non-numeric cell '" + f + "' in field map", n);
            row.push_back(*v);
        }
        if (!map.field_t.empty() && !(row[0] > map.field_t.back()))
            throw ParseError("field values must be strictly increasing", n);
        map.field_t.push_back(row[0]);
        map.values.insert(map.values.end(), row.begin() + 1, row.end());
    }
    if (!have_header || map.field_t.empty())
        throw ParseError("field map has no data rows");
    map.degenerate = map.field_t.size() == 1;
    return map;
}

FieldSweepMap load_field_map(const std::filesystem::path &path, MagnitudeScale scale)
{
    return parse_field_map(read_file(path), scale);
}

CurveFile parse_curve(const std::string &text)
{
    const Table t = read_table(text);
    if (t.rows.size() < 2)
        throw ParseError("curve has fewer than two numeric rows");
    CurveFile c;
    c.columns = t.header;
    c.skipped_rows = t.skipped;
    const double mult = t.header.empty() ? 1.0 : unit_multiplier(t.header.front());
    const std::size_t width = t.rows.front().values.size();
    if (width < 2 || width > 3)
        throw ParseError("curve files have two or three columns (x, value[, sigma])", t.rows.front().line);
    for (const auto &row : t.rows)
    {
        if (row.values.size() != width)
            throw ParseError("inconsistent column count", row.line);
        const double x = row.values[0] * mult;
        if (!c.x.empty() && !(x > c.x.back()))
            throw ParseError("abscissa must be strictly increasing", row.line);
        c.x.push_back(x);
        c.y.push_back(row.values[1]);
        if (width == 3)
        {
            if (!(row.values[2] > 0.0))
                throw ParseError("sigma column must be positive", row.line);
            c.sigma.push_back(row.values[2]);
        }
    }
    return c;
}

CurveFile load_curve(const std::filesystem::path &path) { return parse_curve(read_file(path)); }

std::string format_number(double v)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc())
        return "nan";
    return std::string(buf.data(), ptr);
}

std::string serialize_trace(const ComplexTrace &trace)
{
    std::string out = trace.has_phase ? "freq_Hz,re,im\n" : "freq_Hz,mag_linear\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
    {
        out += format_number(trace.frequency_hz[i]);
        if (trace.has_phase)
            out += ',' + format_number(trace.s11[i].real()) + ',' + format_number(trace.s11[i].imag());
        else
            out += ',' + format_number(std::abs(trace.s11[i]));
        out += '\n';
    }
    return out;
}

std::string serialize_field_map(const FieldSweepMap &map)
{
    std::string out;
    for (double f : map.frequency_hz)
        out += ',' + format_number(f);
    out += '\n';
    for (std::size_t r = 0; r < map.rows(); ++r)
    {
        out += format_number(map.field_t[r]);
        for (std::size_t c = 0; c < map.cols(); ++c)
            out += ',' + format_number(map.value(r, c));
        out += '\n';
    }
    return out;
}

std::string serialize_columns(const std::vector<std::string> &names, const std::vector<std::vector<double>> &columns)
{
    std::string out = "#";
    for (const auto &n : names)
        out += ' ' + n;
    out += '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r)
    {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out += (c ? " " : "") + format_number(columns[c][r]);
        out += '\n';
    }
    return out;
}

std::string read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::filesystem::path &path, const std::string &content)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a64(const std::string &bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    static const char *digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4)
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}
} // namespace spinres::cli
