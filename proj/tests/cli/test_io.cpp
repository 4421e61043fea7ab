#include "../common/approx.hpp"
#include <doctest.h>

#include "common/cli_suite.hpp"

#include <spinres/error.hpp>
#include <spinres_cli/config.hpp>
#include <spinres_cli/io.hpp>

#include <cmath>
#include <random>
#include <string>

using namespace spinres;
using namespace spinres::cli;

namespace
{
std::string re_im_file(std::size_t rows)
{
    std::string s = "# VNA export\nfreq_Hz,re,im\n";
    for (std::size_t i = 0; i < rows; ++i)
        s += format_number(5.5e9 + 1e4 * static_cast<double>(i)) + "," + format_number(0.5 + 1e-4 * i) + "," +
             format_number(-0.25) + "\n";
    return s;
}
} // namespace

TEST_SUITE("cli-io")
{
    TEST_CASE("re/im file of 1601 rows parses to 1601 complex points")
    {
        const auto tf = parse_trace(re_im_file(1601));
        REQUIRE(tf.trace.size() == 1601);
        CHECK(tf.format == TraceFormat::ReIm);
        CHECK(tf.trace.has_phase);
        CHECK(tf.comment_lines == 1);
        CHECK(tf.skipped_rows == 0);
        CHECK(tf.trace.frequency_hz[1600] == 5.5e9 + 1e4 * 1600);
        CHECK(tf.trace.s11[10] == std::complex<double>(0.5 + 1e-3, -0.25));
        CHECK_NOTHROW(tf.trace.validate());
    }

    TEST_CASE("mag_dB is converted as 10^(dB/20)")
    {
        const auto tf = parse_trace("freq_Hz,mag_dB\n1e9,-6.02\n2e9,0\n");
        CHECK(tf.format == TraceFormat::MagDb);
        CHECK_FALSE(tf.trace.has_phase);
        CHECK(std::abs(tf.trace.s11[0]) == spinres_test::rel(0.500).epsilon(1e-3));
        CHECK(std::abs(tf.trace.s11[1]) == spinres_test::rel(1.0));
    }

    TEST_CASE("shuffled rows name the first offending line")
    {
        const std::string text = "freq_Hz,re,im\n1,1,0\n2,1,0\n4,1,0\n3,1,0\n5,1,0\n";
        try
        {
            (void)parse_trace(text);
            FAIL("no parse error");
        }
        catch (const ParseError &e)
        {
            CHECK(e.line() == 5);
            CHECK(std::string(e.what()).find("line 5") != std::string::npos);
        }
    }

    TEST_CASE("duplicate frequencies and short files are rejected")
    {
        CHECK_THROWS_AS(parse_trace("freq_Hz,re,im\n1,1,0\n1,1,0\n"), ParseError);
        CHECK_THROWS_AS(parse_trace("freq_Hz,re,im\n1,1,0\n"), ParseError);
        CHECK_THROWS_AS(parse_trace("# only comments\n"), ParseError);
        CHECK_THROWS_AS(parse_trace("freq_Hz,re,im\n1,1\n2,1\n"), ParseError);
    }

    TEST_CASE("comment lines and non-numeric rows are skipped and counted")
    {
        const auto tf = parse_trace("# a\nfreq_Hz,re,im\n1,1,0\n# b\nN/A,x,y\n2,1,0\n\n3,1,0\n");
        CHECK(tf.trace.size() == 3);
        CHECK(tf.comment_lines == 2);
        CHECK(tf.skipped_rows == 1);
    }

    TEST_CASE("unit-suffixed frequency headers are converted to Hz")
    {
        CHECK(parse_trace("freq_GHz,re,im\n5.5,1,0\n5.6,1,0\n").trace.frequency_hz[1] == spinres_test::rel(5.6e9));
        CHECK(parse_trace("freq_MHz,mag_dB\n1,0\n2,0\n").trace.frequency_hz[0] == spinres_test::rel(1e6));
        CHECK(parse_trace("freq_kHz,mag_dB\n1,0\n2,0\n").frequency_multiplier == 1e3);
        CHECK_THROWS_AS(parse_trace("time_s,re,im\n1,1,0\n2,1,0\n"), ParseError);
    }

    TEST_CASE("headerless, whitespace-delimited and magnitude/phase variants")
    {
        const auto a = parse_trace("1 0.5 0.5\n2 0.5 0.5\n");
        CHECK(a.format == TraceFormat::ReIm);
        CHECK(a.trace.s11[0] == std::complex<double>(0.5, 0.5));
        CHECK(parse_trace("1,-20\n2,-20\n").format == TraceFormat::MagDb);
        const auto p = parse_trace("freq_Hz,mag_linear,phase_deg\n1,0.5,90\n2,0.5,180\n");
        CHECK(p.format == TraceFormat::MagLinearPhase);
        CHECK(p.trace.s11[0].imag() == spinres_test::rel(0.5));
        CHECK(p.trace.s11[1].real() == spinres_test::rel(-0.5));
        const auto m = parse_trace("freq_Hz,mag_linear\n1,0.25\n2,0.5\n");
        CHECK(m.format == TraceFormat::MagLinear);
        CHECK_FALSE(m.trace.has_phase);
        CHECK(parse_trace("1,0.25\n2,0.5\n", TraceFormat::MagLinear).trace.s11[1].real() == 0.5);
        CHECK_THROWS_AS(parse_trace("freq_Hz,foo\n1,2\n3,4\n"), ParseError);
    }

    TEST_CASE("field map of 201 fields by 1601 frequencies")
    {
        FieldSweepMap m;
        m.field_t = linspace(0.18, 0.215, 201);
        m.frequency_hz = linspace(5.5e9, 5.56e9, 1601);
        m.values.resize(m.rows() * m.cols());
        for (std::size_t i = 0; i < m.values.size(); ++i)
            m.values[i] = -0.001 * static_cast<double>(i % 977);
        const auto back = parse_field_map(serialize_field_map(m));
        CHECK(back.rows() == 201);
        CHECK(back.cols() == 1601);
        CHECK_FALSE(back.degenerate);
        CHECK(back.values == m.values);
        CHECK(back.field_t == m.field_t);
        CHECK(back.frequency_hz == m.frequency_hz);
        CHECK_NOTHROW(back.validate());
    }

    TEST_CASE("single-row map is accepted and flagged degenerate")
    {
        const auto m = parse_field_map(",1e9,2e9,3e9\n0.2,-1,-2,-3\n");
        CHECK(m.rows() == 1);
        CHECK(m.degenerate);
    }

    TEST_CASE("malformed maps are parse errors")
    {
        CHECK_THROWS_AS(parse_field_map(",1e9,2e9,3e9\n0.2,-1,-2,-3\n0.1,-1,-2,-3\n"), ParseError);
        CHECK_THROWS_AS(parse_field_map(",1e9,2e9,3e9\n0.1,-1,-2,-3\n0.2,-1,-2\n"), ParseError);
        CHECK_THROWS_AS(parse_field_map(",1e9,3e9,2e9\n0.1,-1,-2,-3\n"), ParseError);
        CHECK_THROWS_AS(parse_field_map("x,1e9,2e9,3e9\n0.1,-1,-2,-3\n"), ParseError);
        CHECK_THROWS_AS(parse_field_map(",1e9,2e9,3e9\n"), ParseError);
        try
        {
            (void)parse_field_map("# map\n,1e9,2e9,3e9\n0.1,-1,-2,-3\n0.2,-1,-2\n");
            FAIL("no parse error");
        }
        catch (const ParseError &e)
        {
            CHECK(e.line() == 4);
        }
    }

    TEST_CASE("curve files carry time units and optional sigma")
    {
        const auto c = parse_curve("time_ms,signal,sigma\n1,0.1,0.01\n2,0.2,0.01\n");
        CHECK(c.x[1] == spinres_test::rel(2e-3));
        CHECK(c.sigma.size() == 2);
        CHECK(parse_curve("two_tau_us,echo\n1,1\n2,0.5\n").x[0] == spinres_test::rel(1e-6));
        CHECK_THROWS_AS(parse_curve("t,y\n2,1\n1,1\n"), ParseError);
        CHECK_THROWS_AS(parse_curve("t,y,s\n1,1,0\n2,1,1\n"), ParseError);
    }

    TEST_CASE("serialized traces and numbers round-trip exactly")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int rep = 0; rep < 20; ++rep)
        {
            ComplexTrace t;
            t.frequency_hz = linspace(1e9 * (1.0 + std::abs(u(rng))), 6e9, 50);
            for (std::size_t i = 0; i < t.size(); ++i)
                t.s11.emplace_back(u(rng), u(rng) * 1e-7);
            const auto back = parse_trace(serialize_trace(t)).trace;
            CHECK(back.frequency_hz == t.frequency_hz);
            CHECK(back.s11 == t.s11);
        }
        for (int i = 0; i < 1000; ++i)
        {
            const double v = u(rng) * std::pow(10.0, 40.0 * u(rng));
            CHECK(std::stod(format_number(v)) == v);
        }
    }

    TEST_CASE("atomic writes replace the target and leave no temporary")
    {
        clisuite::Workspace ws("atomic");
        const auto p = ws / "sub/out.txt";
        atomic_write(p, "first");
        atomic_write(p, "second");
        CHECK(clisuite::read(p) == "second");
        std::size_t files = 0;
        for (const auto &e : std::filesystem::directory_iterator(p.parent_path()))
        {
            (void)e;
            ++files;
        }
        CHECK(files == 1);
    }

    TEST_CASE("FNV-1a reference values")
    {
        CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
        CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
        CHECK(hex64(fnv1a64("foobar")) == "85944171f73967e8");
    }

    TEST_CASE("config records defaults and rejects unknown keys")
    {
        Config cfg(json::parse(R"({"a": 1.5, "sec": {"b": true, "list": [1, 2]}, "_note": "ignored"})"), ".");
        CHECK(cfg.number("a") == 1.5);
        CHECK(cfg.number("missing", 2.0) == 2.0);
        CHECK(cfg.boolean("sec.b", false));
        CHECK_THROWS_AS(cfg.reject_unknown(), UsageError);
        CHECK(cfg.numbers("sec.list") == std::vector<double>{1, 2});
        CHECK_NOTHROW(cfg.reject_unknown());
        CHECK(cfg.resolved()["missing"] == 2.0);
        CHECK(cfg.resolved()["sec"]["list"] == json::array({1, 2}));
        CHECK_THROWS_AS(cfg.number("nope"), UsageError);
        CHECK_THROWS_AS(cfg.string("a"), UsageError);
        CHECK_THROWS_AS(cfg.boolean("a", false), UsageError);
    }

    TEST_CASE("config walks arrays of objects and resolves paths against its directory")
    {
        clisuite::Workspace ws("config");
        ws.write("data/x.csv", "1,2\n");
        ws.write("c.json", R"({"file": "data/x.csv", "seg": [{"t": "a"}, {"t": "b", "v": 3}]})");
        Config cfg = Config::load(ws / "c.json");
        CHECK(cfg.input_path("file") == ws / "data/x.csv");
        CHECK(cfg.array_size("seg") == 2);
        CHECK(cfg.string("seg.0.t") == "a");
        CHECK(cfg.string("seg.1.t") == "b");
        CHECK_THROWS_AS(cfg.reject_unknown(), UsageError);
        CHECK(cfg.number("seg.1.v") == 3);
        CHECK_NOTHROW(cfg.reject_unknown());
        CHECK(cfg.resolved()["seg"][1]["v"] == 3);

        ws.write("bad.json", R"({"file": "nope.csv"})");
        Config bad = Config::load(ws / "bad.json");
        CHECK_THROWS_AS(bad.input_path("file"), UsageError);
        ws.write("broken.json", "{\"a\": ");
        CHECK_THROWS_AS(Config::load(ws / "broken.json"), ParseError);
        CHECK_THROWS_AS(Config::load(ws / "absent.json"), UsageError);
    }
}
