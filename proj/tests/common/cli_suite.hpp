#pragma once

// Scratch directories and a standard set of inputs + configs covering every
// CLI subcommand, shared by the CLI tests and the acceptance suite.

#include "synthetic.hpp"

#include <spinres/pulse_sim.hpp>
#include <spinres_cli/io.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

namespace clisuite
{
namespace fs = std::filesystem;

class Workspace
{
public:
    explicit Workspace(const std::string &name)
        : dir_(fs::temp_directory_path() / ("spinres-" + name + "-" + std::to_string(::getpid())))
    {
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Workspace()
    {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    Workspace(const Workspace &) = delete;
    Workspace &operator=(const Workspace &) = delete;

    const fs::path &dir() const { return dir_; }
    fs::path operator/(const std::string &name) const { return dir_ / name; }

    fs::path write(const std::string &name, const std::string &content) const
    {
        const fs::path p = dir_ / name;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

private:
    fs::path dir_;
};

inline std::string read(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Report text with the timestamp line removed.
inline std::string strip_timestamp(const std::string &text)
{
    std::istringstream is(text);
    std::string line, out;
    while (std::getline(is, line))
        if (line.find("\"generated_at\"") == std::string::npos)
            out += line + "\n";
    return out;
}

inline std::string curve_csv(const char *header, const std::vector<double> &x, const std::vector<double> &y)
{
    std::string s = std::string(header) + "\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        s += spinres::cli::format_number(x[i]) + "," + spinres::cli::format_number(y[i]) + "\n";
    return s;
}

inline std::string resonator_json(const spinres::cqed::ResonatorParams &r)
{
    using spinres::cli::format_number;
    return "{\"omega_r_hz\": " + format_number(r.omega_r_hz) + ", \"kappa_int_hz\": " + format_number(r.kappa_int_hz) +
           ", \"kappa_ext_hz\": " + format_number(r.kappa_ext_hz) +
           ", \"phase_offset_rad\": " + format_number(r.phase_offset_rad) +
           ", \"amplitude_scale\": " + format_number(r.amplitude_scale) + "}";
}

struct Case
{
    std::string command;
    std::string config; // file name inside the workspace
};

/// Writes inputs and one config per subcommand; returns the cases.
inline std::vector<Case> write_standard_suite(const Workspace &ws)
{
    using spinres::cli::serialize_field_map;
    using spinres::cli::serialize_trace;
    const auto res = synth::resonator();
    const std::string res_json = resonator_json(res);

    ws.write("trace.csv", serialize_trace(synth::bare_trace(res, 8e6, 1601, 0.002, 1)));
    ws.write("coupled.csv",
             serialize_trace(synth::coupled_trace(res, synth::ensemble(7.8e6, 9.6e6), 40e6, 2001, 0.0005, 2)));
    ws.write("map.csv", serialize_field_map(synth::dpph_map(7.8e6, 9.6e6, 0.002, 61)));
    const auto rt = synth::recovery_times();
    ws.write("recovery.csv",
             curve_csv("time_s,signal", rt,
                       synth::noisy(rt, [](double t) { return spinres::pulse::saturation_recovery_model(t, 5.54e-3, 1.0); },
                                    0.01, 1.0, 3)));
    const auto et = synth::echo_times();
    ws.write("echo.csv",
             curve_csv("two_tau_s,echo", et,
                       synth::noisy(et, [](double t) { return spinres::pulse::echo_decay_model(t, 117.3e-6, 2.1, 1.0); },
                                    0.01, 1.0, 4)));

    ws.write("fit-resonator.json", R"({"trace": "trace.csv"})");
    ws.write("fit-coupled.json", R"({"trace": "coupled.csv", "resonator": )" + res_json + "}");
    ws.write("fit-crossing.json", R"({"map": "map.csv", "spin_system": {"type": "dpph"}, "gamma_hz": 9.6e6, "resonator": )" +
                                      res_json + "}");
    ws.write("invert-density.json", R"({"trace": "coupled.csv", "resonator": )" + res_json + "}");
    ws.write("simulate-sweep.json", R"({
  "spin_system": {"type": "p1"},
  "field_t": {"start": 0.180, "stop": 0.215, "points": 141},
  "frequency_hz": {"start": 5.504e9, "stop": 5.564e9, "points": 601},
  "coupling": {"g_ens_hz": 9.0e6, "gamma_hz": 1.0e6, "scale_by_matrix_element": false},
  "noise_sigma": 0.002,
  "resonator": )" + resonator_json(synth::resonator(1.9e6)) + "}");
    ws.write("pulse-sim.json", R"({
  "mode": "echo-decay",
  "relaxation": {"t1_s": 5.54e-3, "t2_s": 117.3e-6, "stretch_p": 2.1},
  "tau_s": {"start": 5e-6, "stop": 150e-6, "points": 12},
  "ensemble_fwhm_hz": 9.6e6, "n_spins": 301, "samples": 11, "noise_sigma": 0.01
})");
    ws.write("fit-t1.json", R"({"data": "recovery.csv"})");
    ws.write("fit-t2.json", R"({"data": "echo.csv"})");
    ws.write("design.json", R"({
  "frequency_hz": 5.534e9, "mode_volume_m3": 9.216e-8, "temperature_k": 0.01,
  "sample": {"species": "P1", "concentration_ppm": 106, "volume_m3": 1e-9},
  "loss": {"tan_delta": 1e-6, "q_radiation": 1e9}
})");

    std::vector<Case> cases;
    for (const char *c : {"fit-resonator", "fit-coupled", "fit-crossing", "invert-density", "simulate-sweep",
                          "pulse-sim", "fit-t1", "fit-t2", "design"})
        cases.push_back({c, std::string(c) + ".json"});
    return cases;
}
} // namespace clisuite
