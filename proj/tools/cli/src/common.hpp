#pragma once

#include <spinres/cavity_qed.hpp>
#include <spinres/least_squares.hpp>
#include <spinres/spectra.hpp>
#include <spinres/spin_models.hpp>
#include <spinres_cli/config.hpp>
#include <spinres_cli/report.hpp>

#include <string>
#include <vector>

namespace spinres::cli::detail
{
spin::SpinSystem read_spin_system(Config &cfg, const std::string &key);
spin::Vec3 read_direction(Config &cfg, const std::string &key, const spin::Vec3 &fallback);

/// "resonator" (inline) or "resonator_report" (a fit-resonator report.json).
cqed::ResonatorParams read_resonator(Run &run);
cqed::ResonatorParams read_resonator_section(Config &cfg, const std::string &key);

fit::LeastSquaresOptions read_solver(Config &cfg);

/// Loads the trace named by `key` (with optional "format") and records its parse details.
ComplexTrace read_trace(Run &run, const std::string &key);

/// Either an explicit array or {start, stop, points}.
std::vector<double> read_grid(Config &cfg, const std::string &key);

Report run_fit_resonator(Run &run);
Report run_fit_coupled(Run &run);
Report run_fit_crossing(Run &run);
Report run_invert_density(Run &run);
Report run_fit_t1(Run &run);
Report run_fit_t2(Run &run);
Report run_simulate_sweep(Run &run);
Report run_pulse_sim(Run &run);
Report run_design(Run &run);
} // namespace spinres::cli::detail
