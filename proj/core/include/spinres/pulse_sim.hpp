#pragma once

// Rotating-frame Bloch propagation of pulse sequences, Hahn-echo ensemble
// simulation, and the closed-form relaxation models used to fit T1 and T2.

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <variant>
#include <vector>

namespace spinres::pulse
{
using Vec3 = Eigen::Vector3d;
using cplx = std::complex<double>;

/// Finite rectangular pulse; rotation axis (rabi cos phase, rabi sin phase, detuning).
struct Pulse
{
    double duration_s = 0.0;
    double rabi_hz = 0.0;
    double phase_rad = 0.0;
};

/// Ideal delta rotation about an in-plane axis at `phase_rad`.
struct InstantPulse
{
    double flip_angle_rad = 0.0;
    double phase_rad = 0.0;
};

struct Delay
{
    double duration_s = 0.0;
};

using Segment = std::variant<Pulse, InstantPulse, Delay>;

struct AcquisitionWindow
{
    double start_s = 0.0;
    double length_s = 0.0;
    std::size_t samples = 0;

    std::vector<double> times() const;
};

struct PulseSequence
{
    std::vector<Segment> segments;
    AcquisitionWindow acquisition;

    PulseSequence &pulse(double duration_s, double rabi_hz, double phase_rad = 0.0);
    PulseSequence &rotate(double flip_angle_rad, double phase_rad = 0.0);
    PulseSequence &delay(double duration_s);
    PulseSequence &acquire(double start_s, double length_s, std::size_t samples);

    double duration() const;
    void validate() const;
};

struct RelaxationParams
{
    double t1_s = 1.0;
    double t2_s = 1.0;
    double stretch_p = 1.0;
    double equilibrium_mz = 1.0;

    void validate() const;
    /// Non-fatal physics warnings (T2 > 2 T1).
    std::vector<std::string> warnings() const;
};

struct TrajectoryPoint
{
    double time_s = 0.0;
    Vec3 m = Vec3::Zero();
};

struct Trajectory
{
    std::vector<TrajectoryPoint> points;      // start and every segment boundary
    std::vector<TrajectoryPoint> acquisition; // samples inside the acquisition window
};

/// Piecewise-exact propagation from `initial` (equilibrium along z by default).
Trajectory propagate_bloch(const PulseSequence &sequence, const RelaxationParams &relax, double detuning_hz);
Trajectory propagate_bloch(const PulseSequence &sequence, const RelaxationParams &relax, double detuning_hz,
                           const Vec3 &initial);

enum class DetuningShape
{
    Lorentzian,
    Gaussian
};

/// Deterministic inverse-CDF stratified samples u_k = (k + 1/2)/n.
std::vector<double> stratified_detunings(std::size_t n, double fwhm_hz, DetuningShape shape = DetuningShape::Lorentzian,
                                         double center_hz = 0.0);

struct EchoTrace
{
    std::vector<double> time_s;
    std::vector<cplx> magnetization; // ensemble-averaged M_x + i M_y
    std::vector<std::string> diagnostics;

    std::size_t peak_index() const;
    double peak_time() const { return time_s[peak_index()]; }
    double peak_amplitude() const { return std::abs(magnetization[peak_index()]); }
    double amplitude_at(double t_s) const; // nearest sample

    void validate() const;
};

struct HahnEchoOptions
{
    std::size_t n_spins = 2001;
    std::size_t samples = 201;
    double half_window_s = 0.0; // 0: 5 / (pi FWHM), capped at tau
    DetuningShape shape = DetuningShape::Lorentzian;
    double pulse_duration_s = 0.0; // 0: ideal delta pulses
};

/// pi/2 - tau - pi - tau - echo, averaged over a detuning ensemble. The
/// stretched envelope exp[-(2 tau / T2)^p] multiplies the refocused echo.
EchoTrace simulate_hahn_echo(double tau_s, double ensemble_fwhm_hz, const RelaxationParams &relax,
                             const HahnEchoOptions &options = {});

/// amplitude (1 - exp(-T / t1)).
double saturation_recovery_model(double recovery_s, double t1_s, double amplitude);

/// amplitude exp[-(2 tau / t2)^p].
double echo_decay_model(double two_tau_s, double t2_s, double p, double amplitude);
} // namespace spinres::pulse
