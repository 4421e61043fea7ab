#include <spinres/constants.hpp>
#include <spinres/error.hpp>
#include <spinres/parallel.hpp>
#include <spinres/pulse_sim.hpp>

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace spinres::pulse
{
namespace
{
constexpr double kMaxSplitSteps = 1e8;
constexpr std::size_t kSpinChunk = 64;

// Right-handed rotation of m about unit axis n by angle theta (dM/dt = Omega x M).
Vec3 rotate(const Vec3 &m, const Vec3 &n, double theta)
{
    const double c = std::cos(theta), s = std::sin(theta);
    return m * c + n.cross(m) * s + n * n.dot(m) * (1.0 - c);
}

Vec3 free_evolution(const Vec3 &m, double dt, double detuning_hz, const RelaxationParams &relax)
{
    const double phi = constants::two_pi * detuning_hz * dt;
    const double e2 = std::exp(-dt / relax.t2_s);
    const double e1 = std::exp(-dt / relax.t1_s);
    const double c = std::cos(phi), s = std::sin(phi);
    return {e2 * (c * m.x() - s * m.y()), e2 * (s * m.x() + c * m.y()),
            relax.equilibrium_mz + (m.z() - relax.equilibrium_mz) * e1};
}

Vec3 relax_only(const Vec3 &m, double dt, const RelaxationParams &relax)
{
    return free_evolution(m, dt, 0.0, relax);
}

Vec3 pulse_evolution(const Vec3 &m, const Pulse &p, double dt, double detuning_hz, const RelaxationParams &relax)
{
    const Vec3 omega = constants::two_pi * Vec3(p.rabi_hz * std::cos(p.phase_rad), p.rabi_hz * std::sin(p.phase_rad),
                                                detuning_hz);
    const double rate = omega.norm();
    if (rate == 0.0)
        return relax_only(m, dt, relax);
    const Vec3 axis = omega / rate;

    const double shortest = std::min(relax.t1_s, relax.t2_s);
    if (p.duration_s <= shortest / 100.0)
        return rotate(m, axis, rate * dt);

    const double steps = std::ceil(dt / (shortest / 100.0));
    if (steps > kMaxSplitSteps)
        throw NumericError("pulse propagation step size underflow");
    const int n = std::max(1, static_cast<int>(steps));
    const double h = dt / n;
    Vec3 out = m;
    for (int k = 0; k < n; ++k)
    {
        out = relax_only(out, 0.5 * h, relax);
        out = rotate(out, axis, rate * h);
        out = relax_only(out, 0.5 * h, relax);
    }
    return out;
}

double segment_duration(const Segment &s)
{
    return std::visit(
        [](const auto &seg) -> double {
            using T = std::decay_t<decltype(seg)>;
            if constexpr (std::is_same_v<T, InstantPulse>)
                return 0.0;
            else
                return seg.duration_s;
        },
        s);
}
} // namespace

std::vector<double> AcquisitionWindow::times() const
{
    std::vector<double> t(samples);
    if (samples == 1)
        t[0] = start_s;
    for (std::size_t k = 0; samples > 1 && k < samples; ++k)
        t[k] = start_s + length_s * static_cast<double>(k) / static_cast<double>(samples - 1);
    return t;
}

PulseSequence &PulseSequence::pulse(double duration_s, double rabi_hz, double phase_rad)
{
    segments.emplace_back(Pulse{duration_s, rabi_hz, phase_rad});
    return *this;
}

PulseSequence &PulseSequence::rotate(double flip_angle_rad, double phase_rad)
{
    segments.emplace_back(InstantPulse{flip_angle_rad, phase_rad});
    return *this;
}

PulseSequence &PulseSequence::delay(double duration_s)
{
    segments.emplace_back(Delay{duration_s});
    return *this;
}

PulseSequence &PulseSequence::acquire(double start_s, double length_s, std::size_t samples)
{
    acquisition = {start_s, length_s, samples};
    return *this;
}

double PulseSequence::duration() const
{
    double total = 0.0;
    for (const auto &s : segments)
        total += segment_duration(s);
    return total;
}

void PulseSequence::validate() const
{
    for (const auto &s : segments)
    {
        const bool instant = std::holds_alternative<InstantPulse>(s);
        const double d = segment_duration(s);
        if (!instant && !(d > 0.0))
            throw DomainError("pulse and delay durations must be positive");
        if (!std::isfinite(d))
            throw DomainError("segment duration must be finite");
    }
    if (acquisition.samples > 0)
    {
        const double total = duration();
        const double slack = 1e-12 * std::max(total, 1e-30);
        if (acquisition.start_s < -slack || acquisition.length_s < 0.0 ||
            acquisition.start_s + acquisition.length_s > total + slack)
            throw DomainError("acquisition window must lie inside the sequence");
    }
}

void RelaxationParams::validate() const
{
    if (!(t1_s > 0.0) || !(t2_s > 0.0))
        throw DomainError("T1 and T2 must be positive");
    if (!(stretch_p >= 0.5 && stretch_p <= 3.0))
        throw DomainError("stretch exponent must lie in [0.5, 3]");
}

std::vector<std::string> RelaxationParams::warnings() const
{
    std::vector<std::string> w;
    if (t2_s > 2.0 * t1_s)
        w.emplace_back("T2 exceeds 2 T1, which is unphysical");
    return w;
}

Trajectory propagate_bloch(const PulseSequence &sequence, const RelaxationParams &relax, double detuning_hz)
{
    return propagate_bloch(sequence, relax, detuning_hz, Vec3(0.0, 0.0, relax.equilibrium_mz));
}

Trajectory propagate_bloch(const PulseSequence &sequence, const RelaxationParams &relax, double detuning_hz,
                           const Vec3 &initial)
{
    sequence.validate();
    relax.validate();

    const std::vector<double> samples = sequence.acquisition.times();
    std::size_t next_sample = 0;

    Trajectory out;
    Vec3 m = initial;
    double t = 0.0;
    out.points.push_back({t, m});

    for (const auto &segment : sequence.segments)
    {
        if (const auto *instant = std::get_if<InstantPulse>(&segment))
        {
            const Vec3 axis(std::cos(instant->phase_rad), std::sin(instant->phase_rad), 0.0);
            m = rotate(m, axis, instant->flip_angle_rad);
            out.points.push_back({t, m});
            continue;
        }
        const double length = segment_duration(segment);
        const double end = t + length;
        auto advance = [&](double dt) {
            if (dt <= 0.0)
                return;
            if (const auto *p = std::get_if<Pulse>(&segment))
                m = pulse_evolution(m, *p, dt, detuning_hz, relax);
            else
                m = free_evolution(m, dt, detuning_hz, relax);
        };
        // Samples inside the segment are reached by evolving from the segment
        // start, which keeps each sample exact rather than accumulated.
        const Vec3 m_start = m;
        while (next_sample < samples.size() && samples[next_sample] < end)
        {
            m = m_start;
            advance(samples[next_sample] - t);
            out.acquisition.push_back({samples[next_sample], m});
            ++next_sample;
        }
        m = m_start;
        advance(length);
        t = end;
        out.points.push_back({t, m});
    }
    for (; next_sample < samples.size(); ++next_sample)
        out.acquisition.push_back({samples[next_sample], m});
    return out;
}

std::vector<double> stratified_detunings(std::size_t n, double fwhm_hz, DetuningShape shape, double center_hz)
{
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        if (shape == DetuningShape::Lorentzian)
            out[k] = center_hz + 0.5 * fwhm_hz * std::tan(std::numbers::pi * (u - 0.5));
        else
        {
            const double sigma = fwhm_hz / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
            out[k] = center_hz + sigma * std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
        }
    }
    return out;
}

std::size_t EchoTrace::peak_index() const
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < magnetization.size(); ++i)
        if (std::abs(magnetization[i]) > std::abs(magnetization[best]))
            best = i;
    return best;
}

double EchoTrace::amplitude_at(double t_s) const
{
    const auto it = std::lower_bound(time_s.begin(), time_s.end(), t_s);
    std::size_t i = static_cast<std::size_t>(it - time_s.begin());
    if (i == time_s.size() || (i > 0 && t_s - time_s[i - 1] < time_s[i] - t_s))
        i = i == 0 ? 0 : i - 1;
    return std::abs(magnetization[i]);
}

void EchoTrace::validate() const
{
    if (time_s.size() != magnetization.size() || time_s.empty())
        throw DomainError("echo trace needs matching, non-empty time and value arrays");
    for (std::size_t i = 0; i < time_s.size(); ++i)
    {
        if (!std::isfinite(time_s[i]) || !std::isfinite(magnetization[i].real()) ||
            !std::isfinite(magnetization[i].imag()))
            throw DomainError("echo trace values must be finite");
        if (i > 0 && !(time_s[i] > time_s[i - 1]))
            throw DomainError("echo trace times must be strictly increasing");
    }
}

EchoTrace simulate_hahn_echo(double tau_s, double ensemble_fwhm_hz, const RelaxationParams &relax,
                             const HahnEchoOptions &options)
{
    relax.validate();
    if (!(tau_s >= 0.0))
        throw DomainError("tau must be non-negative");
    if (!(ensemble_fwhm_hz > 0.0))
        throw DomainError("ensemble width must be positive");
    if (options.samples < 3 || options.n_spins == 0)
        throw DomainError("echo simulation needs at least three samples and one spin");

    EchoTrace trace;
    if (options.n_spins < 100)
        trace.diagnostics.emplace_back("n_spins below 100: ensemble average is coarse");
    for (auto &w : relax.warnings())
        trace.diagnostics.push_back(std::move(w));

    // Odd sample count centred on 2 tau so the echo lands on a sample.
    const std::size_t half_count = (options.samples - 1) / 2;
    double half = options.half_window_s > 0.0 ? options.half_window_s
                                              : 5.0 / (std::numbers::pi * ensemble_fwhm_hz);
    const double refocus = 2.0 * tau_s;
    std::size_t first = 0;
    if (tau_s > 0.0)
        half = std::min(half, tau_s);
    else
        first = half_count; // tau = 0: nothing precedes the pulses
    const double dt = half / static_cast<double>(half_count);

    // Ideal pulses by default. Finite pulses use the rabi rate of a pi/2 of
    // the requested length and keep the same centre-to-centre timing.
    RelaxationParams coherent = relax;
    coherent.t2_s = std::numeric_limits<double>::infinity();
    PulseSequence seq;
    const double tp = options.pulse_duration_s;
    if (tp > 0.0)
    {
        if (tau_s < 1.5 * tp)
            throw DomainError("tau too short for the requested pulse duration");
        const double rabi = 0.25 / tp;
        seq.pulse(tp, rabi, 0.0).delay(tau_s - 1.5 * tp).pulse(2.0 * tp, rabi, 0.5 * std::numbers::pi);
        seq.delay(tau_s - tp + half);
    }
    else
    {
        seq.rotate(0.5 * std::numbers::pi, 0.0);
        if (tau_s > 0.0)
            seq.delay(tau_s);
        seq.rotate(std::numbers::pi, 0.5 * std::numbers::pi).delay(tau_s + half);
    }
    const double start = refocus - static_cast<double>(half_count - first) * dt;
    const std::size_t count = options.samples - first - (options.samples - 1 - 2 * half_count);
    const double t_offset = tp > 0.0 ? 0.5 * tp : 0.0; // time measured from the first pulse centre
    seq.acquire(start + t_offset, static_cast<double>(count - 1) * dt, count);

    const auto detunings = stratified_detunings(options.n_spins, ensemble_fwhm_hz, options.shape);
    const std::size_t chunks = (detunings.size() + kSpinChunk - 1) / kSpinChunk;
    std::vector<std::vector<cplx>> partial(chunks, std::vector<cplx>(count, 0.0));
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t lo = c * kSpinChunk, hi = std::min(detunings.size(), lo + kSpinChunk);
        for (std::size_t k = lo; k < hi; ++k)
        {
            const auto traj = propagate_bloch(seq, coherent, detunings[k]);
            for (std::size_t s = 0; s < count; ++s)
                partial[c][s] += cplx(traj.acquisition[s].m.x(), traj.acquisition[s].m.y());
        }
    });

    const double envelope = echo_decay_model(refocus, relax.t2_s, relax.stretch_p, 1.0);
    const double norm = envelope / (static_cast<double>(detunings.size()) * relax.equilibrium_mz);
    trace.time_s.resize(count);
    trace.magnetization.assign(count, 0.0);
    for (std::size_t s = 0; s < count; ++s)
    {
        trace.time_s[s] = start + static_cast<double>(s) * dt;
        for (std::size_t c = 0; c < chunks; ++c)
            trace.magnetization[s] += partial[c][s];
        trace.magnetization[s] *= norm;
    }
    return trace;
}

double saturation_recovery_model(double recovery_s, double t1_s, double amplitude)
{
    return amplitude * -std::expm1(-recovery_s / t1_s);
}

double echo_decay_model(double two_tau_s, double t2_s, double p, double amplitude)
{
    return amplitude * std::exp(-std::pow(two_tau_s / t2_s, p));
}
} // namespace spinres::pulse
