#include <spinres/error.hpp>
#include <spinres/parallel.hpp>
#include <spinres/sweep.hpp>

#include <cmath>
#include <random>

namespace spinres::cqed
{
double SweepCoupling::g_for(const spin::ManifoldLabel &label) const
{
    const auto it = g_ens_by_label.find(label.str());
    return it != g_ens_by_label.end() ? it->second : default_g_ens_hz;
}

std::vector<EnsembleParams> spin_lines_at(const SweepSpec &spec, const SweepCoupling &coupling, double field_t)
{
    const auto set = spin::transitions(spec.system, {field_t, spec.field_direction}, spec.drive_axis);
    std::vector<EnsembleParams> lines;
    for (const auto &t : set.lines)
    {
        if (t.kind != spin::TransitionKind::Allowed || !t.strong())
            continue;
        EnsembleParams e;
        e.g_ens_hz = coupling.g_for(t.label) * (coupling.scale_by_matrix_element ? t.matrix_element : 1.0);
        e.omega_s_hz = t.frequency_hz;
        e.gamma_hz = coupling.gamma_hz;
        lines.push_back(e);
    }
    return lines;
}

FieldSweepMap simulate_field_sweep(const SweepSpec &spec, const ResonatorParams &res, const SweepCoupling &coupling,
                                   const SweepNoise &noise)
{
    res.validate();
    if (!(coupling.gamma_hz > 0.0))
        throw DomainError("ensemble width must be positive");

    FieldSweepMap map;
    map.field_t = spec.field_t;
    map.frequency_hz = spec.frequency_hz;
    map.scale = MagnitudeScale::Decibel;
    map.degenerate = spec.field_t.size() == 1;
    map.values.assign(map.rows() * map.cols(), 0.0);
    map.validate();

    parallel_for(map.rows(), [&](std::size_t row) {
        const auto lines = spin_lines_at(spec, coupling, map.field_t[row]);
        // per-row stream: the result does not depend on the thread count
        std::mt19937_64 rng(noise.seed * 1000003ULL + row);
        std::normal_distribution<double> gauss(0.0, noise.sigma > 0.0 ? noise.sigma : 1.0);
        for (std::size_t col = 0; col < map.cols(); ++col)
        {
            cplx s = reflection_coupled(map.frequency_hz[col], res, lines);
            if (noise.sigma > 0.0)
            {
                const double re = gauss(rng);
                const double im = gauss(rng);
                s += cplx(re, im);
            }
            map.values[row * map.cols() + col] = 20.0 * std::log10(std::abs(s));
        }
    });
    return map;
}
} // namespace spinres::cqed
