#include "common/synthetic.hpp"

#include <spinres/cavity_qed.hpp>
#include <spinres/crossing_fit.hpp>
#include <spinres/fit_models.hpp>
#include <spinres/pulse_sim.hpp>
#include <spinres/spin_models.hpp>

#include <benchmark/benchmark.h>

using namespace spinres;

namespace
{
void p1_transitions(benchmark::State &state)
{
    const auto system = spin::SpinSystem::p1_center();
    double b = 0.190;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(spin::transitions(system, {b, spin::Vec3::UnitZ()}, spin::Vec3::UnitX()));
        b = b < 0.210 ? b + 1e-5 : 0.190;
    }
}
BENCHMARK(p1_transitions);

void p1_resonance_field(benchmark::State &state)
{
    const auto system = spin::SpinSystem::p1_center();
    const auto label = spin::manifold_labels(system)[1];
    for (auto _ : state)
        benchmark::DoNotOptimize(spin::resonance_field(system, 5.534e9, spin::Vec3::UnitZ(), label));
}
BENCHMARK(p1_resonance_field);

void coupled_reflection(benchmark::State &state)
{
    const auto res = synth::resonator();
    auto ens = synth::ensemble(7.8e6, 9.6e6);
    ens.lineshape = cqed::Lineshape(state.range(0));
    double f = synth::omega_r - 20e6;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(cqed::reflection_coupled(f, res, ens));
        f = f < synth::omega_r + 20e6 ? f + 1e3 : synth::omega_r - 20e6;
    }
}
BENCHMARK(coupled_reflection)->Arg(int(cqed::Lineshape::Lorentzian))->Arg(int(cqed::Lineshape::Gaussian));

void resonator_fit(benchmark::State &state)
{
    const auto trace = synth::bare_trace(synth::resonator(), 10e6, std::size_t(state.range(0)), 2e-3, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(fit::fit_resonator(trace));
}
BENCHMARK(resonator_fit)->Arg(401)->Arg(1601)->Unit(benchmark::kMillisecond);

void crossing_fit(benchmark::State &state)
{
    const auto map = synth::dpph_map(7.8e6, 9.6e6, 2e-3, 61);
    fit::CrossingModel m;
    m.resonator = synth::resonator();
    m.manifolds = fit::spin_manifolds(spin::SpinSystem::free_electron(constants::g_dpph), spin::Vec3::UnitZ());
    m.gamma_hz = 9.6e6;
    for (auto _ : state)
        benchmark::DoNotOptimize(fit::fit_avoided_crossing(map, m));
}
BENCHMARK(crossing_fit)->Unit(benchmark::kMillisecond);

void hahn_echo(benchmark::State &state)
{
    pulse::RelaxationParams relax;
    relax.t2_s = 117.3e-6;
    relax.stretch_p = 2.1;
    relax.t1_s = 5.54e-3;
    pulse::HahnEchoOptions o;
    o.n_spins = std::size_t(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(pulse::simulate_hahn_echo(50e-6, 10e6, relax, o));
}
BENCHMARK(hahn_echo)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond);
} // namespace

BENCHMARK_MAIN();
