#pragma once

// Forward model of a field-swept reflection map: a spin system supplies the
// transition frequencies at each field, each allowed line couples to the
// resonator as a Lorentzian ensemble.

#include <spinres/cavity_qed.hpp>
#include <spinres/spectra.hpp>
#include <spinres/spin_models.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace spinres::cqed
{
struct SweepSpec
{
    spin::SpinSystem system;
    spin::Vec3 field_direction = spin::Vec3::UnitZ();
    spin::Vec3 drive_axis = spin::Vec3::UnitX();
    std::vector<double> field_t;
    std::vector<double> frequency_hz;
};

struct SweepCoupling
{
    double default_g_ens_hz = 0.0;
    std::map<std::string, double> g_ens_by_label; // keyed by ManifoldLabel::str()
    double gamma_hz = 1e6;
    bool scale_by_matrix_element = true;

    double g_for(const spin::ManifoldLabel &label) const;
};

struct SweepNoise
{
    double sigma = 0.0; // complex Gaussian, per quadrature, linear units
    std::uint64_t seed = 0;
};

/// Spin lines (allowed, strong transitions) at one field as Lorentzian ensembles.
std::vector<EnsembleParams> spin_lines_at(const SweepSpec &spec, const SweepCoupling &coupling, double field_t);

/// |S11| in dB over spec.field_t x spec.frequency_hz.
FieldSweepMap simulate_field_sweep(const SweepSpec &spec, const ResonatorParams &res, const SweepCoupling &coupling,
                                   const SweepNoise &noise = {});
} // namespace spinres::cqed
