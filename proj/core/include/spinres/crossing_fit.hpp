#pragma once

// Avoided-crossing fit: per-field dip extraction from a reflection map and a
// least-squares fit of the coupling constants to the dip positions.

#include <spinres/cavity_qed.hpp>
#include <spinres/least_squares.hpp>
#include <spinres/spectra.hpp>
#include <spinres/spin_models.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace spinres::fit
{
struct Dip
{
    std::size_t index = 0;
    double frequency_hz = 0.0; // parabolic refinement around the sample minimum
    double value = 0.0;
    double prominence = 0.0;
    double width_hz = 0.0; // full width at half prominence
};

/// Local minima of `y` with topographic prominence >= min_prominence, in frequency order.
std::vector<Dip> find_dips(std::span<const double> frequency_hz, std::span<const double> y, double min_prominence);

/// Robust noise level of a smooth spectrum from second differences (MAD).
double difference_noise_sigma(std::span<const double> y);

enum class BranchModel
{
    ReflectionMinima, // minima of |S11|^2 of the full coupled model
    Dressed           // eigenvalues of the Hermitian resonator-spin matrix
};

std::string to_string(BranchModel model);
BranchModel branch_model_from_string(const std::string &name);

struct SpinManifold
{
    std::string name;
    std::function<double(double field_t)> frequency_hz;
};

/// One manifold per nuclear label, evaluated with spin::manifold_frequency.
std::vector<SpinManifold> spin_manifolds(const spin::SpinSystem &system, const spin::Vec3 &direction);

struct CrossingModel
{
    cqed::ResonatorParams resonator;
    std::vector<SpinManifold> manifolds;
    double gamma_hz = 1e6; // inhomogeneous width of every line (reflection-minima model)
    BranchModel branch_model = BranchModel::ReflectionMinima;
};

struct CrossingFitOptions
{
    std::vector<double> initial_g_hz; // per manifold; empty for automatic guesses
    bool fit_field_offset = false;
    double initial_field_offset_t = 0.0;
    double min_prominence = 0.0; // linear |S11|; 0 selects max(10 sigma, 1e-3)
    unsigned reassign_rounds = 3;
    LeastSquaresOptions solver;
};

struct DipPoint
{
    std::size_t row = 0;
    double field_t = 0.0;
    double frequency_hz = 0.0;
    double prominence = 0.0;
    int branch = -1; // dressed-branch index (ascending eigenvalue order), Dressed model only
};

struct CrossingFit
{
    FitResult result;
    std::vector<double> g_ens_hz;
    std::vector<double> g_sigma_hz;
    double field_offset_t = 0.0;
    std::vector<DipPoint> dips;
    std::size_t usable_rows = 0;
    std::vector<std::string> diagnostics;

    /// Minimum dressed splitting of manifold k on resonance, 2 g_k.
    double min_splitting_hz(std::size_t k) const { return 2.0 * g_ens_hz.at(k); }
};

/// Per-row dips of a map (parallel over rows).
std::vector<DipPoint> extract_map_dips(const FieldSweepMap &map, double min_prominence);

/// Branch frequencies of the Hermitian resonator + N spin-mode matrix, ascending.
std::vector<double> dressed_branches(double omega_r_hz, std::span<const double> spin_hz, std::span<const double> g_hz);

/// Model dip frequency nearest `near_hz` for the given lines; falls back to
/// the nearest dressed branch when |S11|^2 has no local minimum nearby.
double predicted_dip(double near_hz, const cqed::ResonatorParams &res, std::span<const double> spin_hz,
                     std::span<const double> g_hz, double gamma_hz);

/// Throws InsufficientDataError when fewer than 5 rows yield dips; fewer
/// than half of the rows is reported as a diagnostic.
CrossingFit fit_avoided_crossing(const FieldSweepMap &map, const CrossingModel &model,
                                 const CrossingFitOptions &options = {});
} // namespace spinres::fit
