#pragma once

// Spin Hamiltonians of S = 1/2 defects with an optional hyperfine-coupled
// nucleus, and the ESR transitions they produce in a static field.
//
// All energies are ordinary frequencies (H/h, Hz). The product basis is
// |m_S> (x) |m_I> with both quantum numbers in descending order.

#include <spinres/constants.hpp>

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace spinres::spin
{
using Vec3 = Eigen::Vector3d;
using HermitianMatrix = Eigen::MatrixXcd;

struct SpinSystem
{
    double g_factor = constants::g_dpph;
    double nuclear_spin = 0.0;      // 0, 1/2 or 1
    double hyperfine_perp_hz = 0.0; // A_perp / 2pi
    double hyperfine_par_hz = 0.0;  // A_par / 2pi
    Vec3 symmetry_axis = Vec3::UnitZ();

    static SpinSystem free_electron(double g_factor = constants::g_dpph);

    /// 14N-coupled P1 centre. The default axis is [111].
    static SpinSystem p1_center(const Vec3 &axis = Vec3(1.0, 1.0, 1.0).normalized(),
                                double g_factor = constants::g_p1);

    int nuclear_dimension() const;
    int dimension() const { return 2 * nuclear_dimension(); }

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

/// The four <111> symmetry axes of the P1 centre in the crystal frame.
std::vector<Vec3> p1_axes();

struct FieldPoint
{
    double magnitude_t = 0.0;
    Vec3 direction = Vec3::UnitZ();

    Vec3 vector() const { return magnitude_t * direction; }
};

/// Nuclear manifold tag for an electron transition. `electron()` is used
/// for systems without a nucleus.
struct ManifoldLabel
{
    bool has_nucleus = false;
    int twice_m_i = 0;

    static ManifoldLabel electron() { return {}; }
    static ManifoldLabel nuclear(double m_i);

    double m_i() const { return 0.5 * twice_m_i; }

    /// "electron", "m_I=+1", "m_I=0", "m_I=-1/2", ...
    std::string str() const;
    static ManifoldLabel parse(const std::string &text);

    friend bool operator==(const ManifoldLabel &, const ManifoldLabel &) = default;
};

enum class TransitionKind
{
    Allowed,   // electron flip, nuclear state conserved
    Forbidden, // electron flip with a nuclear flip
    Nuclear    // electron state conserved
};

std::string to_string(TransitionKind kind);

struct Transition
{
    double frequency_hz = 0.0;
    double matrix_element = 0.0; // |<u|S_d|l>| / (1/2)
    ManifoldLabel label;         // manifold of the lower level
    TransitionKind kind = TransitionKind::Allowed;
    int lower = 0;               // eigenstate indices, ascending energy
    int upper = 0;

    static constexpr double strong_threshold = 0.5;
    bool strong() const { return matrix_element >= strong_threshold; }
};

struct TransitionOptions
{
    double min_matrix_element = 1e-3;
    bool include_weak = false;
};

struct TransitionSet
{
    std::vector<Transition> lines; // ascending frequency
    bool ambiguous_labels = false;
    std::vector<std::string> warnings;

    std::size_t strong_count() const;
    std::vector<Transition> strong_lines() const;

    /// Strongest allowed line carrying `label`, if any.
    std::optional<Transition> find(const ManifoldLabel &label) const;
};

/// Eigenstates of the Hamiltonian with their (m_S, m_I) labels.
struct LevelStructure
{
    Eigen::VectorXd energies_hz;   // ascending
    Eigen::MatrixXcd states;       // columns
    std::vector<int> twice_m_s;    // +1 / -1
    std::vector<ManifoldLabel> manifolds;
    bool ambiguous = false;
};

/// g mu_B B / h.
double zeeman_transition(double g_factor, double field_t);

/// Hyperfine tensor in the crystal frame, Hz.
Eigen::Matrix3d hyperfine_tensor(const SpinSystem &system);

/// Spin-j angular momentum matrices (x, y, z), dimension 2j+1.
std::array<Eigen::MatrixXcd, 3> spin_matrices(double j);

/// H/h = (g mu_B/h) B.S + S.A.I in the product basis, Hz.
HermitianMatrix build_hamiltonian(const SpinSystem &system, const FieldPoint &field);

LevelStructure levels(const SpinSystem &system, const FieldPoint &field);

TransitionSet transitions(const SpinSystem &system, const FieldPoint &field, const Vec3 &drive_axis,
                          const TransitionOptions &options = {});

/// Frequency of the nuclear-spin-conserving transition of `label` at `field`.
double manifold_frequency(const SpinSystem &system, const FieldPoint &field, const ManifoldLabel &label);

/// Labels of the electron transitions present in `system` (high-field order,
/// highest frequency first).
std::vector<ManifoldLabel> manifold_labels(const SpinSystem &system);

/// Field magnitude along `direction` at which the `label` transition equals
/// `target_hz`. Searches (0, max_field_t]; throws NotFoundError without a
/// sign change.
double resonance_field(const SpinSystem &system, double target_hz, const Vec3 &direction,
                       const ManifoldLabel &label, double max_field_t = 2.0);
} // namespace spinres::spin
