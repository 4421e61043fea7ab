#include <spinres/error.hpp>
#include <spinres/spin_models.hpp>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

namespace spinres::spin
{
namespace
{
constexpr double kUnitNormTolerance = 1e-12;
constexpr double kDegeneracyHz = 1.0;

using cd = std::complex<double>;

void require_unit(const Vec3 &v, const char *what)
{
    if (!std::isfinite(v.norm()) || std::abs(v.norm() - 1.0) > kUnitNormTolerance)
        throw DomainError(std::string(what) + " must be a unit vector");
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b)
{
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

struct ProductOperators
{
    std::array<Eigen::MatrixXcd, 3> s;
    std::array<Eigen::MatrixXcd, 3> i;
};

ProductOperators product_operators(const SpinSystem &system)
{
    const auto electron = spin_matrices(0.5);
    const auto nucleus = spin_matrices(system.nuclear_spin);
    const Eigen::MatrixXcd id_s = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd id_i = Eigen::MatrixXcd::Identity(system.nuclear_dimension(), system.nuclear_dimension());
    ProductOperators ops;
    for (int k = 0; k < 3; ++k)
    {
        ops.s[k] = kron(electron[k], id_i);
        ops.i[k] = kron(id_s, nucleus[k]);
    }
    return ops;
}

Eigen::MatrixXcd projected(const std::array<Eigen::MatrixXcd, 3> &ops, const Vec3 &axis)
{
    return axis.x() * ops[0] + axis.y() * ops[1] + axis.z() * ops[2];
}

double expectation(const Eigen::MatrixXcd &op, const Eigen::VectorXcd &state)
{
    return state.dot(op * state).real();
}

int round_twice_m(double m, double j)
{
    // nearest value in {j, j-1, ..., -j}, returned as 2m
    const int twice_j = static_cast<int>(std::lround(2.0 * j));
    int best = twice_j;
    for (int t = -twice_j; t <= twice_j; t += 2)
        if (std::abs(0.5 * t - m) < std::abs(0.5 * best - m))
            best = t;
    return best;
}

Vec3 nuclear_axis(const SpinSystem &system, const Vec3 &field_dir)
{
    const Vec3 n = hyperfine_tensor(system) * field_dir;
    return n.norm() > 0.0 ? Vec3(n.normalized()) : field_dir;
}

struct Eigensystem
{
    Eigen::VectorXd energies;
    Eigen::MatrixXcd states;
};

Eigensystem diagonalize(const SpinSystem &system, const FieldPoint &field)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(build_hamiltonian(system, field));
    if (solver.info() != Eigen::Success)
        throw NumericError("Hermitian eigensolve failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// Labels by expectation values; returns false when any label is unclear.
bool label_by_expectation(const SpinSystem &system, const Vec3 &field_dir, const ProductOperators &ops,
                          const Eigen::MatrixXcd &states, std::vector<int> &twice_m_s,
                          std::vector<ManifoldLabel> &manifolds)
{
    const int n = static_cast<int>(states.cols());
    const Eigen::MatrixXcd s_b = projected(ops.s, field_dir);
    const Eigen::MatrixXcd i_n = projected(ops.i, nuclear_axis(system, field_dir));
    twice_m_s.assign(n, 0);
    manifolds.assign(n, ManifoldLabel::electron());
    bool clear = true;
    for (int k = 0; k < n; ++k)
    {
        const Eigen::VectorXcd v = states.col(k);
        const double ms = expectation(s_b, v);
        twice_m_s[k] = ms >= 0.0 ? 1 : -1;
        if (std::abs(ms) < 0.25)
            clear = false;
        if (system.nuclear_spin > 0.0)
        {
            const double mi = expectation(i_n, v);
            const int t = round_twice_m(mi, system.nuclear_spin);
            if (std::abs(mi - 0.5 * t) > 0.25)
                clear = false;
            manifolds[k] = ManifoldLabel{true, t};
        }
    }
    for (int a = 0; a < n && clear; ++a)
        for (int b = a + 1; b < n; ++b)
            if (twice_m_s[a] == twice_m_s[b] && manifolds[a] == manifolds[b])
                clear = false;
    return clear;
}

// Follows eigenstates from a high field, where the product basis labels are
// unambiguous, down to the requested field by maximal overlap.
bool label_by_continuation(const SpinSystem &system, const FieldPoint &field, const ProductOperators &ops,
                           const Eigen::MatrixXcd &target_states, std::vector<int> &twice_m_s,
                           std::vector<ManifoldLabel> &manifolds)
{
    const double b_high = std::max(2.0, 20.0 * field.magnitude_t);
    const double b_low = std::max(field.magnitude_t, 1e-6);
    constexpr int steps = 80;

    FieldPoint probe{b_high, field.direction};
    Eigensystem previous = diagonalize(system, probe);
    std::vector<int> ms;
    std::vector<ManifoldLabel> mi;
    bool ok = label_by_expectation(system, field.direction, ops, previous.states, ms, mi);

    const int n = static_cast<int>(target_states.cols());
    auto match = [&](const Eigen::MatrixXcd &next) {
        // greedy assignment on |<prev|next>|^2
        Eigen::MatrixXd overlap = (previous.states.adjoint() * next).cwiseAbs2();
        std::vector<int> prev_of(n, -1);
        std::vector<bool> used_prev(n, false), used_next(n, false);
        double weakest = 1.0;
        for (int round = 0; round < n; ++round)
        {
            double best = -1.0;
            int bi = -1, bj = -1;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (!used_prev[i] && !used_next[j] && overlap(i, j) > best)
                    {
                        best = overlap(i, j);
                        bi = i;
                        bj = j;
                    }
            used_prev[bi] = used_next[bj] = true;
            prev_of[bj] = bi;
            weakest = std::min(weakest, best);
        }
        std::vector<int> next_ms(n);
        std::vector<ManifoldLabel> next_mi(n);
        for (int j = 0; j < n; ++j)
        {
            next_ms[j] = ms[prev_of[j]];
            next_mi[j] = mi[prev_of[j]];
        }
        ms = std::move(next_ms);
        mi = std::move(next_mi);
        return weakest > 0.5;
    };

    for (int k = 1; k <= steps; ++k)
    {
        probe.magnitude_t = b_high * std::pow(b_low / b_high, static_cast<double>(k) / steps);
        Eigensystem next = diagonalize(system, probe);
        ok = match(next.states) && ok;
        previous = std::move(next);
    }
    ok = match(target_states) && ok;
    twice_m_s = std::move(ms);
    manifolds = std::move(mi);
    return ok;
}
} // namespace

SpinSystem SpinSystem::free_electron(double g_factor)
{
    SpinSystem s;
    s.g_factor = g_factor;
    return s;
}

SpinSystem SpinSystem::p1_center(const Vec3 &axis, double g_factor)
{
    SpinSystem s;
    s.g_factor = g_factor;
    s.nuclear_spin = 1.0;
    s.hyperfine_perp_hz = constants::p1_hyperfine_perp_hz;
    s.hyperfine_par_hz = constants::p1_hyperfine_par_hz;
    s.symmetry_axis = axis;
    return s;
}

int SpinSystem::nuclear_dimension() const
{
    return static_cast<int>(std::lround(2.0 * nuclear_spin)) + 1;
}

void SpinSystem::validate() const
{
    if (!(g_factor > 0.0))
        throw DomainError("g_factor must be positive");
    if (!(hyperfine_perp_hz >= 0.0) || !(hyperfine_par_hz >= 0.0))
        throw DomainError("hyperfine components must be non-negative");
    if (nuclear_spin != 0.0 && nuclear_spin != 0.5 && nuclear_spin != 1.0)
        throw DomainError("nuclear_spin must be 0, 1/2 or 1");
    require_unit(symmetry_axis, "symmetry_axis");
}

std::vector<Vec3> p1_axes()
{
    const double s = 1.0 / std::sqrt(3.0);
    return {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
}

ManifoldLabel ManifoldLabel::nuclear(double m_i)
{
    return {true, static_cast<int>(std::lround(2.0 * m_i))};
}

std::string ManifoldLabel::str() const
{
    if (!has_nucleus)
        return "electron";
    std::ostringstream os;
    os << "m_I=";
    if (twice_m_i > 0)
        os << '+';
    else if (twice_m_i < 0)
        os << '-';
    const int a = std::abs(twice_m_i);
    if (a % 2 == 0)
        os << a / 2;
    else
        os << a << "/2";
    return os.str();
}

ManifoldLabel ManifoldLabel::parse(const std::string &text)
{
    if (text == "electron")
        return electron();
    std::string body = text;
    if (body.rfind("m_I=", 0) == 0)
        body = body.substr(4);
    try
    {
        const auto slash = body.find('/');
        if (slash != std::string::npos)
        {
            const int num = std::stoi(body.substr(0, slash));
            if (body.substr(slash + 1) != "2")
                throw DomainError("bad denominator");
            return {true, num};
        }
        std::size_t used = 0;
        const int m = std::stoi(body, &used);
        if (used != body.size())
            throw DomainError("trailing characters");
        return {true, 2 * m};
    }
    catch (const std::exception &)
    {
        throw DomainError("unrecognised manifold label '" + text + "'");
    }
}

std::string to_string(TransitionKind kind)
{
    switch (kind)
    {
    case TransitionKind::Allowed:
        return "allowed";
    case TransitionKind::Forbidden:
        return "forbidden";
    case TransitionKind::Nuclear:
        return "nuclear";
    }
    return "unknown";
}

std::size_t TransitionSet::strong_count() const
{
    return static_cast<std::size_t>(std::count_if(lines.begin(), lines.end(), [](const auto &t) { return t.strong(); }));
}

std::vector<Transition> TransitionSet::strong_lines() const
{
    std::vector<Transition> out;
    std::copy_if(lines.begin(), lines.end(), std::back_inserter(out), [](const auto &t) { return t.strong(); });
    return out;
}

std::optional<Transition> TransitionSet::find(const ManifoldLabel &label) const
{
    std::optional<Transition> best;
    for (const auto &t : lines)
        if (t.kind == TransitionKind::Allowed && t.label == label &&
            (!best || t.matrix_element > best->matrix_element))
            best = t;
    return best;
}

double zeeman_transition(double g_factor, double field_t)
{
    if (field_t < 0.0)
        throw DomainError("field must be non-negative");
    return g_factor * constants::bohr_frequency_per_tesla * field_t;
}

Eigen::Matrix3d hyperfine_tensor(const SpinSystem &system)
{
    // Axial about the symmetry axis: A_perp (1 - n n^T) + A_par n n^T.
    const Vec3 &n = system.symmetry_axis;
    return system.hyperfine_perp_hz * Eigen::Matrix3d::Identity() +
           (system.hyperfine_par_hz - system.hyperfine_perp_hz) * (n * n.transpose());
}

std::array<Eigen::MatrixXcd, 3> spin_matrices(double j)
{
    const int dim = static_cast<int>(std::lround(2.0 * j)) + 1;
    Eigen::MatrixXcd plus = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k)
    {
        const double m = j - k;
        z(k, k) = m;
        if (k > 0) // <m+1| J+ |m>
            plus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    const Eigen::MatrixXcd minus = plus.adjoint();
    return {0.5 * (plus + minus), cd(0.0, -0.5) * (plus - minus), z};
}

HermitianMatrix build_hamiltonian(const SpinSystem &system, const FieldPoint &field)
{
    system.validate();
    if (!(field.magnitude_t >= 0.0))
        throw DomainError("field magnitude must be non-negative");
    require_unit(field.direction, "field direction");

    const auto ops = product_operators(system);
    const double gamma = system.g_factor * constants::bohr_frequency_per_tesla;
    HermitianMatrix h = gamma * projected(ops.s, field.vector());
    if (system.nuclear_spin > 0.0)
    {
        const Eigen::Matrix3d a = hyperfine_tensor(system);
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
                if (a(p, q) != 0.0)
                    h += a(p, q) * (ops.s[p] * ops.i[q]);
    }
    // exact Hermitian part; removes rounding asymmetry of the products
    return 0.5 * (h + h.adjoint());
}

LevelStructure levels(const SpinSystem &system, const FieldPoint &field)
{
    const Eigensystem eig = diagonalize(system, field);
    const auto ops = product_operators(system);

    LevelStructure out;
    out.energies_hz = eig.energies;
    out.states = eig.states;
    bool clear = label_by_expectation(system, field.direction, ops, eig.states, out.twice_m_s, out.manifolds);
    if (!clear)
        clear = label_by_continuation(system, field, ops, eig.states, out.twice_m_s, out.manifolds);
    out.ambiguous = !clear;
    for (Eigen::Index k = 1; k < out.energies_hz.size(); ++k)
        if (out.energies_hz[k] - out.energies_hz[k - 1] < kDegeneracyHz)
            out.ambiguous = true;
    return out;
}

TransitionSet transitions(const SpinSystem &system, const FieldPoint &field, const Vec3 &drive_axis,
                          const TransitionOptions &options)
{
    require_unit(drive_axis, "drive_axis");
    const LevelStructure lv = levels(system, field);
    const auto ops = product_operators(system);
    const Eigen::MatrixXcd s_drive = projected(ops.s, drive_axis);

    TransitionSet set;
    set.ambiguous_labels = lv.ambiguous;
    if (std::abs(drive_axis.dot(field.direction)) > 1e-9)
        set.warnings.push_back("drive axis is not perpendicular to the static field");
    if (lv.ambiguous)
        set.warnings.push_back("near-degenerate levels: manifold labels are ambiguous");

    const int n = static_cast<int>(lv.energies_hz.size());
    const Eigen::MatrixXcd elements = lv.states.adjoint() * s_drive * lv.states;
    for (int lo = 0; lo < n; ++lo)
        for (int up = lo + 1; up < n; ++up)
        {
            Transition t;
            t.frequency_hz = lv.energies_hz[up] - lv.energies_hz[lo];
            t.matrix_element = std::min(1.0, 2.0 * std::abs(elements(lo, up)));
            t.lower = lo;
            t.upper = up;
            t.label = lv.manifolds[lo];
            if (lv.twice_m_s[lo] == lv.twice_m_s[up])
                t.kind = TransitionKind::Nuclear;
            else if (lv.manifolds[lo] == lv.manifolds[up])
                t.kind = TransitionKind::Allowed;
            else
                t.kind = TransitionKind::Forbidden;
            if (options.include_weak || t.matrix_element >= options.min_matrix_element)
                set.lines.push_back(t);
        }
    std::stable_sort(set.lines.begin(), set.lines.end(),
                     [](const Transition &a, const Transition &b) { return a.frequency_hz < b.frequency_hz; });
    return set;
}

double manifold_frequency(const SpinSystem &system, const FieldPoint &field, const ManifoldLabel &label)
{
    const LevelStructure lv = levels(system, field);
    int up = -1, down = -1;
    for (int k = 0; k < static_cast<int>(lv.manifolds.size()); ++k)
    {
        if (!(lv.manifolds[k] == label))
            continue;
        (lv.twice_m_s[k] > 0 ? up : down) = k;
    }
    if (up < 0 || down < 0)
        throw NotFoundError("no transition with label " + label.str());
    return lv.energies_hz[up] - lv.energies_hz[down];
}

std::vector<ManifoldLabel> manifold_labels(const SpinSystem &system)
{
    if (system.nuclear_spin == 0.0)
        return {ManifoldLabel::electron()};
    std::vector<ManifoldLabel> out;
    const int twice_i = static_cast<int>(std::lround(2.0 * system.nuclear_spin));
    for (int t = twice_i; t >= -twice_i; t -= 2)
        out.push_back({true, t});
    return out;
}

double resonance_field(const SpinSystem &system, double target_hz, const Vec3 &direction, const ManifoldLabel &label,
                       double max_field_t)
{
    require_unit(direction, "direction");
    auto residual = [&](double b) { return manifold_frequency(system, {b, direction}, label) - target_hz; };

    constexpr int grid = 64;
    constexpr double b_min = 1e-6;
    double b_prev = b_min;
    double r_prev = residual(b_prev);
    for (int k = 1; k <= grid; ++k)
    {
        const double b = max_field_t * k / grid;
        const double r = residual(b);
        if (r == 0.0)
            return b;
        if ((r_prev < 0.0) != (r < 0.0))
        {
            boost::uintmax_t iters = 200;
            const auto [lo, hi] = boost::math::tools::toms748_solve(
                residual, b_prev, b, r_prev, r, boost::math::tools::eps_tolerance<double>(48), iters);
            const double root = 0.5 * (lo + hi);
            if (std::abs(residual(root)) > 1e3)
                throw NumericError("resonance_field did not converge to 1 kHz");
            return root;
        }
        b_prev = b;
        r_prev = r;
    }
    throw NotFoundError("no " + label.str() + " resonance at " + std::to_string(target_hz) +
                        " Hz below " + std::to_string(max_field_t) + " T");
}
} // namespace spinres::spin
