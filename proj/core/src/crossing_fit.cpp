#include <spinres/crossing_fit.hpp>
#include <spinres/error.hpp>
#include <spinres/parallel.hpp>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace spinres::fit
{
namespace
{
std::vector<cqed::EnsembleParams> lines_for(std::span<const double> spin_hz, std::span<const double> g_hz,
                                            double gamma_hz)
{
    std::vector<cqed::EnsembleParams> lines(spin_hz.size());
    for (std::size_t k = 0; k < spin_hz.size(); ++k)
    {
        lines[k].g_ens_hz = g_hz[k];
        lines[k].omega_s_hz = spin_hz[k];
        lines[k].gamma_hz = gamma_hz;
    }
    return lines;
}

double nearest_of(const std::vector<double> &values, double x)
{
    double best = values.front();
    for (double v : values)
        if (std::abs(v - x) < std::abs(best - x))
            best = v;
    return best;
}
} // namespace

std::string to_string(BranchModel model)
{
    return model == BranchModel::Dressed ? "dressed" : "reflection-minima";
}

BranchModel branch_model_from_string(const std::string &name)
{
    if (name == "dressed")
        return BranchModel::Dressed;
    if (name == "reflection-minima")
        return BranchModel::ReflectionMinima;
    throw DomainError("unknown branch model '" + name + "' (expected dressed or reflection-minima)");
}

std::vector<SpinManifold> spin_manifolds(const spin::SpinSystem &system, const spin::Vec3 &direction)
{
    system.validate();
    std::vector<SpinManifold> out;
    for (const auto &label : spin::manifold_labels(system))
        out.push_back({label.str(), [system, direction, label](double field_t) {
                           return spin::manifold_frequency(system, {field_t, direction}, label);
                       }});
    return out;
}

double difference_noise_sigma(std::span<const double> y)
{
    if (y.size() < 5)
        return 0.0;
    std::vector<double> d(y.size() - 2);
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        d[i - 1] = std::abs(y[i + 1] - 2.0 * y[i] + y[i - 1]);
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid / (0.6744897501960817 * std::sqrt(6.0));
}

std::vector<Dip> find_dips(std::span<const double> f, std::span<const double> y, double min_prominence)
{
    if (f.size() != y.size())
        throw DomainError("frequency and value arrays differ in length");
    std::vector<Dip> out;
    const std::size_t n = y.size();
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
        if (!(y[i] < y[i - 1] && y[i] <= y[i + 1]))
            continue;
        std::size_t lo = i, hi = i;
        double left_max = y[i], right_max = y[i];
        while (lo > 0 && y[lo - 1] >= y[i])
            left_max = std::max(left_max, y[--lo]);
        while (hi + 1 < n && y[hi + 1] >= y[i])
            right_max = std::max(right_max, y[++hi]);
        const double prominence = std::min(left_max, right_max) - y[i];
        if (prominence < min_prominence || prominence <= 0.0)
            continue;

        Dip d;
        d.index = i;
        d.value = y[i];
        d.prominence = prominence;

        // vertex of the parabola through the three |y|^2 samples
        const double x0 = f[i - 1], x1 = f[i], x2 = f[i + 1];
        const double p0 = y[i - 1] * y[i - 1], p1 = y[i] * y[i], p2 = y[i + 1] * y[i + 1];
        const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        const double a = (x2 * (p1 - p0) + x1 * (p0 - p2) + x0 * (p2 - p1)) / denom;
        const double b = (x2 * x2 * (p0 - p1) + x1 * x1 * (p2 - p0) + x0 * x0 * (p1 - p2)) / denom;
        d.frequency_hz = a > 0.0 ? std::clamp(-b / (2.0 * a), x0, x2) : x1;

        const double level = y[i] + 0.5 * prominence;
        double left = f[lo], right = f[hi];
        for (std::size_t j = i; j > lo; --j)
            if (y[j - 1] >= level)
            {
                left = f[j] + (level - y[j]) / (y[j - 1] - y[j]) * (f[j - 1] - f[j]);
                break;
            }
        for (std::size_t j = i; j < hi; ++j)
            if (y[j + 1] >= level)
            {
                right = f[j] + (level - y[j]) / (y[j + 1] - y[j]) * (f[j + 1] - f[j]);
                break;
            }
        d.width_hz = right - left;
        out.push_back(d);
    }
    return out;
}

std::vector<DipPoint> extract_map_dips(const FieldSweepMap &map, double min_prominence)
{
    map.validate();
    std::vector<std::vector<DipPoint>> per_row(map.rows());
    parallel_for(map.rows(), [&](std::size_t row) {
        const auto y = map.spectrum(row);
        const double threshold =
            min_prominence > 0.0 ? min_prominence : std::max(10.0 * difference_noise_sigma(y), 1e-3);
        for (const auto &d : find_dips(map.frequency_hz, y, threshold))
            per_row[row].push_back({row, map.field_t[row], d.frequency_hz, d.prominence, -1});
    });
    std::vector<DipPoint> out;
    for (auto &r : per_row)
        out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<double> dressed_branches(double omega_r_hz, std::span<const double> spin_hz, std::span<const double> g_hz)
{
    const Eigen::Index n = static_cast<Eigen::Index>(spin_hz.size()) + 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k)
    {
        m(k, k) = spin_hz[k - 1] - omega_r_hz;
        m(0, k) = m(k, 0) = g_hz[k - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k)
        out[k] = eig.eigenvalues()[k] + omega_r_hz;
    return out;
}

double predicted_dip(double near_hz, const cqed::ResonatorParams &res, std::span<const double> spin_hz,
                     std::span<const double> g_hz, double gamma_hz)
{
    const auto lines = lines_for(spin_hz, g_hz, gamma_hz);
    const double kappa = res.kappa_tot_hz();
    const double g_max = g_hz.empty() ? 0.0 : *std::max_element(g_hz.begin(), g_hz.end());
    const double step = std::max(std::min(kappa, gamma_hz) / 8.0, 1e-9 * near_hz);
    const double window = 2.0 * (kappa + gamma_hz + g_max);
    // offsets from near_hz keep the root finder well conditioned
    auto slope = [&](double offset) { return cqed::reflection_power_slope(near_hz + offset, res, lines); };

    auto refine = [&](double a, double b, double sa, double sb) -> double {
        if (sa == 0.0)
            return a;
        if (sb == 0.0)
            return b;
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(slope, a, b, sa, sb,
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
        return 0.5 * (r.first + r.second);
    };

    double s_here = slope(0.0);
    double s_left = s_here, s_right = s_here;
    for (double k = 1.0; k * step <= window; k += 1.0)
    {
        const double a_r = (k - 1.0) * step, b_r = k * step;
        const double a_l = -k * step, b_l = -(k - 1.0) * step;
        const double sb_r = slope(b_r);
        const double sa_l = slope(a_l);
        std::optional<double> right, left;
        if (s_right < 0.0 && sb_r >= 0.0)
            right = refine(a_r, b_r, s_right, sb_r);
        if (sa_l < 0.0 && s_left >= 0.0)
            left = refine(a_l, b_l, sa_l, s_left);
        if (left || right)
        {
            if (left && right)
                return near_hz + (std::abs(*left) <= std::abs(*right) ? *left : *right);
            return near_hz + (left ? *left : *right);
        }
        s_right = sb_r;
        s_left = sa_l;
    }
    return nearest_of(dressed_branches(res.omega_r_hz, spin_hz, g_hz), near_hz);
}

CrossingFit fit_avoided_crossing(const FieldSweepMap &map, const CrossingModel &model,
                                 const CrossingFitOptions &options)
{
    map.validate();
    model.resonator.validate();
    if (model.manifolds.empty())
        throw DomainError("crossing fit needs at least one spin manifold");
    if (!(model.gamma_hz > 0.0))
        throw DomainError("crossing fit needs a positive linewidth");
    const std::size_t nm = model.manifolds.size();
    if (!options.initial_g_hz.empty() && options.initial_g_hz.size() != nm)
        throw DomainError("initial_g_hz must have one entry per manifold");

    CrossingFit out;
    auto dips = extract_map_dips(map, options.min_prominence);
    {
        std::vector<bool> has(map.rows(), false);
        for (const auto &d : dips)
            has[d.row] = true;
        out.usable_rows = static_cast<std::size_t>(std::count(has.begin(), has.end(), true));
    }
    if (out.usable_rows < 5)
        throw InsufficientDataError("only " + std::to_string(out.usable_rows) +
                                    " field rows contain a resonance dip (need 5)");
    if (2 * out.usable_rows < map.rows())
        out.diagnostics.push_back("dips found in fewer than half of the field rows");

    const auto &res = model.resonator;
    const double kappa = res.kappa_tot_hz();

    std::vector<std::vector<double>> cache(map.rows());
    auto spin_at = [&](std::size_t row, double offset) {
        std::vector<double> v(nm);
        for (std::size_t k = 0; k < nm; ++k)
            v[k] = model.manifolds[k].frequency_hz(map.field_t[row] + offset);
        return v;
    };
    if (!options.fit_field_offset)
        for (std::size_t row = 0; row < map.rows(); ++row)
            cache[row] = spin_at(row, options.initial_field_offset_t);
    auto spins = [&](std::size_t row, double offset) {
        return options.fit_field_offset ? spin_at(row, offset) : cache[row];
    };

    // Starting couplings: half the separation of the two strongest dips on
    // the row closest to each crossing.
    std::vector<double> g0(nm, kappa);
    if (!options.initial_g_hz.empty())
        g0 = options.initial_g_hz;
    else
        for (std::size_t k = 0; k < nm; ++k)
        {
            std::size_t best_row = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t row = 0; row < map.rows(); ++row)
            {
                const double d = std::abs(spins(row, options.initial_field_offset_t)[k] - res.omega_r_hz);
                if (d < best)
                {
                    best = d;
                    best_row = row;
                }
            }
            std::vector<DipPoint> near;
            for (const auto &d : dips)
                if (d.row == best_row && std::abs(d.frequency_hz - res.omega_r_hz) < 4.0 * (kappa + model.gamma_hz))
                    near.push_back(d);
            std::sort(near.begin(), near.end(),
                      [](const DipPoint &a, const DipPoint &b) { return a.prominence > b.prominence; });
            if (near.size() >= 2)
                g0[k] = std::max(0.5 * std::abs(near[0].frequency_hz - near[1].frequency_hz), 0.1 * kappa);
        }

    const double field_span = map.field_t.back() - map.field_t.front();
    FitProblem problem;
    problem.model = ModelKind::DressedCrossing;
    problem.options = options.solver;
    for (std::size_t k = 0; k < nm; ++k)
        problem.parameters.push_back({"g_ens_" + model.manifolds[k].name, g0[k], 0.0,
                                      std::numeric_limits<double>::infinity(), false, "Hz",
                                      1e-6 * std::max(g0[k], kappa)});
    const double offset_bound = std::max(std::abs(field_span), 1e-3);
    problem.parameters.push_back({"field_offset", options.initial_field_offset_t,
                                  options.initial_field_offset_t - offset_bound,
                                  options.initial_field_offset_t + offset_bound, !options.fit_field_offset, "T",
                                  1e-9});

    const bool dressed = model.branch_model == BranchModel::Dressed;
    auto assign = [&](std::span<const double> x) {
        const std::vector<double> g(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nm));
        std::vector<DipPoint> previous;
        std::size_t start = 0;
        bool changed = false;
        while (start < dips.size())
        {
            std::size_t end = start;
            while (end < dips.size() && dips[end].row == dips[start].row)
                ++end;
            const auto branches = dressed_branches(res.omega_r_hz, spins(dips[start].row, x[nm]), g);
            std::vector<int> chosen(end - start, -1);
            for (std::size_t i = start; i < end; ++i)
            {
                std::vector<std::size_t> order(branches.size());
                for (std::size_t b = 0; b < order.size(); ++b)
                    order[b] = b;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return std::abs(branches[a] - dips[i].frequency_hz) < std::abs(branches[b] - dips[i].frequency_hz);
                });
                int pick = static_cast<int>(order[0]);
                const double d1 = std::abs(branches[order[0]] - dips[i].frequency_hz);
                const double d2 = order.size() > 1 ? std::abs(branches[order[1]] - dips[i].frequency_hz) : 1e300;
                if (d2 < 1.1 * d1 && !previous.empty())
                {
                    const auto prev = std::min_element(previous.begin(), previous.end(),
                                                       [&](const DipPoint &a, const DipPoint &b) {
                                                           return std::abs(a.frequency_hz - dips[i].frequency_hz) <
                                                                  std::abs(b.frequency_hz - dips[i].frequency_hz);
                                                       });
                    if (prev->branch == static_cast<int>(order[0]) || prev->branch == static_cast<int>(order[1]))
                        pick = prev->branch;
                }
                chosen[i - start] = pick;
            }
            // one dip per branch: the more prominent one keeps it
            for (std::size_t i = start; i < end; ++i)
                for (std::size_t j = start; j < end; ++j)
                    if (i != j && chosen[i - start] >= 0 && chosen[i - start] == chosen[j - start] &&
                        (dips[j].prominence > dips[i].prominence ||
                         (dips[j].prominence == dips[i].prominence && j < i)))
                        chosen[i - start] = -1;
            for (std::size_t i = start; i < end; ++i)
            {
                changed = changed || dips[i].branch != chosen[i - start];
                dips[i].branch = chosen[i - start];
            }
            previous.assign(dips.begin() + static_cast<std::ptrdiff_t>(start),
                            dips.begin() + static_cast<std::ptrdiff_t>(end));
            start = end;
        }
        return changed;
    };

    problem.residual_count = dips.size();
    problem.residuals = [&](std::span<const double> x, std::span<double> r) {
        const std::vector<double> g(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nm));
        std::size_t cached_row = std::numeric_limits<std::size_t>::max();
        std::vector<double> spin, branches;
        for (std::size_t i = 0; i < dips.size(); ++i)
        {
            const auto &d = dips[i];
            if (d.row != cached_row)
            {
                spin = spins(d.row, x[nm]);
                if (dressed)
                    branches = dressed_branches(res.omega_r_hz, spin, g);
                cached_row = d.row;
            }
            if (dressed)
                r[i] = d.branch >= 0 ? branches[static_cast<std::size_t>(d.branch)] - d.frequency_hz : 0.0;
            else
                r[i] = predicted_dip(d.frequency_hz, res, spin, g, model.gamma_hz) - d.frequency_hz;
        }
    };

    if (dressed)
    {
        std::vector<double> x0;
        for (const auto &p : problem.parameters)
            x0.push_back(p.value);
        assign(x0);
    }
    out.result = least_squares(problem);
    for (unsigned round = 0; dressed && round < options.reassign_rounds; ++round)
    {
        if (!assign(out.result.values))
            break;
        for (std::size_t k = 0; k < problem.parameters.size(); ++k)
            problem.parameters[k].value = out.result.values[k];
        out.result = least_squares(problem);
        out.diagnostics.push_back("branch assignment changed; refitted");
    }

    for (std::size_t k = 0; k < nm; ++k)
    {
        out.g_ens_hz.push_back(out.result.values[k]);
        out.g_sigma_hz.push_back(out.result.sigmas[k]);
    }
    out.field_offset_t = out.result.values[nm];
    out.dips = std::move(dips);
    return out;
}
} // namespace spinres::fit
