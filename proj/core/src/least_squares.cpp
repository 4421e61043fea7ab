#include <spinres/error.hpp>
#include <spinres/least_squares.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spinres::fit
{
namespace
{
constexpr double kMaxDamping = 1e16;

std::string describe(std::span<const double> x, const std::vector<Parameter> &params)
{
    std::ostringstream os;
    os.precision(12);
    os << '{';
    for (std::size_t i = 0; i < x.size(); ++i)
        os << (i ? ", " : "") << params[i].name << '=' << x[i];
    os << '}';
    return os.str();
}

class Evaluator
{
public:
    explicit Evaluator(const FitProblem &p) : problem_(p), buffer_(p.residual_count) {}

    Eigen::VectorXd operator()(const Eigen::VectorXd &x)
    {
        problem_.residuals(std::span<const double>(x.data(), x.size()), buffer_);
        Eigen::VectorXd r(buffer_.size());
        for (std::size_t i = 0; i < buffer_.size(); ++i)
        {
            const double w = problem_.sigma.empty() ? 1.0 : 1.0 / problem_.sigma[i];
            r[i] = buffer_[i] * w;
            if (!std::isfinite(r[i]))
                throw NumericError("model produced a non-finite residual at parameters " +
                                   describe(std::span<const double>(x.data(), x.size()), problem_.parameters));
        }
        return r;
    }

private:
    const FitProblem &problem_;
    std::vector<double> buffer_;
};

Eigen::MatrixXd jacobian(Evaluator &eval, const Eigen::VectorXd &x, const std::vector<std::size_t> &free,
                         const FitProblem &problem)
{
    Eigen::MatrixXd j(problem.residual_count, free.size());
    for (std::size_t c = 0; c < free.size(); ++c)
    {
        const std::size_t k = free[c];
        const Parameter &p = problem.parameters[k];
        const double h = p.step > 0.0 ? p.step
                                      : problem.options.relative_fd_step * std::max(std::abs(x[k]), 1e-3);
        Eigen::VectorXd xp = x, xm = x;
        double hp = h, hm = h;
        if (x[k] + h > p.upper)
            hp = 0.0;
        if (x[k] - h < p.lower)
            hm = 0.0;
        if (hp == 0.0 && hm == 0.0)
            hp = hm = 0.5 * h; // bound interval narrower than the step
        xp[k] += hp;
        xm[k] -= hm;
        j.col(c) = (eval(xp) - eval(xm)) / (hp + hm);
    }
    return j;
}

Eigen::VectorXd project(Eigen::VectorXd x, const std::vector<Parameter> &params)
{
    for (Eigen::Index k = 0; k < x.size(); ++k)
        x[k] = std::clamp(x[k], params[k].lower, params[k].upper);
    return x;
}
} // namespace

std::string to_string(ModelKind kind)
{
    switch (kind)
    {
    case ModelKind::BareReflection:
        return "bare-reflection";
    case ModelKind::CoupledReflection:
        return "coupled-reflection";
    case ModelKind::DressedCrossing:
        return "dressed-crossing";
    case ModelKind::T1Recovery:
        return "t1-recovery";
    case ModelKind::T2Stretched:
        return "t2-stretched";
    case ModelKind::LorentzianDensity:
        return "lorentzian-density";
    case ModelKind::Custom:
        return "custom";
    }
    return "unknown";
}

std::string to_string(Convergence c)
{
    switch (c)
    {
    case Convergence::StepTolerance:
        return "step-tolerance";
    case Convergence::CostTolerance:
        return "cost-tolerance";
    case Convergence::ZeroResidual:
        return "zero-residual";
    case Convergence::MaxIterations:
        return "max-iterations";
    case Convergence::Degenerate:
        return "degenerate";
    }
    return "unknown";
}

bool FitResult::converged() const
{
    return convergence == Convergence::StepTolerance || convergence == Convergence::CostTolerance ||
           convergence == Convergence::ZeroResidual;
}

std::size_t FitResult::index(const std::string &name) const
{
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw DomainError("no fit parameter named '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

void FitProblem::validate() const
{
    if (residual_count == 0 || !residuals)
        throw DomainError("fit problem has no data");
    if (!sigma.empty() && sigma.size() != residual_count)
        throw DomainError("sigma must have one entry per residual");
    for (double s : sigma)
        if (!(s > 0.0))
            throw DomainError("sigma entries must be positive");
    std::size_t free = 0;
    for (const auto &p : parameters)
    {
        if (!(p.lower <= p.upper))
            throw DomainError("parameter '" + p.name + "' has inverted bounds");
        if (!(p.value >= p.lower && p.value <= p.upper))
            throw DomainError("parameter '" + p.name + "' starts outside its bounds");
        if (!p.fixed)
            ++free;
    }
    if (free == 0)
        throw DomainError("fit problem has no free parameter");
}

FitResult least_squares(const FitProblem &problem)
{
    problem.validate();
    const auto &params = problem.parameters;
    const auto &opt = problem.options;
    const std::size_t n = params.size();

    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < n; ++k)
        if (!params[k].fixed)
            free.push_back(k);

    Evaluator eval(problem);
    Eigen::VectorXd x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = params[k].value;

    FitResult out;
    out.model = problem.model;
    Eigen::VectorXd r = eval(x);
    double cost = r.squaredNorm();
    out.cost_history.push_back(cost);

    double damping = opt.initial_damping;
    bool done = false;
    std::size_t iter = 0;
    while (!done && iter < opt.max_iterations)
    {
        ++iter;
        if (cost == 0.0)
        {
            out.convergence = Convergence::ZeroResidual;
            break;
        }
        const Eigen::MatrixXd j = jacobian(eval, x, free, problem);
        const Eigen::VectorXd grad = j.transpose() * r;
        const Eigen::MatrixXd normal = j.transpose() * j;

        // Active set: parameters pinned at a bound with the descent direction
        // pointing outward are frozen for this iteration.
        std::vector<Eigen::Index> active;
        for (std::size_t c = 0; c < free.size(); ++c)
        {
            const Parameter &p = params[free[c]];
            const double v = x[free[c]];
            const bool pinned_low = v <= p.lower && grad[c] > 0.0;
            const bool pinned_high = v >= p.upper && grad[c] < 0.0;
            if (!pinned_low && !pinned_high)
                active.push_back(static_cast<Eigen::Index>(c));
        }
        if (active.empty())
        {
            out.convergence = Convergence::StepTolerance;
            break;
        }
        const Eigen::Index na = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd a(na, na);
        Eigen::VectorXd g(na);
        for (Eigen::Index p = 0; p < na; ++p)
        {
            g[p] = grad[active[p]];
            for (Eigen::Index q = 0; q < na; ++q)
                a(p, q) = normal(active[p], active[q]);
        }
        const double diag_floor = 1e-30 * std::max(1e-300, a.diagonal().maxCoeff());

        while (true)
        {
            Eigen::MatrixXd damped = a;
            for (Eigen::Index p = 0; p < na; ++p)
                damped(p, p) += damping * std::max(a(p, p), diag_floor);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
            Eigen::VectorXd delta = ldlt.solve(-g);
            if (ldlt.info() != Eigen::Success || !delta.allFinite())
                delta = damped.completeOrthogonalDecomposition().solve(-g);

            Eigen::VectorXd trial = x;
            for (Eigen::Index p = 0; p < na; ++p)
                trial[free[active[p]]] += delta[p];
            trial = project(trial, params);

            const Eigen::VectorXd r_trial = eval(trial);
            const double cost_trial = r_trial.squaredNorm();
            if (cost_trial < cost)
            {
                double rel_step = 0.0;
                for (std::size_t k : free)
                {
                    const double scale = std::max(std::abs(x[k]), std::abs(trial[k]));
                    const double d = std::abs(trial[k] - x[k]);
                    rel_step = std::max(rel_step, scale > 0.0 ? d / scale : d);
                }
                const double rel_cost = (cost - cost_trial) / cost;
                x = trial;
                r = r_trial;
                cost = cost_trial;
                out.cost_history.push_back(cost);
                damping = std::max(damping / 10.0, 1e-15);
                if (rel_step < opt.step_tolerance)
                {
                    out.convergence = Convergence::StepTolerance;
                    done = true;
                }
                else if (rel_cost < opt.cost_tolerance)
                {
                    out.convergence = Convergence::CostTolerance;
                    done = true;
                }
                break;
            }
            damping *= 10.0;
            if (damping > kMaxDamping)
            {
                // no descent direction left at machine precision
                out.convergence = Convergence::CostTolerance;
                done = true;
                break;
            }
        }
    }
    out.iterations = iter;
    if (!done && iter >= opt.max_iterations && out.convergence != Convergence::ZeroResidual)
        out.convergence = Convergence::MaxIterations;

    // Covariance at the solution over the free parameters.
    const Eigen::MatrixXd j = jacobian(eval, x, free, problem);
    const Eigen::MatrixXd normal = j.transpose() * j;
    const std::size_t m = problem.residual_count;
    const double variance = m > free.size() ? cost / static_cast<double>(m - free.size()) : 0.0;

    // Rank test on the column-equilibrated normal matrix so that parameter
    // units do not masquerade as degeneracy.
    const Eigen::Index nf = normal.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(nf);
    bool rank_deficient = nf == 0;
    for (Eigen::Index k = 0; k < nf; ++k)
    {
        if (normal(k, k) > 0.0)
            d[k] = 1.0 / std::sqrt(normal(k, k));
        else
            rank_deficient = true;
    }
    const Eigen::MatrixXd scaled = d.asDiagonal() * normal * d.asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cutoff = sv.size() ? sv[0] * 1e-12 : 0.0;
    Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index k = 0; k < sv.size(); ++k)
    {
        if (sv[k] > cutoff)
            inv_sv[k] = 1.0 / sv[k];
        else
            rank_deficient = true;
    }
    const Eigen::MatrixXd inv_normal =
        d.asDiagonal() * (svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose()) * d.asDiagonal();
    if (rank_deficient)
    {
        out.convergence = Convergence::Degenerate;
        out.diagnostics.emplace_back("singular normal equations: pseudo-inverse covariance");
    }

    out.covariance = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t p = 0; p < free.size(); ++p)
        for (std::size_t q = 0; q < free.size(); ++q)
            out.covariance(free[p], free[q]) = variance * inv_normal(p, q);
    out.correlation = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
        {
            const double d = std::sqrt(out.covariance(p, p) * out.covariance(q, q));
            if (p != q && d > 0.0)
                out.correlation(p, q) = std::clamp(out.covariance(p, q) / d, -1.0, 1.0);
        }
    out.correlation = 0.5 * (out.correlation + out.correlation.transpose()).eval();

    for (std::size_t k = 0; k < n; ++k)
    {
        out.names.push_back(params[k].name);
        out.units.push_back(params[k].unit);
        out.values.push_back(x[k]);
        out.sigmas.push_back(std::sqrt(std::max(0.0, out.covariance(k, k))));
        out.fixed.push_back(params[k].fixed);
    }
    out.rss = cost;
    out.residual_count = m;
    out.free_count = free.size();
    return out;
}
} // namespace spinres::fit
