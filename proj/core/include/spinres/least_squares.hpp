#pragma once

// Bounded Levenberg-Marquardt with finite-difference Jacobians and
// covariance-based parameter uncertainties.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace spinres::fit
{
enum class ModelKind
{
    BareReflection,
    CoupledReflection,
    DressedCrossing,
    T1Recovery,
    T2Stretched,
    LorentzianDensity,
    Custom
};

std::string to_string(ModelKind kind);

struct Parameter
{
    std::string name;
    double value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool fixed = false;
    std::string unit;
    double step = 0.0; // absolute finite-difference step; 0 uses the relative rule
};

/// Fills `residuals` (model - data, unweighted) for the full parameter vector.
using ResidualFunction = std::function<void(std::span<const double> parameters, std::span<double> residuals)>;

struct LeastSquaresOptions
{
    std::size_t max_iterations = 500;
    double step_tolerance = 1e-10;   // max_j |dx_j| / |x_j|
    double cost_tolerance = 1e-12;   // relative decrease of the residual sum of squares
    double relative_fd_step = 1e-6;
    double initial_damping = 1e-3;
};

struct FitProblem
{
    ModelKind model = ModelKind::Custom;
    std::vector<Parameter> parameters;
    std::size_t residual_count = 0;
    ResidualFunction residuals;
    std::vector<double> sigma; // per-residual; empty means uniform weighting
    LeastSquaresOptions options;

    void validate() const;
};

enum class Convergence
{
    StepTolerance,
    CostTolerance,
    ZeroResidual,
    MaxIterations,
    Degenerate
};

std::string to_string(Convergence c);

struct FitResult
{
    ModelKind model = ModelKind::Custom;
    std::vector<std::string> names;
    std::vector<std::string> units;
    std::vector<double> values;
    std::vector<double> sigmas;
    std::vector<bool> fixed;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd correlation;
    double rss = 0.0;              // weighted residual sum of squares
    std::size_t residual_count = 0;
    std::size_t free_count = 0;
    std::size_t iterations = 0;
    Convergence convergence = Convergence::MaxIterations;
    std::vector<double> cost_history; // initial cost and every accepted step
    std::vector<std::string> diagnostics;

    bool converged() const;
    std::size_t index(const std::string &name) const;
    double value(const std::string &name) const { return values[index(name)]; }
    double sigma(const std::string &name) const { return sigmas[index(name)]; }
    double cov(const std::string &a, const std::string &b) const { return covariance(index(a), index(b)); }
};

/// Throws NumericError if the model returns a non-finite residual.
FitResult least_squares(const FitProblem &problem);
} // namespace spinres::fit
