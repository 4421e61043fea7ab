#pragma once

// Fit reports and run manifests.
//
// report.json carries exactly {model, parameters, residual_rss, convergence,
// provenance}; manifest.json lists inputs (with content hashes), the fully
// resolved configuration, the seed and every file written.

#include <spinres/least_squares.hpp>
#include <spinres_cli/config.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spinres::cli
{
struct ReportParameter
{
    double value = 0.0;
    std::optional<double> sigma;
    std::string unit;
};

class Report
{
public:
    explicit Report(std::string model) : model_(std::move(model)) {}

    void add(const std::string &name, double value, std::optional<double> sigma = std::nullopt,
             const std::string &unit = "");
    /// Fitted values with their standard errors; fixed parameters get a null sigma.
    void add_fit(const fit::FitResult &result);
    void set_fit_status(const fit::FitResult &result);
    void set_rss(double rss) { rss_ = rss; }
    void set_convergence(std::string c) { convergence_ = std::move(c); }
    void note(const std::string &key, const std::string &value) { notes_[key] = value; }
    void warn(const std::string &message) { warnings_.push_back(message); }

    const std::string &model() const { return model_; }
    const std::map<std::string, ReportParameter> &parameters() const { return parameters_; }

    json to_json(const json &provenance) const;

private:
    std::string model_;
    std::map<std::string, ReportParameter> parameters_;
    std::optional<double> rss_;
    std::string convergence_ = "not-applicable";
    std::map<std::string, std::string> notes_;
    std::vector<std::string> warnings_;
};

/// sqrt(g^T C g) for a gradient given by parameter name.
double propagated_sigma(const fit::FitResult &result, const std::vector<std::pair<std::string, double>> &gradient);

struct InputRecord
{
    std::string key;  // config key naming the file
    std::string path; // as written in the config
    std::uint64_t hash = 0;
    std::uintmax_t bytes = 0;
    json details = json::object();
};

/// One subcommand invocation: configuration, output directory and artifacts.
class Run
{
public:
    Run(std::string command, Config config, std::filesystem::path out_dir, std::uint64_t seed,
        std::string config_name, std::string config_text);

    const std::string &command() const { return command_; }
    Config &config() { return config_; }
    std::uint64_t seed() const { return seed_; }
    const std::filesystem::path &out_dir() const { return out_dir_; }

    /// Resolves, hashes and records an input file named by config key `key`.
    std::filesystem::path input(const std::string &key);
    void describe_input(const std::string &key, const json &details);

    /// Writes `name` inside the output directory.
    void write(const std::string &name, const std::string &content);

    /// Writes report.json and manifest.json; returns the report document.
    json finish(const Report &report);

    void set_overrides(json overrides) { overrides_ = std::move(overrides); }

private:
    json provenance() const;

    std::string command_;
    Config config_;
    std::filesystem::path out_dir_;
    std::uint64_t seed_;
    std::string config_name_;
    std::uint64_t config_hash_;
    std::uintmax_t config_bytes_;
    std::vector<InputRecord> inputs_;
    std::vector<std::string> outputs_;
    json overrides_ = json::object();
};

/// ISO-8601 UTC; honours SOURCE_DATE_EPOCH.
std::string timestamp_now();

/// Serialized JSON as written to disk (two-space indent, sorted keys, trailing newline).
std::string dump(const json &doc);

/// Library version string.
std::string version();
} // namespace spinres::cli
