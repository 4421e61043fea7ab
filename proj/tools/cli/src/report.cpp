#include <spinres_cli/io.hpp>
#include <spinres_cli/report.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>

#ifndef SPINRES_VERSION
#define SPINRES_VERSION "0.0.0"
#endif

namespace spinres::cli
{
namespace
{
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
} // namespace

void Report::add(const std::string &name, double value, std::optional<double> sigma, const std::string &unit)
{
    parameters_[name] = {value, sigma, unit};
}

void Report::add_fit(const fit::FitResult &result)
{
    for (std::size_t i = 0; i < result.names.size(); ++i)
    {
        std::optional<double> s;
        if (!result.fixed[i])
            s = result.sigmas[i];
        add(result.names[i], result.values[i], s, result.units[i]);
    }
    set_fit_status(result);
}

void Report::set_fit_status(const fit::FitResult &result)
{
    rss_ = result.rss;
    convergence_ = fit::to_string(result.convergence);
    for (const auto &d : result.diagnostics)
        warn(d);
    note("iterations", std::to_string(result.iterations));
    note("residual_count", std::to_string(result.residual_count));
    note("free_parameters", std::to_string(result.free_count));
}

json Report::to_json(const json &provenance) const
{
    json params = json::object();
    for (const auto &[name, p] : parameters_)
    {
        params[name] = {{"value", number_or_null(p.value)},
                        {"sigma", p.sigma ? number_or_null(*p.sigma) : json(nullptr)},
                        {"unit", p.unit}};
    }
    json prov = provenance;
    prov["notes"] = notes_;
    prov["warnings"] = warnings_;
    return {{"model", model_},
            {"parameters", params},
            {"residual_rss", rss_ ? number_or_null(*rss_) : json(nullptr)},
            {"convergence", convergence_},
            {"provenance", prov}};
}

double propagated_sigma(const fit::FitResult &result, const std::vector<std::pair<std::string, double>> &gradient)
{
    double var = 0.0;
    for (const auto &[a, ga] : gradient)
        for (const auto &[b, gb] : gradient)
            var += ga * gb * result.cov(a, b);
    return std::sqrt(std::max(var, 0.0));
}

Run::Run(std::string command, Config config, std::filesystem::path out_dir, std::uint64_t seed,
         std::string config_name, std::string config_text)
    : command_(std::move(command)), config_(std::move(config)), out_dir_(std::move(out_dir)), seed_(seed),
      config_name_(std::move(config_name)), config_hash_(fnv1a64(config_text)), config_bytes_(config_text.size())
{
    config_.record("seed", seed_);
}

std::filesystem::path Run::input(const std::string &key)
{
    const std::string as_written = config_.string(key);
    const auto path = config_.input_path(key);
    const std::string bytes = read_file(path);
    InputRecord rec;
    rec.key = key;
    rec.path = as_written;
    rec.hash = fnv1a64(bytes);
    rec.bytes = bytes.size();
    inputs_.push_back(std::move(rec));
    return path;
}

void Run::describe_input(const std::string &key, const json &details)
{
    for (auto &rec : inputs_)
        if (rec.key == key)
            rec.details = details;
}

void Run::write(const std::string &name, const std::string &content)
{
    atomic_write(out_dir_ / name, content);
    outputs_.push_back(name);
}

json Run::provenance() const
{
    json inputs = json::array();
    for (const auto &r : inputs_)
    {
        json entry = {{"key", r.key}, {"path", r.path}, {"fnv1a64", hex64(r.hash)}, {"bytes", r.bytes}};
        for (const auto &[k, v] : r.details.items())
            entry[k] = v;
        inputs.push_back(entry);
    }
    return {{"tool", "spinres"},
            {"version", version()},
            {"command", command_},
            {"config", {{"name", config_name_}, {"fnv1a64", hex64(config_hash_)}, {"bytes", config_bytes_}}},
            {"inputs", inputs},
            {"seed", seed_},
            {"generated_at", timestamp_now()}};
}

json Run::finish(const Report &report)
{
    const json doc = report.to_json(provenance());
    write("report.json", dump(doc));

    json manifest = provenance();
    manifest["parameters"] = config_.resolved();
    manifest["cli_overrides"] = overrides_;
    std::vector<std::string> outputs = outputs_;
    outputs.push_back("manifest.json");
    manifest["outputs"] = outputs;
    write("manifest.json", dump(manifest));
    return doc;
}

std::string timestamp_now()
{
    std::time_t t = 0;
    if (const char *epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    else
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string dump(const json &doc) { return doc.dump(2) + "\n"; }

std::string version() { return SPINRES_VERSION; }
} // namespace spinres::cli
