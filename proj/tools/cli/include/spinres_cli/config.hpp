#pragma once

// JSON analysis configuration. Every value read through Config, including
// defaults, is recorded so the run manifest lists exactly what was used.

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinres::cli
{
using json = nlohmann::json;

/// Bad invocation or unresolved configuration (exit status 1).
class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class Config
{
public:
    Config() : root_(json::object()) {}
    Config(json root, std::filesystem::path base_dir);

    static Config load(const std::filesystem::path &path);

    /// Keys are dotted paths ("resonator.omega_r_hz").
    bool has(const std::string &key) const;

    double number(const std::string &key);
    double number(const std::string &key, double fallback);
    std::optional<double> optional_number(const std::string &key);
    bool boolean(const std::string &key, bool fallback);
    std::string string(const std::string &key);
    std::string string(const std::string &key, const std::string &fallback);
    std::vector<double> numbers(const std::string &key);
    std::vector<double> numbers(const std::string &key, const std::vector<double> &fallback);
    std::uint64_t unsigned_integer(const std::string &key, std::uint64_t fallback);

    /// Path relative to the config file's directory; must exist.
    std::filesystem::path input_path(const std::string &key);

    /// Raw subtree, marked as consumed.
    const json &subtree(const std::string &key);
    std::vector<std::string> keys(const std::string &key) const;
    /// Length of an array value; 0 when absent.
    std::size_t array_size(const std::string &key) const;

    /// Records a value that influenced the result but did not come from the file.
    void record(const std::string &key, const json &value);

    /// Throws UsageError naming config keys that were never read.
    void reject_unknown() const;

    const json &resolved() const { return resolved_; }
    const std::filesystem::path &base_dir() const { return base_; }

private:
    const json *find(const std::string &key) const;
    const json &require(const std::string &key) const;
    void mark(const std::string &key);

    json root_;
    json resolved_ = json::object();
    std::filesystem::path base_;
    std::set<std::string> consumed_;
};
} // namespace spinres::cli
