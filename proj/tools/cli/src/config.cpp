#include <spinres/error.hpp>
#include <spinres_cli/config.hpp>
#include <spinres_cli/io.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace spinres::cli
{
namespace
{
std::vector<std::string> split_key(const std::string &key)
{
    std::vector<std::string> parts;
    std::istringstream is(key);
    std::string p;
    while (std::getline(is, p, '.'))
        parts.push_back(p);
    return parts;
}

json::json_pointer pointer(const std::string &key)
{
    std::string p;
    for (const auto &part : split_key(key))
        p += '/' + part;
    return json::json_pointer(p);
}

// Comment-style keys are ignored by the unknown-key check.
bool ignorable(const std::string &name) { return name.empty() || name.front() == '_' || name == "comment"; }

void collect_leaves(const json &node, const std::string &prefix, std::vector<std::string> &out)
{
    if (node.is_object() && !node.empty())
    {
        for (const auto &[k, v] : node.items())
            if (!ignorable(k))
                collect_leaves(v, prefix.empty() ? k : prefix + '.' + k, out);
        return;
    }
    if (node.is_array() && std::any_of(node.begin(), node.end(), [](const json &e) { return e.is_object(); }))
    {
        for (std::size_t i = 0; i < node.size(); ++i)
            collect_leaves(node[i], prefix + '.' + std::to_string(i), out);
        return;
    }
    out.push_back(prefix);
}
} // namespace

Config::Config(json root, std::filesystem::path base_dir) : root_(std::move(root)), base_(std::move(base_dir))
{
    if (!root_.is_object())
        throw ParseError("configuration must be a JSON object");
}

Config Config::load(const std::filesystem::path &path)
{
    if (!std::filesystem::exists(path))
        throw UsageError("config file '" + path.string() + "' does not exist");
    const std::string text = read_file(path);
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ParseError(path.string() + ": " + e.what());
    }
    return Config(std::move(root), path.parent_path());
}

const json *Config::find(const std::string &key) const
{
    const json *node = &root_;
    for (const auto &part : split_key(key))
    {
        if (node->is_array())
        {
            std::size_t idx = 0;
            const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
            if (ec != std::errc() || ptr != part.data() + part.size() || idx >= node->size())
                return nullptr;
            node = &(*node)[idx];
            continue;
        }
        if (!node->is_object())
            return nullptr;
        const auto it = node->find(part);
        if (it == node->end())
            return nullptr;
        node = &*it;
    }
    return node->is_null() ? nullptr : node;
}

const json &Config::require(const std::string &key) const
{
    const json *node = find(key);
    if (!node)
        throw UsageError("config key '" + key + "' is required");
    return *node;
}

void Config::mark(const std::string &key) { consumed_.insert(key); }

bool Config::has(const std::string &key) const { return find(key) != nullptr; }

void Config::record(const std::string &key, const json &value) { resolved_[pointer(key)] = value; }

double Config::number(const std::string &key)
{
    const json &v = require(key);
    if (!v.is_number())
        throw UsageError("config key '" + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        throw UsageError("config key '" + key + "' must be finite");
    mark(key);
    record(key, d);
    return d;
}

double Config::number(const std::string &key, double fallback)
{
    if (has(key))
        return number(key);
    mark(key);
    // JSON has no infinity; unbounded defaults are recorded as null.
    record(key, std::isfinite(fallback) ? json(fallback) : json(nullptr));
    return fallback;
}

std::optional<double> Config::optional_number(const std::string &key)
{
    if (has(key))
        return number(key);
    mark(key);
    return std::nullopt;
}

bool Config::boolean(const std::string &key, bool fallback)
{
    bool b = fallback;
    if (const json *v = find(key))
    {
        if (!v->is_boolean())
            throw UsageError("config key '" + key + "' must be true or false");
        b = v->get<bool>();
    }
    mark(key);
    record(key, b);
    return b;
}

std::string Config::string(const std::string &key)
{
    const json &v = require(key);
    if (!v.is_string())
        throw UsageError("config key '" + key + "' must be a string");
    mark(key);
    record(key, v);
    return v.get<std::string>();
}

std::string Config::string(const std::string &key, const std::string &fallback)
{
    if (has(key))
        return string(key);
    mark(key);
    record(key, fallback);
    return fallback;
}

std::vector<double> Config::numbers(const std::string &key)
{
    const json &v = require(key);
    if (!v.is_array())
        throw UsageError("config key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto &e : v)
    {
        if (!e.is_number())
            throw UsageError("config key '" + key + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    mark(key);
    record(key, out);
    return out;
}

std::vector<double> Config::numbers(const std::string &key, const std::vector<double> &fallback)
{
    if (has(key))
        return numbers(key);
    mark(key);
    record(key, fallback);
    return fallback;
}

std::uint64_t Config::unsigned_integer(const std::string &key, std::uint64_t fallback)
{
    std::uint64_t n = fallback;
    if (const json *v = find(key))
    {
        if (!v->is_number_unsigned())
            throw UsageError("config key '" + key + "' must be a non-negative integer");
        n = v->get<std::uint64_t>();
    }
    mark(key);
    record(key, n);
    return n;
}

std::filesystem::path Config::input_path(const std::string &key)
{
    const std::string rel = string(key);
    std::filesystem::path p(rel);
    if (p.is_relative())
        p = base_ / p;
    if (!std::filesystem::exists(p))
        throw UsageError("config key '" + key + "' refers to missing file '" + p.string() + "'");
    return p;
}

const json &Config::subtree(const std::string &key)
{
    const json &v = require(key);
    std::vector<std::string> leaves;
    collect_leaves(v, key, leaves);
    for (const auto &l : leaves)
        mark(l);
    record(key, v);
    return v;
}

std::vector<std::string> Config::keys(const std::string &key) const
{
    std::vector<std::string> out;
    if (const json *v = find(key); v && v->is_object())
        for (const auto &[k, _] : v->items())
            if (!ignorable(k))
                out.push_back(k);
    return out;
}

std::size_t Config::array_size(const std::string &key) const
{
    const json *v = find(key);
    if (!v)
        return 0;
    if (!v->is_array())
        throw UsageError("config key '" + key + "' must be an array");
    return v->size();
}

void Config::reject_unknown() const
{
    std::vector<std::string> leaves;
    collect_leaves(root_, "", leaves);
    std::string unknown;
    for (const auto &l : leaves)
    {
        if (l.empty() || consumed_.count(l))
            continue;
        // A consumed ancestor (subtree) covers its children.
        bool covered = false;
        for (std::string prefix = l; !covered;)
        {
            const auto dot = prefix.rfind('.');
            if (dot == std::string::npos)
                break;
            prefix.resize(dot);
            covered = consumed_.count(prefix) > 0;
        }
        if (!covered)
            unknown += (unknown.empty() ? "" : ", ") + l;
    }
    if (!unknown.empty())
        throw UsageError("unknown config key(s): " + unknown);
}
} // namespace spinres::cli
