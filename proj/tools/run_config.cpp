#include "run_config.hpp"

#include "vwave/errors.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace vwave::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(parse_number(item));
    return out;
}

bool parse_bool(const std::string& text)
{
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes")
        return true;
    if (t == "false" || t == "0" || t == "no")
        return false;
    throw ConfigError("not a boolean: '" + t + "'");
}

long long parse_int(const std::string& text)
{
    const double v = parse_number(text);
    if (v != std::floor(v) || std::abs(v) > 9.0e15)
        throw ConfigError("not an integer: '" + trim(text) + "'");
    return static_cast<long long>(v);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table{
        {"s", [](RunConfig& c, const std::string& v) { c.s = parse_number(v); }},
        {"n", [](RunConfig& c, const std::string& v) { c.n = static_cast<int>(parse_int(v)); }},
        {"omega_lo", [](RunConfig& c, const std::string& v) { c.omega_lo = parse_list(v); }},
        {"omega_hi", [](RunConfig& c, const std::string& v) { c.omega_hi = parse_list(v); }},
        {"beta_deg", [](RunConfig& c, const std::string& v) { c.beta_deg = parse_number(v); }},
        {"angles_deg", [](RunConfig& c, const std::string& v) { c.angles_deg = parse_list(v); }},
        {"h", [](RunConfig& c, const std::string& v) { c.h = parse_number(v); }},
        {"h_levels", [](RunConfig& c, const std::string& v) { c.h_levels = parse_list(v); }},
        {"truncation_L", [](RunConfig& c, const std::string& v) { c.truncation_L = parse_number(v); }},
        {"L_min", [](RunConfig& c, const std::string& v) { c.L_min = parse_number(v); }},
        {"L_max", [](RunConfig& c, const std::string& v) { c.L_max = parse_number(v); }},
        {"adaptive", [](RunConfig& c, const std::string& v) { c.adaptive = parse_bool(v); }},
        {"padding", [](RunConfig& c, const std::string& v) { c.padding = parse_number(v); }},
        {"min_period_factor", [](RunConfig& c, const std::string& v) { c.min_period_factor = parse_number(v); }},
        {"k", [](RunConfig& c, const std::string& v) { c.k = static_cast<int>(parse_int(v)); }},
        {"R_list", [](RunConfig& c, const std::string& v) { c.R_list = parse_list(v); }},
        {"pushforward_deg", [](RunConfig& c, const std::string& v) { c.pushforward_deg = parse_list(v); }},
        {"pushforward_L", [](RunConfig& c, const std::string& v) { c.pushforward_L = parse_number(v); }},
        {"trace_h", [](RunConfig& c, const std::string& v) { c.trace_h = parse_number(v); }},
        {"gamma_boundary", [](RunConfig& c, const std::string& v) { c.gamma_boundary = parse_number(v); }},
        {"bump_width", [](RunConfig& c, const std::string& v) { c.bump_width = parse_number(v); }},
        {"bump_amplitude", [](RunConfig& c, const std::string& v) { c.bump_amplitude = parse_number(v); }},
        {"t_ratio", [](RunConfig& c, const std::string& v) { c.t_ratio = parse_number(v); }},
        {"t_first_factor", [](RunConfig& c, const std::string& v) { c.t_first_factor = parse_number(v); }},
        {"tail_fraction", [](RunConfig& c, const std::string& v) { c.tail_fraction = parse_number(v); }},
        {"tol", [](RunConfig& c, const std::string& v) { c.tol = parse_number(v); }},
        {"max_iter", [](RunConfig& c, const std::string& v) { c.max_iter = static_cast<int>(parse_int(v)); }},
        {"dense_limit", [](RunConfig& c, const std::string& v) { c.dense_limit = static_cast<int>(parse_int(v)); }},
        {"seed", [](RunConfig& c, const std::string& v) {
             const auto x = parse_int(v);
             if (x < 0)
                 throw ConfigError("seed must be non-negative");
             c.seed = static_cast<std::uint64_t>(x);
         }},
        {"arm_control", [](RunConfig& c, const std::string& v) { c.arm_control = parse_bool(v); }},
        {"truncation_audit", [](RunConfig& c, const std::string& v) { c.truncation_audit = parse_bool(v); }},
    };
    return table;
}

bool in_open_angle(double deg) { return deg > 0.0 && deg <= 90.0; }

} // namespace

double parse_number(const std::string& text)
{
    const auto t = trim(text);
    const auto slash = t.find('/');
    try {
        std::size_t used = 0;
        if (slash != std::string::npos) {
            const auto num = trim(t.substr(0, slash)), den = trim(t.substr(slash + 1));
            std::size_t u1 = 0, u2 = 0;
            const double a = std::stod(num, &u1), b = std::stod(den, &u2);
            if (u1 != num.size() || u2 != den.size() || b == 0.0)
                throw ConfigError("bad fraction");
            return a / b;
        }
        if (t == "nan")
            return std::numeric_limits<double>::quiet_NaN();
        const double v = std::stod(t, &used);
        if (used != t.size())
            throw ConfigError("trailing characters");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("not a number: '" + t + "'");
    } catch (const ConfigError&) {
        throw ConfigError("not a number: '" + t + "'");
    }
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto& [k, f] : setters())
        keys.push_back(k);
    return keys;
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    const auto it = setters().find(trim(key));
    if (it == setters().end())
        throw ConfigError("unknown config key '" + trim(key) + "'");
    try {
        it->second(*this, value);
    } catch (const ConfigError& e) {
        throw ConfigError(trim(key) + ": " + e.what());
    }
}

void RunConfig::validate() const
{
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (!(s > 0.0 && s < 1.0))
        fail("s must lie in (0, 1)");
    if (n < 2 || n > 3)
        fail("n must be 2 or 3");
    if (omega_lo.size() != omega_hi.size() || static_cast<int>(omega_lo.size()) != n - 1)
        fail("omega_lo and omega_hi need n - 1 entries each");
    for (std::size_t i = 0; i < omega_lo.size(); ++i)
        if (!(omega_hi[i] > omega_lo[i]))
            fail("omega_hi must exceed omega_lo on every axis");
    if (!in_open_angle(beta_deg))
        fail("beta_deg must lie in (0, 90]");
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
        if (!in_open_angle(angles_deg[i]))
            fail("angles_deg entries must lie in (0, 90]");
        if (i > 0 && !(angles_deg[i] > angles_deg[i - 1]))
            fail("angles_deg must be strictly increasing");
    }
    for (double p : pushforward_deg)
        if (!in_open_angle(p) || p > beta_deg)
            fail("pushforward_deg entries must lie in (0, beta_deg]");
    if (!(h > 0.0) || !(trace_h > 0.0))
        fail("h and trace_h must be positive");
    if (h_levels.empty())
        fail("h_levels needs at least one entry");
    for (double v : h_levels)
        if (!(v > 0.0))
            fail("h_levels entries must be positive");
    if (!(truncation_L > 0.0) || !(pushforward_L > 0.0) || !(L_min > 0.0) || L_max < L_min)
        fail("truncation lengths must be positive with L_min <= L_max");
    if (!(padding >= 1.0) || !(min_period_factor >= 0.0))
        fail("padding must be >= 1 and min_period_factor >= 0");
    if (k < 1)
        fail("k must be at least 1");
    for (double R : R_list)
        if (!(R > 0.0))
            fail("R_list entries must be positive");
    if (!(bump_width >= 0.0) || !(bump_amplitude >= 0.0))
        fail("bump_width and bump_amplitude must be non-negative");
    if (!(t_ratio == 0.0 || t_ratio > 1.0) || !(t_first_factor > 0.0) || !(tail_fraction > 0.0 && tail_fraction < 1.0))
        fail("invalid t-grid policy");
    if (!(tol > 0.0) || max_iter < 1 || dense_limit < 0)
        fail("invalid solver settings");
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json j;
    j["s"] = s;
    j["n"] = n;
    j["omega_lo"] = omega_lo;
    j["omega_hi"] = omega_hi;
    j["beta_deg"] = beta_deg;
    j["angles_deg"] = angles_deg;
    j["h"] = h;
    j["h_levels"] = h_levels;
    j["truncation_L"] = truncation_L;
    j["L_min"] = L_min;
    j["L_max"] = L_max;
    j["adaptive"] = adaptive;
    j["padding"] = padding;
    j["min_period_factor"] = min_period_factor;
    j["k"] = k;
    j["R_list"] = R_list;
    j["pushforward_deg"] = pushforward_deg;
    j["pushforward_L"] = pushforward_L;
    j["trace_h"] = trace_h;
    j["gamma_boundary"] = std::isnan(gamma_boundary) ? nlohmann::json("auto") : nlohmann::json(gamma_boundary);
    j["bump_width"] = bump_width;
    j["bump_amplitude"] = bump_amplitude;
    j["t_ratio"] = t_ratio;
    j["t_first_factor"] = t_first_factor;
    j["tail_fraction"] = tail_fraction;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["dense_limit"] = dense_limit;
    j["seed"] = seed;
    j["arm_control"] = arm_control;
    j["truncation_audit"] = truncation_audit;
    return j;
}

CrossSection RunConfig::omega() const { return CrossSection(omega_lo, omega_hi); }

FracOrder RunConfig::order() const { return FracOrder(s); }

SolverConfig RunConfig::solver() const
{
    SolverConfig c;
    c.form.padding = padding;
    c.min_period_factor = min_period_factor;
    c.dense_limit = static_cast<std::size_t>(dense_limit);
    c.tol = tol;
    c.max_iter = max_iter;
    c.seed = seed;
    return c;
}

SweepPolicy RunConfig::sweep_policy() const
{
    SweepPolicy p;
    p.h = h;
    p.L_min = L_min;
    p.L_max = L_max;
    p.adaptive = adaptive;
    p.k = k;
    return p;
}

TrialConfig RunConfig::trial() const
{
    TrialConfig t;
    t.gamma_boundary = gamma_boundary;
    t.bump_width = bump_width;
    t.bump_amplitude = bump_amplitude;
    t.trace_h = trace_h;
    return t;
}

ExtensionConfig RunConfig::extension() const
{
    ExtensionConfig e;
    e.ratio = t_ratio;
    e.first_factor = t_first_factor;
    e.tail_fraction = tail_fraction;
    return e;
}

RunConfig load_config(const std::string& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        base.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

} // namespace vwave::cli
