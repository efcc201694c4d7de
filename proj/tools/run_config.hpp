#pragma once

#include "vwave/theorems.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace vwave::cli {

/** Every experiment setting. Angles are in degrees here and in radians past to_*(). */
struct RunConfig {
    double s = 0.5;
    int n = 2;
    std::vector<double> omega_lo{0.0};
    std::vector<double> omega_hi{1.0};
    double beta_deg = 45.0;
    std::vector<double> angles_deg{30.0, 45.0, 60.0, 75.0};
    double h = 1.0 / 32;
    std::vector<double> h_levels{1.0 / 32, 1.0 / 64, 1.0 / 128};
    double truncation_L = 5.0;
    double L_min = 4.0;
    double L_max = 20.0;
    bool adaptive = true;
    double padding = 2.5;
    double min_period_factor = 16.0;
    int k = 1;
    std::vector<double> R_list{8.0, 16.0, 32.0, 64.0};
    std::vector<double> pushforward_deg{45.0, 30.0};
    double pushforward_L = 4.0;
    double trace_h = 1.0 / 16;
    double gamma_boundary = std::numeric_limits<double>::quiet_NaN();
    double bump_width = 0.0;
    double bump_amplitude = 1.0;
    double t_ratio = 0.0;
    double t_first_factor = 0.25;
    double tail_fraction = 1e-4;
    double tol = 1e-8;
    int max_iter = 1000;
    int dense_limit = 3000;
    std::uint64_t seed = 1;
    bool arm_control = true;
    /** eigs also solves at 1.5 truncation_L. */
    bool truncation_audit = true;

    /** Throws ConfigError on the first invalid field. */
    void validate() const;
    void set(const std::string& key, const std::string& value);
    nlohmann::json to_json() const;

    CrossSection omega() const;
    FracOrder order() const;
    SolverConfig solver() const;
    SweepPolicy sweep_policy() const;
    TrialConfig trial() const;
    ExtensionConfig extension() const;
};

/** Flat "key = value" text; '#' starts a comment. */
RunConfig load_config(const std::string& path, RunConfig base = {});
std::vector<std::string> config_keys();

double parse_number(const std::string& text);

} // namespace vwave::cli
