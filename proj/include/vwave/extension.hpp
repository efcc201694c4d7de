#pragma once

#include "vwave/fracform.hpp"

#include <array>
#include <vector>

namespace vwave {

/** C_s = 4^s Gamma(s + 1) / (2 s Gamma(1 - s)). */
double cs_constant(FracOrder s);

/** P_s(x, t) = Gamma((n + 2s)/2) / (pi^{n/2} Gamma(s)) t^{2s} / (|x|^2 + t^2)^{n/2 + s}, n = x.size(). */
double poisson_kernel(const std::vector<double>& x, double t, FracOrder s);

/**
 * Normalized Fourier symbol of the extension, psi(t|xi|): U^(xi, t) = psi(t|xi|) u^(xi).
 * psi(r) = 2^{1-s} / Gamma(s) r^s K_s(r), psi(0) = 1; exp(-r) for s = 1/2.
 */
double poisson_symbol(double r, FracOrder s);
/** d psi / dr = -2^{1-s} / Gamma(s) r^s K_{1-s}(r). */
double poisson_symbol_derivative(double r, FracOrder s);

struct ExtensionConfig {
    FormConfig cell;
    /** Geometric ratio of the t-levels; 0 selects min(1.25, 1 + 16 h). */
    double ratio = 0.0;
    /** First positive level as a multiple of h. */
    double first_factor = 0.25;
    /** Per-mode energy fraction allowed beyond the top level when choosing t_max. */
    double tail_fraction = 1e-4;
};

/** Geometric levels 0, t1, t1 r, ..., the last one >= t_max. */
std::vector<double> geometric_slices(double t1, double ratio, double t_max);

/**
 * Samples of the extension on a periodic cell times t-levels. Level 0 is the trace. Spacing may
 * differ per axis (fields transplanted to tube coordinates); differences wrap periodically.
 */
struct ExtensionField {
    int dim = 0;
    std::array<std::int64_t, 3> counts{1, 1, 1};
    std::array<double, 3> spacing{0.0, 0.0, 0.0};
    std::vector<double> t;
    std::vector<std::vector<double>> slices;
    /** Grid of the source trace; it sits in the corner of the cell. */
    Grid source;

    std::size_t size() const;
    double cell_volume() const;
};

/** Slice levels for the cell of u with t_max chosen so the slowest nonzero mode has decayed. */
std::vector<double> default_slices(const GridFunction& u, FracOrder s, const ExtensionConfig& cfg = {});

ExtensionField cs_extend(const GridFunction& u, FracOrder s, const std::vector<double>& t_slices,
                         const FormConfig& cfg = {});

struct WeightedEnergyReport {
    double value = 0.0;
    double tail = 0.0;
    double top_fraction = 0.0;
    std::vector<double> interval_contributions;
};

WeightedEnergyReport weighted_energy_report(const ExtensionField& U, FracOrder s);
/** Integral of t^{1-2s} |grad U|^2 over the cell times (0, infinity). */
double weighted_energy(const ExtensionField& U, FracOrder s);

/** -C_s lim t^{1-2s} d_t U from the fit U = U(., 0) + c t^{2s}, on the source grid (all nodes active). */
GridFunction dtn_trace(const ExtensionField& U, FracOrder s);

} // namespace vwave
