#pragma once

#include "vwave/extension.hpp"
#include "vwave/spectral.hpp"

#include <complex>
#include <limits>
#include <memory>
#include <vector>

namespace vwave {

/** Monotone C^2 ramp: 1 for r <= 1, 0 for r >= 2. */
double cutoff_profile(double r);
double cutoff_profile_derivative(double r);

/** True when chi_R depends on sqrt(z^2 + t^2) (n - 1 <= 2 - 2s), false when it depends on |z| only. */
bool radial_cutoff(int n, FracOrder s);
double cutoff_chi(double z, double t, double R, int n, FracOrder s);

/**
 * Whole-line spectral model of the band-limited interpolant of a cross-section ground state
 * (interval cross-sections). Frequencies are integrated over [0, pi/h] with graded Gauss panels.
 */
class CrossSectionSpectrum {
public:
    CrossSectionSpectrum(const GridFunction& phi, FracOrder s);

    FracOrder order() const { return s_; }
    double h() const { return h_; }
    /** Rayleigh quotient of the interpolant: int |xi|^{2s} |phi^|^2 / int |phi^|^2. */
    double lambda() const { return lambda_; }
    /** int phi^2 dx of the interpolant. */
    double mass() const { return mass_; }

    /** int Phi^2 dx, int d_t(Phi^2) dx and int |grad Phi|^2 dx at height t. */
    double g(double t) const;
    double dg(double t) const;
    double e(double t) const;
    /** int_a^inf t^{1-2s} e(t) dt in closed form. */
    double energy_tail(double a) const;

    /** Phi, d_x Phi and d_t Phi at (x, t). */
    std::array<double, 3> field(double x, double t) const;

    const std::vector<double>& samples() const { return phi_; }
    double origin() const { return x0_; }

private:
    FracOrder s_;
    double h_ = 0.0;
    double x0_ = 0.0;
    std::vector<double> phi_;
    std::vector<double> xi_, w_, density_;
    std::vector<std::complex<double>> hat_;
    double lambda_ = 0.0;
    double mass_ = 0.0;
};

/** Tensor C^2 bump amplitude * b((x - xc)/a) b(z/a) b((t - tc)/a), b(u) = (1 - u^2)^3 on |u| < 1. */
struct Bump {
    double xc = 0.0;
    double tc = 1.0;
    double a = 0.5;
    double amplitude = 1.0;

    double value(double x, double z, double t) const;
    /** (V, V_x, V_z, V_t). */
    std::array<double, 4> gradient(double x, double z, double t) const;
};

struct TrialConfig {
    /** Boundary of the gamma case split on n - 1; NaN selects 2 - 2s. */
    double gamma_boundary = std::numeric_limits<double>::quiet_NaN();
    /** Bump support width (the bump sits on t in (0, width)); 0 selects diameter(omega). */
    double bump_width = 0.0;
    /** 0 drops the bump (eps V = 0). */
    double bump_amplitude = 1.0;
    /** Shift of the bump along x per relocation retry, as a fraction of its width. */
    double relocation_step = 0.25;
    int max_relocations = 2;
    /** |I3| below this counts as zero when choosing the sign. */
    double i3_tolerance = 1e-8;
    /** Spacing of the sampled trace. */
    double trace_h = 1.0 / 16;
    /** Panel refinement level of the (z, t) quadratures; doubled once on a failed audit. */
    int quadrature_level = 1;
    /** Periodic cell of the direct route, in units of R. */
    double direct_period = 64.0;
};

struct TrialParams {
    double R = 0.0;
    double epsilon = 0.0;
    double gamma = 1.0;
    double beta = 0.0;
    int n = 2;
    FracOrder order;
    bool radial = true;
    Bump V;
    int sign = 1;
    int relocations = 0;
};

struct Trial {
    GridFunction trace;
    TrialParams params;
    /** Extension of the cross-section ground state (before transport). */
    ExtensionField field;
    std::shared_ptr<const CrossSectionSpectrum> spectrum;
};

struct TrialDecomposition {
    double I1 = 0.0, I21 = 0.0, I22 = 0.0, I23 = 0.0, I3 = 0.0, I4 = 0.0;
    double total = 0.0;
    /** C_s E_s(Psi) - Lambda ||Psi(., 0)||^2 by the direct route. */
    double rayleigh_gap = 0.0;
    /** I3 after integration by parts onto {z = 0}. */
    double I3_boundary = 0.0;
    double lambda = 0.0;
    double trace_norm = 0.0;
    /** |total - rayleigh_gap| / (2 sum of |terms|). */
    double mismatch = 0.0;
    int quadrature_level = 1;
};

double trial_gamma(int n, FracOrder s, const TrialConfig& cfg = {});

Trial build_trial(const Waveguide& w, FracOrder s, double R, const ThresholdResult& ground,
                  const TrialConfig& cfg = {});
TrialDecomposition decompose_trial(const Trial& trial, const TrialConfig& cfg = {});

/** Least-squares exponent p in y ~ C R^{-p} (log R)^{with_log}. */
double fit_decay_exponent(const std::vector<double>& R, const std::vector<double>& y, bool with_log);
/** Case exponent of I21 + I22 and whether it carries a log factor. */
std::pair<double, bool> case_decay(int n, FracOrder s);

/** (sin a / sin b)^{1/2} u o T_{a,b} on the waveguide of angle alpha with the same truncation. */
GridFunction pushforward(const GridFunction& u, const Waveguide& w_beta, double alpha);

/** Extension of u on Omega_beta carried to the straight tube, sampled on the (h sin beta, h) lattice. */
ExtensionField straighten_extension(const ExtensionField& U, double beta);
/** -2 C_s int t^{1-2s} sgn(z) d_x V d_z V over the tube field. */
double remainder_term(const ExtensionField& V, FracOrder s);

struct SweepRow {
    double alpha = 0.0;
    double truncation_L = 0.0;
    std::vector<double> lambdas;
    double lambda_1 = 0.0;
    double threshold = 0.0;
    double lower_bound = 0.0;
    int count = 0;
    bool bound_consistent = true;
};

struct SweepPolicy {
    double h = 1.0 / 32;
    double L_min = 4.0;
    double L_max = 20.0;
    /** Fixed truncation L_min for every angle when false. */
    bool adaptive = true;
    int k = 1;

    double truncation(double alpha) const;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool counts_nonincreasing = true;
    bool lambda_increasing = true;
    bool consistent = true;
};

SweepResult angle_sweep(FracOrder s, const std::vector<double>& angles, const CrossSection& omega,
                        const ThresholdStudy& study, const SweepPolicy& policy, const SolverConfig& cfg = {});

} // namespace vwave
