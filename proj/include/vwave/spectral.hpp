#pragma once

#include "vwave/fracform.hpp"
#include "vwave/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace vwave {

struct SolverConfig {
    /** The kernel cell only has to exceed twice the box; min_period_factor sets the physical floor. */
    FormConfig form{2.5, 0.0, 12000};
    /** Dense eigensolver below this many active nodes. */
    std::size_t dense_limit = 3000;
    /** Relative residual ||K x - lambda x|| / max(1, lambda) for unit x. */
    double tol = 1e-8;
    int max_iter = 1000;
    /** Block size is k + extra_block. */
    int extra_block = 2;
    /** Shift sigma of the preconditioner (|xi|^{2s} + sigma)^{-1}. */
    double shift = 1.0;
    std::uint64_t seed = 1;
    /** Lower bound on the physical cell period, as a multiple of diameter(omega). */
    double min_period_factor = 16.0;

    void validate() const;
};

/** Eigenpairs of K = M / h^n with Euclidean-orthonormal columns. */
struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    Eigen::VectorXd residuals;
    int iterations = 0;
    bool converged = true;
};

EigenPairs dense_eigenpairs(const FormMatrix& m, int k);
/** Block preconditioned conjugate gradient (LOBPCG) for the k smallest pairs. */
EigenPairs lobpcg(const MaskedOperator& op, int k, const SolverConfig& cfg, const Eigen::MatrixXd* guess = nullptr);
/** Dense below cfg.dense_limit active nodes, LOBPCG otherwise. */
EigenPairs smallest_eigenpairs(const MaskPtr& mask, FracOrder s, int k, const SolverConfig& cfg);

struct ThresholdResult {
    double value = 0.0;
    GridFunction phi;
    double residual = 0.0;
};

/** Smallest eigenpair of the form on omega; phi is L2-normalized with positive mean. */
ThresholdResult threshold(const CrossSection& omega, FracOrder s, double h, const SolverConfig& cfg = {});

struct ThresholdStudy {
    FracOrder order;
    std::vector<double> h;
    std::vector<double> values;
    /** Richardson value assuming first-order convergence in h. */
    double extrapolated = 0.0;
    /** |Lambda(h_finest) - Lambda(h_next)|, zero with a single level. */
    double eps_disc = 0.0;
    GridFunction phi;

    double at(double h) const;
};

ThresholdStudy threshold_study(const CrossSection& omega, FracOrder s, std::vector<double> hs,
                               const SolverConfig& cfg = {});

struct EigenResult {
    std::vector<double> values;
    std::vector<GridFunction> vectors;
    /** ||M v - lambda h^n v|| for L2-normalized v. */
    std::vector<double> residuals;
    /** Classification threshold: min(reference, arm control). */
    double threshold = 0.0;
    /** Lambda at the same h on the cross-section grid. */
    double reference_threshold = 0.0;
    /** Ground state of the straight slanted strip on the same lattice and truncation (NaN if skipped). */
    double arm_threshold = 0.0;
    double eps_disc = 0.0;
    int below_threshold_count = 0;
    bool partial = false;
    int iterations = 0;
};

struct EigsOptions {
    int k = 1;
    bool arm_control = true;
};

EigenResult waveguide_eigs(const Waveguide& w, FracOrder s, double h, const ThresholdStudy& study,
                           const EigsOptions& opt = {}, const SolverConfig& cfg = {});

double rayleigh(const GridFunction& u, FracOrder s, const FormConfig& cfg = {});

/** Form settings used for a problem with the given cross-section. */
FormConfig form_config_for(const CrossSection& omega, const SolverConfig& cfg);

} // namespace vwave
