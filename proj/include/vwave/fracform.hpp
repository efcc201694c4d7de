#pragma once

#include "vwave/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace vwave {

/** Fractional order s in (0, 1). */
struct FracOrder {
    double s = 0.5;
    FracOrder() = default;
    explicit FracOrder(double value);
};

/** Values on a grid, zero at every inactive node of the mask. */
struct GridFunction {
    MaskPtr mask;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(MaskPtr m);
    static GridFunction from_active(MaskPtr m, const Eigen::VectorXd& active);

    const Grid& grid() const { return mask->grid; }
    Eigen::VectorXd active_values() const;
    /** Throws ArgumentError when a value is non-finite or an inactive node carries a nonzero value. */
    void check_support() const;
    GridFunction scaled(double c) const;
};

/** Periodic supercell policy used by every multiplier evaluation. */
struct FormConfig {
    /** Cell extent per axis is at least padding times the box extent; 0 selects default_padding(dim). */
    double padding = 0.0;
    /** Lower bound on the physical cell period (0 disables). */
    double min_period = 0.0;
    /** Cap on active nodes for dense assembly. */
    std::size_t max_dense_nodes = 12000;

    void validate() const;
    double padding_for(int dim) const { return padding > 0.0 ? padding : default_padding(dim); }
    /** 16, 8, 4 for dim 1, 2, 3: keeps the periodic-image bias of the form below 1%. */
    static double default_padding(int dim);
};

/** Per-axis node counts of the zero-padded periodic cell that hosts a box of the given grid. */
std::array<std::int64_t, 3> cell_dims(const Grid& g, const FormConfig& cfg);

double form_energy(const GridFunction& u, FracOrder s, const FormConfig& cfg = {});
/** Multiplier energy (h^n / N) sum |xi|^{2s} |DFT u|^2 of a field that is periodic on the given cell. */
double periodic_energy(const Grid& cell, const std::vector<double>& values, FracOrder s);
double mass_norm(const GridFunction& u);

/**
 * Translation-invariant kernel k(m) = N^{-1} sum_xi |xi|^{2s} e^{i xi.m h} of the periodic cell,
 * tabulated for offsets |m_k| < counts_k. The form is a(u) = h^n sum_ij u_i u_j k(i - j).
 */
struct KernelTable {
    int dim = 0;
    double h = 0.0;
    double s = 0.5;
    std::array<std::int64_t, 3> half{1, 1, 1};
    std::array<std::int64_t, 3> cell{1, 1, 1};
    std::vector<double> values;

    double at(std::int64_t a, std::int64_t b = 0, std::int64_t c = 0) const;
    double at_offset(const std::array<std::int64_t, 3>& d) const { return at(d[0], d[1], d[2]); }
};

KernelTable kernel_table(const Grid& g, FracOrder s, const FormConfig& cfg = {});

/** Symmetric PSD matrix of the form over the active nodes: u^T M u = form_energy(u). */
struct FormMatrix {
    FracOrder order;
    MaskPtr mask;
    Eigen::MatrixXd entries;
};

FormMatrix assemble_form(MaskPtr mask, FracOrder s, const FormConfig& cfg = {});

/**
 * Matrix-free action v -> K v with K = M / h^n on the active nodes (eigenvalues in natural units).
 * Uses the exact circulant embedding of the tabulated kernel, so results equal the dense matrix.
 */
class MaskedOperator {
public:
    MaskedOperator(MaskPtr mask, FracOrder s, const FormConfig& cfg = {});
    ~MaskedOperator();
    MaskedOperator(const MaskedOperator&) = delete;
    MaskedOperator& operator=(const MaskedOperator&) = delete;

    std::size_t size() const { return mask_->count(); }
    const MaskPtr& mask() const { return mask_; }
    const KernelTable& table() const { return table_; }

    void apply(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y) const;
    /** y = F^{-1} (|xi|^{2s} + shift)^{-1} F x on the periodic box, restricted to the mask. */
    void precondition(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y, double shift) const;

private:
    struct Impl;
    MaskPtr mask_;
    KernelTable table_;
    std::unique_ptr<Impl> impl_;
};

/** C_{n,s} = s 4^s Gamma(n/2 + s) / (pi^{n/2} Gamma(1 - s)), the singular-integral normalization. */
double gagliardo_constant(int n, FracOrder s);

/**
 * Independent double-sum oracle (C/2) sum_x sum_y (u(x) - u(y))^2 / |x - y|^{n+2s} h^{2n}.
 * The constant C is fixed by calibrate() against the multiplier form on a reference Gaussian.
 */
class GagliardoOracle {
public:
    GagliardoOracle(int n, FracOrder s, double h);

    void calibrate(const FormConfig& cfg = calibration_config());
    bool calibrated() const { return calibrated_; }
    double constant() const;
    double energy(const GridFunction& u) const;
    /** Uncalibrated double sum (without the factor C/2). */
    double raw(const GridFunction& u) const;

    static FormConfig calibration_config();
    static constexpr std::size_t kMaxNodes = 10000;

private:
    int n_;
    FracOrder s_;
    double h_;
    bool calibrated_ = false;
    double c_ = 0.0;
};

} // namespace vwave
