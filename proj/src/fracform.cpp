#include "vwave/fracform.hpp"

#include "vwave/errors.hpp"
#include "vwave/fft.hpp"
#include "vwave/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vwave {

FracOrder::FracOrder(double value) : s(value)
{
    if (!(value > 0.0 && value < 1.0))
        throw DomainError("fractional order must lie strictly inside (0, 1), got " + std::to_string(value));
}

GridFunction::GridFunction(MaskPtr m) : mask(std::move(m))
{
    if (!mask)
        throw ArgumentError("grid function needs a mask");
    values.assign(mask->grid.size(), 0.0);
}

GridFunction GridFunction::from_active(MaskPtr m, const Eigen::VectorXd& active)
{
    GridFunction u(std::move(m));
    if (static_cast<std::size_t>(active.size()) != u.mask->count())
        throw ArgumentError("active vector length does not match the mask");
    for (std::size_t i = 0; i < u.mask->count(); ++i)
        u.values[u.mask->nodes[i]] = active[static_cast<Eigen::Index>(i)];
    return u;
}

Eigen::VectorXd GridFunction::active_values() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(mask->count()));
    for (std::size_t i = 0; i < mask->count(); ++i)
        v[static_cast<Eigen::Index>(i)] = values[mask->nodes[i]];
    return v;
}

void GridFunction::check_support() const
{
    if (!mask || values.size() != mask->grid.size())
        throw ArgumentError("grid function storage does not match its grid");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw ArgumentError("grid function has a non-finite value");
        if (!mask->active[i] && values[i] != 0.0)
            throw ArgumentError("grid function is nonzero outside its support mask");
    }
}

GridFunction GridFunction::scaled(double c) const
{
    GridFunction v = *this;
    for (double& x : v.values)
        x *= c;
    return v;
}

double FormConfig::default_padding(int dim)
{
    return dim <= 1 ? 16.0 : dim == 2 ? 8.0 : 4.0;
}

void FormConfig::validate() const
{
    if (padding != 0.0 && !(padding >= 2.0))
        throw ConfigError("padding factor must be at least 2 (aliasing)");
    if (!(min_period >= 0.0))
        throw ConfigError("minimum period must be non-negative");
}

std::array<std::int64_t, 3> cell_dims(const Grid& g, const FormConfig& cfg)
{
    cfg.validate();
    std::array<std::int64_t, 3> q{1, 1, 1};
    for (int k = 0; k < g.dim; ++k) {
        const auto by_pad = static_cast<std::int64_t>(std::ceil(cfg.padding_for(g.dim) * static_cast<double>(g.counts[k]) - 1e-9));
        const auto by_period = static_cast<std::int64_t>(std::ceil(cfg.min_period / g.h - 1e-9));
        q[k] = fft_size(std::max(by_pad, by_period));
    }
    return q;
}

namespace {

// Copies box values into the corner of a zero cell (C order on both sides).
void embed(const Grid& g, const std::vector<double>& values, const std::array<std::int64_t, 3>& cell, double* out,
           std::size_t nout)
{
    std::fill(out, out + nout, 0.0);
    const std::int64_t c1 = g.dim >= 2 ? g.counts[1] : 1, c2 = g.dim >= 3 ? g.counts[2] : 1;
    const std::int64_t q1 = g.dim >= 2 ? cell[1] : 1, q2 = g.dim >= 3 ? cell[2] : 1;
    for (std::int64_t a = 0; a < g.counts[0]; ++a)
        for (std::int64_t b = 0; b < c1; ++b)
            for (std::int64_t c = 0; c < c2; ++c)
                out[(a * q1 + b) * q2 + c] = values[static_cast<std::size_t>((a * c1 + b) * c2 + c)];
}

std::size_t wrap_index(const std::array<std::int64_t, 3>& m, const std::array<std::int64_t, 3>& dims, int dim)
{
    std::size_t idx = 0;
    for (int k = 0; k < dim; ++k) {
        std::int64_t v = m[k] % dims[k];
        if (v < 0)
            v += dims[k];
        idx = idx * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(v);
    }
    return idx;
}

} // namespace

double form_energy(const GridFunction& u, FracOrder s, const FormConfig& cfg)
{
    u.check_support();
    const Grid& g = u.grid();
    Grid cell = g;
    cell.counts = cell_dims(g, cfg);
    std::vector<double> padded(cell.size());
    embed(g, u.values, cell.counts, padded.data(), padded.size());
    return periodic_energy(cell, padded, s);
}

double periodic_energy(const Grid& cell, const std::vector<double>& values, FracOrder s)
{
    if (values.size() != cell.size())
        throw ArgumentError("field size does not match the periodic cell");
    RealFFT fft(cell.dim, cell.counts);
    std::copy(values.begin(), values.end(), fft.real());
    fft.forward();
    const auto xi2 = fft.xi_squared(cell.h);
    const auto w = fft.weights();
    double acc = 0.0;
    for (std::size_t k = 0; k < fft.complex_size(); ++k)
        if (xi2[k] > 0.0)
            acc += w[k] * std::pow(xi2[k], s.s) * std::norm(fft.spectrum()[k]);
    return acc * std::pow(cell.h, cell.dim) / static_cast<double>(fft.real_size());
}

double mass_norm(const GridFunction& u)
{
    double acc = 0.0;
    for (double v : u.values)
        acc += v * v;
    return acc * std::pow(u.grid().h, u.grid().dim);
}

double KernelTable::at(std::int64_t a, std::int64_t b, std::int64_t c) const
{
    const std::int64_t m[3] = {a, b, c};
    std::size_t idx = 0;
    for (int k = 0; k < dim; ++k) {
        const std::int64_t ext = 2 * half[k] - 1;
        idx = idx * static_cast<std::size_t>(ext) + static_cast<std::size_t>(m[k] + half[k] - 1);
    }
    return values[idx];
}

KernelTable kernel_table(const Grid& g, FracOrder s, const FormConfig& cfg)
{
    KernelTable t;
    t.dim = g.dim;
    t.h = g.h;
    t.s = s.s;
    t.cell = cell_dims(g, cfg);
    for (int k = 0; k < g.dim; ++k)
        t.half[k] = g.counts[k];
    RealFFT fft(g.dim, t.cell);
    const auto xi2 = fft.xi_squared(g.h);
    for (std::size_t k = 0; k < fft.complex_size(); ++k)
        fft.spectrum()[k] = xi2[k] > 0.0 ? std::pow(xi2[k], s.s) : 0.0;
    fft.inverse();
    const double inv_n = 1.0 / static_cast<double>(fft.real_size());

    std::array<std::int64_t, 3> ext{1, 1, 1};
    std::size_t total = 1;
    for (int k = 0; k < g.dim; ++k) {
        ext[k] = 2 * t.half[k] - 1;
        total *= static_cast<std::size_t>(ext[k]);
    }
    t.values.resize(total);
    std::size_t idx = 0;
    for (std::int64_t a = 0; a < ext[0]; ++a)
        for (std::int64_t b = 0; b < ext[1]; ++b)
            for (std::int64_t c = 0; c < ext[2]; ++c) {
                const std::array<std::int64_t, 3> m{a - t.half[0] + 1, g.dim >= 2 ? b - t.half[1] + 1 : 0,
                                                    g.dim >= 3 ? c - t.half[2] + 1 : 0};
                t.values[idx++] = fft.real()[wrap_index(m, t.cell, g.dim)] * inv_n;
            }
    return t;
}

FormMatrix assemble_form(MaskPtr mask, FracOrder s, const FormConfig& cfg)
{
    if (!mask || mask->count() < 1)
        throw ArgumentError("assemble_form needs at least one active node");
    if (mask->count() > cfg.max_dense_nodes)
        throw CapacityError("dense assembly of " + std::to_string(mask->count()) + " nodes exceeds the cap of "
                            + std::to_string(cfg.max_dense_nodes));
    FormMatrix m;
    m.order = s;
    m.mask = mask;
    const KernelTable table = kernel_table(mask->grid, s, cfg);
    kernels::omp::assemble(table, *mask, m.entries);
    return m;
}

struct MaskedOperator::Impl {
    std::unique_ptr<RealFFT> fft;
    std::vector<double> kernel_hat;
    std::vector<std::size_t> slots;
    double inv_n = 1.0;
    // preconditioner on the box-sized periodic cell
    std::unique_ptr<RealFFT> pfft;
    std::vector<double> xi2s;
    std::vector<std::size_t> pslots;
    double pinv_n = 1.0;
};

MaskedOperator::MaskedOperator(MaskPtr mask, FracOrder s, const FormConfig& cfg)
    : mask_(std::move(mask)), impl_(std::make_unique<Impl>())
{
    if (!mask_ || mask_->count() < 1)
        throw ArgumentError("operator needs at least one active node");
    const Grid& g = mask_->grid;
    table_ = kernel_table(g, s, cfg);

    std::array<std::int64_t, 3> e{1, 1, 1};
    for (int k = 0; k < g.dim; ++k)
        e[k] = fft_size(2 * g.counts[k]);
    impl_->fft = std::make_unique<RealFFT>(g.dim, e);
    RealFFT& fft = *impl_->fft;
    impl_->inv_n = 1.0 / static_cast<double>(fft.real_size());

    std::fill(fft.real(), fft.real() + fft.real_size(), 0.0);
    const std::array<std::int64_t, 3> ext{2 * table_.half[0] - 1, g.dim >= 2 ? 2 * table_.half[1] - 1 : 1,
                                          g.dim >= 3 ? 2 * table_.half[2] - 1 : 1};
    for (std::int64_t a = 0; a < ext[0]; ++a)
        for (std::int64_t b = 0; b < ext[1]; ++b)
            for (std::int64_t c = 0; c < ext[2]; ++c) {
                const std::array<std::int64_t, 3> m{a - table_.half[0] + 1, g.dim >= 2 ? b - table_.half[1] + 1 : 0,
                                                    g.dim >= 3 ? c - table_.half[2] + 1 : 0};
                fft.real()[wrap_index(m, e, g.dim)] = table_.at_offset(m);
            }
    fft.forward();
    impl_->kernel_hat.resize(fft.complex_size());
    for (std::size_t k = 0; k < fft.complex_size(); ++k)
        impl_->kernel_hat[k] = fft.spectrum()[k].real();

    impl_->slots.resize(mask_->count());
    for (std::size_t i = 0; i < mask_->count(); ++i)
        impl_->slots[i] = wrap_index(g.unravel(mask_->nodes[i]), e, g.dim);

    std::array<std::int64_t, 3> pe{1, 1, 1};
    for (int k = 0; k < g.dim; ++k)
        pe[k] = fft_size(g.counts[k]);
    impl_->pfft = std::make_unique<RealFFT>(g.dim, pe);
    impl_->pinv_n = 1.0 / static_cast<double>(impl_->pfft->real_size());
    const auto xi2 = impl_->pfft->xi_squared(g.h);
    impl_->xi2s.resize(xi2.size());
    for (std::size_t k = 0; k < xi2.size(); ++k)
        impl_->xi2s[k] = xi2[k] > 0.0 ? std::pow(xi2[k], s.s) : 0.0;
    impl_->pslots.resize(mask_->count());
    for (std::size_t i = 0; i < mask_->count(); ++i)
        impl_->pslots[i] = wrap_index(g.unravel(mask_->nodes[i]), pe, g.dim);
}

MaskedOperator::~MaskedOperator() = default;

void MaskedOperator::apply(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y) const
{
    RealFFT& fft = *impl_->fft;
    for (Eigen::Index col = 0; col < x.cols(); ++col) {
        std::fill(fft.real(), fft.real() + fft.real_size(), 0.0);
        for (std::size_t i = 0; i < impl_->slots.size(); ++i)
            fft.real()[impl_->slots[i]] = x(static_cast<Eigen::Index>(i), col);
        fft.forward();
        for (std::size_t k = 0; k < fft.complex_size(); ++k)
            fft.spectrum()[k] *= impl_->kernel_hat[k];
        fft.inverse();
        for (std::size_t i = 0; i < impl_->slots.size(); ++i)
            y(static_cast<Eigen::Index>(i), col) = fft.real()[impl_->slots[i]] * impl_->inv_n;
    }
}

void MaskedOperator::precondition(const Eigen::Ref<const Eigen::MatrixXd>& x, Eigen::Ref<Eigen::MatrixXd> y,
                                  double shift) const
{
    RealFFT& fft = *impl_->pfft;
    for (Eigen::Index col = 0; col < x.cols(); ++col) {
        std::fill(fft.real(), fft.real() + fft.real_size(), 0.0);
        for (std::size_t i = 0; i < impl_->pslots.size(); ++i)
            fft.real()[impl_->pslots[i]] = x(static_cast<Eigen::Index>(i), col);
        fft.forward();
        for (std::size_t k = 0; k < fft.complex_size(); ++k)
            fft.spectrum()[k] /= impl_->xi2s[k] + shift;
        fft.inverse();
        for (std::size_t i = 0; i < impl_->pslots.size(); ++i)
            y(static_cast<Eigen::Index>(i), col) = fft.real()[impl_->pslots[i]] * impl_->pinv_n;
    }
}

} // namespace vwave
