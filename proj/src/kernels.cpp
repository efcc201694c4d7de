#include "vwave/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vwave::kernels {

namespace {

inline std::array<std::int64_t, 3> diff(const std::array<std::int64_t, 3>& a, const std::array<std::int64_t, 3>& b)
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

void assemble_column(const KernelTable& table, const Mask& mask, const std::vector<std::array<std::int64_t, 3>>& ijk,
                     std::size_t j, Eigen::MatrixXd& out)
{
    const double hn = std::pow(table.h, table.dim);
    for (std::size_t i = 0; i < ijk.size(); ++i)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hn * table.at_offset(diff(ijk[i], ijk[j]));
    (void)mask;
}

std::vector<std::array<std::int64_t, 3>> active_coords(const Mask& mask)
{
    std::vector<std::array<std::int64_t, 3>> ijk(mask.count());
    for (std::size_t i = 0; i < mask.count(); ++i)
        ijk[i] = mask.grid.unravel(mask.nodes[i]);
    return ijk;
}

double dense_row(const KernelTable& table, const std::vector<std::array<std::int64_t, 3>>& ijk, const Eigen::VectorXd& x,
                 std::size_t i)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < ijk.size(); ++j)
        acc += table.at_offset(diff(ijk[i], ijk[j])) * x[static_cast<Eigen::Index>(j)];
    return acc;
}

double correlation(const Grid& g, const std::vector<double>& u, const std::array<std::int64_t, 3>& m)
{
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{1, 1, 1};
    for (int k = 0; k < g.dim; ++k) {
        lo[k] = std::max<std::int64_t>(0, -m[k]);
        hi[k] = std::min<std::int64_t>(g.counts[k], g.counts[k] - m[k]);
        if (hi[k] <= lo[k])
            return 0.0;
    }
    const std::int64_t c1 = g.dim >= 2 ? g.counts[1] : 1;
    const std::int64_t c2 = g.dim >= 3 ? g.counts[2] : 1;
    const std::int64_t shift = (m[0] * c1 + (g.dim >= 2 ? m[1] : 0)) * c2 + (g.dim >= 3 ? m[2] : 0);
    double acc = 0.0;
    for (std::int64_t a = lo[0]; a < hi[0]; ++a)
        for (std::int64_t b = lo[1]; b < hi[1]; ++b) {
            const std::int64_t base = (a * c1 + b) * c2;
            for (std::int64_t c = lo[2]; c < hi[2]; ++c)
                acc += u[static_cast<std::size_t>(base + c)] * u[static_cast<std::size_t>(base + c + shift)];
        }
    return acc;
}

} // namespace

namespace serial {

void assemble(const KernelTable& table, const Mask& mask, Eigen::MatrixXd& out)
{
    const auto ijk = active_coords(mask);
    out.resize(static_cast<Eigen::Index>(ijk.size()), static_cast<Eigen::Index>(ijk.size()));
    for (std::size_t j = 0; j < ijk.size(); ++j)
        assemble_column(table, mask, ijk, j, out);
}

void dense_apply(const KernelTable& table, const Mask& mask, const Eigen::VectorXd& x, Eigen::VectorXd& y)
{
    const auto ijk = active_coords(mask);
    y.resize(x.size());
    for (std::size_t i = 0; i < ijk.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = dense_row(table, ijk, x, i);
}

void autocorrelation(const Grid& g, const std::vector<double>& u, const OffsetList& offs, std::vector<double>& out)
{
    out.assign(offs.offsets.size(), 0.0);
    for (std::size_t k = 0; k < offs.offsets.size(); ++k)
        out[k] = correlation(g, u, offs.offsets[k]);
}

} // namespace serial

namespace omp {

void assemble(const KernelTable& table, const Mask& mask, Eigen::MatrixXd& out)
{
    const auto ijk = active_coords(mask);
    const std::int64_t n = static_cast<std::int64_t>(ijk.size());
    out.resize(n, n);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j)
        assemble_column(table, mask, ijk, static_cast<std::size_t>(j), out);
}

void dense_apply(const KernelTable& table, const Mask& mask, const Eigen::VectorXd& x, Eigen::VectorXd& y)
{
    const auto ijk = active_coords(mask);
    const std::int64_t n = static_cast<std::int64_t>(ijk.size());
    y.resize(x.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        y[i] = dense_row(table, ijk, x, static_cast<std::size_t>(i));
}

void autocorrelation(const Grid& g, const std::vector<double>& u, const OffsetList& offs, std::vector<double>& out)
{
    const std::int64_t n = static_cast<std::int64_t>(offs.offsets.size());
    out.assign(offs.offsets.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t k = 0; k < n; ++k)
        out[static_cast<std::size_t>(k)] = correlation(g, u, offs.offsets[static_cast<std::size_t>(k)]);
}

} // namespace omp

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n)
{
#ifdef _OPENMP
    if (n > 0)
        omp_set_num_threads(n);
#else
    (void)n;
#endif
}

} // namespace vwave::kernels
