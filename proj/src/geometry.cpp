#include "vwave/geometry.hpp"

#include "vwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vwave {

namespace {

constexpr double kMembershipTol = 1e-9;

std::int64_t lattice_floor(double x, double h)
{
    return static_cast<std::int64_t>(std::floor(x / h + 1e-9));
}

std::int64_t lattice_ceil(double x, double h)
{
    return static_cast<std::int64_t>(std::ceil(x / h - 1e-9));
}

void set_axis(Grid& g, int axis, double lo, double hi)
{
    const std::int64_t i0 = lattice_floor(lo, g.h) - 1;
    const std::int64_t i1 = lattice_ceil(hi, g.h) + 1;
    g.origin[axis] = static_cast<double>(i0) * g.h;
    g.counts[axis] = i1 - i0 + 1;
}

bool open_interval(double c, double lo, double hi, double tol)
{
    return c > lo + tol && c < hi - tol;
}

std::int64_t lattice_points_inside(double lo, double hi, double h)
{
    const std::int64_t a = lattice_floor(lo, h) + 1;
    const std::int64_t b = lattice_ceil(hi, h) - 1;
    return std::max<std::int64_t>(0, b - a + 1);
}

void check_point(const std::vector<double>& p)
{
    if (p.size() < 2 || p.size() > 3)
        throw ArgumentError("points must have 2 or 3 coordinates (x, [y,] z)");
}

void check_angle(double beta)
{
    if (!(beta > 0.0) || beta > kPi / 2 + 1e-15)
        throw DomainError("angle must lie in (0, pi/2], got " + std::to_string(beta));
}

} // namespace

CrossSection::CrossSection(std::vector<double> lower, std::vector<double> upper)
    : lo(std::move(lower)), hi(std::move(upper))
{
    validate();
}

double CrossSection::diameter() const
{
    double d2 = 0.0;
    for (int k = 0; k < dim(); ++k)
        d2 += width(k) * width(k);
    return std::sqrt(d2);
}

void CrossSection::validate() const
{
    if (lo.size() != hi.size() || lo.empty() || lo.size() > 2)
        throw ConfigError("cross-section must be an interval or a 2D box");
    for (int k = 0; k < dim(); ++k)
        if (!(hi[k] > lo[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
            throw ConfigError("cross-section bounds must satisfy lo < hi");
}

void Waveguide::validate() const
{
    omega.validate();
    check_angle(beta);
    if (!(truncation_L >= 2.0 * omega.diameter() - 1e-12))
        throw ConfigError("truncation_L must be at least twice the cross-section diameter");
}

Waveguide Waveguide::with_truncation(double L) const
{
    Waveguide w = *this;
    w.truncation_L = L;
    return w;
}

std::size_t Grid::size() const
{
    std::size_t n = 1;
    for (int k = 0; k < dim; ++k)
        n *= static_cast<std::size_t>(counts[k]);
    return n;
}

std::size_t Grid::index(const std::array<std::int64_t, 3>& ijk) const
{
    std::size_t idx = 0;
    for (int k = 0; k < dim; ++k)
        idx = idx * static_cast<std::size_t>(counts[k]) + static_cast<std::size_t>(ijk[k]);
    return idx;
}

std::array<std::int64_t, 3> Grid::unravel(std::size_t idx) const
{
    std::array<std::int64_t, 3> ijk{0, 0, 0};
    for (int k = dim - 1; k >= 0; --k) {
        ijk[k] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(counts[k]));
        idx /= static_cast<std::size_t>(counts[k]);
    }
    return ijk;
}

bool Grid::same_lattice(const Grid& other) const
{
    if (dim != other.dim || std::abs(h - other.h) > 1e-15 * h)
        return false;
    for (int k = 0; k < dim; ++k) {
        const double shift = (origin[k] - other.origin[k]) / h;
        if (std::abs(shift - std::round(shift)) > 1e-8)
            return false;
    }
    return true;
}

Mask::Mask(Grid g, std::vector<std::uint8_t> flags) : grid(g), active(std::move(flags))
{
    for (std::size_t i = 0; i < active.size(); ++i)
        if (active[i])
            nodes.push_back(i);
}

std::array<double, 2> sincos_exact(double beta)
{
    if (std::abs(beta - kPi / 2) < 1e-14)
        return {1.0, 0.0};
    return {std::sin(beta), std::cos(beta)};
}

Grid box_grid(const std::vector<double>& lo, const std::vector<double>& hi, double h)
{
    if (!(h > 0.0))
        throw ConfigError("grid spacing must be positive");
    Grid g;
    g.dim = static_cast<int>(lo.size());
    g.h = h;
    for (int k = 0; k < g.dim; ++k)
        set_axis(g, k, lo[k], hi[k]);
    return g;
}

Grid section_grid(const CrossSection& omega, double h)
{
    omega.validate();
    return box_grid(omega.lo, omega.hi, h);
}

Grid waveguide_grid(const Waveguide& w, double h)
{
    w.validate();
    const auto [sb, cb] = sincos_exact(w.beta);
    const double L = w.truncation_L;
    const double a = w.omega.lo[0], b = w.omega.hi[0];
    std::vector<double> lo, hi;
    lo.push_back(std::min(a, a + L * cb) / sb);
    hi.push_back(std::max(b, b + L * cb) / sb);
    for (int k = 1; k < w.omega.dim(); ++k) {
        lo.push_back(w.omega.lo[k]);
        hi.push_back(w.omega.hi[k]);
    }
    lo.push_back(-L);
    hi.push_back(L);
    return box_grid(lo, hi, h);
}

Grid strip_grid(const Waveguide& w, double h)
{
    w.validate();
    const auto [sb, cb] = sincos_exact(w.beta);
    const double L = w.truncation_L;
    std::vector<double> lo, hi;
    lo.push_back((w.omega.lo[0] - L * cb) / sb);
    hi.push_back((w.omega.hi[0] + L * cb) / sb);
    for (int k = 1; k < w.omega.dim(); ++k) {
        lo.push_back(w.omega.lo[k]);
        hi.push_back(w.omega.hi[k]);
    }
    lo.push_back(-L);
    hi.push_back(L);
    return box_grid(lo, hi, h);
}

namespace {

MaskPtr build_waveguide_mask(const Waveguide& w, const Grid& g, bool fold)
{
    w.validate();
    const int n = w.dim();
    if (g.dim != n)
        throw GeometryError("grid dimension does not match the waveguide");
    const auto [sb, cb] = sincos_exact(w.beta);
    const double tol = kMembershipTol * g.h;
    const double L = w.truncation_L;

    // Coverage: the extreme corners of the truncated domain must lie strictly inside the box.
    const Grid ref = fold ? waveguide_grid(w, g.h) : strip_grid(w, g.h);
    for (int k = 0; k < n; ++k) {
        const double lo = g.origin[k], hi = g.coord(k, g.counts[k] - 1);
        const double rlo = ref.origin[k] + g.h, rhi = ref.coord(k, ref.counts[k] - 1) - g.h;
        if (lo > rlo + tol || hi < rhi - tol)
            throw GeometryError("grid does not cover the truncated domain");
    }

    std::vector<std::uint8_t> flags(g.size(), 0);
    for (std::size_t idx = 0; idx < flags.size(); ++idx) {
        const auto ijk = g.unravel(idx);
        const double x = g.coord(0, ijk[0]);
        const double z = g.coord(n - 1, ijk[n - 1]);
        if (std::abs(z) > L + tol)
            continue;
        const double c = x * sb - (fold ? std::abs(z) : z) * cb;
        bool in = open_interval(c, w.omega.lo[0], w.omega.hi[0], tol);
        for (int k = 1; in && k < n - 1; ++k)
            in = open_interval(g.coord(k, ijk[k]), w.omega.lo[k], w.omega.hi[k], tol);
        flags[idx] = in ? 1 : 0;
    }

    std::int64_t across = lattice_points_inside(w.omega.lo[0] / sb, w.omega.hi[0] / sb, g.h);
    for (int k = 1; k < n - 1; ++k)
        across = std::min(across, lattice_points_inside(w.omega.lo[k], w.omega.hi[k], g.h));
    if (across < 8)
        throw ResolutionError("grid too coarse: " + std::to_string(across)
                              + " active nodes across the cross-section (need 8)");
    return std::make_shared<Mask>(g, std::move(flags));
}

} // namespace

MaskPtr membership_mask(const Waveguide& w, const Grid& g)
{
    return build_waveguide_mask(w, g, true);
}

MaskPtr strip_mask(const Waveguide& w, const Grid& g)
{
    return build_waveguide_mask(w, g, false);
}

MaskPtr section_mask(const CrossSection& omega, const Grid& g)
{
    omega.validate();
    if (g.dim != omega.dim())
        throw GeometryError("grid dimension does not match the cross-section");
    const double tol = kMembershipTol * g.h;
    std::vector<std::uint8_t> flags(g.size(), 0);
    for (std::size_t idx = 0; idx < flags.size(); ++idx) {
        const auto ijk = g.unravel(idx);
        bool in = true;
        for (int k = 0; in && k < g.dim; ++k)
            in = open_interval(g.coord(k, ijk[k]), omega.lo[k], omega.hi[k], tol);
        flags[idx] = in ? 1 : 0;
    }
    return std::make_shared<Mask>(g, std::move(flags));
}

std::vector<double> map_from_tube(double beta, const std::vector<double>& p)
{
    check_angle(beta);
    check_point(p);
    const auto [sb, cb] = sincos_exact(beta);
    std::vector<double> q = p;
    q[0] = p[0] / sb + std::abs(p.back()) * cb / sb;
    return q;
}

std::vector<double> map_to_tube(double beta, const std::vector<double>& p)
{
    check_angle(beta);
    check_point(p);
    const auto [sb, cb] = sincos_exact(beta);
    std::vector<double> q = p;
    q[0] = p[0] * sb - std::abs(p.back()) * cb;
    return q;
}

std::vector<double> map_between(double alpha, double beta, const std::vector<double>& p)
{
    check_angle(alpha);
    check_angle(beta);
    if (alpha > beta)
        throw ArgumentError("map_between requires alpha <= beta");
    if (alpha == beta)
        return p;
    return map_from_tube(beta, map_to_tube(alpha, p));
}

double map_between_jacobian(double alpha, double beta)
{
    check_angle(alpha);
    check_angle(beta);
    if (alpha > beta)
        throw ArgumentError("map_between requires alpha <= beta");
    return sincos_exact(alpha)[0] / sincos_exact(beta)[0];
}

} // namespace vwave
