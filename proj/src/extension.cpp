#include "vwave/extension.hpp"

#include "vwave/errors.hpp"
#include "vwave/fft.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vwave {

double cs_constant(FracOrder s)
{
    return std::pow(4.0, s.s) * std::tgamma(s.s + 1.0) / (2.0 * s.s * std::tgamma(1.0 - s.s));
}

double poisson_kernel(const std::vector<double>& x, double t, FracOrder s)
{
    if (!(t > 0.0))
        throw DomainError("Poisson kernel needs t > 0");
    const double n = static_cast<double>(x.size());
    double r2 = 0.0;
    for (double v : x)
        r2 += v * v;
    const double c = std::tgamma(0.5 * n + s.s) / (std::pow(kPi, 0.5 * n) * std::tgamma(s.s));
    return c * std::pow(t, 2.0 * s.s) / std::pow(r2 + t * t, 0.5 * n + s.s);
}

double poisson_symbol(double r, FracOrder s)
{
    if (r <= 0.0)
        return 1.0;
    if (s.s == 0.5)
        return std::exp(-r);
    if (r > 700.0)
        return 0.0;
    return std::pow(2.0, 1.0 - s.s) / std::tgamma(s.s) * std::pow(r, s.s) * std::cyl_bessel_k(s.s, r);
}

double poisson_symbol_derivative(double r, FracOrder s)
{
    if (s.s == 0.5)
        return -std::exp(-r);
    if (r <= 0.0)
        return s.s > 0.5 ? 0.0 : -INFINITY;
    if (r > 700.0)
        return 0.0;
    return -std::pow(2.0, 1.0 - s.s) / std::tgamma(s.s) * std::pow(r, s.s) * std::cyl_bessel_k(1.0 - s.s, r);
}

std::vector<double> geometric_slices(double t1, double ratio, double t_max)
{
    if (!(t1 > 0.0) || !(ratio > 1.0))
        throw ArgumentError("slice levels need t1 > 0 and ratio > 1");
    std::vector<double> t{0.0, t1};
    while (t.back() < t_max)
        t.push_back(t.back() * ratio);
    return t;
}

std::size_t ExtensionField::size() const
{
    std::size_t n = 1;
    for (int k = 0; k < dim; ++k)
        n *= static_cast<std::size_t>(counts[k]);
    return n;
}

double ExtensionField::cell_volume() const
{
    double v = 1.0;
    for (int k = 0; k < dim; ++k)
        v *= spacing[k];
    return v;
}

std::vector<double> default_slices(const GridFunction& u, FracOrder s, const ExtensionConfig& cfg)
{
    const Grid& g = u.grid();
    const auto q = cell_dims(g, cfg.cell);
    double longest = 0.0;
    for (int k = 0; k < g.dim; ++k)
        longest = std::max(longest, static_cast<double>(q[k]) * g.h);
    const double xi_min = 2.0 * kPi / longest;
    // Energy of a mode beyond level T is -C_s (T xi)^{1-2s} psi psi' (T xi) relative to its total.
    const double cs = cs_constant(s);
    double a = 1.0;
    while (-cs * std::pow(a, 1.0 - 2.0 * s.s) * poisson_symbol(a, s) * poisson_symbol_derivative(a, s)
           > cfg.tail_fraction)
        a *= 1.1;
    const double ratio = cfg.ratio > 0.0 ? cfg.ratio : std::min(1.25, 1.0 + 16.0 * g.h);
    return geometric_slices(cfg.first_factor * g.h, ratio, a / xi_min);
}

ExtensionField cs_extend(const GridFunction& u, FracOrder s, const std::vector<double>& t_slices, const FormConfig& cfg)
{
    u.check_support();
    if (t_slices.empty() || t_slices[0] != 0.0)
        throw ArgumentError("slice levels must start with t = 0");
    for (std::size_t k = 1; k < t_slices.size(); ++k)
        if (!(t_slices[k] > t_slices[k - 1]))
            throw ArgumentError("slice levels must be strictly increasing");

    const Grid& g = u.grid();
    ExtensionField f;
    f.dim = g.dim;
    f.counts = cell_dims(g, cfg);
    for (int k = 0; k < g.dim; ++k)
        f.spacing[k] = g.h;
    f.t = t_slices;
    f.source = g;

    RealFFT base(g.dim, f.counts);
    std::fill(base.real(), base.real() + base.real_size(), 0.0);
    const std::int64_t c1 = g.dim >= 2 ? g.counts[1] : 1, c2 = g.dim >= 3 ? g.counts[2] : 1;
    const std::int64_t q1 = g.dim >= 2 ? f.counts[1] : 1, q2 = g.dim >= 3 ? f.counts[2] : 1;
    for (std::int64_t a = 0; a < g.counts[0]; ++a)
        for (std::int64_t b = 0; b < c1; ++b)
            for (std::int64_t c = 0; c < c2; ++c)
                base.real()[(a * q1 + b) * q2 + c] = u.values[static_cast<std::size_t>((a * c1 + b) * c2 + c)];
    f.slices.assign(t_slices.size(), {});
    f.slices[0].assign(base.real(), base.real() + base.real_size());
    base.forward();
    const std::vector<std::complex<double>> uhat(base.spectrum(), base.spectrum() + base.complex_size());
    std::vector<double> xi = base.xi_squared(g.h);
    for (double& v : xi)
        v = std::sqrt(v);
    const double inv_n = 1.0 / static_cast<double>(base.real_size());

    const std::int64_t nslices = static_cast<std::int64_t>(t_slices.size());
#pragma omp parallel
    {
        RealFFT local(g.dim, f.counts);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t k = 1; k < nslices; ++k) {
            const double t = t_slices[static_cast<std::size_t>(k)];
            for (std::size_t m = 0; m < uhat.size(); ++m)
                local.spectrum()[m] = uhat[m] * poisson_symbol(t * xi[m], s);
            local.inverse();
            auto& out = f.slices[static_cast<std::size_t>(k)];
            out.resize(local.real_size());
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = local.real()[i] * inv_n;
        }
    }
    return f;
}

namespace {

// Sum over the cell of |central-difference gradient|^2 times the cell volume, periodic wrap.
double gradient_sum(const ExtensionField& f, const std::vector<double>& v)
{
    const std::int64_t n0 = f.counts[0], n1 = f.dim >= 2 ? f.counts[1] : 1, n2 = f.dim >= 3 ? f.counts[2] : 1;
    double acc = 0.0;
    for (std::int64_t a = 0; a < n0; ++a) {
        const std::int64_t ap = (a + 1) % n0, am = (a + n0 - 1) % n0;
        for (std::int64_t b = 0; b < n1; ++b) {
            const std::int64_t bp = (b + 1) % n1, bm = (b + n1 - 1) % n1;
            for (std::int64_t c = 0; c < n2; ++c) {
                const std::int64_t cp = (c + 1) % n2, cm = (c + n2 - 1) % n2;
                auto at = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
                    return v[static_cast<std::size_t>((i * n1 + j) * n2 + k)];
                };
                double g2 = 0.0;
                const double dx = (at(ap, b, c) - at(am, b, c)) / (2.0 * f.spacing[0]);
                g2 += dx * dx;
                if (f.dim >= 2) {
                    const double dy = (at(a, bp, c) - at(a, bm, c)) / (2.0 * f.spacing[1]);
                    g2 += dy * dy;
                }
                if (f.dim >= 3) {
                    const double dz = (at(a, b, cp) - at(a, b, cm)) / (2.0 * f.spacing[2]);
                    g2 += dz * dz;
                }
                acc += g2;
            }
        }
    }
    return acc * f.cell_volume();
}

double diff_sum(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        acc += d * d;
    }
    return acc;
}

} // namespace

WeightedEnergyReport weighted_energy_report(const ExtensionField& U, FracOrder s)
{
    if (U.t.size() < 9)
        throw ArgumentError("weighted energy needs at least 8 positive t-levels");
    const double p = 2.0 - 2.0 * s.s;
    const double vol = U.cell_volume();
    const std::size_t K = U.t.size() - 1;
    std::vector<double> grad(U.t.size());
    for (std::size_t j = 0; j < U.t.size(); ++j)
        grad[j] = gradient_sum(U, U.slices[j]);

    WeightedEnergyReport r;
    r.interval_contributions.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double a = U.t[k], b = U.t[k + 1];
        const double w = (std::pow(b, p) - std::pow(a, p)) / p;
        double dt_part;
        if (k == 0) // U = U0 + (U1 - U0) (t / t1)^{2s} on the first interval
            dt_part = 2.0 * s.s / std::pow(b, 2.0 * s.s) * diff_sum(U.slices[0], U.slices[1]) * vol;
        else
            dt_part = w * diff_sum(U.slices[k], U.slices[k + 1]) * vol / ((b - a) * (b - a));
        r.interval_contributions[k] = dt_part + 0.5 * w * (grad[k] + grad[k + 1]);
        r.value += r.interval_contributions[k];
    }
    const double last = r.interval_contributions[K - 1], prev = r.interval_contributions[K - 2];
    if (last > 0.0) {
        const double q = last / prev;
        if (!(q < 1.0))
            throw TruncationError("weighted energy is not decaying at the top t-level");
        r.tail = last * q / (1.0 - q);
    }
    r.top_fraction = r.value > 0.0 ? last / r.value : 0.0;
    if (r.value > 0.0 && r.tail > 0.05 * (r.value + r.tail))
        throw TruncationError("weighted energy tail estimate exceeds 5% of the total (t_max too small)");
    r.value += r.tail;
    return r;
}

double weighted_energy(const ExtensionField& U, FracOrder s)
{
    return weighted_energy_report(U, s).value;
}

GridFunction dtn_trace(const ExtensionField& U, FracOrder s)
{
    constexpr int kFit = 4;
    if (U.t.size() < kFit + 1)
        throw ArgumentError("trace fit needs four positive t-levels");
    if (U.t[1] > U.source.h * (1.0 + 1e-12))
        throw ArgumentError("first t-level must not exceed the grid spacing");
    const double two_s = 2.0 * s.s;
    // least squares on U - U0 = c t^{2s} + d t^2
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
    std::array<double, kFit> p{}, q{};
    for (int j = 0; j < kFit; ++j) {
        const double t = U.t[static_cast<std::size_t>(j + 1)];
        p[static_cast<std::size_t>(j)] = std::pow(t, two_s);
        q[static_cast<std::size_t>(j)] = t * t;
    }
    for (int j = 0; j < kFit; ++j) {
        a11 += p[j] * p[j];
        a12 += p[j] * q[j];
        a22 += q[j] * q[j];
    }
    const double det = a11 * a22 - a12 * a12;

    const std::size_t n = U.size();
    std::vector<double> c(n, 0.0);
    double res2 = 0.0, sig2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, kFit> d{};
        double b1 = 0.0, b2 = 0.0;
        for (int j = 0; j < kFit; ++j) {
            d[j] = U.slices[static_cast<std::size_t>(j + 1)][i] - U.slices[0][i];
            b1 += p[j] * d[j];
            b2 += q[j] * d[j];
        }
        c[i] = (a22 * b1 - a12 * b2) / det;
        const double e = (a11 * b2 - a12 * b1) / det;
        for (int j = 0; j < kFit; ++j) {
            const double r = d[j] - c[i] * p[j] - e * q[j];
            res2 += r * r;
            sig2 += d[j] * d[j];
        }
    }
    if (sig2 > 0.0 && std::sqrt(res2 / sig2) > 0.1)
        throw BoundaryLayerError("boundary-layer fit residual " + std::to_string(std::sqrt(res2 / sig2))
                                 + " exceeds 10%");

    const Grid& g = U.source;
    GridFunction out(std::make_shared<Mask>(g, std::vector<std::uint8_t>(g.size(), 1)));
    const double cs = cs_constant(s);
    const std::int64_t c1 = g.dim >= 2 ? g.counts[1] : 1, c2 = g.dim >= 3 ? g.counts[2] : 1;
    const std::int64_t q1 = g.dim >= 2 ? U.counts[1] : 1, q2 = g.dim >= 3 ? U.counts[2] : 1;
    for (std::int64_t a = 0; a < g.counts[0]; ++a)
        for (std::int64_t b = 0; b < c1; ++b)
            for (std::int64_t k = 0; k < c2; ++k)
                out.values[static_cast<std::size_t>((a * c1 + b) * c2 + k)]
                    = -cs * two_s * c[static_cast<std::size_t>((a * q1 + b) * q2 + k)];
    return out;
}

} // namespace vwave
