#include "vwave/theorems.hpp"

#include "vwave/errors.hpp"
#include "vwave/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace vwave {

GridFunction pushforward(const GridFunction& u, const Waveguide& w_beta, double alpha)
{
    w_beta.validate();
    const Grid& gb = u.grid();
    if (gb.dim != 2)
        throw DomainError("pushforward is implemented for planar waveguides");
    const double jac = map_between_jacobian(alpha, w_beta.beta);
    Waveguide wa = w_beta;
    wa.beta = alpha;
    if (alpha == w_beta.beta)
        return u;

    const auto mask = membership_mask(wa, waveguide_grid(wa, gb.h));
    const Grid& ga = mask->grid;
    GridFunction v(mask);
    const double scale = std::sqrt(jac);
    const double x_hi = gb.coord(0, gb.counts[0] - 1);
    for (std::size_t idx : mask->nodes) {
        const auto ij = ga.unravel(idx);
        const double z = ga.coord(1, ij[1]);
        const auto q = map_between(alpha, w_beta.beta, {ga.coord(0, ij[0]), z});
        const double zi = (z - gb.origin[1]) / gb.h;
        const auto row = static_cast<std::int64_t>(std::llround(zi));
        if (std::abs(zi - static_cast<double>(row)) > 1e-9 || row < 0 || row >= gb.counts[1])
            throw GeometryError("pushforward target row is not on the source lattice");
        if (q[0] < gb.origin[0] || q[0] > x_hi)
            throw GeometryError("pushforward maps a node outside the source window");
        const double xi = (q[0] - gb.origin[0]) / gb.h;
        const auto i0 = std::min(static_cast<std::int64_t>(std::floor(xi)), gb.counts[0] - 2);
        const double f = xi - static_cast<double>(i0);
        const double a = u.values[gb.index({i0, row, 0})], b = u.values[gb.index({i0 + 1, row, 0})];
        v.values[idx] = scale * ((1.0 - f) * a + f * b);
    }
    return v;
}

namespace {

double wrapped(std::int64_t j, std::int64_t n, double origin, double h)
{
    double z = origin + h * static_cast<double>(j);
    const double period = h * static_cast<double>(n);
    const double centre = origin + 0.5 * period;
    if (z >= centre)
        z -= period;
    return z;
}

} // namespace

ExtensionField straighten_extension(const ExtensionField& U, double beta)
{
    if (U.dim != 2)
        throw DomainError("straightening is implemented for planar waveguides");
    if (!(beta > 0.0) || beta > kPi / 2)
        throw ArgumentError("angle must lie in (0, pi/2]");
    const auto [sb, cb] = sincos_exact(beta);
    const std::int64_t nx = U.counts[0], nz = U.counts[1];
    const double h = U.spacing[0];

    ExtensionField V = U;
    V.spacing[0] = h * sb;
    const double amp = 1.0 / std::sqrt(sb);

    RealFFT fft(1, {nx, 1, 1});
    const double inv = 1.0 / static_cast<double>(nx);
    const double x0 = U.source.origin[0];
    for (std::size_t k = 0; k < U.slices.size(); ++k) {
        const auto& src = U.slices[k];
        auto& dst = V.slices[k];
        for (std::int64_t j = 0; j < nz; ++j) {
            const double z = wrapped(j, nz, U.source.origin[1], U.spacing[1]);
            // x = x' / sin(beta) + |z| cot(beta); tube node i sits at x' = (x0 + i h) sin(beta)
            const double shift = std::abs(z) * cb / (sb * h);
            if (shift == 0.0) {
                for (std::int64_t i = 0; i < nx; ++i)
                    dst[static_cast<std::size_t>(i * nz + j)] = amp * src[static_cast<std::size_t>(i * nz + j)];
                continue;
            }
            for (std::int64_t i = 0; i < nx; ++i)
                fft.real()[i] = src[static_cast<std::size_t>(i * nz + j)];
            fft.forward();
            for (std::size_t m = 0; m < fft.complex_size(); ++m) {
                const auto mm = static_cast<double>(m);
                double ph = 2.0 * kPi * mm * shift / static_cast<double>(nx);
                if (nx % 2 == 0 && static_cast<std::int64_t>(m) == nx / 2)
                    fft.spectrum()[m] *= std::cos(ph);
                else
                    fft.spectrum()[m] *= std::polar(1.0, ph);
            }
            fft.inverse();
            for (std::int64_t i = 0; i < nx; ++i)
                dst[static_cast<std::size_t>(i * nz + j)] = amp * inv * fft.real()[i];
        }
    }
    V.source.origin[0] = x0 * sb;
    return V;
}

double remainder_term(const ExtensionField& V, FracOrder s)
{
    if (V.dim != 2)
        throw DomainError("remainder term is implemented for planar waveguides");
    if (V.t.size() < 2)
        throw ArgumentError("remainder term needs t-levels");
    const std::int64_t nx = V.counts[0], nz = V.counts[1];
    std::vector<double> cross(V.t.size(), 0.0);
    for (std::size_t k = 0; k < V.t.size(); ++k) {
        const auto& v = V.slices[k];
        auto at = [&](std::int64_t i, std::int64_t j) { return v[static_cast<std::size_t>(i * nz + j)]; };
        double acc = 0.0;
        for (std::int64_t j = 0; j < nz; ++j) {
            const double z = wrapped(j, nz, V.source.origin[1], V.spacing[1]);
            if (z == 0.0)
                continue;
            const double sg = z > 0.0 ? 1.0 : -1.0;
            const std::int64_t jp = (j + 1) % nz, jm = (j + nz - 1) % nz;
            for (std::int64_t i = 0; i < nx; ++i) {
                const std::int64_t ip = (i + 1) % nx, im = (i + nx - 1) % nx;
                const double vx = (at(ip, j) - at(im, j)) / (2.0 * V.spacing[0]);
                const double vz = (at(i, jp) - at(i, jm)) / (2.0 * V.spacing[1]);
                acc += sg * vx * vz;
            }
        }
        cross[k] = acc * V.cell_volume();
    }
    const double p = 2.0 - 2.0 * s.s;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < V.t.size(); ++k) {
        const double w = (std::pow(V.t[k + 1], p) - std::pow(V.t[k], p)) / p;
        total += 0.5 * w * (cross[k] + cross[k + 1]);
    }
    return -2.0 * cs_constant(s) * total;
}

double SweepPolicy::truncation(double alpha) const
{
    if (!adaptive)
        return L_min;
    const double gap = 2.0 * (1.0 - std::sin(alpha));
    if (!(gap > 0.0))
        return L_max;
    return std::clamp(L_min / std::sqrt(gap), L_min, L_max);
}

SweepResult angle_sweep(FracOrder s, const std::vector<double>& angles, const CrossSection& omega,
                        const ThresholdStudy& study, const SweepPolicy& policy, const SolverConfig& cfg)
{
    if (angles.empty())
        throw ArgumentError("angle sweep needs at least one angle");
    if (!(policy.L_min > 0.0) || policy.L_max < policy.L_min || policy.k < 1 || !(policy.h > 0.0))
        throw ConfigError("invalid sweep policy");
    std::vector<double> sorted = angles;
    std::sort(sorted.begin(), sorted.end());

    SweepResult out;
    EigsOptions opt;
    opt.k = policy.k;
    for (double alpha : sorted) {
        Waveguide w{alpha, omega, policy.truncation(alpha)};
        const auto res = waveguide_eigs(w, s, policy.h, study, opt, cfg);
        SweepRow row;
        row.alpha = alpha;
        row.truncation_L = w.truncation_L;
        row.lambdas = res.values;
        row.lambda_1 = res.values.front();
        row.threshold = res.threshold;
        row.lower_bound = (1.0 - std::cos(alpha)) * res.threshold;
        row.count = res.below_threshold_count;
        row.bound_consistent = row.lower_bound <= row.lambda_1 && row.lambda_1 < row.threshold;
        out.consistent = out.consistent && row.bound_consistent;
        if (!out.rows.empty()) {
            const auto& prev = out.rows.back();
            if (row.count > prev.count)
                out.counts_nonincreasing = false;
            if (!(row.lambda_1 - prev.lambda_1 > study.eps_disc))
                out.lambda_increasing = false;
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

} // namespace vwave
