#include "oracles.hpp"
#include "test_util.hpp"

#include "vwave/errors.hpp"
#include "vwave/extension.hpp"
#include "vwave/fft.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>

using namespace vwave;
using oracle::cauchy_transform;
using oracle::radial_mass;

namespace {

GridFunction square_bump(double h, double cx, double cy, double r)
{
    GridFunction u(testutil::square_mask(h));
    const auto& g = u.grid();
    for (std::size_t i : u.mask->nodes) {
        const auto ix = g.unravel(i);
        const double x = g.coord(0, ix[0]), y = g.coord(1, ix[1]);
        const double q = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r);
        u.values[i] = q < 1.0 ? std::pow(1.0 - q, 3) : 0.0;
    }
    return u;
}

} // namespace

TEST_CASE("extension constants")
{
    CHECK(cs_constant(FracOrder(0.5)) == doctest::Approx(1.0).epsilon(1e-14));
    for (double s : {0.25, 0.75}) {
        const double ref = std::exp(s * std::log(4.0) + std::lgamma(s + 1.0) - std::lgamma(1.0 - s)) / (2.0 * s);
        CHECK(cs_constant(FracOrder(s)) == doctest::Approx(ref).epsilon(1e-13));
    }
    CHECK(poisson_kernel({0.0}, 1.0, FracOrder(0.5)) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK_THROWS_AS(poisson_kernel({0.0}, 0.0, FracOrder(0.5)), DomainError);
}

TEST_CASE("Poisson kernel has unit mass")
{
    for (int n : {1, 2})
        for (double s : {0.25, 0.5, 0.75})
            for (double t : {0.1, 1.0, 3.0}) {
                CAPTURE(n);
                CAPTURE(s);
                CHECK(std::abs(radial_mass(n, t, s) - 1.0) < 1e-6);
            }
}

TEST_CASE("half-order Fourier law of the unnormalized kernel")
{
    for (double t : {0.5, 1.0})
        for (double xi : {0.5, 1.0, 2.0}) {
            CAPTURE(t);
            CAPTURE(xi);
            CHECK(std::abs(cauchy_transform(xi, t) - std::sqrt(kPi / 2.0) * std::exp(-t * xi)) < 1e-6);
        }
}

TEST_CASE("symbol matches the Bessel form and its derivative")
{
    CHECK(poisson_symbol(0.0, FracOrder(0.3)) == 1.0);
    CHECK(poisson_symbol(1e-8, FracOrder(0.75)) == doctest::Approx(1.0).epsilon(1e-5));
    for (double s : {0.25, 0.5, 0.75})
        for (double r : {0.1, 1.0, 4.0}) {
            const double d = 1e-5;
            const double fd = (poisson_symbol(r + d, FracOrder(s)) - poisson_symbol(r - d, FracOrder(s))) / (2 * d);
            CHECK(poisson_symbol_derivative(r, FracOrder(s)) == doctest::Approx(fd).epsilon(1e-7));
        }
    CHECK(poisson_symbol(2.0, FracOrder(0.5)) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("half-order slices equal the periodized Poisson convolution")
{
    const double h = 1.0 / 64, sigma = 0.08;
    auto u = testutil::unit_interval_function(h, [&](double x) {
        return std::exp(-(x - 0.5) * (x - 0.5) / (2 * sigma * sigma));
    });
    const std::vector<double> t{0.0, 0.01, 0.1, 0.5};
    const auto F = cs_extend(u, FracOrder(0.5), t, FormConfig{});
    const double P = static_cast<double>(F.counts[0]) * h;
    const double x0 = F.source.origin[0];
    for (std::size_t k = 1; k < t.size(); ++k)
        for (std::int64_t i : {0L, 20L, 32L, 50L, 100L}) {
            const double x = x0 + static_cast<double>(i) * h;
            const double ref = oracle::periodized_poisson(
                [&](double y) { return std::exp(-(y - 0.5) * (y - 0.5) / (2 * sigma * sigma)); }, x, t[k], P,
                0.5 - 12 * sigma, 0.5 + 12 * sigma);
            CAPTURE(t[k]);
            CAPTURE(i);
            CHECK(std::abs(F.slices[k][static_cast<std::size_t>(i)] - ref) < 1e-6);
        }
}

TEST_CASE("slices obey the maximum principle")
{
    for (double s : {0.25, 0.75}) {
        const auto u = square_bump(1.0 / 32, 0.5, 0.5, 0.4);
        ExtensionConfig ec;
        const auto t = default_slices(u, FracOrder(s), ec);
        const auto F = cs_extend(u, FracOrder(s), t, ec.cell);
        double hi = 0.0, lo = 0.0;
        for (std::size_t k = 1; k < F.slices.size(); ++k)
            for (double v : F.slices[k]) {
                hi = std::max(hi, v);
                lo = std::min(lo, v);
            }
        CHECK(hi <= 1.0 + 1e-12);
        CHECK(lo >= -1e-3);
    }
}

TEST_CASE("energy identity on a smooth bump")
{
    for (double s : {0.25, 0.5, 0.75}) {
        const auto u = square_bump(1.0 / 32, 0.45, 0.55, 0.3);
        ExtensionConfig ec;
        ec.cell.padding = 4;
        const auto F = cs_extend(u, FracOrder(s), default_slices(u, FracOrder(s), ec), ec.cell);
        const auto rep = weighted_energy_report(F, FracOrder(s));
        const double a = form_energy(u, FracOrder(s), ec.cell);
        CAPTURE(s);
        CHECK(std::abs(cs_constant(FracOrder(s)) * rep.value - a) / a < 0.05);
        CHECK(rep.tail < 1e-3 * rep.value);
    }
}

TEST_CASE("weighted energy guards")
{
    const auto u = square_bump(1.0 / 32, 0.5, 0.5, 0.3);
    CHECK_THROWS_AS(weighted_energy(cs_extend(u, FracOrder(0.5), {0.0, 0.01, 0.02, 0.04}), FracOrder(0.5)),
                    ArgumentError);
    const auto short_t = geometric_slices(1.0 / 128, 1.25, 0.2);
    CHECK_THROWS_AS(weighted_energy(cs_extend(u, FracOrder(0.5), short_t), FracOrder(0.5)), TruncationError);
    CHECK_THROWS_AS(cs_extend(u, FracOrder(0.5), {0.1, 0.2}), ArgumentError);
}

TEST_CASE("trace fit reproduces the periodic multiplier")
{
    for (double s : {0.25, 0.5, 0.75}) {
        const double h = 1.0 / 32;
        const auto u = square_bump(h, 0.5, 0.5, 0.35);
        ExtensionConfig ec;
        const auto F = cs_extend(u, FracOrder(s), default_slices(u, FracOrder(s), ec), ec.cell);
        const auto d = dtn_trace(F, FracOrder(s));

        RealFFT fft(2, F.counts);
        std::copy(F.slices[0].begin(), F.slices[0].end(), fft.real());
        fft.forward();
        const auto xi2 = fft.xi_squared(h);
        for (std::size_t m = 0; m < fft.complex_size(); ++m)
            fft.spectrum()[m] *= std::pow(xi2[m], s);
        fft.inverse();
        double num = 0.0, den = 0.0;
        const auto& g = d.grid();
        for (std::int64_t a = 0; a < g.counts[0]; ++a)
            for (std::int64_t b = 0; b < g.counts[1]; ++b) {
                const double ref = fft.real()[a * F.counts[1] + b] / static_cast<double>(fft.real_size());
                const double got = d.values[static_cast<std::size_t>(a * g.counts[1] + b)];
                num += (got - ref) * (got - ref);
                den += ref * ref;
            }
        CAPTURE(s);
        CHECK(std::sqrt(num / den) < 0.05);
    }
}

TEST_CASE("trace fit rejects a rough trace")
{
    const auto u = testutil::random_function(testutil::square_mask(1.0 / 16), 7);
    ExtensionConfig ec;
    ec.first_factor = 1.0;
    ec.ratio = 1.5;
    const auto F = cs_extend(u, FracOrder(0.75), default_slices(u, FracOrder(0.75), ec), ec.cell);
    CHECK_THROWS_AS(dtn_trace(F, FracOrder(0.75)), BoundaryLayerError);
}
