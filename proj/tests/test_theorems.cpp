#include <doctest.h>

#include "test_util.hpp"
#include "vwave/errors.hpp"
#include "vwave/theorems.hpp"

#include <cmath>

using namespace vwave;

namespace {

const CrossSection kUnit = CrossSection::interval(0.0, 1.0);

double norm2(const GridFunction& u)
{
    double acc = 0.0;
    for (double v : u.values)
        acc += v * v;
    return acc * std::pow(u.grid().h, u.grid().dim);
}

const ThresholdResult& ground32()
{
    static const ThresholdResult g = threshold(kUnit, FracOrder(0.5), 1.0 / 32);
    return g;
}

} // namespace

TEST_CASE("cutoff profile")
{
    CHECK(cutoff_profile(0.5) == 1.0);
    CHECK(cutoff_profile(1.0) == 1.0);
    CHECK(cutoff_profile(3.0) == 0.0);
    CHECK(cutoff_profile(2.0) == 0.0);
    CHECK(cutoff_profile(1.5) == doctest::Approx(0.5));
    for (double r = 1.0; r < 2.0; r += 0.01) {
        CHECK(cutoff_profile(r + 0.01) <= cutoff_profile(r));
        const double fd = (cutoff_profile(r + 1e-6) - cutoff_profile(r - 1e-6)) / 2e-6;
        CHECK(cutoff_profile_derivative(r) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
    CHECK(cutoff_profile_derivative(1.0) == 0.0);
    CHECK(cutoff_profile_derivative(2.0) == 0.0);
}

TEST_CASE("cutoff case split")
{
    CHECK(radial_cutoff(2, FracOrder(0.25)));
    CHECK(radial_cutoff(2, FracOrder(0.5)));
    CHECK_FALSE(radial_cutoff(2, FracOrder(0.75)));
    CHECK_FALSE(radial_cutoff(3, FracOrder(0.5)));
    CHECK(cutoff_chi(1.2, 1.2, 1.0, 2, FracOrder(0.25)) < cutoff_chi(1.2, 0.0, 1.0, 2, FracOrder(0.25)));
    CHECK(cutoff_chi(1.2, 5.0, 1.0, 3, FracOrder(0.5)) == cutoff_chi(1.2, 0.0, 1.0, 3, FracOrder(0.5)));
    CHECK(cutoff_chi(-1.2, 0.3, 1.0, 2, FracOrder(0.25)) == cutoff_chi(1.2, 0.3, 1.0, 2, FracOrder(0.25)));
    CHECK_THROWS_AS(cutoff_chi(0.0, 0.0, 0.0, 2, FracOrder(0.5)), ArgumentError);
}

TEST_CASE("gamma rule and case exponents")
{
    CHECK(trial_gamma(2, FracOrder(0.5)) == 1.0);
    CHECK(trial_gamma(2, FracOrder(0.25)) == 1.0);
    CHECK(trial_gamma(2, FracOrder(0.75)) == 0.75);
    TrialConfig c;
    c.gamma_boundary = 0.5;
    CHECK(trial_gamma(2, FracOrder(0.5), c) == 0.5);
    CHECK(case_decay(2, FracOrder(0.5)) == std::pair{1.0, true});
    CHECK(case_decay(2, FracOrder(0.25)).first == doctest::Approx(0.5));
    CHECK(case_decay(2, FracOrder(0.75)).first == 2.0);
}

TEST_CASE("decay fit recovers synthetic exponents")
{
    const std::vector<double> R{8, 16, 32, 64};
    std::vector<double> a, b;
    for (double r : R) {
        a.push_back(3.0 * std::pow(r, -1.5));
        b.push_back(0.2 * std::log(r) / r);
    }
    CHECK(fit_decay_exponent(R, a, false) == doctest::Approx(1.5));
    CHECK(fit_decay_exponent(R, b, true) == doctest::Approx(1.0));
    CHECK(std::isnan(fit_decay_exponent(R, {1.0, -1.0, 1.0, 1.0}, false)));
    CHECK_THROWS_AS(fit_decay_exponent({8}, {1.0}, false), ArgumentError);
}

TEST_CASE("cross-section spectrum matches the discrete samples")
{
    const auto& g = ground32();
    const CrossSectionSpectrum sp(g.phi, FracOrder(0.5));
    // band-limited interpolant: Parseval on the samples, and the band-limited quotient sits near Lambda
    CHECK(sp.mass() == doctest::Approx(norm2(g.phi)).epsilon(1e-6));
    CHECK(std::abs(sp.lambda() - g.value) < 0.02 * g.value);
    CHECK(sp.g(0.0) == doctest::Approx(sp.mass()).epsilon(1e-6));
    const double fd = (sp.g(0.3 + 1e-5) - sp.g(0.3 - 1e-5)) / 2e-5;
    CHECK(sp.dg(0.3) == doctest::Approx(fd).epsilon(1e-5));
    // C_s int_0^inf t^{1-2s} e(t) dt = Lambda * mass, and C_1/2 = 1
    CHECK(sp.energy_tail(0.0) == doctest::Approx(sp.lambda() * sp.mass()).epsilon(1e-10));
    const double x = 0.37, t = 0.2;
    const auto f = sp.field(x, t);
    CHECK(f[1] == doctest::Approx((sp.field(x + 1e-5, t)[0] - sp.field(x - 1e-5, t)[0]) / 2e-5).epsilon(1e-5));
    CHECK(f[2] == doctest::Approx((sp.field(x, t + 1e-5)[0] - sp.field(x, t - 1e-5)[0]) / 2e-5).epsilon(1e-5));
}

TEST_CASE("trial certificate pieces at beta = 45 deg")
{
    const FracOrder s(0.5);
    const Waveguide w{kPi / 4, kUnit, 4.0};
    const auto trial = build_trial(w, s, 8.0, ground32());
    const auto& p = trial.params;
    CHECK(p.epsilon == doctest::Approx(1.0 / 8.0));
    CHECK(p.radial);

    const Grid& g = trial.trace.grid();
    double asym = 0.0, peak = 0.0;
    for (std::size_t idx : trial.trace.mask->nodes) {
        const auto ij = g.unravel(idx);
        const std::size_t mirror = g.index({ij[0], g.counts[1] - 1 - ij[1], 0});
        asym = std::max(asym, std::abs(trial.trace.values[idx] - trial.trace.values[mirror]));
        peak = std::max(peak, std::abs(trial.trace.values[idx]));
    }
    CHECK(asym <= 1e-14 * peak);

    const auto d = decompose_trial(trial);
    CHECK(d.I3 < 0.0);
    CHECK(d.I3 == doctest::Approx(d.I3_boundary).epsilon(1e-6));
    CHECK(d.I1 <= 1e-12);
    CHECK(std::abs(d.I23) < 1e-10);
    CHECK(d.I4 > 0.0);
    CHECK(d.mismatch <= 0.05);
    const double e = p.epsilon;
    CHECK(d.total == doctest::Approx(2.0 * (d.I1 + d.I21 + d.I22 + d.I23 + e * d.I3 + e * e * d.I4)));
}

TEST_CASE("trial guards")
{
    const FracOrder s(0.5);
    const Waveguide w{kPi / 4, kUnit, 4.0};
    CHECK_THROWS_AS(build_trial(w, s, 3.0, ground32()), ArgumentError);
    const Waveguide w3{kPi / 4, CrossSection({0.0, 0.0}, {1.0, 1.0}), 4.0};
    CHECK_THROWS_AS(build_trial(w3, s, 8.0, ground32()), DomainError);
    TrialConfig bad;
    bad.trace_h = 0.0;
    CHECK_THROWS_AS(build_trial(w, s, 8.0, ground32(), bad), ConfigError);
    CHECK_THROWS_AS(decompose_trial(Trial{}), StateError);
    // a centred bump with no relocation budget has I3 = 0 by symmetry
    TrialConfig stuck;
    stuck.max_relocations = 0;
    CHECK_THROWS_AS(build_trial(w, s, 8.0, ground32(), stuck), ConsistencyError);
}

TEST_CASE("straight tube without bump: gap decays to zero from above")
{
    const FracOrder s(0.5);
    const Waveguide w{kPi / 2, kUnit, 4.0};
    TrialConfig c;
    c.bump_amplitude = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double R : {8.0, 16.0}) {
        const auto d = decompose_trial(build_trial(w, s, R, ground32(), c), c);
        CHECK(d.rayleigh_gap > 0.0);
        CHECK(d.rayleigh_gap < prev);
        CHECK(d.I3 == 0.0);
        prev = d.rayleigh_gap;
    }
}

TEST_CASE("pushforward identity and norm")
{
    const double h = 1.0 / 64;
    const Waveguide straight{kPi / 2, kUnit, 3.0};
    const auto mask = membership_mask(straight, waveguide_grid(straight, h));
    GridFunction u(mask);
    const Grid& g = mask->grid;
    for (std::size_t idx : mask->nodes) {
        const auto ij = g.unravel(idx);
        const double x = g.coord(0, ij[0]), z = g.coord(1, ij[1]);
        u.values[idx] = std::sqrt(x * (1.0 - x)) * std::exp(-z * z);
    }
    const auto same = pushforward(u, straight, kPi / 2);
    CHECK(same.values == u.values);
    const auto v = pushforward(u, straight, kPi / 6);
    CHECK(std::abs(norm2(v) - norm2(u)) <= 1e-3 * norm2(u));
    CHECK_THROWS_AS(pushforward(u, Waveguide{kPi / 4, kUnit, 3.0}, kPi / 3), ArgumentError);
    // the source grid is shorter than the truncation it claims
    CHECK_THROWS_AS(pushforward(u, Waveguide{kPi / 2, kUnit, 4.0}, kPi / 6), GeometryError);
}

TEST_CASE("pushforward lowers the form and the remainder identity holds")
{
    const FracOrder s(0.5);
    const double h = 1.0 / 32;
    SolverConfig cfg;
    const auto study = threshold_study(kUnit, s, {1.0 / 32, 1.0 / 64}, cfg);
    const Waveguide w{kPi / 3, kUnit, 4.0};
    const auto r = waveguide_eigs(w, s, h, study, {}, cfg);
    const auto& u = r.vectors.front();
    REQUIRE(r.values.front() < r.threshold);
    const auto fc = form_config_for(kUnit, cfg);

    const double q60 = rayleigh(u, s, fc);
    const double q45 = rayleigh(pushforward(u, w, kPi / 4), s, fc);
    const double q30 = rayleigh(pushforward(u, w, kPi / 6), s, fc);
    CHECK(q45 < q60);
    CHECK(q30 < q45);

    ExtensionConfig ec;
    ec.cell = fc;
    const auto U = cs_extend(u, s, default_slices(u, s, ec), ec.cell);
    const auto V = straighten_extension(U, w.beta);
    const double cs = cs_constant(s);
    const double EV = weighted_energy(V, s);
    const double rem = remainder_term(V, s);
    const double form = q60 * norm2(u);
    CHECK(rem < 0.0);
    CHECK(std::abs(rem) <= cs * EV);
    CHECK(std::abs(cs * EV + std::cos(w.beta) * rem - form) <= 0.05 * form);
}

TEST_CASE("remainder vanishes for fields even in z")
{
    const FracOrder s(0.5);
    const double h = 1.0 / 32;
    const Waveguide straight{kPi / 2, kUnit, 3.0};
    const auto mask = membership_mask(straight, waveguide_grid(straight, h));
    GridFunction u(mask);
    const Grid& g = mask->grid;
    for (std::size_t idx : mask->nodes) {
        const auto ij = g.unravel(idx);
        const double x = g.coord(0, ij[0]), z = g.coord(1, ij[1]);
        u.values[idx] = std::sin(kPi * x) * std::exp(-z * z);
    }
    ExtensionConfig ec;
    const auto U = cs_extend(u, s, default_slices(u, s, ec), ec.cell);
    const auto V = straighten_extension(U, kPi / 2);
    for (std::size_t k = 0; k < U.slices.size(); ++k)
        CHECK(V.slices[k] == U.slices[k]);
    CHECK(std::abs(remainder_term(V, s)) < 1e-10 * weighted_energy(V, s));
}

TEST_CASE("sweep policy and squeeze bookkeeping")
{
    SweepPolicy p;
    CHECK(p.truncation(kPi / 6) == doctest::Approx(4.0));
    CHECK(p.truncation(kPi / 2) == 20.0);
    CHECK(p.truncation(kPi / 3) == doctest::Approx(4.0 / std::sqrt(2.0 - std::sqrt(3.0))));
    p.adaptive = false;
    CHECK(p.truncation(kPi / 2.1) == 4.0);

    const FracOrder s(0.5);
    SolverConfig cfg;
    const auto study = threshold_study(kUnit, s, {1.0 / 32, 1.0 / 64}, cfg);
    p.L_min = 2.5;
    const auto res = angle_sweep(s, {kPi / 3, kPi / 4}, kUnit, study, p, cfg);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.rows[0].alpha < res.rows[1].alpha);
    for (const auto& row : res.rows) {
        CHECK(row.lower_bound == doctest::Approx((1.0 - std::cos(row.alpha)) * row.threshold).epsilon(1e-12));
        CHECK(row.lambda_1 == row.lambdas.front());
        CHECK(row.bound_consistent == (row.lower_bound <= row.lambda_1 && row.lambda_1 < row.threshold));
    }
    CHECK(res.counts_nonincreasing == (res.rows[1].count <= res.rows[0].count));
    CHECK_THROWS_AS(angle_sweep(s, {}, kUnit, study, p, cfg), ArgumentError);
}
