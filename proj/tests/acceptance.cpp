// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include "commands.hpp"
#include "oracles.hpp"

#include "vwave/errors.hpp"
#include "vwave/theorems.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace vwave;

namespace {

constexpr double kDeg = kPi / 180.0;
const CrossSection kUnit = CrossSection::interval(0.0, 1.0);

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double norm2(const GridFunction& u)
{
    double acc = 0.0;
    for (double v : u.values)
        acc += v * v;
    return acc * std::pow(u.grid().h, u.grid().dim);
}

GridFunction sample(const MaskPtr& mask, const std::function<double(double, double)>& f)
{
    GridFunction u(mask);
    const Grid& g = mask->grid;
    for (std::size_t i : mask->nodes) {
        const auto ij = g.unravel(i);
        u.values[i] = f(g.coord(0, ij[0]), g.dim >= 2 ? g.coord(1, ij[1]) : 0.5);
    }
    return u;
}

// lattice points of the grid lying in the closed cross-section (the bounding box adds zero ghost nodes)
std::size_t closed_lattice_size(const Grid& g, const CrossSection& omega)
{
    std::size_t total = 1;
    for (int k = 0; k < g.dim; ++k) {
        std::size_t c = 0;
        for (std::int64_t i = 0; i < g.counts[static_cast<std::size_t>(k)]; ++i) {
            const double x = g.coord(k, i);
            c += x >= omega.lo[static_cast<std::size_t>(k)] - 1e-12 && x <= omega.hi[static_cast<std::size_t>(k)] + 1e-12;
        }
        total *= c;
    }
    return total;
}

// Shared state computed once and reused across criteria.
struct Shared {
    FracOrder half{0.5};
    SolverConfig solver;
    ThresholdStudy study;
    SweepPolicy policy;
    SweepResult sweep;
    std::map<int, EigenResult> scaled; // angle in degrees -> solve at 1.5 L
    bool sweep_done = false;
};

Shared& shared()
{
    static Shared s;
    return s;
}

const ThresholdStudy& half_study()
{
    auto& sh = shared();
    if (sh.study.h.empty())
        sh.study = threshold_study(kUnit, sh.half, {1.0 / 32, 1.0 / 64, 1.0 / 128}, sh.solver);
    return sh.study;
}

const SweepResult& half_sweep()
{
    auto& sh = shared();
    if (!sh.sweep_done) {
        sh.sweep = angle_sweep(sh.half, {30 * kDeg, 45 * kDeg, 60 * kDeg, 75 * kDeg, 85 * kDeg}, kUnit, half_study(),
                               sh.policy, sh.solver);
        sh.sweep_done = true;
    }
    return sh.sweep;
}

Outcome energy_identity()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> centre(0.35, 0.65), radius(0.2, 0.3);
    struct BumpSpec {
        double cx, cy, r;
    };
    std::vector<BumpSpec> bumps(5);
    for (auto& b : bumps)
        b = {centre(rng), centre(rng), radius(rng)};
    const CrossSection sq({0.0, 0.0}, {1.0, 1.0});
    FormConfig cell;
    cell.padding = 4.0;
    double worst64 = 0.0, worst128 = 0.0;
    bool refined = true;
    for (double s : {0.25, 0.5, 0.75}) {
        const FracOrder fs(s);
        for (const auto& b : bumps) {
            double err[2];
            int k = 0;
            for (double h : {1.0 / 64, 1.0 / 128}) {
                const auto u = sample(section_mask(sq, section_grid(sq, h)), [&](double x, double y) {
                    const double q = ((x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy)) / (b.r * b.r);
                    return q < 1.0 ? std::pow(1.0 - q, 3) : 0.0;
                });
                ExtensionConfig ec;
                ec.cell = cell;
                const auto U = cs_extend(u, fs, default_slices(u, fs, ec), cell);
                const double a = form_energy(u, fs, cell);
                err[k++] = std::abs(cs_constant(fs) * weighted_energy(U, fs) - a) / a;
            }
            worst64 = std::max(worst64, err[0]);
            worst128 = std::max(worst128, err[1]);
            refined = refined && err[1] < err[0];
        }
    }
    const double sec = seconds_since(t0);
    return {worst64 <= 0.05 && refined && sec <= 300.0,
            fmt("max rel mismatch %.3f%% at h=1/64, %.3f%% at h=1/128, every case smaller on refinement: %s (%.0f s)",
                100 * worst64, 100 * worst128, refined ? "yes" : "no", sec)};
}

Outcome kernel_identities()
{
    const double v = poisson_kernel({0.0}, 1.0, FracOrder(0.5));
    const bool value_ok = std::abs(v - 1.0 / kPi) <= 1e-14;
    double mass_err = 0.0;
    for (int n : {1, 2})
        for (double s : {0.25, 0.5, 0.75})
            for (double t : {0.1, 1.0, 3.0})
                mass_err = std::max(mass_err, std::abs(oracle::radial_mass(n, t, s) - 1.0));
    double law_err = 0.0;
    for (double t : {0.5, 1.0})
        for (double xi : {0.5, 1.0, 2.0})
            law_err = std::max(law_err, std::abs(oracle::cauchy_transform(xi, t) - std::sqrt(kPi / 2) * std::exp(-t * xi)));
    // slice law through the periodized kernel
    const double h = 1.0 / 64, sigma = 0.08;
    auto f = [&](double x) { return std::exp(-(x - 0.5) * (x - 0.5) / (2 * sigma * sigma)); };
    const auto u = sample(section_mask(kUnit, section_grid(kUnit, h)), [&](double x, double) { return f(x); });
    const std::vector<double> ts{0.0, 0.01, 0.1, 0.5};
    const auto F = cs_extend(u, FracOrder(0.5), ts, FormConfig{});
    const double P = static_cast<double>(F.counts[0]) * h;
    double slice_err = 0.0;
    for (std::size_t k = 1; k < ts.size(); ++k)
        for (std::int64_t i : {0L, 20L, 32L, 50L, 100L}) {
            const double x = F.source.origin[0] + static_cast<double>(i) * h;
            const double ref = oracle::periodized_poisson(f, x, ts[k], P, 0.5 - 12 * sigma, 0.5 + 12 * sigma);
            slice_err = std::max(slice_err, std::abs(F.slices[k][static_cast<std::size_t>(i)] - ref));
        }
    return {value_ok && mass_err <= 1e-6 && law_err <= 1e-6 && slice_err <= 1e-6,
            fmt("P(0,1)=1/pi err %.1e, unit mass err %.1e, sqrt(pi/2)e^{-t xi} err %.1e, slice law err %.1e",
                std::abs(v - 1.0 / kPi), mass_err, law_err, slice_err)};
}

Outcome oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double h = 1.0 / 32;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0), C(0.3, 0.7), W(0.1, 0.25);
    // 20 functions vanishing on the boundary: 10 random sine series, 10 random bumps; 1D and 2D alternate
    std::vector<std::pair<int, std::function<double(double, double)>>> corpus;
    for (int j = 0; j < 10; ++j) {
        std::array<double, 4> c{1.0, U(rng), U(rng), U(rng)};
        const int n = 1 + j % 2;
        corpus.emplace_back(n, [c, n](double x, double y) {
            double a = 0.0, b = 0.0;
            for (int k = 0; k < 4; ++k) {
                a += c[static_cast<std::size_t>(k)] / (k + 1) * std::sin((k + 1) * kPi * x);
                b += c[static_cast<std::size_t>(3 - k)] / (k + 1) * std::sin((k + 1) * kPi * y);
            }
            return n == 1 ? a : a * b;
        });
    }
    for (int j = 0; j < 10; ++j) {
        const double cx = C(rng), cy = C(rng), w = W(rng);
        const int n = 1 + j % 2;
        corpus.emplace_back(n, [=](double x, double y) {
            const double q = ((x - cx) * (x - cx) + (n == 2 ? (y - cy) * (y - cy) : 0.0)) / (w * w);
            return q < 1.0 ? std::pow(1.0 - q, 3) : 0.0;
        });
    }
    const CrossSection sq({0.0, 0.0}, {1.0, 1.0});
    const MaskPtr masks[2] = {section_mask(kUnit, section_grid(kUnit, h)), section_mask(sq, section_grid(sq, h))};
    double worst = 0.0;
    std::size_t max_nodes = 0;
    for (double s : {0.25, 0.5, 0.75}) {
        GagliardoOracle o1(1, FracOrder(s), h), o2(2, FracOrder(s), h);
        o1.calibrate();
        o2.calibrate();
        for (const auto& [n, f] : corpus) {
            const auto u = sample(masks[n - 1], f);
            max_nodes = std::max(max_nodes, closed_lattice_size(u.grid(), n == 1 ? kUnit : sq));
            const double a = form_energy(u, FracOrder(s));
            const double b = (n == 1 ? o1 : o2).energy(u);
            worst = std::max(worst, std::abs(a - b) / a);
        }
    }
    const double sec = seconds_since(t0);
    return {worst <= 0.01 && max_nodes <= 33 * 33 && sec <= 120.0,
            fmt("20 functions x 3 orders, worst relative gap %.3f%%, largest grid %zu nodes (%.1f s)", 100 * worst,
                max_nodes, sec)};
}

Outcome threshold_stability()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto& st = half_study();
    const double a = st.values[1], b = st.values[2];
    const double drift = std::abs(a - b) / b;
    const double h = 1.0 / 128;
    const auto& sh = shared();
    const double wide = threshold(CrossSection::interval(0.0, 2.0), sh.half, h, sh.solver).value;
    const double law = std::abs(wide / (std::pow(2.0, -1.0) * st.values[2]) - 1.0);
    const double sec = seconds_since(t0);
    return {drift <= 0.01 && law <= 0.01 && sec <= 600.0,
            fmt("Lambda = %.6f / %.6f / %.6f (h = 1/32, 1/64, 1/128), finest drift %.3f%%, dilation law error %.3f%% at "
                "h = 1/128, eps_disc = %.6f",
                st.values[0], st.values[1], st.values[2], 100 * drift, 100 * law, st.eps_disc)};
}

Outcome existence()
{
    const auto t0 = std::chrono::steady_clock::now();
    auto& sh = shared();
    const auto& sw = half_sweep();
    const double eps = half_study().eps_disc;
    bool ok = true;
    std::string detail;
    for (int deg : {30, 45, 60, 75}) {
        const auto& row = *std::find_if(sw.rows.begin(), sw.rows.end(),
                                        [&](const SweepRow& r) { return std::abs(r.alpha - deg * kDeg) < 1e-12; });
        const Waveguide w{row.alpha, kUnit, 1.5 * row.truncation_L};
        EigsOptions opt;
        const auto big = waveguide_eigs(w, sh.half, sh.policy.h, half_study(), opt, sh.solver);
        sh.scaled[deg] = big;
        const double m1 = row.threshold - row.lambda_1, m2 = big.threshold - big.values.front();
        const bool pass = m1 > eps && m2 > eps;
        ok = ok && pass;
        detail += fmt("%d deg: lambda_1 %.6f margin %.4f (L=%.1f), %.4f (L=%.1f)%s; ", deg, row.lambda_1, m1,
                      row.truncation_L, m2, w.truncation_L, pass ? "" : " [short]");
    }
    const double sec = seconds_since(t0);
    return {ok && sec <= 1800.0, detail + fmt("eps_disc %.4f (%.0f s)", eps, sec)};
}

Outcome straight_tube()
{
    const auto& sh = shared();
    const Waveguide w{kPi / 2, kUnit, 4.0};
    const auto r = waveguide_eigs(w, sh.half, sh.policy.h, half_study(), {}, sh.solver);
    return {r.below_threshold_count == 0,
            fmt("beta = 90 deg: lambda_1 %.6f, threshold %.6f (reference %.6f), count %d", r.values.front(), r.threshold,
                r.reference_threshold, r.below_threshold_count)};
}

Outcome monotonicity()
{
    const auto& sw = half_sweep();
    const double eps = half_study().eps_disc;
    bool inc = true, counts = true;
    std::string detail;
    const SweepRow* prev = nullptr;
    for (const auto& row : sw.rows) {
        if (row.alpha > 80 * kDeg)
            break;
        detail += fmt("%.0f deg %.6f (count %d); ", row.alpha / kDeg, row.lambda_1, row.count);
        if (prev) {
            inc = inc && row.lambda_1 - prev->lambda_1 > eps;
            counts = counts && row.count <= prev->count;
        }
        prev = &row;
    }
    return {inc && counts, detail + fmt("increasing beyond eps_disc: %s, counts non-increasing: %s", inc ? "yes" : "no",
                                        counts ? "yes" : "no")};
}

Outcome pushforward_certificate()
{
    const auto& sh = shared();
    const Waveguide w{60 * kDeg, kUnit, 4.0};
    const auto r = waveguide_eigs(w, sh.half, sh.policy.h, half_study(), {}, sh.solver);
    const auto& u = r.vectors.front();
    const auto fc = form_config_for(kUnit, sh.solver);
    const double q60 = rayleigh(u, sh.half, fc);
    const double q45 = rayleigh(pushforward(u, w, 45 * kDeg), sh.half, fc);
    const double q30 = rayleigh(pushforward(u, w, 30 * kDeg), sh.half, fc);
    ExtensionConfig ec;
    ec.cell = fc;
    const auto U = cs_extend(u, sh.half, default_slices(u, sh.half, ec), ec.cell);
    const auto V = straighten_extension(U, w.beta);
    const double energy = cs_constant(sh.half) * weighted_energy(V, sh.half);
    const double rem = remainder_term(V, sh.half);
    const double form = q60 * norm2(u);
    const double mismatch = std::abs(energy + std::cos(w.beta) * rem - form) / form;
    return {q45 < q60 && q30 < q45 && mismatch <= 0.05 && rem < 0.0,
            fmt("rayleigh 60/45/30 deg: %.6f > %.6f > %.6f; a_s = %.6f vs C_s E + cos(b) r = %.6f (%.2f%%), r = %.5f",
                q60, q45, q30, form, energy + std::cos(w.beta) * rem, 100 * mismatch, rem)};
}

Outcome squeeze()
{
    const auto& sw = half_sweep();
    bool ok = true;
    std::string detail;
    for (const auto& row : sw.rows) {
        const bool b = row.lower_bound <= row.lambda_1 && row.lambda_1 < row.threshold;
        ok = ok && b;
        detail += fmt("%.0f deg: %.4f <= %.6f < %.6f%s; ", row.alpha / kDeg, row.lower_bound, row.lambda_1,
                      row.threshold, b ? "" : " [violated]");
    }
    const auto& last = sw.rows.back();
    const double gap = last.threshold - last.lambda_1, bound = std::cos(last.alpha) * last.threshold;
    ok = ok && gap <= bound;
    return {ok, detail + fmt("85 deg: threshold - lambda_1 = %.6f <= cos(85) threshold = %.4f", gap, bound)};
}

Outcome trial_certificate()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto& sh = shared();
    const auto& st = half_study();
    const ThresholdResult ground{st.values.back(), st.phi, 0.0};
    const Waveguide w{45 * kDeg, kUnit, 4.0};
    const TrialConfig tc;
    std::vector<double> Rs{8, 16, 32, 64}, decay;
    double min_gap = 1e300;
    bool i1 = true, i23 = true, audit = true;
    std::string detail;
    for (double R : Rs) {
        const auto d = decompose_trial(build_trial(w, sh.half, R, ground, tc), tc);
        const double scale = std::abs(d.I1) + std::abs(d.I21) + std::abs(d.I22);
        i1 = i1 && d.I1 <= 1e-9 * scale;
        i23 = i23 && std::abs(d.I23) <= 1e-9 * scale;
        audit = audit && d.mismatch <= 0.05;
        min_gap = std::min(min_gap, d.rayleigh_gap);
        decay.push_back(d.I21 + d.I22);
        detail += fmt("R=%.0f gap %.5f; ", R, d.rayleigh_gap);
    }
    const auto [p, with_log] = case_decay(2, sh.half);
    const double fitted = fit_decay_exponent(Rs, decay, with_log);
    const bool gap_ok = min_gap < -st.eps_disc;
    const bool fit_ok = std::abs(fitted - p) <= 0.2;
    const double sec = seconds_since(t0);
    return {gap_ok && i1 && i23 && fit_ok && audit && sec <= 1200.0,
            detail + fmt("gap < -eps_disc: %s; I1 <= 0: %s; I23 ~ 0: %s; audit: %s; decay exponent %.3f vs %.1f (log): %s "
                         "(%.0f s)",
                         gap_ok ? "yes" : "no", i1 ? "yes" : "no", i23 ? "yes" : "no", audit ? "yes" : "no", fitted, p,
                         fit_ok ? "yes" : "no", sec)};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

Outcome determinism()
{
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "vwave_acceptance_determinism";
    fs::remove_all(base);
    cli::RunConfig cfg;
    cfg.beta_deg = 45.0;
    cfg.truncation_L = 3.0;
    cfg.dense_limit = 0;
    cfg.truncation_audit = false;
    cfg.angles_deg = {45.0, 60.0};
    cfg.L_min = 2.5;
    cfg.adaptive = false;
    cfg.seed = 11;
    std::ostringstream log;
    bool same = true;
    std::string files;
    for (const std::string cmd : {"threshold", "eigs", "sweep"}) {
        for (const char* run : {"a", "b"}) {
            cli::Outputs out;
            out.dir = (base / run).string();
            out.plot = (base / run / "sweep.svg").string();
            cli::run_command(cmd, cfg, out, log);
        }
    }
    for (const char* name : {"threshold.json", "eigs.json", "sweep.csv", "sweep.svg"}) {
        const auto a = slurp(base / "a" / name), b = slurp(base / "b" / name);
        same = same && !a.empty() && a == b;
        files += std::string(name) + " ";
    }
    fs::remove_all(base);
    return {same, "byte-identical across two runs: " + files};
}

} // namespace

int main(int argc, char** argv)
{
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"C1 energy identity", energy_identity},
        {"C2 kernel identities", kernel_identities},
        {"C3 oracle equivalence", oracle_equivalence},
        {"C4 threshold stability", threshold_stability},
        {"C5 existence", existence},
        {"C6 straight tube", straight_tube},
        {"C7 monotonicity", monotonicity},
        {"C8 pushforward certificate", pushforward_certificate},
        {"C9 squeeze bound", squeeze},
        {"C10 trial certificate", trial_certificate},
        {"C11 determinism", determinism},
    };
    // optional arguments select criteria by tag, e.g. "C3 C10"
    const std::vector<std::string> only(argv + 1, argv + argc);
    int failed = 0, ran = 0;
    for (const auto& c : criteria) {
        const std::string tag(c.name, std::string(c.name).find(' '));
        if (!only.empty() && std::find(only.begin(), only.end(), tag) == only.end())
            continue;
        ++ran;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
