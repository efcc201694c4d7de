#include "vwave/theorems.hpp"

#include "quadrature.hpp"
#include "vwave/errors.hpp"
#include "vwave/fft.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace vwave {

double cutoff_profile(double r)
{
    const double u = std::clamp(r - 1.0, 0.0, 1.0);
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double cutoff_profile_derivative(double r)
{
    const double u = std::clamp(r - 1.0, 0.0, 1.0);
    return -30.0 * u * u * (1.0 - u) * (1.0 - u);
}

bool radial_cutoff(int n, FracOrder s)
{
    return static_cast<double>(n - 1) <= 2.0 - 2.0 * s.s + 1e-12;
}

double cutoff_chi(double z, double t, double R, int n, FracOrder s)
{
    if (!(R > 0.0))
        throw ArgumentError("cutoff radius must be positive");
    const double r = radial_cutoff(n, s) ? std::hypot(z, t) : std::abs(z);
    return cutoff_profile(r / R);
}

double trial_gamma(int n, FracOrder s, const TrialConfig& cfg)
{
    const double b = std::isnan(cfg.gamma_boundary) ? 2.0 - 2.0 * s.s : cfg.gamma_boundary;
    return static_cast<double>(n - 1) <= b + 1e-12 ? 1.0 : s.s;
}

std::pair<double, bool> case_decay(int n, FracOrder s)
{
    const double a = static_cast<double>(n - 1), b = 2.0 - 2.0 * s.s;
    if (std::abs(a - b) < 1e-12)
        return {1.0, true};
    return a > b ? std::pair{2.0, false} : std::pair{2.0 * s.s, false};
}

double fit_decay_exponent(const std::vector<double>& R, const std::vector<double>& y, bool with_log)
{
    if (R.size() != y.size() || R.size() < 2)
        throw ArgumentError("decay fit needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (!(y[i] > 0.0) || !(R[i] > 1.0))
            return std::numeric_limits<double>::quiet_NaN();
        const double x = std::log(R[i]);
        const double v = std::log(y[i]) - (with_log ? std::log(std::log(R[i])) : 0.0);
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ---------------------------------------------------------------------------------------------

CrossSectionSpectrum::CrossSectionSpectrum(const GridFunction& phi, FracOrder s) : s_(s)
{
    const Grid& g = phi.grid();
    if (g.dim != 1)
        throw DomainError("trial construction is implemented for interval cross-sections (n = 2)");
    h_ = g.h;
    x0_ = g.origin[0];
    phi_ = phi.values;

    std::vector<double> breaks{0.0};
    quad::geometric_breaks(breaks, 1e-6, 0.5, 2.0);
    const double top = kPi / h_;
    const int m = static_cast<int>(std::ceil((top - 0.5) / 0.5));
    quad::uniform_breaks(breaks, 0.5, top, m);
    const auto rule = quad::panels(breaks);
    xi_ = rule.x;
    w_ = rule.w;

    const double c = h_ / std::sqrt(2.0 * kPi);
    hat_.resize(xi_.size());
    density_.resize(xi_.size());
    double mass = 0.0, energy = 0.0;
    for (std::size_t k = 0; k < xi_.size(); ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < phi_.size(); ++j) {
            if (phi_[j] == 0.0)
                continue;
            const double x = x0_ + h_ * static_cast<double>(j);
            acc += phi_[j] * std::polar(1.0, -xi_[k] * x);
        }
        hat_[k] = c * acc;
        density_[k] = std::norm(hat_[k]);
        mass += 2.0 * w_[k] * density_[k];
        energy += 2.0 * w_[k] * std::pow(xi_[k], 2.0 * s.s) * density_[k];
    }
    mass_ = mass;
    lambda_ = energy / mass;
}

double CrossSectionSpectrum::g(double t) const
{
    double acc = 0.0;
    for (std::size_t k = 0; k < xi_.size(); ++k) {
        const double p = poisson_symbol(t * xi_[k], s_);
        acc += w_[k] * p * p * density_[k];
    }
    return 2.0 * acc;
}

double CrossSectionSpectrum::dg(double t) const
{
    double acc = 0.0;
    for (std::size_t k = 0; k < xi_.size(); ++k) {
        const double r = t * xi_[k];
        acc += w_[k] * 2.0 * xi_[k] * poisson_symbol(r, s_) * poisson_symbol_derivative(r, s_) * density_[k];
    }
    return 2.0 * acc;
}

double CrossSectionSpectrum::e(double t) const
{
    double acc = 0.0;
    for (std::size_t k = 0; k < xi_.size(); ++k) {
        const double r = t * xi_[k];
        const double p = poisson_symbol(r, s_), d = poisson_symbol_derivative(r, s_);
        acc += w_[k] * xi_[k] * xi_[k] * (p * p + d * d) * density_[k];
    }
    return 2.0 * acc;
}

double CrossSectionSpectrum::energy_tail(double a) const
{
    const double cs = cs_constant(s_);
    double acc = 0.0;
    for (std::size_t k = 0; k < xi_.size(); ++k) {
        const double r = a * xi_[k];
        const double f = r > 0.0 ? -std::pow(r, 1.0 - 2.0 * s_.s) * poisson_symbol(r, s_) * poisson_symbol_derivative(r, s_)
                                 : 1.0 / cs;
        acc += w_[k] * std::pow(xi_[k], 2.0 * s_.s) * f * density_[k];
    }
    return 2.0 * acc;
}

std::array<double, 3> CrossSectionSpectrum::field(double x, double t) const
{
    std::complex<double> f = 0.0, fx = 0.0, ft = 0.0;
    for (std::size_t k = 0; k < xi_.size(); ++k) {
        const double r = t * xi_[k];
        const std::complex<double> b = w_[k] * hat_[k] * std::polar(1.0, xi_[k] * x);
        const double p = poisson_symbol(r, s_);
        f += b * p;
        fx += b * std::complex<double>(0.0, xi_[k]) * p;
        ft += b * xi_[k] * poisson_symbol_derivative(r, s_);
    }
    const double c = 2.0 / std::sqrt(2.0 * kPi);
    return {c * f.real(), c * fx.real(), c * ft.real()};
}

// ---------------------------------------------------------------------------------------------

namespace {

double bump1(double u)
{
    if (std::abs(u) >= 1.0)
        return 0.0;
    const double q = 1.0 - u * u;
    return q * q * q;
}

double bump1_derivative(double u)
{
    if (std::abs(u) >= 1.0)
        return 0.0;
    const double q = 1.0 - u * u;
    return -6.0 * u * q * q;
}

} // namespace

double Bump::value(double x, double z, double t) const
{
    return amplitude * bump1((x - xc) / a) * bump1(z / a) * bump1((t - tc) / a);
}

std::array<double, 4> Bump::gradient(double x, double z, double t) const
{
    const double X = (x - xc) / a, Z = z / a, T = (t - tc) / a;
    const double bx = bump1(X), bz = bump1(Z), bt = bump1(T);
    const double k = amplitude / a;
    return {amplitude * bx * bz * bt, k * bump1_derivative(X) * bz * bt, k * bx * bump1_derivative(Z) * bt,
            k * bx * bz * bump1_derivative(T)};
}

// ---------------------------------------------------------------------------------------------

namespace {

struct VTerms {
    double I3 = 0.0;
    double I3_boundary = 0.0;
    double I4 = 0.0;
};

// I3 = 2 C_s int_{z>0} t^{1-2s} grad(Phi~).grad(V), its boundary form, and I4 = C_s int_{z>0} t^{1-2s} |grad V|^2.
VTerms bump_terms(const CrossSectionSpectrum& sp, const Bump& V, double beta, bool boundary)
{
    const double s = sp.order().s;
    const double cs = cs_constant(sp.order());
    const auto [sb, cb] = sincos_exact(beta);
    quad::Rule rx, rz, rt;
    rx.append(V.xc - V.a, V.xc);
    rx.append(V.xc, V.xc + V.a);
    rz.append(0.0, 0.5 * V.a);
    rz.append(0.5 * V.a, V.a);
    rt.append(V.tc - V.a, V.tc);
    rt.append(V.tc, V.tc + V.a);

    VTerms out;
    for (std::size_t it = 0; it < rt.x.size(); ++it) {
        const double t = rt.x[it];
        const double wt = rt.w[it] * std::pow(t, 1.0 - 2.0 * s);
        for (std::size_t ix = 0; ix < rx.x.size(); ++ix) {
            const double x = rx.x[ix];
            for (std::size_t iz = 0; iz < rz.x.size(); ++iz) {
                const double z = rz.x[iz];
                const double w = wt * rx.w[ix] * rz.w[iz];
                const auto gv = V.gradient(x, z, t);
                out.I4 += w * (gv[1] * gv[1] + gv[2] * gv[2] + gv[3] * gv[3]);
                if (gv[1] == 0.0 && gv[2] == 0.0 && gv[3] == 0.0)
                    continue;
                const auto f = sp.field(x * sb - z * cb, t);
                out.I3 += w * (f[1] * (sb * gv[1] - cb * gv[2]) + f[2] * gv[3]);
            }
            if (boundary) {
                const double v0 = V.value(x, 0.0, t);
                if (v0 != 0.0)
                    out.I3_boundary += wt * rx.w[ix] * cb * sp.field(x * sb, t)[1] * v0;
            }
        }
    }
    out.I3 *= 2.0 * cs;
    out.I3_boundary *= 2.0 * cs;
    out.I4 *= cs;
    return out;
}

double sinc_interpolate(const CrossSectionSpectrum& sp, double x)
{
    const auto& p = sp.samples();
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] == 0.0)
            continue;
        const double u = (x - sp.origin()) / sp.h() - static_cast<double>(j);
        acc += p[j] * (std::abs(u) < 1e-12 ? 1.0 : std::sin(kPi * u) / (kPi * u));
    }
    return acc;
}

} // namespace

Trial build_trial(const Waveguide& w, FracOrder s, double R, const ThresholdResult& ground, const TrialConfig& cfg)
{
    w.validate();
    if (w.dim() != 2)
        throw DomainError("trial construction is implemented for planar waveguides (n = 2)");
    const double diam = w.omega.diameter();
    if (!(R >= 4.0 * diam))
        throw ArgumentError("cutoff radius must be at least 4 diameters of the cross-section");
    if (!(cfg.trace_h > 0.0) || !(cfg.bump_amplitude >= 0.0) || cfg.max_relocations < 0)
        throw ConfigError("invalid trial settings");

    Trial tr;
    tr.spectrum = std::make_shared<CrossSectionSpectrum>(ground.phi, s);
    const auto& sp = *tr.spectrum;
    auto& p = tr.params;
    p.R = R;
    p.n = w.dim();
    p.order = s;
    p.beta = w.beta;
    p.gamma = trial_gamma(p.n, s, cfg);
    p.epsilon = std::pow(R, -p.gamma);
    p.radial = radial_cutoff(p.n, s);

    const auto [sb, cb] = sincos_exact(w.beta);
    const double width = cfg.bump_width > 0.0 ? cfg.bump_width : diam;
    p.V.a = 0.5 * width;
    p.V.tc = p.V.a;
    p.V.amplitude = cfg.bump_amplitude;
    const double x_mid = 0.5 * (w.omega.lo[0] + w.omega.hi[0]) / sb;

    const double scale = std::sqrt(sp.lambda() * sp.mass());
    double i3 = -1.0;
    p.V.xc = x_mid;
    for (p.relocations = 0; p.V.amplitude > 0.0; ++p.relocations) {
        p.V.xc = x_mid + cfg.relocation_step * width * p.relocations;
        const auto terms = bump_terms(sp, p.V, w.beta, false);
        i3 = terms.I3;
        if (std::abs(i3) > cfg.i3_tolerance * scale * std::sqrt(terms.I4))
            break;
        if (p.relocations == cfg.max_relocations)
            throw ConsistencyError("I3 vanishes for both signs of the bump after " + std::to_string(p.relocations)
                                   + " relocations (|I3| = " + std::to_string(std::abs(i3)) + ")");
    }
    p.sign = i3 < 0.0 ? 1 : -1;
    p.V.amplitude *= p.sign;

    ExtensionConfig ec;
    tr.field = cs_extend(ground.phi, s, default_slices(ground.phi, s, ec), ec.cell);

    const auto wt = w.with_truncation(std::max(w.truncation_L, 2.0 * R + diam));
    const auto mask = membership_mask(wt, waveguide_grid(wt, cfg.trace_h));
    tr.trace = GridFunction(mask);
    const Grid& g = mask->grid;
    for (std::size_t idx : mask->nodes) {
        const auto ij = g.unravel(idx);
        const double x = g.coord(0, ij[0]), z = g.coord(1, ij[1]);
        tr.trace.values[idx] = cutoff_chi(z, 0.0, R, p.n, s) * sinc_interpolate(sp, x * sb - std::abs(z) * cb);
    }
    return tr;
}

// ---------------------------------------------------------------------------------------------

namespace {

// Log-uniform cubic-spline table of a positive function of t.
class LogSpline {
public:
    LogSpline(const std::function<double(double)>& f, double lo, double hi, double step)
        : lo_(std::log(lo)), hi_(std::log(hi)), step_(step)
    {
        const auto n = static_cast<std::size_t>(std::ceil((hi_ - lo_) / step)) + 1;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::log(f(std::exp(lo_ + step * static_cast<double>(i))));
        spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(v.begin(), v.end(),
                                                                                              lo_, step);
        f_ = f;
    }
    double operator()(double t) const
    {
        const double u = std::log(t);
        if (u <= lo_ || u >= hi_ - step_)
            return f_(t);
        return std::exp((*spline_)(u));
    }

private:
    double lo_, hi_, step_;
    std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
    std::function<double(double)> f_;
};

struct Functionals {
    LogSpline g, mdg, e;
    Functionals(const CrossSectionSpectrum& sp, double tmax)
        : g([&sp](double t) { return sp.g(t); }, 1e-4 * sp.h(), tmax, 0.02),
          mdg([&sp](double t) { return -sp.dg(t); }, 1e-4 * sp.h(), tmax, 0.02),
          e([&sp](double t) { return sp.e(t); }, 1e-4 * sp.h(), tmax, 0.02)
    {
    }
};

struct Decomp {
    double I1 = 0.0, I21 = 0.0, I22 = 0.0, I23 = 0.0;
};

Decomp decomposition_route(const CrossSectionSpectrum& sp, const TrialParams& p, int level)
{
    const double s = p.order.s;
    const double cs = cs_constant(p.order);
    const double sb = sincos_exact(p.beta)[0];
    const double R = p.R;
    const double tw = 1.0 - 2.0 * s;
    Decomp d;

    if (p.radial) {
        const Functionals fn(sp, 4.0 * R);
        std::vector<double> rb{R};
        quad::uniform_breaks(rb, R, 2.0 * R, 8 * level);
        std::vector<double> tb{0.0};
        quad::geometric_breaks(tb, 1e-7, kPi / 4.0, 2.0);
        quad::uniform_breaks(tb, kPi / 4.0, kPi / 2.0, 4 * level);
        const auto rr = quad::panels(rb), rth = quad::panels(tb);
        double i1 = 0.0;
        for (std::size_t i = 0; i < rr.x.size(); ++i) {
            const double rho = rr.x[i];
            const double chi = cutoff_profile(rho / R), dchi = cutoff_profile_derivative(rho / R) / R;
            for (std::size_t j = 0; j < rth.x.size(); ++j) {
                const double th = rth.x[j];
                const double z = rho * std::cos(th), t = rho * std::sin(th);
                const double w = rr.w[i] * rth.w[j] * rho * std::pow(t, tw);
                const double chi0 = cutoff_profile(z / R);
                i1 += w * (chi * chi - chi0 * chi0) * fn.e(t);
                d.I21 += w * chi * dchi * std::sin(th) * -fn.mdg(t);
                d.I22 += w * dchi * dchi * fn.g(t);
            }
        }
        std::vector<double> zb{0.0};
        quad::uniform_breaks(zb, 0.0, 2.0 * R, 16 * level);
        const auto rz = quad::panels(zb);
        for (std::size_t i = 0; i < rz.x.size(); ++i) {
            const double chi0 = cutoff_profile(rz.x[i] / R);
            if (chi0 == 0.0)
                continue;
            i1 -= rz.w[i] * chi0 * chi0 * sp.energy_tail(std::sqrt(4.0 * R * R - rz.x[i] * rz.x[i]));
        }
        d.I1 = cs / sb * i1;
        d.I21 *= cs / sb;
        d.I22 *= cs / sb;
    } else {
        // chi depends on |z| only: I1 = I21 = 0 and I22 factorizes.
        std::vector<double> zb{0.0};
        quad::uniform_breaks(zb, R, 2.0 * R, 8 * level);
        zb.erase(zb.begin());
        zb.insert(zb.begin(), R);
        const auto rz = quad::panels(zb);
        double zint = 0.0;
        for (std::size_t i = 0; i < rz.x.size(); ++i) {
            const double dchi = cutoff_profile_derivative(rz.x[i] / R) / R;
            zint += rz.w[i] * dchi * dchi;
        }
        const double T = 1e4 * R;
        const Functionals fn(sp, T);
        std::vector<double> tb{0.0};
        quad::geometric_breaks(tb, 1e-7, T, 1.5);
        const auto rt = quad::panels(tb);
        double tint = 0.0;
        for (std::size_t j = 0; j < rt.x.size(); ++j)
            tint += rt.w[j] * std::pow(rt.x[j], tw) * fn.g(rt.x[j]);
        // g(t) ~ c / t beyond T
        tint += fn.g(T) * T * std::pow(T, tw) / (2.0 * s - 1.0);
        d.I22 = cs / sb * zint * tint;
    }
    return d;
}

struct Direct {
    double gap = 0.0;
    double I23 = 0.0;
};

// Direct route: C_s E(Psi) - Lambda ||Psi(., 0)||^2 from pointwise gradients on a fine periodic lattice.
Direct direct_route(const CrossSectionSpectrum& sp, const TrialParams& p, double epsilon, int level, double period)
{
    const double s = p.order.s;
    const double cs = cs_constant(p.order);
    const auto [sb, cb] = sincos_exact(p.beta);
    const double R = p.R;
    const double h = sp.h();
    const double tw = 1.0 - 2.0 * s;

    std::int64_t N = fft_size(static_cast<std::int64_t>(std::ceil(period / h)));
    while (N % 2 != 0)
        N = fft_size(N + 1);
    const std::int64_t M = 2 * N;
    const double hf = 0.5 * h;

    RealFFT coarse(1, {N, 1, 1});
    std::fill(coarse.real(), coarse.real() + coarse.real_size(), 0.0);
    const auto& ph = sp.samples();
    std::copy(ph.begin(), ph.end(), coarse.real());
    coarse.forward();
    RealFFT fine(1, {M, 1, 1});
    std::vector<std::complex<double>> spec(fine.complex_size(), 0.0);
    for (std::int64_t k = 0; k <= N / 2; ++k)
        spec[static_cast<std::size_t>(k)] = (k == N / 2 ? 1.0 : 2.0) * coarse.spectrum()[k];
    std::vector<double> xi(fine.complex_size());
    for (std::size_t k = 0; k < xi.size(); ++k)
        xi[k] = 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(M) * hf);
    const double inv = 1.0 / static_cast<double>(M);

    const Bump& V = p.V;
    const double vlo = (V.xc - V.a) * sb - V.a * cb, vhi = (V.xc + V.a) * sb;
    const auto m_lo = static_cast<std::int64_t>(std::floor((vlo - sp.origin()) / hf));
    const auto m_hi = static_cast<std::int64_t>(std::ceil((vhi - sp.origin()) / hf));

    std::vector<double> phi(M), phx(M), pht(M);
    auto fields = [&](double t) {
        auto run = [&](auto mult, std::vector<double>& out) {
            for (std::size_t k = 0; k < spec.size(); ++k)
                fine.spectrum()[k] = spec[k] * mult(k);
            fine.inverse();
            for (std::int64_t m = 0; m < M; ++m)
                out[static_cast<std::size_t>(m)] = fine.real()[m] * inv;
        };
        run([&](std::size_t k) { return std::complex<double>(poisson_symbol(t * xi[k], p.order), 0.0); }, phi);
        run([&](std::size_t k) {
            return std::complex<double>(0.0, xi[k] * poisson_symbol(t * xi[k], p.order));
        }, phx);
        run([&](std::size_t k) {
            return std::complex<double>(xi[k] * poisson_symbol_derivative(t * xi[k], p.order), 0.0);
        }, pht);
    };

    // mass of the trace: ||Psi(., 0)||^2 / 2 = (1 / sin b) int chi(z, 0)^2 dz * int phi^2
    fields(0.0);
    double B0 = 0.0;
    for (double v : phi)
        B0 += v * v * hf;

    std::vector<double> zb{0.0, V.a};
    quad::uniform_breaks(zb, V.a, 2.0 * R, std::max(4, static_cast<int>(std::ceil(8.0 * level * (2.0 * R - V.a) / R))));
    const auto rz = quad::panels(zb);
    double mass_z = 0.0;
    for (std::size_t i = 0; i < rz.x.size(); ++i) {
        const double c = cutoff_chi(rz.x[i], 0.0, R, p.n, p.order);
        mass_z += rz.w[i] * c * c;
    }

    const double tmax = p.radial ? 2.0 * R : period / (20.0 * kPi);
    std::vector<double> tb{0.0};
    quad::geometric_breaks(tb, 1e-4 * h, 1.0, 2.0);
    tb.push_back(V.tc - V.a);
    tb.push_back(V.tc);
    tb.push_back(V.tc + V.a);
    std::sort(tb.begin(), tb.end());
    tb.erase(std::unique(tb.begin(), tb.end()), tb.end());
    const double pw = R / (8.0 * level);
    const double t_top = tb.back();
    quad::uniform_breaks(tb, t_top, tmax, std::max(2, static_cast<int>(std::ceil((tmax - t_top) / pw))));
    const auto rt = quad::panels(tb);

    double energy = 0.0, flux = 0.0;
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, E = 0.0;
    for (std::size_t j = 0; j < rt.x.size(); ++j) {
        const double t = rt.x[j];
        fields(t);
        A = B = C = D = E = 0.0;
        for (std::int64_t m = 0; m < M; ++m) {
            const auto i = static_cast<std::size_t>(m);
            A += phx[i] * phx[i];
            B += phi[i] * phi[i];
            C += pht[i] * pht[i];
            D += phi[i] * pht[i];
            E += phi[i] * phx[i];
        }
        A *= hf;
        B *= hf;
        C *= hf;
        D *= hf;
        E *= hf;
        const bool in_v = std::abs(t - V.tc) < V.a;
        double row = 0.0, frow = 0.0;
        for (std::size_t i = 0; i < rz.x.size(); ++i) {
            const double z = rz.x[i];
            double chi, cz, ct;
            if (p.radial) {
                const double rho = std::hypot(z, t);
                chi = cutoff_profile(rho / R);
                const double d = cutoff_profile_derivative(rho / R) / R;
                cz = rho > 0.0 ? d * z / rho : 0.0;
                ct = rho > 0.0 ? d * t / rho : 0.0;
            } else {
                chi = cutoff_profile(z / R);
                cz = cutoff_profile_derivative(z / R) / R;
                ct = 0.0;
            }
            double val = chi * chi * (A + C) + (cz * cz + ct * ct) * B + 2.0 * chi * ct * D - 2.0 * cb * chi * cz * E;
            if (in_v && z < V.a) {
                double extra = 0.0;
                for (std::int64_t m = std::max<std::int64_t>(m_lo, 0); m <= std::min(m_hi, M - 1); ++m) {
                    const auto k = static_cast<std::size_t>(m);
                    const double xp = sp.origin() + hf * static_cast<double>(m);
                    const auto gv = V.gradient((xp + z * cb) / sb, z, t);
                    const double vx = gv[1] / sb, vz = gv[2] + gv[1] * cb / sb, vt = gv[3];
                    const double wx = chi * phx[k], wz = cz * phi[k], wt = ct * phi[k] + chi * pht[k];
                    const double ux = wx + epsilon * vx, uz = wz + epsilon * vz, ut = wt + epsilon * vt;
                    extra += (ux * ux + uz * uz + ut * ut - 2.0 * cb * ux * uz)
                           - (wx * wx + wz * wz + wt * wt - 2.0 * cb * wx * wz);
                }
                val += extra * hf;
            }
            row += rz.w[i] * val;
            frow -= rz.w[i] * 2.0 * cb * chi * cz * E;
        }
        energy += rt.w[j] * std::pow(t, tw) * row;
        flux += rt.w[j] * std::pow(t, tw) * frow;
    }
    if (!p.radial) {
        // beyond tmax: B ~ 1 / t, A + C ~ 1 / t^3
        double zc = 0.0, zd = 0.0;
        for (std::size_t i = 0; i < rz.x.size(); ++i) {
            const double c = cutoff_profile(rz.x[i] / R), d = cutoff_profile_derivative(rz.x[i] / R) / R;
            zc += rz.w[i] * c * c;
            zd += rz.w[i] * d * d;
        }
        const double T = tmax;
        energy += zc * (A + C) * T * T * T * std::pow(T, -1.0 - 2.0 * s) / (1.0 + 2.0 * s);
        energy += zd * B * T * std::pow(T, 1.0 - 2.0 * s) / (2.0 * s - 1.0);
    }
    return {2.0 * (cs * energy - sp.lambda() * mass_z * B0) / sb, cs * flux / sb};
}

} // namespace

TrialDecomposition decompose_trial(const Trial& trial, const TrialConfig& cfg)
{
    if (!trial.spectrum)
        throw StateError("trial has not been built");
    const auto& sp = *trial.spectrum;
    const auto& p = trial.params;
    const double eps = p.epsilon;
    const auto vt = bump_terms(sp, p.V, p.beta, true);

    TrialDecomposition out;
    out.I3 = vt.I3;
    out.I3_boundary = vt.I3_boundary;
    out.I4 = vt.I4;
    out.lambda = sp.lambda();

    const double period = std::max(cfg.direct_period * p.R, 32.0);
    for (int level = cfg.quadrature_level;; level *= 2) {
        auto d = decomposition_route(sp, p, level);
        const auto direct = direct_route(sp, p, eps, level, period);
        d.I23 = direct.I23;
        out.I1 = d.I1;
        out.I21 = d.I21;
        out.I22 = d.I22;
        out.I23 = d.I23;
        out.total = 2.0 * (d.I1 + d.I21 + d.I22 + d.I23 + eps * out.I3 + eps * eps * out.I4);
        out.rayleigh_gap = direct.gap;
        const double scale = 2.0 * (std::abs(d.I1) + std::abs(d.I21) + std::abs(d.I22) + std::abs(d.I23)
                                    + std::abs(eps * out.I3) + eps * eps * std::abs(out.I4));
        out.mismatch = std::abs(out.total - out.rayleigh_gap) / scale;
        out.quadrature_level = level;
        if (out.mismatch <= 0.05)
            break;
        if (level >= 2 * cfg.quadrature_level)
            throw ConsistencyError("trial decomposition and direct energy differ by "
                                   + std::to_string(100.0 * out.mismatch) + "% after refinement");
    }

    std::vector<double> zb{0.0};
    quad::uniform_breaks(zb, 0.0, 2.0 * p.R, 64);
    const auto rz = quad::panels(zb);
    double mz = 0.0;
    for (std::size_t i = 0; i < rz.x.size(); ++i) {
        const double c = cutoff_chi(rz.x[i], 0.0, p.R, p.n, p.order);
        mz += rz.w[i] * c * c;
    }
    out.trace_norm = 2.0 * mz * sp.mass() / std::sin(p.beta);
    return out;
}

} // namespace vwave
