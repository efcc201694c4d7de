#include "vwave/errors.hpp"
#include "vwave/fracform.hpp"
#include "vwave/kernels.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <string>

namespace vwave {

namespace {

double sphere_area(int n)
{
    switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi;
    default: return 4.0 * kPi;
    }
}

// C-infinity step: 0 for tau <= 0, 1 for tau >= 1.
double smooth_step(double tau)
{
    if (tau <= 0.0)
        return 0.0;
    if (tau >= 1.0)
        return 1.0;
    const double a = std::exp(-1.0 / tau), b = std::exp(-1.0 / (1.0 - tau));
    return a / (a + b);
}

} // namespace

double gagliardo_constant(int n, FracOrder s)
{
    return s.s * std::pow(4.0, s.s) * std::tgamma(0.5 * n + s.s) / (std::pow(kPi, 0.5 * n) * std::tgamma(1.0 - s.s));
}

GagliardoOracle::GagliardoOracle(int n, FracOrder s, double h) : n_(n), s_(s), h_(h)
{
    if (n < 1 || n > 3)
        throw ArgumentError("oracle dimension must be 1, 2 or 3");
    if (!(h > 0.0))
        throw ArgumentError("oracle spacing must be positive");
}

FormConfig GagliardoOracle::calibration_config()
{
    FormConfig cfg;
    cfg.padding = 16.0;
    return cfg;
}

double GagliardoOracle::constant() const
{
    if (!calibrated_)
        throw StateError("singular-integral oracle used before calibration");
    return c_;
}

double GagliardoOracle::energy(const GridFunction& u) const
{
    if (!calibrated_)
        throw StateError("singular-integral oracle used before calibration");
    return 0.5 * c_ * raw(u);
}

void GagliardoOracle::calibrate(const FormConfig& cfg)
{
    const double sigma = (n_ == 1 ? 16.0 : n_ == 2 ? 6.0 : 2.0) * h_;
    const double reach = (n_ == 3 ? 5.0 : 6.0) * sigma;
    const std::vector<double> lo(static_cast<std::size_t>(n_), -reach), hi(static_cast<std::size_t>(n_), reach);
    const Grid g = box_grid(lo, hi, h_);
    std::vector<std::uint8_t> flags(g.size(), 0);
    std::vector<double> vals(g.size(), 0.0);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto ijk = g.unravel(idx);
        bool interior = true;
        double r2 = 0.0;
        for (int k = 0; k < n_; ++k) {
            interior = interior && ijk[k] > 0 && ijk[k] < g.counts[k] - 1;
            const double x = g.coord(k, ijk[k]);
            r2 += x * x;
        }
        if (interior) {
            flags[idx] = 1;
            vals[idx] = std::exp(-0.5 * r2 / (sigma * sigma));
        }
    }
    GridFunction gauss(std::make_shared<Mask>(g, std::move(flags)));
    gauss.values = std::move(vals);
    const double reference = form_energy(gauss, s_, cfg);
    const double r = raw(gauss);
    c_ = 2.0 * reference / r;
    calibrated_ = true;
}

double GagliardoOracle::raw(const GridFunction& u) const
{
    u.check_support();
    const Grid& g = u.grid();
    if (g.dim != n_ || std::abs(g.h - h_) > 1e-14 * h_)
        throw ArgumentError("grid function does not match the oracle's dimension and spacing");
    if (u.mask->count() > 4 * kMaxNodes)
        throw CapacityError("oracle input has " + std::to_string(u.mask->count()) + " active nodes");

    const double hn = std::pow(h_, n_);
    const double s = s_.s;
    double sum_sq = 0.0;
    for (double v : u.values)
        sum_sq += v * v;
    const double norm2 = sum_sq * hn;

    double diag2 = 0.0;
    for (int k = 0; k < n_; ++k)
        diag2 += static_cast<double>(g.counts[k] * g.counts[k]);
    const double rho1 = std::sqrt(diag2) * h_;
    const double rho2 = 2.0 * rho1;
    const double rho_eta = 3.0 * h_;
    const double reach = std::max(rho2, 8.0 * rho_eta);
    const auto kmax = static_cast<std::int64_t>(std::ceil(reach / h_));

    // Offsets inside the ball; only those with overlapping supports need a correlation sum.
    kernels::OffsetList overlap;
    std::vector<std::array<std::int64_t, 3>> ball;
    const std::int64_t k1 = n_ >= 2 ? kmax : 0, k2 = n_ >= 3 ? kmax : 0;
    for (std::int64_t a = -kmax; a <= kmax; ++a)
        for (std::int64_t b = -k1; b <= k1; ++b)
            for (std::int64_t c = -k2; c <= k2; ++c) {
                const double r2 = static_cast<double>(a * a + b * b + c * c) * h_ * h_;
                if (r2 == 0.0 || r2 >= reach * reach)
                    continue;
                const std::array<std::int64_t, 3> m{a, b, c};
                ball.push_back(m);
                bool ov = true;
                for (int k = 0; k < n_; ++k)
                    ov = ov && std::abs(m[k]) < g.counts[k];
                if (ov)
                    overlap.offsets.push_back(m);
            }
    std::vector<double> corr;
    kernels::omp::autocorrelation(g, u.values, overlap, corr);

    auto key = [&](const std::array<std::int64_t, 3>& m) {
        return ((m[0] + kmax) * (2 * kmax + 1) + (m[1] + kmax)) * (2 * kmax + 1) + (m[2] + kmax);
    };
    std::vector<std::pair<std::int64_t, double>> dvals;
    dvals.reserve(overlap.offsets.size());
    for (std::size_t i = 0; i < overlap.offsets.size(); ++i)
        dvals.emplace_back(key(overlap.offsets[i]), 2.0 * hn * (sum_sq - corr[i]));
    std::sort(dvals.begin(), dvals.end());
    auto lookup_d = [&](const std::array<std::int64_t, 3>& m) {
        const auto it = std::lower_bound(dvals.begin(), dvals.end(), std::make_pair(key(m), -1e300));
        if (it != dvals.end() && it->first == key(m))
            return it->second;
        return 2.0 * norm2;
    };

    // Quadratic model q(r) = r^T G r of D near the origin (diagonal of G by Richardson; off-diagonal
    // terms average out over the symmetric lattice and the sphere).
    std::array<double, 3> gdiag{0.0, 0.0, 0.0};
    double trace_g = 0.0;
    for (int k = 0; k < n_; ++k) {
        std::array<std::int64_t, 3> e1{0, 0, 0}, e2{0, 0, 0};
        e1[k] = 1;
        e2[k] = 2;
        gdiag[k] = (16.0 * lookup_d(e1) - lookup_d(e2)) / (12.0 * h_ * h_);
        trace_g += gdiag[k];
    }

    const double p = static_cast<double>(n_) + 2.0 * s;
    double lattice = 0.0;
    for (const auto& m : ball) {
        double q = 0.0, r2 = 0.0;
        for (int k = 0; k < n_; ++k) {
            const double x = static_cast<double>(m[k]) * h_;
            q += gdiag[k] * x * x;
            r2 += x * x;
        }
        const double r = std::sqrt(r2);
        const double far = smooth_step((r - rho1) / (rho2 - rho1));
        const double eta = std::exp(-r2 / (rho_eta * rho_eta));
        lattice += (lookup_d(m) * (1.0 - far) - q * eta) * std::pow(r, -p);
    }
    lattice *= hn;

    const double area = sphere_area(n_);
    const double near = trace_g / n_ * area * 0.5 * std::pow(rho_eta, 2.0 - 2.0 * s) * std::tgamma(1.0 - s);
    auto integrand = [&](double r) { return smooth_step((r - rho1) / (rho2 - rho1)) * std::pow(r, -1.0 - 2.0 * s); };
    const double ramp = boost::math::quadrature::gauss<double, 30>::integrate(integrand, rho1, rho2);
    const double far = 2.0 * norm2 * area * (ramp + std::pow(rho2, -2.0 * s) / (2.0 * s));
    return lattice + near + far;
}

} // namespace vwave
