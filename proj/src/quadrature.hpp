#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <vector>

namespace vwave::quad {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;

    void append(double a, double b);
};

template <unsigned N>
void gauss_panel(Rule& r, double a, double b)
{
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& xs = G::abscissa();
    const auto& ws = G::weights();
    const double c = 0.5 * (a + b), d = 0.5 * (b - a);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0.0) {
            r.x.push_back(c);
            r.w.push_back(d * ws[i]);
            continue;
        }
        r.x.push_back(c - d * xs[i]);
        r.w.push_back(d * ws[i]);
        r.x.push_back(c + d * xs[i]);
        r.w.push_back(d * ws[i]);
    }
}

inline void Rule::append(double a, double b)
{
    if (b > a)
        gauss_panel<10>(*this, a, b);
}

/** Gauss panels over consecutive breakpoints. */
inline Rule panels(const std::vector<double>& breaks)
{
    Rule r;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        r.append(breaks[i], breaks[i + 1]);
    return r;
}

/** Breakpoints a, a + (b - a)/m, ..., b. */
inline void uniform_breaks(std::vector<double>& out, double a, double b, int m)
{
    for (int i = 1; i <= m; ++i)
        out.push_back(a + (b - a) * i / m);
}

/** Geometric breakpoints from first to last (ratio q), appended after the current back. */
inline void geometric_breaks(std::vector<double>& out, double first, double last, double q)
{
    for (double v = first; v < last; v *= q)
        out.push_back(v);
    out.push_back(last);
}

} // namespace vwave::quad
