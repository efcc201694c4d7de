#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace vwave {

constexpr double kPi = 3.14159265358979323846;

/** Axis-aligned box cross-section; an interval when dim() == 1. */
struct CrossSection {
    std::vector<double> lo;
    std::vector<double> hi;

    CrossSection() = default;
    CrossSection(std::vector<double> lower, std::vector<double> upper);
    static CrossSection interval(double a, double b) { return CrossSection({a}, {b}); }

    int dim() const { return static_cast<int>(lo.size()); }
    double diameter() const;
    double width(int axis) const { return hi[axis] - lo[axis]; }
    void validate() const;
};

/**
 * V-shaped waveguide {(x sin(beta) - |z| cos(beta), y) in omega}, truncated at |z| <= L.
 * Points are ordered (x, y..., z).
 */
struct Waveguide {
    double beta = kPi / 2;
    CrossSection omega;
    double truncation_L = 4.0;

    int dim() const { return omega.dim() + 1; }
    void validate() const;
    Waveguide with_truncation(double L) const;
};

/** Uniform grid with identical spacing on every axis; nodes in C order (last axis fastest). */
struct Grid {
    int dim = 0;
    double h = 0.0;
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    std::array<std::int64_t, 3> counts{1, 1, 1};

    std::size_t size() const;
    double coord(int axis, std::int64_t i) const { return origin[axis] + h * static_cast<double>(i); }
    std::size_t index(const std::array<std::int64_t, 3>& ijk) const;
    std::array<std::int64_t, 3> unravel(std::size_t idx) const;
    bool same_lattice(const Grid& other) const;
};

/** Active-node set over a grid. */
struct Mask {
    Grid grid;
    std::vector<std::uint8_t> active;
    std::vector<std::size_t> nodes;

    Mask() = default;
    Mask(Grid g, std::vector<std::uint8_t> flags);
    std::size_t count() const { return nodes.size(); }
};

using MaskPtr = std::shared_ptr<const Mask>;

/** sin and cos with exact values at beta = pi/2, where the tube must not pick up rounding artefacts. */
std::array<double, 2> sincos_exact(double beta);

// Grids whose nodes sit on the lattice h*Z^n, with one layer of zero padding around the domain.
Grid waveguide_grid(const Waveguide& w, double h);
Grid section_grid(const CrossSection& omega, double h);
Grid box_grid(const std::vector<double>& lo, const std::vector<double>& hi, double h);

MaskPtr membership_mask(const Waveguide& w, const Grid& g);
MaskPtr section_mask(const CrossSection& omega, const Grid& g);
/** Straight slanted strip {0 < x sin(beta) - z cos(beta) - lo < width, |z| <= L}: one arm continued through the junction. */
MaskPtr strip_mask(const Waveguide& w, const Grid& g);
Grid strip_grid(const Waveguide& w, double h);

std::vector<double> map_from_tube(double beta, const std::vector<double>& p);
std::vector<double> map_to_tube(double beta, const std::vector<double>& p);
/** T_{alpha,beta} = T_beta o T_alpha^{-1}; alpha == beta is accepted and gives the identity. */
std::vector<double> map_between(double alpha, double beta, const std::vector<double>& p);
double map_between_jacobian(double alpha, double beta);

} // namespace vwave
