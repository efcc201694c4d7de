#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace vwave {

/** Smallest integer >= n whose prime factors are all in {2, 3, 5, 7}. */
std::int64_t fft_size(std::int64_t n);

/**
 * Real-to-complex transform on a periodic cell of rank 1..3 (FFTW, estimate planning).
 * Unnormalized in both directions. An instance owns its buffers and is not shared between threads.
 */
class RealFFT {
public:
    RealFFT(int dim, const std::array<std::int64_t, 3>& dims);
    ~RealFFT();
    RealFFT(const RealFFT&) = delete;
    RealFFT& operator=(const RealFFT&) = delete;

    int dim() const { return dim_; }
    const std::array<std::int64_t, 3>& dims() const { return dims_; }
    std::size_t real_size() const { return nreal_; }
    std::size_t complex_size() const { return ncomplex_; }

    double* real() { return real_; }
    std::complex<double>* spectrum() { return spec_; }

    void forward();
    void inverse();

    /**
     * Calls f(k, xi2, weight) for every stored frequency k of the half spectrum, where xi2 = |xi|^2 for
     * spacing h and weight (1 or 2) accounts for the conjugate half that is not stored.
     */
    void for_each_frequency(double h, const std::function<void(std::size_t, double, double)>& f) const;
    /** |xi|^2 for every stored frequency, in storage order. */
    std::vector<double> xi_squared(double h) const;
    std::vector<double> weights() const;

private:
    int dim_;
    std::array<std::int64_t, 3> dims_;
    std::size_t nreal_ = 1, ncomplex_ = 1;
    double* real_ = nullptr;
    std::complex<double>* spec_ = nullptr;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
};

} // namespace vwave
