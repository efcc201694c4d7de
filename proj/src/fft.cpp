#include "vwave/fft.hpp"

#include "vwave/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace vwave {

namespace {
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace

std::int64_t fft_size(std::int64_t n)
{
    if (n < 1)
        return 1;
    for (std::int64_t m = n;; ++m) {
        std::int64_t r = m;
        for (std::int64_t p : {2, 3, 5, 7})
            while (r % p == 0)
                r /= p;
        if (r == 1)
            return m;
    }
}

RealFFT::RealFFT(int dim, const std::array<std::int64_t, 3>& dims) : dim_(dim), dims_(dims)
{
    if (dim < 1 || dim > 3)
        throw ArgumentError("transform rank must be 1, 2 or 3");
    int n[3];
    for (int k = 0; k < dim; ++k) {
        if (dims[k] < 1)
            throw ArgumentError("transform extent must be positive");
        n[k] = static_cast<int>(dims[k]);
        nreal_ *= static_cast<std::size_t>(dims[k]);
        ncomplex_ *= static_cast<std::size_t>(k == dim - 1 ? dims[k] / 2 + 1 : dims[k]);
    }
    for (int k = dim; k < 3; ++k)
        dims_[k] = 1;
    real_ = fftw_alloc_real(nreal_);
    spec_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(ncomplex_));
    if (!real_ || !spec_)
        throw CapacityError("transform buffer allocation failed");
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* c = reinterpret_cast<fftw_complex*>(spec_);
    plan_fwd_ = fftw_plan_dft_r2c(dim, n, real_, c, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r(dim, n, c, real_, FFTW_ESTIMATE);
}

RealFFT::~RealFFT()
{
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(real_);
    fftw_free(spec_);
}

void RealFFT::forward()
{
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
}

void RealFFT::inverse()
{
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
}

void RealFFT::for_each_frequency(double h, const std::function<void(std::size_t, double, double)>& f) const
{
    const auto xi2 = xi_squared(h);
    const auto w = weights();
    for (std::size_t k = 0; k < ncomplex_; ++k)
        f(k, xi2[k], w[k]);
}

std::vector<double> RealFFT::xi_squared(double h) const
{
    std::array<std::vector<double>, 3> axis;
    for (int d = 0; d < dim_; ++d) {
        const std::int64_t q = dims_[d];
        const std::int64_t stored = d == dim_ - 1 ? q / 2 + 1 : q;
        axis[d].resize(static_cast<std::size_t>(stored));
        for (std::int64_t m = 0; m < stored; ++m) {
            const std::int64_t mm = m <= q / 2 ? m : m - q;
            const double xi = 2.0 * M_PI * static_cast<double>(mm) / (static_cast<double>(q) * h);
            axis[d][static_cast<std::size_t>(m)] = xi * xi;
        }
    }
    std::vector<double> out(ncomplex_);
    const std::size_t n1 = dim_ >= 2 ? axis[1].size() : 1;
    const std::size_t n2 = dim_ >= 3 ? axis[2].size() : 1;
    std::size_t k = 0;
    for (std::size_t i = 0; i < axis[0].size(); ++i)
        for (std::size_t j = 0; j < n1; ++j)
            for (std::size_t l = 0; l < n2; ++l)
                out[k++] = axis[0][i] + (dim_ >= 2 ? axis[1][j] : 0.0) + (dim_ >= 3 ? axis[2][l] : 0.0);
    return out;
}

std::vector<double> RealFFT::weights() const
{
    const std::int64_t q = dims_[dim_ - 1];
    const std::size_t last = static_cast<std::size_t>(q / 2 + 1);
    std::vector<double> w(ncomplex_);
    for (std::size_t k = 0; k < ncomplex_; ++k) {
        const std::size_t m = k % last;
        const bool self_conjugate = m == 0 || (q % 2 == 0 && m == last - 1);
        w[k] = self_conjugate ? 1.0 : 2.0;
    }
    return w;
}

} // namespace vwave
