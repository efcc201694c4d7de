#pragma once

// Hot loops in two flavours: OpenMP-parallel and a plain serial reference used by the tests and
// benchmarks. Both produce bit-identical results (fixed summation order per output entry).

#include "vwave/fracform.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace vwave::kernels {

/** Offsets m with autocorrelation sum_x u(x) u(x + m) over a box of node counts `counts`. */
struct OffsetList {
    std::vector<std::array<std::int64_t, 3>> offsets;
};

namespace serial {
void assemble(const KernelTable& table, const Mask& mask, Eigen::MatrixXd& out);
void dense_apply(const KernelTable& table, const Mask& mask, const Eigen::VectorXd& x, Eigen::VectorXd& y);
void autocorrelation(const Grid& g, const std::vector<double>& u, const OffsetList& offs, std::vector<double>& out);
} // namespace serial

namespace omp {
void assemble(const KernelTable& table, const Mask& mask, Eigen::MatrixXd& out);
void dense_apply(const KernelTable& table, const Mask& mask, const Eigen::VectorXd& x, Eigen::VectorXd& y);
void autocorrelation(const Grid& g, const std::vector<double>& u, const OffsetList& offs, std::vector<double>& out);
} // namespace omp

int max_threads();
void set_threads(int n);

} // namespace vwave::kernels
