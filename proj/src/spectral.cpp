#include "vwave/spectral.hpp"

#include "vwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace vwave {

void SolverConfig::validate() const
{
    form.validate();
    if (!(tol > 0.0) || max_iter < 1 || extra_block < 0 || !(shift > 0.0) || !(min_period_factor >= 0.0))
        throw ConfigError("invalid eigensolver settings");
}

FormConfig form_config_for(const CrossSection& omega, const SolverConfig& cfg)
{
    FormConfig f = cfg.form;
    f.min_period = std::max(f.min_period, cfg.min_period_factor * omega.diameter());
    return f;
}

EigenPairs dense_eigenpairs(const FormMatrix& m, int k)
{
    const auto n = m.entries.rows();
    if (k < 1 || k > n)
        throw ArgumentError("requested eigenpair count out of range");
    const double vol = std::pow(m.mask->grid.h, m.mask->grid.dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries / vol);
    if (es.info() != Eigen::Success)
        throw SolverError("dense eigensolver failed");
    EigenPairs r;
    r.values = es.eigenvalues().head(k);
    r.vectors = es.eigenvectors().leftCols(k);
    r.residuals.resize(k);
    for (int j = 0; j < k; ++j)
        r.residuals[j] = ((m.entries / vol) * r.vectors.col(j) - r.values[j] * r.vectors.col(j)).norm();
    return r;
}

namespace {

// Orthonormal basis of span(S) (with AS tracked); drops directions whose Gram eigenvalue is negligible.
bool svqb(Eigen::MatrixXd& S, Eigen::MatrixXd& AS)
{
    const Eigen::MatrixXd G = S.transpose() * S;
    Eigen::VectorXd d = G.diagonal().cwiseSqrt();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d[i] = d[i] > 0.0 ? 1.0 / d[i] : 0.0;
    const Eigen::MatrixXd Gs = d.asDiagonal() * G * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gs);
    const double top = es.eigenvalues().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < Gs.rows(); ++i)
        if (es.eigenvalues()[i] > 1e-13 * top)
            keep.push_back(i);
    if (keep.empty())
        return false;
    Eigen::MatrixXd T(G.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        T.col(static_cast<Eigen::Index>(j))
            = d.asDiagonal() * es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()[keep[j]]);
    S = S * T;
    AS = AS * T;
    return true;
}

} // namespace

EigenPairs lobpcg(const MaskedOperator& op, int k, const SolverConfig& cfg, const Eigen::MatrixXd* guess)
{
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(op.size());
    if (k < 1 || k > n)
        throw ArgumentError("requested eigenpair count out of range");
    const Eigen::Index m = std::min<Eigen::Index>(k + cfg.extra_block, n);

    Eigen::MatrixXd X(n, m);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            X(i, j) = dist(rng);
    if (guess != nullptr) {
        if (guess->rows() != n)
            throw ArgumentError("initial guess has the wrong size");
        const Eigen::Index g = std::min(m, guess->cols());
        X.leftCols(g) = guess->leftCols(g) + 1e-3 * X.leftCols(g) / std::sqrt(static_cast<double>(n));
    }
    Eigen::MatrixXd AX(n, m);
    op.apply(X, AX);
    if (!svqb(X, AX) || X.cols() < m)
        throw SolverError("degenerate starting block");

    Eigen::MatrixXd P, AP;
    Eigen::VectorXd lambda;
    EigenPairs r;
    r.converged = false;
    for (int it = 0; it < cfg.max_iter; ++it) {
        if (it > 0 && it % 10 == 0) {
            // tracked products drift by rounding
            op.apply(X, AX);
            if (P.cols() > 0)
                op.apply(P, AP);
        }
        // Rayleigh-Ritz on span(X)
        const Eigen::MatrixXd H = X.transpose() * AX;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
        X = X * es.eigenvectors();
        AX = AX * es.eigenvectors();
        lambda = es.eigenvalues();
        const Eigen::MatrixXd R = AX - X * lambda.asDiagonal();
        r.iterations = it;
        bool done = true;
        for (int j = 0; j < k; ++j)
            if (R.col(j).norm() > cfg.tol * std::max(1.0, std::abs(lambda[j])))
                done = false;
        if (done) {
            r.converged = true;
            break;
        }

        Eigen::MatrixXd W(n, m), AW(n, m);
        op.precondition(R, W, cfg.shift);
        W -= X * (X.transpose() * W);
        if (P.cols() > 0)
            W -= P * (P.transpose() * W);
        op.apply(W, AW);

        const Eigen::Index np = P.cols();
        Eigen::MatrixXd S(n, 2 * m + np), AS(n, 2 * m + np);
        S << X, W, P;
        AS << AX, AW, AP;
        if (!svqb(S, AS))
            throw SolverError("search space collapsed");
        const Eigen::MatrixXd HS = S.transpose() * AS;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (HS + HS.transpose()));
        const Eigen::MatrixXd C = small.eigenvectors().leftCols(m);
        Eigen::MatrixXd Xn = S * C, AXn = AS * C;
        const Eigen::MatrixXd O = X.transpose() * Xn;
        P = Xn - X * O;
        AP = AXn - AX * O;
        if (!svqb(P, AP)) {
            P.resize(n, 0);
            AP.resize(n, 0);
        }
        X = std::move(Xn);
        AX = std::move(AXn);
    }
    if (!r.converged) {
        const Eigen::MatrixXd H = X.transpose() * AX;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
        X = X * es.eigenvectors();
        AX = AX * es.eigenvectors();
        lambda = es.eigenvalues();
        r.iterations = cfg.max_iter;
    }
    r.values = lambda.head(k);
    r.vectors = X.leftCols(k);
    r.residuals.resize(k);
    for (int j = 0; j < k; ++j)
        r.residuals[j] = (AX.col(j) - lambda[j] * X.col(j)).norm();
    return r;
}

EigenPairs smallest_eigenpairs(const MaskPtr& mask, FracOrder s, int k, const SolverConfig& cfg)
{
    cfg.validate();
    if (mask->count() == 0)
        throw ArgumentError("mask has no active nodes");
    if (mask->count() < cfg.dense_limit) {
        FormConfig f = cfg.form;
        f.max_dense_nodes = std::max(f.max_dense_nodes, cfg.dense_limit);
        return dense_eigenpairs(assemble_form(mask, s, f), k);
    }
    MaskedOperator op(mask, s, cfg.form);
    return lobpcg(op, k, cfg);
}

namespace {

GridFunction to_grid_function(const MaskPtr& mask, const Eigen::VectorXd& x)
{
    const double scale = 1.0 / std::sqrt(std::pow(mask->grid.h, mask->grid.dim));
    return GridFunction::from_active(mask, x * scale);
}

} // namespace

ThresholdResult threshold(const CrossSection& omega, FracOrder s, double h, const SolverConfig& cfg)
{
    omega.validate();
    for (int k = 0; k < omega.dim(); ++k)
        if (omega.width(k) / h < 32.0 - 1e-9)
            throw ResolutionError("cross-section needs at least 32 nodes per axis");
    const auto mask = section_mask(omega, section_grid(omega, h));
    SolverConfig c = cfg;
    c.form = form_config_for(omega, cfg);
    auto pairs = smallest_eigenpairs(mask, s, 1, c);
    if (!pairs.converged)
        throw SolverError("threshold eigensolve did not converge; residual " + std::to_string(pairs.residuals[0]));
    Eigen::VectorXd v = pairs.vectors.col(0);
    if (v.sum() < 0.0)
        v = -v;
    ThresholdResult r;
    r.value = pairs.values[0];
    r.phi = to_grid_function(mask, v);
    r.residual = pairs.residuals[0];
    return r;
}

double ThresholdStudy::at(double hv) const
{
    for (std::size_t i = 0; i < h.size(); ++i)
        if (std::abs(h[i] - hv) <= 1e-12 * hv)
            return values[i];
    return std::numeric_limits<double>::quiet_NaN();
}

ThresholdStudy threshold_study(const CrossSection& omega, FracOrder s, std::vector<double> hs, const SolverConfig& cfg)
{
    if (hs.empty())
        throw ArgumentError("threshold study needs at least one grid level");
    std::sort(hs.begin(), hs.end(), std::greater<>());
    ThresholdStudy st;
    st.order = s;
    st.h = hs;
    for (double h : hs) {
        auto r = threshold(omega, s, h, cfg);
        st.values.push_back(r.value);
        st.phi = std::move(r.phi);
    }
    const std::size_t m = hs.size();
    if (m >= 2) {
        const double a = st.values[m - 1], b = st.values[m - 2];
        const double ratio = hs[m - 2] / hs[m - 1];
        st.extrapolated = a + (a - b) / (ratio - 1.0);
        st.eps_disc = std::abs(a - b);
    } else {
        st.extrapolated = st.values[0];
    }
    return st;
}

EigenResult waveguide_eigs(const Waveguide& w, FracOrder s, double h, const ThresholdStudy& study,
                           const EigsOptions& opt, const SolverConfig& cfg)
{
    w.validate();
    cfg.validate();
    if (opt.k < 1)
        throw ArgumentError("eigenvalue count must be at least 1");
    SolverConfig c = cfg;
    c.form = form_config_for(w.omega, cfg);

    EigenResult r;
    r.eps_disc = study.eps_disc;
    r.reference_threshold = study.at(h);
    if (std::isnan(r.reference_threshold))
        r.reference_threshold = threshold(w.omega, s, h, cfg).value;

    const Grid g = waveguide_grid(w, h);
    const auto mask = membership_mask(w, g);
    if (static_cast<std::size_t>(opt.k) > mask->count())
        throw ArgumentError("more eigenvalues requested than active nodes");
    auto pairs = smallest_eigenpairs(mask, s, opt.k, c);
    r.partial = !pairs.converged;
    r.iterations = pairs.iterations;

    const auto [sb, cb] = sincos_exact(w.beta);
    (void)sb;
    r.arm_threshold = std::numeric_limits<double>::quiet_NaN();
    if (opt.arm_control) {
        if (cb == 0.0) {
            r.arm_threshold = pairs.values[0];
        } else {
            const auto arm = strip_mask(w, strip_grid(w, h));
            auto ap = smallest_eigenpairs(arm, s, 1, c);
            if (!ap.converged)
                throw SolverError("arm-control eigensolve did not converge; residual "
                                  + std::to_string(ap.residuals[0]));
            r.arm_threshold = ap.values[0];
        }
    }
    r.threshold = std::isnan(r.arm_threshold) ? r.reference_threshold
                                              : std::min(r.reference_threshold, r.arm_threshold);

    const double scale = std::sqrt(std::pow(h, g.dim));
    for (int j = 0; j < opt.k; ++j) {
        r.values.push_back(pairs.values[j]);
        Eigen::VectorXd v = pairs.vectors.col(j);
        if (v.sum() < 0.0)
            v = -v;
        r.vectors.push_back(to_grid_function(mask, v));
        r.residuals.push_back(pairs.residuals[j] * scale);
        if (pairs.values[j] < r.threshold - r.eps_disc)
            ++r.below_threshold_count;
    }
    return r;
}

double rayleigh(const GridFunction& u, FracOrder s, const FormConfig& cfg)
{
    const double m = mass_norm(u);
    if (!(m > 0.0))
        throw ArgumentError("Rayleigh quotient of a zero function");
    return form_energy(u, s, cfg) / m;
}

} // namespace vwave
