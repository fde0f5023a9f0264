#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mempol/geometry.hpp"
#include "mempol/layer_potentials.hpp"
#include "mempol/media.hpp"

namespace mempol {

using Matrix2cd = Eigen::Matrix2cd;
using Matrix2d = Eigen::Matrix2d;

struct PolarizationTensor {
    double omega = 0.0;
    Matrix2cd m = Matrix2cd::Zero();
};

/// Eigenvalues of a real symmetric 2x2, ascending.
inline std::array<double, 2> sym_eigenvalues(const Matrix2d& s) {
    const double tr = s(0, 0) + s(1, 1);
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

/// Caches the (beta k0)-independent operator data of a configuration so a
/// frequency sweep reuses one hypersingular discretization.
class PolarizationSolver {
  public:
    PolarizationSolver(const CellConfiguration& cfg, int n_nodes)
        : grid_(cfg, n_nodes),
          L_(hypersingular_L(grid_, Kernel::FreeSpace)),
          w_(grid_.arc_weights()),
          n1_(grid_.normal_component(0)),
          n2_(grid_.normal_component(1)) {}

    /// M_ij = beta k0 int n_j psi*_i ds with psi*_i = -(I + beta k0 L)^-1 [n_i].
    Matrix2cd tensor(Complex beta_k0) const {
        Matrix2cd M = Matrix2cd::Zero();
        if (beta_k0 == Complex(0.0, 0.0)) return M;
        if (!(beta_k0.real() > 0.0))
            throw std::invalid_argument("polarization_tensor: requires Re(beta k0) > 0");
        MatrixXcd A = MatrixXcd::Identity(grid_.size, grid_.size) +
                      beta_k0 * L_.cast<Complex>();
        Eigen::PartialPivLU<MatrixXcd> lu(A);
        MatrixXcd rhs(grid_.size, 2);
        rhs.col(0) = n1_.cast<Complex>();
        rhs.col(1) = n2_.cast<Complex>();
        const MatrixXcd psi = -lu.solve(rhs);
        for (int i = 0; i < 2; ++i) {
            M(i, 0) = beta_k0 * (w_.array() * n1_.array() * psi.col(i).array().real()).sum();
            M(i, 0) += beta_k0 * Complex(0, 1) *
                       (w_.array() * n1_.array() * psi.col(i).array().imag()).sum();
            M(i, 1) = beta_k0 * (w_.array() * n2_.array() * psi.col(i).array().real()).sum();
            M(i, 1) += beta_k0 * Complex(0, 1) *
                       (w_.array() * n2_.array() * psi.col(i).array().imag()).sum();
        }
        return M;
    }

    const ConfigGrid& grid() const { return grid_; }
    const MatrixXd& L() const { return L_; }
    const Eigen::VectorXd& weights() const { return w_; }

  private:
    ConfigGrid grid_;
    MatrixXd L_;
    Eigen::VectorXd w_;
    Eigen::VectorXd n1_, n2_;
};

inline constexpr int kDefaultNodes = 128;

/// Pick N by doubling until two consecutive resolutions agree to 1e-8 in
/// the tensor at the probe value of beta k0.
inline int auto_node_count(const CellConfiguration& cfg, Complex probe_beta_k0,
                           int n_start = kDefaultNodes, int n_limit = 1024) {
    int n = n_start;
    Matrix2cd prev = PolarizationSolver(cfg, n / 2).tensor(probe_beta_k0);
    while (n <= n_limit) {
        const Matrix2cd cur = PolarizationSolver(cfg, n).tensor(probe_beta_k0);
        const double scale = std::max(cur.norm(), 1e-300);
        if ((cur - prev).norm() / scale < 1e-8) return n;
        prev = cur;
        n *= 2;
    }
    return n_limit;
}

inline PolarizationTensor polarization_tensor(const CellConfiguration& cfg,
                                              const MembraneModel& model, double omega,
                                              int n_nodes = kDefaultNodes) {
    PolarizationTensor t;
    t.omega = omega;
    t.m = PolarizationSolver(cfg, n_nodes).tensor(beta_k0(model, omega));
    return t;
}

/// Maxwell-Wagner-Fricke closed form for a disk of radius r0:
/// M = -I beta k0 pi r0 / (1 + beta k0 / (2 r0)).
inline PolarizationTensor mwf_circle(const MembraneModel& model, double omega, double r0) {
    if (!(r0 > 0.0)) throw std::invalid_argument("mwf_circle: r0 must be > 0");
    const Complex bk = beta_k0(model, omega);
    PolarizationTensor t;
    t.omega = omega;
    t.m = -(bk * std::numbers::pi * r0 / (1.0 + bk / (2.0 * r0))) * Matrix2cd::Identity();
    return t;
}

/// Frequency of the MWF peak of Im M for the disk:
/// omega* = (sigma_m + sigma0 delta/(2 r0)) / (eps_m + eps0 delta/(2 r0)).
inline double mwf_peak_omega(const MembraneModel& m, double r0) {
    const double c = m.delta / (2.0 * r0);
    return (m.sigma_m + m.sigma0 * c) / (m.eps_m + m.eps0 * c);
}

/// Golden-section maximization of f on [a, b]; returns argmax.
inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double rel_tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while ((b - a) > rel_tol * std::abs(a + b) / 2.0) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

struct PolarizationSpectrum {
    FrequencyGrid grid;
    std::vector<PolarizationTensor> tensors;
    std::vector<double> lambda1, lambda2;  // eigenvalues of Im M, lambda1 <= lambda2
    double tau1 = 0.0, tau2 = 0.0;
    double peak_omega1 = 0.0, peak_omega2 = 0.0;
};

/// Sweep M(omega), eigen-decompose Im M per frequency and extract the
/// Debye times 1/tau_i = argmax_omega lambda_i by coarse scan plus
/// golden-section refinement on log omega.
inline PolarizationSpectrum spectrum(const CellConfiguration& cfg, const MembraneModel& model,
                                     const FrequencyGrid& grid, int n_nodes = 0) {
    grid.validate();
    const double omega_mid = std::sqrt(grid.omegas.front() * grid.omegas.back());
    if (n_nodes == 0) n_nodes = auto_node_count(cfg, beta_k0(model, omega_mid));
    PolarizationSolver solver(cfg, n_nodes);

    PolarizationSpectrum out;
    out.grid = grid;
    const std::size_t n = grid.size();
    out.tensors.resize(n);
    out.lambda1.resize(n);
    out.lambda2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = grid.omegas[i];
        out.tensors[i] = {w, solver.tensor(beta_k0(model, w))};
        const auto lam = sym_eigenvalues(out.tensors[i].m.imag());
        out.lambda1[i] = lam[0];
        out.lambda2[i] = lam[1];
    }

    auto branch = [&](int which, double w) {
        return sym_eigenvalues(solver.tensor(beta_k0(model, w)).imag())[static_cast<std::size_t>(which)];
    };
    for (int which = 0; which < 2; ++which) {
        const auto& lam = which == 0 ? out.lambda1 : out.lambda2;
        const std::size_t imax =
            static_cast<std::size_t>(std::max_element(lam.begin(), lam.end()) - lam.begin());
        if (imax == 0 || imax + 1 == n)
            throw std::runtime_error("spectrum: eigenvalue maximum on grid boundary (grid too narrow)");
        const double la = std::log(grid.omegas[imax - 1]), lb = std::log(grid.omegas[imax + 1]);
        const double lw = golden_max([&](double l) { return branch(which, std::exp(l)); }, la, lb, 1e-6);
        const double wstar = std::exp(lw);
        if (which == 0) {
            out.peak_omega1 = wstar;
            out.tau1 = 1.0 / wstar;
        } else {
            out.peak_omega2 = wstar;
            out.tau2 = 1.0 / wstar;
        }
    }
    return out;
}

struct ShapeSpectralData {
    double l1 = 0.0, l2 = 0.0;  // eigenvalues of int n L[n]^T ds, l1 <= l2
    double arclength = 0.0;
    Matrix2d q = Matrix2d::Zero();  // the full matrix
};

/// beta-independent operator data entering the small-delta expansion.
inline ShapeSpectralData shape_spectral_data(const CellConfiguration& cfg,
                                             int n_nodes = kDefaultNodes) {
    PolarizationSolver s(cfg, n_nodes);
    const auto& g = s.grid();
    const Eigen::VectorXd w = s.weights();
    const Eigen::VectorXd n1 = g.normal_component(0), n2 = g.normal_component(1);
    const Eigen::VectorXd Ln1 = s.L() * n1, Ln2 = s.L() * n2;
    Matrix2d q;
    q(0, 0) = (w.array() * n1.array() * Ln1.array()).sum();
    q(0, 1) = (w.array() * n1.array() * Ln2.array()).sum();
    q(1, 0) = (w.array() * n2.array() * Ln1.array()).sum();
    q(1, 1) = (w.array() * n2.array() * Ln2.array()).sum();
    q = (0.5 * (q + q.transpose())).eval();
    ShapeSpectralData d;
    d.q = q;
    const auto lam = sym_eigenvalues(q);
    d.l1 = lam[0];
    d.l2 = lam[1];
    d.arclength = w.sum();
    return d;
}

/// Debye times from the positive root of
/// -eps_m^4 |Gamma| w^4 + 6 delta eps_m^2 sigma_m l_i rho w^2 + sigma_m^4 |Gamma|,
/// valid under the sigma0 = 1, eps0 = 0 normalization.
inline std::array<double, 2> small_delta_tau(const CellConfiguration& cfg,
                                             const MembraneModel& model,
                                             int n_nodes = kDefaultNodes) {
    if (std::abs(model.sigma0 - 1.0) > 1e-12 || model.eps0 != 0.0)
        throw std::invalid_argument("small_delta_tau: requires sigma0 = 1, eps0 = 0");
    if (!(model.eps_m > 0.0)) throw std::invalid_argument("small_delta_tau: requires eps_m > 0");
    const auto d = shape_spectral_data(cfg, n_nodes);
    const double em = model.eps_m, sm = model.sigma_m, del = model.delta;
    std::array<double, 2> tau{};
    const double ls[2] = {d.l2, d.l1};  // larger l gives the smaller eigenvalue branch
    for (int i = 0; i < 2; ++i) {
        const double a = em * em * em * em * d.arclength;
        const double b = 6.0 * del * em * em * sm * ls[i] * cfg.rho;
        const double c = sm * sm * sm * sm * d.arclength;
        const double w2 = (b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
        // product of roots in w^2 is -c/a < 0, so exactly one positive root
        tau[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(w2);
    }
    return tau;
}

struct AnisotropyFit {
    std::vector<double> ratio;  // lambda1 / lambda2 per grid frequency
    double fitted_c = 0.0;      // from ratio ~ 1 + c/(sigma_m^2 + w^2 eps_m^2)
    double formula_c = 0.0;     // (l1 - l2) 2 delta sigma_m rho / |Gamma|
};

/// Anisotropy measure lambda1/lambda2 with the large-omega coefficient
/// fit against the first-order formula.
inline AnisotropyFit anisotropy_ratio(const PolarizationSpectrum& spec,
                                      const CellConfiguration& cfg, const MembraneModel& model,
                                      int n_nodes = kDefaultNodes) {
    AnisotropyFit fit;
    fit.ratio.resize(spec.lambda1.size());
    for (std::size_t i = 0; i < spec.lambda1.size(); ++i) {
        if (!(spec.lambda2[i] > 0.0))
            throw std::runtime_error("anisotropy_ratio: lambda2 not positive");
        fit.ratio[i] = spec.lambda1[i] / spec.lambda2[i];
    }
    const auto d = shape_spectral_data(cfg, n_nodes);
    fit.formula_c = (d.l1 - d.l2) * 2.0 * model.delta * model.sigma_m * cfg.rho / d.arclength;
    // least squares on the upper frequency half
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = spec.lambda1.size() / 2; i < spec.lambda1.size(); ++i) {
        const double w = spec.grid.omegas[i];
        const double x = 1.0 / (model.sigma_m * model.sigma_m + w * w * model.eps_m * model.eps_m);
        sxx += x * x;
        sxy += x * (fit.ratio[i] - 1.0);
    }
    fit.fitted_c = sxx > 0.0 ? sxy / sxx : 0.0;
    return fit;
}

}  // namespace mempol
