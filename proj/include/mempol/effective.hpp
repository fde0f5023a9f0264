#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mempol/geometry.hpp"
#include "mempol/layer_potentials.hpp"
#include "mempol/media.hpp"
#include "mempol/periodic_green.hpp"
#include "mempol/polarization.hpp"

namespace mempol {

struct EffectiveTensor {
    double omega = 0.0;
    double f = 0.0;
    Matrix2cd k = Matrix2cd::Zero();
};

/// Pade resummation K* = k0 (I + Mf (I - Mf/2)^-1), where Mf is the
/// polarization tensor of the unit-cell configuration (it already carries
/// the volume-fraction scaling: Mf = f M of the rescaled inclusion).
inline EffectiveTensor dilute_effective(const CellConfiguration& cfg, const MembraneModel& model,
                                        double omega, int n_nodes = kDefaultNodes) {
    const Matrix2cd Mf = PolarizationSolver(cfg, n_nodes).tensor(beta_k0(model, omega));
    EffectiveTensor out;
    out.omega = omega;
    out.f = cfg.f;
    out.k = admittivity_k0(model, omega) *
            (Matrix2cd::Identity() + Mf * (Matrix2cd::Identity() - 0.5 * Mf).inverse());
    return out;
}

/// Exact unit-cell formula
/// K*_ij = k0 (delta_ij - beta k0 int_Gamma (I + beta k0 Ltilde)^-1[n_i] n_j ds)
/// with the periodic hypersingular operator Ltilde built from G#.
inline EffectiveTensor periodic_effective(const CellConfiguration& cfg, const MembraneModel& model,
                                          double omega, int n_nodes = kDefaultNodes,
                                          const PeriodicGreen* pg = nullptr) {
    cfg.require_inside_unit_cell();
    PeriodicGreen local;
    if (pg == nullptr) pg = &local;
    ConfigGrid grid(cfg, n_nodes);
    const MatrixXd Lt = hypersingular_L(grid, Kernel::Periodic, pg);
    const Complex bk = beta_k0(model, omega);
    const MatrixXcd A =
        MatrixXcd::Identity(grid.size, grid.size) + bk * Lt.cast<Complex>();
    Eigen::PartialPivLU<MatrixXcd> lu(A);
    const Eigen::VectorXd w = grid.arc_weights();
    MatrixXcd rhs(grid.size, 2);
    rhs.col(0) = grid.normal_component(0).cast<Complex>();
    rhs.col(1) = grid.normal_component(1).cast<Complex>();
    const MatrixXcd phi = -lu.solve(rhs);  // phi_i = -(I + bk Ltilde)^-1 [n_i]
    Matrix2cd K = Matrix2cd::Identity();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            K(i, j) += bk * (w.cast<Complex>().array() * phi.col(i).array() *
                             rhs.col(j).array())
                                .sum();
    EffectiveTensor out;
    out.omega = omega;
    out.f = cfg.f;
    out.k = admittivity_k0(model, omega) * K;
    return out;
}

struct RandomEffectiveResult {
    EffectiveTensor kstar;
    Matrix2cd mean_m = Matrix2cd::Zero();     // ensemble mean of Mf
    Matrix2d stderr_m = Matrix2d::Zero();     // entrywise standard error of |Mf|
    double volume_factor = 1.0;               // 1 / E[det A]
    int n_samples = 0;
    std::uint64_t seed = 0;
};

/// Ensemble-averaged dilute formula: draw i.i.d. per-cell deformations,
/// average the polarization tensor of each deformed configuration, and
/// resum K* = k0 (I + q Mbar (I - q Mbar / 2)^-1) with q = 1 / E[det A]
/// accounting for the volume change of the random map. Sample s uses the
/// derived seed (seed, s), so runs are reproducible and order-independent.
inline RandomEffectiveResult random_dilute_effective(const CellConfiguration& cfg,
                                                     const MembraneModel& model, double omega,
                                                     const DeformationParams& params,
                                                     int n_samples, std::uint64_t seed,
                                                     int n_nodes = kDefaultNodes) {
    if (n_samples < 1) throw std::invalid_argument("random_dilute_effective: n_samples >= 1");
    const Complex bk = beta_k0(model, omega);
    Matrix2cd mean = Matrix2cd::Zero();
    Matrix2d m2 = Matrix2d::Zero();  // Welford sum of squared deviations, entrywise on |.|
    double det_sum = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        std::vector<Curve> deformed;
        deformed.reserve(cfg.curves.size());
        double det_prod = 0.0;
        for (std::size_t c = 0; c < cfg.curves.size(); ++c) {
            std::seed_seq seq{seed, static_cast<std::uint64_t>(s),
                              static_cast<std::uint64_t>(c)};
            std::uint64_t derived[2];
            {
                std::uint32_t words[4];
                seq.generate(words, words + 4);
                derived[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
                derived[1] = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
            }
            const DeformationSample d =
                sample_deformation(params, cfg.curves[c], derived[0] ^ derived[1]);
            deformed.push_back(apply_deformation(cfg.curves[c], d));
            det_prod += d.A.determinant();
        }
        det_sum += det_prod / static_cast<double>(cfg.curves.size());
        const CellConfiguration dcfg(deformed);
        const Matrix2cd Ms = PolarizationSolver(dcfg, n_nodes).tensor(bk);
        const Matrix2cd delta = Ms - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta.cwiseAbs().cwiseProduct((Ms - mean).cwiseAbs());
    }
    RandomEffectiveResult out;
    out.n_samples = n_samples;
    out.seed = seed;
    out.mean_m = mean;
    if (n_samples > 1)
        out.stderr_m = (m2 / static_cast<double>(n_samples - 1)).cwiseSqrt() /
                       std::sqrt(static_cast<double>(n_samples));
    out.volume_factor = static_cast<double>(n_samples) / det_sum;
    const Matrix2cd qm = out.volume_factor * mean;
    out.kstar.omega = omega;
    out.kstar.f = cfg.f;
    out.kstar.k = admittivity_k0(model, omega) *
                  (Matrix2cd::Identity() + qm * (Matrix2cd::Identity() - 0.5 * qm).inverse());
    return out;
}

}  // namespace mempol
