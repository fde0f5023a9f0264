#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mempol/geometry.hpp"
#include "mempol/layer_potentials.hpp"
#include "mempol/media.hpp"
#include "mempol/polarization.hpp"

namespace mempol {

/// Disk-shaped measurement domain with a uniform boundary grid.
struct ProbeDomain {
    double radius = 1.0;
    int n_nodes = 128;

    ProbeDomain(double r, int n) : radius(r), n_nodes(n) {
        if (!(radius > 0.0)) throw std::invalid_argument("ProbeDomain: radius must be > 0");
        grid_ = std::make_shared<ConfigGrid>(Curve::circle(radius), n_nodes);
    }

    const ConfigGrid& grid() const { return *grid_; }

    /// Current pattern a . n for a unit direction a.
    Eigen::VectorXd directional_pattern(const Vec2& a) const {
        return a.x() * grid_->normal_component(0) + a.y() * grid_->normal_component(1);
    }

    void require_zero_mean(const Eigen::VectorXd& g) const {
        const Eigen::VectorXd w = grid_->arc_weights();
        const double mean = (w.array() * g.array()).sum();
        if (std::abs(mean) > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff() * w.sum()))
            throw std::invalid_argument("ProbeDomain: current pattern must have zero mean");
    }

  private:
    std::shared_ptr<ConfigGrid> grid_;
};

/// Macroscopic inclusion filled with a cell suspension of admittivity
/// 1 + f M(omega) against a unit background.
struct SuspensionInclusion {
    Curve d;
    double f = 0.0;
    PolarizationSpectrum spectrum;

    /// Tensor M at omega, cubic Hermite interpolation in ln omega on the
    /// spectrum grid (finite-difference slopes, one-sided at the ends).
    Matrix2cd tensor_m(double omega) const {
        const auto& ws = spectrum.grid.omegas;
        if (ws.size() < 2 || omega < ws.front() || omega > ws.back())
            throw std::invalid_argument("SuspensionInclusion: omega outside spectrum grid");
        std::size_t i = 1;
        while (i + 1 < ws.size() && ws[i] < omega) ++i;
        const std::size_t a = i - 1, b = i;
        const double la = std::log(ws[a]), lb = std::log(ws[b]);
        const double hseg = lb - la;
        const double s = (std::log(omega) - la) / hseg;
        const Matrix2cd &ma = spectrum.tensors[a].m, &mb = spectrum.tensors[b].m;
        auto slope = [&](std::size_t j) -> Matrix2cd {
            if (j == 0)
                return (spectrum.tensors[1].m - spectrum.tensors[0].m) /
                       std::log(ws[1] / ws[0]);
            if (j + 1 == ws.size())
                return (spectrum.tensors[j].m - spectrum.tensors[j - 1].m) /
                       std::log(ws[j] / ws[j - 1]);
            return (spectrum.tensors[j + 1].m - spectrum.tensors[j - 1].m) /
                   std::log(ws[j + 1] / ws[j - 1]);
        };
        const Matrix2cd da = hseg * slope(a), db = hseg * slope(b);
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * ma + (s3 - 2 * s2 + s) * da +
               (-2 * s3 + 3 * s2) * mb + (s3 - s2) * db;
    }

    /// Isotropic value of M; throws if M is not isotropic to tol.
    Complex scalar_m(double omega, double tol = 1e-6) const {
        const Matrix2cd m = tensor_m(omega);
        const double scale = std::max(m.norm(), 1e-300);
        if (std::abs(m(0, 1)) / scale > tol || std::abs(m(0, 0) - m(1, 1)) / scale > tol)
            throw std::invalid_argument("SuspensionInclusion: M is not isotropic");
        return 0.5 * (m(0, 0) + m(1, 1));
    }
};

struct ForwardSolution {
    VectorXcd u;      // boundary potential at probe nodes
    VectorXcd psi;    // density on the probe boundary
    VectorXcd phi;    // density on the inclusion boundary
    Complex shift{};  // reported constant of the mean-zero gauge
};

/// Cached geometry factorization pieces for repeated forward solves on
/// the same probe/inclusion pair (all kernels are omega-independent).
class ForwardOperator {
  public:
    ForwardOperator(const ProbeDomain& probe, const Curve& d, int n_inclusion_nodes = 128)
        : probe_(probe), dgrid_(d, n_inclusion_nodes) {
        const ConfigGrid& og = probe.grid();
        if (sampled_min_distance(Curve::circle(probe.radius), d) < 1e-3)
            throw std::invalid_argument("ForwardOperator: inclusion must be strictly inside the probe");
        kstar_omega_ = np_adjoint_matrix(og, Kernel::FreeSpace).A.real();
        kstar_d_ = np_adjoint_matrix(dgrid_, Kernel::FreeSpace).A.real();
        s_omega_ = single_layer_matrix(og, Kernel::FreeSpace).A.real();
        std::vector<Vec2> otargets, onormals, dtargets, dnormals;
        for (const auto& part : og.parts)
            for (int j = 0; j < part.N; ++j) {
                otargets.push_back(part.x[static_cast<std::size_t>(j)]);
                onormals.push_back(part.normal[static_cast<std::size_t>(j)]);
            }
        for (const auto& part : dgrid_.parts)
            for (int j = 0; j < part.N; ++j) {
                dtargets.push_back(part.x[static_cast<std::size_t>(j)]);
                dnormals.push_back(part.normal[static_cast<std::size_t>(j)]);
            }
        s_d_to_omega_ = single_layer_offcurve(dgrid_, otargets);
        dn_d_to_omega_ = single_layer_dn_offcurve(dgrid_, otargets, onormals);
        dn_omega_to_d_ = single_layer_dn_offcurve(og, dtargets, dnormals);
        w_omega_ = og.arc_weights();
    }

    /// Solve div((1 + (k_D - 1) chi_D) grad u) = 0 in the probe disk,
    /// du/dn = g on its boundary, with the mean-zero boundary gauge.
    /// Representation u = S_probe[psi] + S_D[phi] + c'; the transmission
    /// row is scaled by 2(k_D - 1) so k_D = 1 smoothly yields phi = 0.
    ForwardSolution solve(Complex k_d, const Eigen::VectorXd& g) const {
        probe_.require_zero_mean(g);
        const int nb = static_cast<int>(w_omega_.size());
        const int nd = dgrid_.size;
        const int n = nb + nd + 2;
        MatrixXcd A = MatrixXcd::Zero(n, n);
        VectorXcd rhs = VectorXcd::Zero(n);
        // Neumann rows: (-1/2 I + K*_probe) psi + dnS_D phi + c . 1 = g
        A.topLeftCorner(nb, nb) =
            (-0.5 * MatrixXd::Identity(nb, nb) + kstar_omega_).cast<Complex>();
        A.block(0, nb, nb, nd) = dn_d_to_omega_.cast<Complex>();
        A.block(0, nb + nd + 1, nb, 1).setOnes();
        rhs.head(nb) = g.cast<Complex>();
        // transmission rows: ((k_D+1) I - 2(k_D-1) K*_D) phi = 2(k_D-1) dnS_probe psi
        const Complex two_jump = 2.0 * (k_d - 1.0);
        A.block(nb, nb, nd, nd) = (k_d + 1.0) * MatrixXcd::Identity(nd, nd) -
                                  two_jump * kstar_d_.cast<Complex>();
        A.block(nb, 0, nd, nb) = -two_jump * dn_omega_to_d_.cast<Complex>();
        // gauge row: mean of u over the probe boundary vanishes
        A.block(nb + nd, 0, 1, nb) = (w_omega_.transpose() * s_omega_).cast<Complex>();
        A.block(nb + nd, nb, 1, nd) = (w_omega_.transpose() * s_d_to_omega_).cast<Complex>();
        A(nb + nd, nb + nd) = w_omega_.sum();
        // compatibility row: mean of psi vanishes
        A.block(nb + nd + 1, 0, 1, nb) = w_omega_.transpose().cast<Complex>();

        Eigen::PartialPivLU<MatrixXcd> lu(A);
        const VectorXcd x = lu.solve(rhs);
        if ((A * x - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm()))
            throw std::runtime_error("ForwardOperator: linear system singular to working precision");
        ForwardSolution out;
        out.psi = x.head(nb);
        out.phi = x.segment(nb, nd);
        out.shift = x(nb + nd);
        out.u = s_omega_.cast<Complex>() * out.psi + s_d_to_omega_.cast<Complex>() * out.phi;
        out.u.array() += out.shift;
        return out;
    }

    const ProbeDomain& probe() const { return probe_; }
    const ConfigGrid& inclusion_grid() const { return dgrid_; }

  private:
    ProbeDomain probe_;
    ConfigGrid dgrid_;
    MatrixXd kstar_omega_, kstar_d_, s_omega_, s_d_to_omega_, dn_d_to_omega_, dn_omega_to_d_;
    Eigen::VectorXd w_omega_;
};

inline ForwardSolution forward_solve(const ForwardOperator& op, const SuspensionInclusion& inc,
                                     double omega, const Eigen::VectorXd& g) {
    return op.solve(1.0 + inc.f * inc.scalar_m(omega), g);
}

/// Boundary imaging functional
/// F(x) = (1/2) Im u(x) + (1/2pi) oint ((x-y).n(x)/|x-y|^2) Im u(y) ds(y),
/// with the smooth diagonal limit kappa(x)/2 of the kernel.
inline Eigen::VectorXd imaging_functional(const ProbeDomain& probe, const VectorXcd& u) {
    const ConfigGrid& g = probe.grid();
    if (u.size() != g.size) throw std::invalid_argument("imaging_functional: size mismatch");
    const Eigen::VectorXd w = g.arc_weights();
    const Eigen::VectorXd im = u.imag();
    Eigen::VectorXd out = 0.5 * im;
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    const CurveGrid& P = g.parts[0];
    for (int i = 0; i < g.size; ++i) {
        const auto is = static_cast<std::size_t>(i);
        double acc = 0.0;
        for (int j = 0; j < g.size; ++j) {
            const auto js = static_cast<std::size_t>(j);
            double k;
            if (i == j) {
                k = 0.5 * P.curvature[is];
            } else {
                const Vec2 d = P.x[is] - P.x[js];
                k = d.dot(P.normal[is]) / d.squaredNorm();
            }
            acc += k * im[j] * w[j];
        }
        out[i] += inv2pi * acc;
    }
    return out;
}

struct DebyeEstimate {
    double tau_hat = 0.0;
    double omega_hat = 0.0;
    double peak_norm = 0.0;
    std::vector<double> norms;  // ||F||_2 per grid frequency
};

/// Closed-loop Debye time: tau_hat = 1/argmax_omega ||F(., omega)||_2,
/// coarse scan over the grid then golden refinement on ln omega.
inline DebyeEstimate estimate_debye(const ForwardOperator& op, const SuspensionInclusion& inc,
                                    const Eigen::VectorXd& g, const FrequencyGrid& grid) {
    grid.validate();
    const Eigen::VectorXd w = op.probe().grid().arc_weights();
    auto fnorm = [&](double omega) {
        const Eigen::VectorXd F = imaging_functional(op.probe(), forward_solve(op, inc, omega, g).u);
        return std::sqrt((w.array() * F.array().square()).sum());
    };
    DebyeEstimate out;
    out.norms.reserve(grid.size());
    for (double omega : grid.omegas) out.norms.push_back(fnorm(omega));
    const std::size_t imax = static_cast<std::size_t>(
        std::max_element(out.norms.begin(), out.norms.end()) - out.norms.begin());
    if (imax == 0 || imax + 1 == grid.size())
        throw std::runtime_error("estimate_debye: peak on grid boundary (grid too narrow)");
    const double la = std::log(grid.omegas[imax - 1]), lb = std::log(grid.omegas[imax + 1]);
    const double lw = golden_max([&](double l) { return fnorm(std::exp(l)); }, la, lb, 1e-6);
    out.omega_hat = std::exp(lw);
    out.tau_hat = 1.0 / out.omega_hat;
    out.peak_norm = fnorm(out.omega_hat);
    return out;
}

/// Raised-cosine bandpass hhat(omega) = (1 + cos(pi (omega-center)/bandwidth))/2
/// on |omega - center| <= bandwidth, zero outside.
struct PulseSpec {
    double center = 0.0;
    double bandwidth = 0.0;
    int n_refine = 2001;  // linear-in-omega quadrature points over the support
    int n_time = 401;
    double horizon = 0.0;  // defaults to 20 / bandwidth

    void validate() const {
        if (!(center > 0.0) || !(bandwidth > 0.0) || !(center - bandwidth > 0.0))
            throw std::invalid_argument("PulseSpec: need 0 < bandwidth < center");
        if (n_refine < 16 || n_time < 2) throw std::invalid_argument("PulseSpec: grid too coarse");
    }

    double hhat(double omega) const {
        const double d = (omega - center) / bandwidth;
        return std::abs(d) <= 1.0 ? 0.5 * (1.0 + std::cos(std::numbers::pi * d)) : 0.0;
    }
};

struct PulseResponse {
    std::vector<double> t;
    std::vector<Matrix2cd> m_t;  // script-M_i(t) per time sample
    double max_norm = 0.0;       // max_t Frobenius norm
};

/// Time-domain tensor script-M(t) = int hhat(omega) M(omega) e^{i omega t} domega
/// by trapezoid quadrature on a linear refinement over supp hhat.
inline PulseResponse pulse_response(const PulseSpec& pulse, const SuspensionInclusion& inc) {
    pulse.validate();
    const double lo = pulse.center - pulse.bandwidth, hi = pulse.center + pulse.bandwidth;
    if (lo < inc.spectrum.grid.omegas.front() || hi > inc.spectrum.grid.omegas.back())
        throw std::invalid_argument("pulse_response: spectrum grid does not cover supp hhat");
    PulseResponse out;
    const double T = pulse.horizon > 0.0 ? pulse.horizon : 20.0 / pulse.bandwidth;
    out.t.resize(static_cast<std::size_t>(pulse.n_time));
    out.m_t.assign(static_cast<std::size_t>(pulse.n_time), Matrix2cd::Zero());
    const double dw = (hi - lo) / (pulse.n_refine - 1);
    std::vector<Matrix2cd> mh(static_cast<std::size_t>(pulse.n_refine));
    std::vector<double> ws(static_cast<std::size_t>(pulse.n_refine));
    for (int k = 0; k < pulse.n_refine; ++k) {
        ws[static_cast<std::size_t>(k)] = lo + k * dw;
        const double trap = (k == 0 || k + 1 == pulse.n_refine) ? 0.5 * dw : dw;
        mh[static_cast<std::size_t>(k)] =
            trap * pulse.hhat(ws[static_cast<std::size_t>(k)]) *
            inc.tensor_m(ws[static_cast<std::size_t>(k)]);
    }
    for (int it = 0; it < pulse.n_time; ++it) {
        const double t = -T + 2.0 * T * it / (pulse.n_time - 1);
        out.t[static_cast<std::size_t>(it)] = t;
        Matrix2cd acc = Matrix2cd::Zero();
        for (int k = 0; k < pulse.n_refine; ++k)
            acc += mh[static_cast<std::size_t>(k)] *
                   std::exp(Complex(0.0, ws[static_cast<std::size_t>(k)] * t));
        out.m_t[static_cast<std::size_t>(it)] = acc;
        out.max_norm = std::max(out.max_norm, acc.norm());
    }
    return out;
}

struct AnisotropyStatistic {
    double s_min = 0.0, s_max = 0.0, ratio = 0.0;
    std::vector<double> angles;
    std::vector<double> s;  // S[a] per angle
};

/// S[a] = oint g . F[g] ds for g = a . n over an angle grid. Anisotropic M
/// is handled by diagonalizing Im M and superposing the two axis-aligned
/// scalar solves, valid to first order in f.
inline AnisotropyStatistic anisotropy_statistic(const ForwardOperator& op,
                                                const SuspensionInclusion& inc, double omega,
                                                int n_angles = 32) {
    if (n_angles < 4) throw std::invalid_argument("anisotropy_statistic: need >= 4 angles");
    const Matrix2cd m = inc.tensor_m(omega);
    Eigen::SelfAdjointEigenSolver<Matrix2d> es(m.imag());
    const Matrix2d V = es.eigenvectors();
    const ProbeDomain& probe = op.probe();
    const Eigen::VectorXd w = probe.grid().arc_weights();
    Eigen::VectorXd F[2];
    Eigen::VectorXd gax[2];
    for (int k = 0; k < 2; ++k) {
        const Vec2 v = V.col(k);
        const Complex mk = (v.cast<Complex>().transpose() * m * v.cast<Complex>())(0);
        gax[k] = probe.directional_pattern(v);
        F[k] = imaging_functional(probe, op.solve(1.0 + inc.f * mk, gax[k]).u);
    }
    AnisotropyStatistic out;
    out.angles.resize(static_cast<std::size_t>(n_angles));
    out.s.resize(static_cast<std::size_t>(n_angles));
    for (int i = 0; i < n_angles; ++i) {
        const double th = std::numbers::pi * i / n_angles;
        const Vec2 a(std::cos(th), std::sin(th));
        const double c1 = a.dot(V.col(0)), c2 = a.dot(V.col(1));
        const Eigen::VectorXd g = c1 * gax[0] + c2 * gax[1];
        const Eigen::VectorXd Fa = c1 * F[0] + c2 * F[1];
        out.angles[static_cast<std::size_t>(i)] = th;
        out.s[static_cast<std::size_t>(i)] = (w.array() * g.array() * Fa.array()).sum();
    }
    double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
    for (double s : out.s) {
        amin = std::min(amin, std::abs(s));
        amax = std::max(amax, std::abs(s));
    }
    out.s_min = *std::min_element(out.s.begin(), out.s.end());
    out.s_max = *std::max_element(out.s.begin(), out.s.end());
    if (!(amax > 0.0))
        throw std::runtime_error("anisotropy_statistic: degenerate statistic (max S = 0)");
    if (out.s_min < 0.0 && out.s_max > 0.0)
        throw std::runtime_error("anisotropy_statistic: statistic changes sign over the angle grid");
    out.ratio = amin / amax;  // ~ lambda_1 / lambda_2 to first order in f
    return out;
}

}  // namespace mempol
