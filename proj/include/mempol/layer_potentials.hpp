#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mempol/geometry.hpp"
#include "mempol/media.hpp"
#include "mempol/periodic_green.hpp"

namespace mempol {

using VectorXcd = Eigen::VectorXcd;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;

enum class Kernel { FreeSpace, Periodic };

/// Nodes and geometric data of one curve at N equispaced parameter values.
struct CurveGrid {
    int N = 0;
    double h = 0.0;  // 2pi / N
    std::vector<double> t;
    std::vector<Vec2> x;
    std::vector<Vec2> tangent_unit;
    std::vector<Vec2> normal;
    std::vector<double> speed;
    std::vector<double> curvature;

    explicit CurveGrid(const Curve& c, int n_nodes) : N(n_nodes) {
        if (N < 8 || N % 2 != 0) throw std::invalid_argument("CurveGrid: N must be even, >= 8");
        h = 2.0 * std::numbers::pi / N;
        t.resize(static_cast<std::size_t>(N));
        x.resize(static_cast<std::size_t>(N));
        tangent_unit.resize(static_cast<std::size_t>(N));
        normal.resize(static_cast<std::size_t>(N));
        speed.resize(static_cast<std::size_t>(N));
        curvature.resize(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) {
            const auto js = static_cast<std::size_t>(j);
            t[js] = h * j;
            x[js] = c.point(t[js]);
            const Vec2 tg = c.tangent(t[js]);
            speed[js] = tg.norm();
            tangent_unit[js] = tg / speed[js];
            normal[js] = c.normal(t[js]);
            curvature[js] = c.curvature(t[js]);
        }
    }
};

/// Stacked discretization of all curves in a configuration.
struct ConfigGrid {
    std::vector<CurveGrid> parts;
    std::vector<int> offsets;
    int size = 0;

    ConfigGrid(const CellConfiguration& cfg, int n_nodes) {
        for (const auto& c : cfg.curves) {
            offsets.push_back(size);
            parts.emplace_back(c, n_nodes);
            size += n_nodes;
        }
    }

    explicit ConfigGrid(const Curve& c, int n_nodes) {
        offsets.push_back(0);
        parts.emplace_back(c, n_nodes);
        size = n_nodes;
    }

    /// Diagonal arclength quadrature weights w_j = h |x'(t_j)|.
    Eigen::VectorXd arc_weights() const {
        Eigen::VectorXd w(size);
        for (std::size_t p = 0; p < parts.size(); ++p)
            for (int j = 0; j < parts[p].N; ++j)
                w[offsets[p] + j] = parts[p].h * parts[p].speed[static_cast<std::size_t>(j)];
        return w;
    }

    /// Stacked i-th normal component at all nodes.
    Eigen::VectorXd normal_component(int i) const {
        Eigen::VectorXd v(size);
        for (std::size_t p = 0; p < parts.size(); ++p)
            for (int j = 0; j < parts[p].N; ++j)
                v[offsets[p] + j] = parts[p].normal[static_cast<std::size_t>(j)][i];
        return v;
    }

    double total_arclength() const { return arc_weights().sum(); }
};

enum class OperatorKind { SingleLayer, DoubleLayer, NPAdjoint, Hypersingular };

/// Dense complex Nystrom matrix acting on stacked per-curve densities.
struct OperatorMatrix {
    MatrixXcd A;
    OperatorKind kind = OperatorKind::SingleLayer;
    Kernel kernel = Kernel::FreeSpace;
    std::vector<int> node_counts;
};

namespace detail {

/// Kress weights R(d) for the product quadrature
/// int_0^{2pi} ln(4 sin^2((t-s)/2)) f(s) ds ~ sum_j R(t_i - s_j) f(s_j),
/// tabulated over the node difference d = i - j for N = 2n nodes.
inline std::vector<double> kress_weights(int N) {
    const int n = N / 2;
    std::vector<double> R(static_cast<std::size_t>(N));
    const double h = 2.0 * std::numbers::pi / N;
    for (int d = 0; d < N; ++d) {
        double s = 0.0;
        for (int m = 1; m < n; ++m) s += std::cos(m * d * h) / m;
        R[static_cast<std::size_t>(d)] = -(2.0 * std::numbers::pi / n) * s -
                                         (std::numbers::pi / (n * n)) * std::cos(n * d * h);
    }
    return R;
}

/// Periodic spectral differentiation matrix (even N).
inline MatrixXd spectral_diff_matrix(int N) {
    MatrixXd D = MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (i != j) {
                const double d = (i - j) * std::numbers::pi / N;
                D(i, j) = 0.5 * (((i - j) % 2 == 0) ? 1.0 : -1.0) / std::tan(d);
            }
    return D;
}

}  // namespace detail

/// S[phi](x) = (1/2pi) int ln|x-y| phi(y) ds(y) on the configuration;
/// self blocks use Kress log-quadrature, cross blocks plain trapezoid.
/// The periodic kernel adds the smooth remainder R2(x-y).
inline OperatorMatrix single_layer_matrix(const ConfigGrid& g, Kernel kernel,
                                          const PeriodicGreen* pg = nullptr) {
    if (kernel == Kernel::Periodic && pg == nullptr)
        throw std::invalid_argument("single_layer_matrix: periodic kernel needs PeriodicGreen");
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    OperatorMatrix out;
    out.kind = OperatorKind::SingleLayer;
    out.kernel = kernel;
    out.A = MatrixXcd::Zero(g.size, g.size);
    for (std::size_t p = 0; p < g.parts.size(); ++p) {
        const CurveGrid& P = g.parts[p];
        const auto R = detail::kress_weights(P.N);
        for (std::size_t q = 0; q < g.parts.size(); ++q) {
            const CurveGrid& Q = g.parts[q];
            for (int i = 0; i < P.N; ++i) {
                const auto is = static_cast<std::size_t>(i);
                for (int j = 0; j < Q.N; ++j) {
                    const auto js = static_cast<std::size_t>(j);
                    double v;
                    if (p == q) {
                        const double wj = Q.speed[js];
                        if (i == j) {
                            v = wj * (0.25 * inv2pi * 2.0 * R[0] + Q.h * inv2pi * std::log(P.speed[is]));
                            // = wj * ( R[0]/(4pi) + h/(2pi) ln|x'| )
                        } else {
                            const double dist = (P.x[is] - Q.x[js]).norm();
                            const double sinh2 = 2.0 * std::abs(std::sin(0.5 * (P.t[is] - Q.t[js])));
                            const int d = ((i - j) % P.N + P.N) % P.N;
                            v = wj * (R[static_cast<std::size_t>(d)] / (4.0 * std::numbers::pi) +
                                      Q.h * inv2pi * std::log(dist / sinh2));
                        }
                    } else {
                        const double dist = (P.x[is] - Q.x[js]).norm();
                        v = Q.speed[js] * Q.h * inv2pi * std::log(dist);
                    }
                    if (kernel == Kernel::Periodic)
                        v += Q.speed[js] * Q.h * pg->r2(P.x[is] - Q.x[js]).value;
                    out.A(g.offsets[p] + i, g.offsets[q] + j) += v;
                }
            }
        }
    }
    return out;
}

/// D[phi](x) = int dG/dn_y (x-y) phi(y) ds(y); smooth on C^2 curves with
/// diagonal limit kappa |x'| h / (4 pi).
inline OperatorMatrix double_layer_matrix(const ConfigGrid& g, Kernel kernel,
                                          const PeriodicGreen* pg = nullptr) {
    if (kernel == Kernel::Periodic && pg == nullptr)
        throw std::invalid_argument("double_layer_matrix: periodic kernel needs PeriodicGreen");
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    OperatorMatrix out;
    out.kind = OperatorKind::DoubleLayer;
    out.kernel = kernel;
    out.A = MatrixXcd::Zero(g.size, g.size);
    for (std::size_t p = 0; p < g.parts.size(); ++p) {
        const CurveGrid& P = g.parts[p];
        for (std::size_t q = 0; q < g.parts.size(); ++q) {
            const CurveGrid& Q = g.parts[q];
            for (int i = 0; i < P.N; ++i) {
                const auto is = static_cast<std::size_t>(i);
                for (int j = 0; j < Q.N; ++j) {
                    const auto js = static_cast<std::size_t>(j);
                    double v;
                    if (p == q && i == j) {
                        v = P.curvature[is] * P.speed[is] * P.h / (4.0 * std::numbers::pi);
                    } else {
                        const Vec2 d = Q.x[js] - P.x[is];
                        v = inv2pi * d.dot(Q.normal[js]) / d.squaredNorm() * Q.speed[js] * Q.h;
                    }
                    if (kernel == Kernel::Periodic) {
                        const Vec2 r = P.x[is] - Q.x[js];
                        v += -pg->r2(r).grad.dot(Q.normal[js]) * Q.speed[js] * Q.h;
                    }
                    out.A(g.offsets[p] + i, g.offsets[q] + j) += v;
                }
            }
        }
    }
    return out;
}

/// Adjoint Neumann-Poincare matrix: kernel dG/dn_x (x-y).
inline OperatorMatrix np_adjoint_matrix(const ConfigGrid& g, Kernel kernel,
                                        const PeriodicGreen* pg = nullptr) {
    if (kernel == Kernel::Periodic && pg == nullptr)
        throw std::invalid_argument("np_adjoint_matrix: periodic kernel needs PeriodicGreen");
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    OperatorMatrix out;
    out.kind = OperatorKind::NPAdjoint;
    out.kernel = kernel;
    out.A = MatrixXcd::Zero(g.size, g.size);
    for (std::size_t p = 0; p < g.parts.size(); ++p) {
        const CurveGrid& P = g.parts[p];
        for (std::size_t q = 0; q < g.parts.size(); ++q) {
            const CurveGrid& Q = g.parts[q];
            for (int i = 0; i < P.N; ++i) {
                const auto is = static_cast<std::size_t>(i);
                for (int j = 0; j < Q.N; ++j) {
                    const auto js = static_cast<std::size_t>(j);
                    double v;
                    if (p == q && i == j) {
                        v = P.curvature[is] * P.speed[is] * P.h / (4.0 * std::numbers::pi);
                    } else {
                        const Vec2 d = P.x[is] - Q.x[js];
                        v = inv2pi * d.dot(P.normal[is]) / d.squaredNorm() * Q.speed[js] * Q.h;
                    }
                    if (kernel == Kernel::Periodic) {
                        const Vec2 r = P.x[is] - Q.x[js];
                        v += pg->r2(r).grad.dot(P.normal[is]) * Q.speed[js] * Q.h;
                    }
                    out.A(g.offsets[p] + i, g.offsets[q] + j) += v;
                }
            }
        }
    }
    return out;
}

/// Block-diagonal arclength differentiation d/ds applied spectrally.
inline MatrixXd arclength_derivative_matrix(const ConfigGrid& g) {
    MatrixXd D = MatrixXd::Zero(g.size, g.size);
    for (std::size_t p = 0; p < g.parts.size(); ++p) {
        const CurveGrid& P = g.parts[p];
        const MatrixXd Dn = detail::spectral_diff_matrix(P.N);
        for (int i = 0; i < P.N; ++i)
            for (int j = 0; j < P.N; ++j)
                D(g.offsets[p] + i, g.offsets[p] + j) =
                    Dn(i, j) / P.speed[static_cast<std::size_t>(i)];
    }
    return D;
}

/// Hypersingular operator L (normal derivative of the double layer).
/// The free-space singular part is realized through the Maue identity
/// L = (d/ds) S (d/ds); on the circle of radius r0 the symbol is
/// +|n|/(2 r0). The periodic remainder enters as the smooth kernel
/// -n(x)^T Hess R2(x-y) n(y).
inline MatrixXd hypersingular_L(const ConfigGrid& g, Kernel kernel,
                                const PeriodicGreen* pg = nullptr) {
    const MatrixXd Ds = arclength_derivative_matrix(g);
    const MatrixXd S = single_layer_matrix(g, Kernel::FreeSpace).A.real();
    MatrixXd L = Ds * S * Ds;
    if (kernel == Kernel::Periodic) {
        if (pg == nullptr) throw std::invalid_argument("hypersingular_L: periodic kernel needs PeriodicGreen");
        for (std::size_t p = 0; p < g.parts.size(); ++p) {
            const CurveGrid& P = g.parts[p];
            for (std::size_t q = 0; q < g.parts.size(); ++q) {
                const CurveGrid& Q = g.parts[q];
                for (int i = 0; i < P.N; ++i) {
                    const auto is = static_cast<std::size_t>(i);
                    for (int j = 0; j < Q.N; ++j) {
                        const auto js = static_cast<std::size_t>(j);
                        const Mat2 H = pg->r2(P.x[is] - Q.x[js]).hess;
                        L(g.offsets[p] + i, g.offsets[q] + j) +=
                            -P.normal[is].dot(H * Q.normal[js]) * Q.speed[js] * Q.h;
                    }
                }
            }
        }
    }
    return L;
}

/// System matrix I + beta k0 L. Invertible for Re(beta k0) > 0.
inline OperatorMatrix hypersingular_matrix(const ConfigGrid& g, Kernel kernel, Complex beta_k0,
                                           const PeriodicGreen* pg = nullptr) {
    if (beta_k0 != Complex(0.0, 0.0) && !(beta_k0.real() > 0.0))
        throw std::invalid_argument("hypersingular_matrix: requires Re(beta k0) > 0");
    OperatorMatrix out;
    out.kind = OperatorKind::Hypersingular;
    out.kernel = kernel;
    out.A = MatrixXcd::Identity(g.size, g.size);
    if (beta_k0 != Complex(0.0, 0.0))
        out.A += beta_k0 * hypersingular_L(g, kernel, pg).cast<Complex>();
    return out;
}

struct SolveResult {
    VectorXcd x;
    double relative_residual = 0.0;
};

/// Dense LU with partial pivoting; reports the relative residual and
/// rejects singular-to-working-precision systems.
inline SolveResult solve(const OperatorMatrix& system, const VectorXcd& rhs) {
    if (system.A.rows() != system.A.cols() || system.A.rows() != rhs.size())
        throw std::invalid_argument("solve: dimension mismatch");
    if (!system.A.allFinite() || !rhs.allFinite())
        throw std::invalid_argument("solve: non-finite entries");
    Eigen::PartialPivLU<MatrixXcd> lu(system.A);
    SolveResult r;
    r.x = lu.solve(rhs);
    const double rn = rhs.norm();
    r.relative_residual = rn > 0.0 ? (system.A * r.x - rhs).norm() / rn : 0.0;
    if (!r.x.allFinite() || r.relative_residual > 1e-8)
        throw std::runtime_error("solve: system singular to working precision");
    return r;
}

/// Matrix mapping a density on `src` to single-layer values at points
/// off the source curve.
inline MatrixXd single_layer_offcurve(const ConfigGrid& src, const std::vector<Vec2>& targets) {
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    MatrixXd A(static_cast<Eigen::Index>(targets.size()), src.size);
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t p = 0; p < src.parts.size(); ++p) {
            const CurveGrid& Q = src.parts[p];
            for (int j = 0; j < Q.N; ++j) {
                const auto js = static_cast<std::size_t>(j);
                A(static_cast<Eigen::Index>(i), src.offsets[p] + j) =
                    inv2pi * std::log((targets[i] - Q.x[js]).norm()) * Q.speed[js] * Q.h;
            }
        }
    return A;
}

/// Matrix for the normal derivative of the single layer from `src`
/// evaluated at off-curve targets with unit directions `target_normals`.
inline MatrixXd single_layer_dn_offcurve(const ConfigGrid& src, const std::vector<Vec2>& targets,
                                         const std::vector<Vec2>& target_normals) {
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    MatrixXd A(static_cast<Eigen::Index>(targets.size()), src.size);
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t p = 0; p < src.parts.size(); ++p) {
            const CurveGrid& Q = src.parts[p];
            for (int j = 0; j < Q.N; ++j) {
                const auto js = static_cast<std::size_t>(j);
                const Vec2 d = targets[i] - Q.x[js];
                A(static_cast<Eigen::Index>(i), src.offsets[p] + j) =
                    inv2pi * d.dot(target_normals[i]) / d.squaredNorm() * Q.speed[js] * Q.h;
            }
        }
    return A;
}

}  // namespace mempol
