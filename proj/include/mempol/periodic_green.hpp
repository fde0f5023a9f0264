#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "mempol/geometry.hpp"

namespace mempol {

/// Value / gradient / Hessian bundle for smooth kernel pieces.
struct ScalarJet2 {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();

    ScalarJet2& operator+=(const ScalarJet2& o) {
        value += o.value;
        grad += o.grad;
        hess += o.hess;
        return *this;
    }
    ScalarJet2 operator-() const { return {-value, -grad, -hess}; }
};

/// Ewald evaluation of the periodic Laplace Green function on the unit
/// torus, G#(x) = (1/2pi) ln|x| + R2(x), with R2 smooth through x = 0.
/// The splitting parameter eta balances the Gaussian-damped spectral sum
/// against the incomplete-gamma real-space sum; truncation radii are
/// chosen so both tails stay below tail_tol.
class PeriodicGreen {
  public:
    explicit PeriodicGreen(double eta = std::sqrt(std::numbers::pi), double tail_tol = 1e-14)
        : eta_(eta), tail_tol_(tail_tol) {
        if (!(eta > 0.0)) throw std::invalid_argument("PeriodicGreen: eta must be > 0");
        t0_ = 1.0 / (4.0 * eta_ * eta_);
        const double logtol = -std::log(tail_tol_);
        n_max_ = static_cast<int>(std::ceil(std::sqrt(logtol / (4.0 * std::numbers::pi * std::numbers::pi * t0_)))) + 1;
        m_max_ = static_cast<int>(std::ceil(std::sqrt(logtol * 4.0 * t0_) + 0.5)) + 1;
    }

    double eta() const { return eta_; }
    int spectral_radius() const { return n_max_; }
    int real_radius() const { return m_max_; }
    double tail_tolerance() const { return tail_tol_; }
    double r2_at_zero() const { return r2(Vec2::Zero()).value; }

    /// Smooth remainder R2 = G# - (1/2pi) ln|x| with derivatives.
    /// Valid for |x| well inside the first lattice cell; the log
    /// singularities at nonzero lattice points are not subtracted.
    ScalarJet2 r2(const Vec2& x) const {
        ScalarJet2 p;  // accumulates P = -G#
        accumulate_spectral(x, p);
        accumulate_real_lattice(x, p);
        accumulate_origin_regular(x, p);
        p.value -= t0_;
        return -p;
    }

    /// Full periodic Green function; x must avoid lattice points.
    ScalarJet2 gsharp(const Vec2& x) const {
        const double r2n = x.squaredNorm();
        if (!(r2n > 0.0)) throw std::invalid_argument("gsharp: singular at lattice points");
        ScalarJet2 out = r2(x);
        const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
        out.value += inv2pi * 0.5 * std::log(r2n);
        out.grad += inv2pi * x / r2n;
        out.hess += inv2pi * (Mat2::Identity() / r2n - 2.0 * x * x.transpose() / (r2n * r2n));
        return out;
    }

  private:
    static double exp_int_e1(double z) { return -std::expint(-z); }

    void accumulate_spectral(const Vec2& x, ScalarJet2& p) const {
        const double tp = 2.0 * std::numbers::pi;
        for (int n1 = -n_max_; n1 <= n_max_; ++n1) {
            for (int n2 = -n_max_; n2 <= n_max_; ++n2) {
                if (n1 == 0 && n2 == 0) continue;
                const Vec2 n(static_cast<double>(n1), static_cast<double>(n2));
                const double nn = n.squaredNorm();
                const double w = std::exp(-tp * tp * nn * t0_) / (tp * tp * nn);
                const double phase = tp * n.dot(x);
                p.value += std::cos(phase) * w;
                p.grad += -std::sin(phase) * tp * w * n;
                p.hess += -std::cos(phase) * tp * tp * w * n * n.transpose();
            }
        }
    }

    void accumulate_real_lattice(const Vec2& x, ScalarJet2& p) const {
        const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
        const int c1 = static_cast<int>(std::lround(x.x()));
        const int c2 = static_cast<int>(std::lround(x.y()));
        for (int m1 = c1 - m_max_; m1 <= c1 + m_max_; ++m1) {
            for (int m2 = c2 - m_max_; m2 <= c2 + m_max_; ++m2) {
                if (m1 == 0 && m2 == 0) continue;
                const Vec2 r = x - Vec2(static_cast<double>(m1), static_cast<double>(m2));
                const double a = r.squaredNorm();
                const double z = a / (4.0 * t0_);
                const double ez = std::exp(-z);
                p.value += inv4pi * exp_int_e1(z);
                p.grad += inv4pi * (-2.0 * ez / a) * r;
                p.hess += inv4pi * (-2.0 * ez) *
                          (Mat2::Identity() / a - (1.0 / (2.0 * t0_ * a) + 2.0 / (a * a)) * r * r.transpose());
            }
        }
    }

    /// m = 0 term with the log singularity removed:
    /// (1/4pi) [E1(|x|^2/(4 t0)) + ln |x|^2], smooth through 0.
    void accumulate_origin_regular(const Vec2& x, ScalarJet2& p) const {
        const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
        const double a = x.squaredNorm();
        const double z = a / (4.0 * t0_);
        double b, g, gp;  // B(z), g = (1-e^-z)/z, g'
        if (z < 1e-4) {
            b = std::log(4.0 * t0_) - 0.5772156649015328606 + z - z * z / 4.0 + z * z * z / 18.0;
            g = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
            gp = -0.5 + z / 3.0 - z * z / 8.0 + z * z * z / 30.0;
        } else {
            b = exp_int_e1(z) + std::log(a);
            g = -std::expm1(-z) / z;
            gp = (std::exp(-z) * (1.0 + z) - 1.0) / (z * z);
        }
        p.value += inv4pi * b;
        p.grad += inv4pi * (g / (2.0 * t0_)) * x;
        p.hess += inv4pi * ((g / (2.0 * t0_)) * Mat2::Identity() +
                            (gp / (4.0 * t0_ * t0_)) * x * x.transpose());
    }

    double eta_;
    double tail_tol_;
    double t0_;
    int n_max_ = 0;
    int m_max_ = 0;
};

}  // namespace mempol
