#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace mempol {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using CComplex = std::complex<double>;

/// Smooth closed curve represented by a truncated Fourier series of the
/// complex position z(t) = x1(t) + i x2(t), t in [0, 2pi). Modes run
/// -K..K. Circle and ellipse are exact (modes 0, +-1); general shapes are
/// trigonometric interpolants of sampled points.
class Curve {
  public:
    Curve() = default;

    explicit Curve(std::vector<CComplex> coeffs) : coef_(std::move(coeffs)) {
        if (coef_.empty() || coef_.size() % 2 == 0)
            throw std::invalid_argument("Curve: coefficient count must be odd (modes -K..K)");
    }

    static Curve circle(double r0, Vec2 center = Vec2::Zero()) {
        if (!(r0 > 0.0)) throw std::invalid_argument("circle: radius must be > 0");
        std::vector<CComplex> c(3);
        c[1] = CComplex(center.x(), center.y());
        c[2] = CComplex(r0, 0.0);  // mode +1
        return Curve(std::move(c));
    }

    static Curve ellipse(double a, double b, Vec2 center = Vec2::Zero(), double angle = 0.0) {
        if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("ellipse: semi-axes must be > 0");
        const CComplex rot = std::polar(1.0, angle);
        std::vector<CComplex> c(3);
        c[0] = rot * CComplex(0.5 * (a - b), 0.0);  // mode -1
        c[1] = CComplex(center.x(), center.y());
        c[2] = rot * CComplex(0.5 * (a + b), 0.0);  // mode +1
        return Curve(std::move(c));
    }

    /// Trigonometric interpolant through N equispaced samples (N even).
    static Curve from_samples(const std::vector<CComplex>& z) {
        const std::size_t n = z.size();
        if (n < 4 || n % 2 != 0) throw std::invalid_argument("from_samples: need even N >= 4");
        const int K = static_cast<int>(n) / 2 - 1;
        std::vector<CComplex> c(static_cast<std::size_t>(2 * K + 1));
        const double tp = 2.0 * std::numbers::pi;
        for (int k = -K; k <= K; ++k) {
            CComplex s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                s += z[j] * std::polar(1.0, -k * tp * static_cast<double>(j) / static_cast<double>(n));
            c[static_cast<std::size_t>(k + K)] = s / static_cast<double>(n);
        }
        return Curve(std::move(c));
    }

    int max_mode() const { return (static_cast<int>(coef_.size()) - 1) / 2; }
    const std::vector<CComplex>& coefficients() const { return coef_; }

    CComplex point_c(double t) const { return eval(t, 0); }
    Vec2 point(double t) const {
        const CComplex z = eval(t, 0);
        return {z.real(), z.imag()};
    }

    Vec2 tangent(double t) const {
        const CComplex d = eval(t, 1);
        return {d.real(), d.imag()};
    }

    double speed(double t) const { return std::abs(eval(t, 1)); }

    /// Outward unit normal for a counterclockwise curve.
    Vec2 normal(double t) const {
        const CComplex d = eval(t, 1);
        const double s = std::abs(d);
        if (!(s > 0.0)) throw std::runtime_error("Curve: singular parameterization (x'(t) = 0)");
        const CComplex n = CComplex(0.0, -1.0) * d / s;
        return {n.real(), n.imag()};
    }

    double curvature(double t) const {
        const CComplex d1 = eval(t, 1), d2 = eval(t, 2);
        const double s = std::abs(d1);
        return std::imag(std::conj(d1) * d2) / (s * s * s);
    }

    /// Green's-theorem area by trapezoid rule; exact for band-limited curves.
    double enclosed_area(int n_samples = 256) const {
        const int n = std::max(n_samples, 4 * max_mode() + 4);
        const double h = 2.0 * std::numbers::pi / n;
        double area = 0.0;
        for (int j = 0; j < n; ++j) {
            const double t = h * j;
            const CComplex z = eval(t, 0), d = eval(t, 1);
            area += 0.5 * (z.real() * d.imag() - z.imag() * d.real());
        }
        return area * h;
    }

    double arclength(int n_samples = 512) const {
        const int n = std::max(n_samples, 4 * max_mode() + 4);
        const double h = 2.0 * std::numbers::pi / n;
        double len = 0.0;
        for (int j = 0; j < n; ++j) len += std::abs(eval(h * j, 1));
        return len * h;
    }

    /// x -> scale * R(rotation) * x + translation.
    Curve transformed(Vec2 translation, double rotation = 0.0, double scale = 1.0) const {
        if (!(scale > 0.0)) throw std::invalid_argument("transform: scale must be > 0");
        const CComplex g = scale * std::polar(1.0, rotation);
        std::vector<CComplex> c = coef_;
        for (auto& ck : c) ck *= g;
        c[static_cast<std::size_t>(max_mode())] += CComplex(translation.x(), translation.y());
        return Curve(std::move(c));
    }

    /// General affine map x -> A x + b (A invertible, orientation preserving).
    Curve affine(const Mat2& A, Vec2 b = Vec2::Zero()) const {
        if (!(A.determinant() > 0.0))
            throw std::invalid_argument("affine: map must preserve orientation");
        // A z = alpha z + beta conj(z) in complex form.
        const CComplex alpha(0.5 * (A(0, 0) + A(1, 1)), 0.5 * (A(1, 0) - A(0, 1)));
        const CComplex bc(0.5 * (A(0, 0) - A(1, 1)), 0.5 * (A(1, 0) + A(0, 1)));
        const int K = max_mode();
        std::vector<CComplex> c(coef_.size());
        for (int k = -K; k <= K; ++k) {
            const CComplex zk = coef_[static_cast<std::size_t>(k + K)];
            const CComplex zmk = coef_[static_cast<std::size_t>(-k + K)];
            c[static_cast<std::size_t>(k + K)] = alpha * zk + bc * std::conj(zmk);
        }
        c[static_cast<std::size_t>(K)] += CComplex(b.x(), b.y());
        return Curve(std::move(c));
    }

    /// Radial perturbation about the centroid:
    /// z -> z0 + (z - z0) (1 + sum_k a_k cos(k t + phi_k)).
    Curve radial_bump(const std::vector<double>& amp, const std::vector<double>& phase) const {
        if (amp.size() != phase.size()) throw std::invalid_argument("radial_bump: size mismatch");
        int kmax = 0;
        for (std::size_t k = 0; k < amp.size(); ++k)
            if (amp[k] != 0.0) kmax = static_cast<int>(k) + 1;
        if (kmax == 0) return *this;
        const CComplex z0 = coef_[static_cast<std::size_t>(max_mode())];
        int n = 4;
        while (n < 4 * (max_mode() + kmax + 2)) n *= 2;
        std::vector<CComplex> zs(static_cast<std::size_t>(n));
        const double h = 2.0 * std::numbers::pi / n;
        for (int j = 0; j < n; ++j) {
            const double t = h * j;
            double fac = 1.0;
            for (std::size_t k = 0; k < amp.size(); ++k)
                fac += amp[k] * std::cos((static_cast<double>(k) + 1.0) * t + phase[k]);
            zs[static_cast<std::size_t>(j)] = z0 + (eval(t, 0) - z0) * fac;
        }
        return from_samples(zs);
    }

    /// Sampled self-intersection test: the closed polyline through
    /// n_samples points must be simple.
    bool is_simple(int n_samples = 256) const {
        const int n = std::max(n_samples, 8 * max_mode() + 8);
        std::vector<Vec2> p(static_cast<std::size_t>(n));
        const double h = 2.0 * std::numbers::pi / n;
        for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(j)] = point(h * j);
        auto seg_intersect = [](Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
            auto cross = [](Vec2 u, Vec2 v) { return u.x() * v.y() - u.y() * v.x(); };
            const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
            const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
            return d1 * d2 < 0.0 && d3 * d4 < 0.0;
        };
        for (int i = 0; i < n; ++i) {
            for (int j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;  // adjacent through wrap
                if (seg_intersect(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>((i + 1) % n)],
                                  p[static_cast<std::size_t>(j)], p[static_cast<std::size_t>((j + 1) % n)]))
                    return false;
            }
        }
        return true;
    }

    void validate() const {
        const int n = std::max(256, 8 * max_mode());
        const double h = 2.0 * std::numbers::pi / n;
        for (int j = 0; j < n; ++j)
            if (!(std::abs(eval(h * j, 1)) > 1e-12))
                throw std::invalid_argument("Curve: parameterization not regular");
        if (enclosed_area() <= 0.0)
            throw std::invalid_argument("Curve: orientation must be counterclockwise");
        if (!is_simple()) throw std::invalid_argument("Curve: self-intersecting");
    }

  private:
    CComplex eval(double t, int order) const {
        const int K = max_mode();
        CComplex s = 0.0;
        for (int k = -K; k <= K; ++k) {
            CComplex f = coef_[static_cast<std::size_t>(k + K)];
            for (int d = 0; d < order; ++d) f *= CComplex(0.0, k);
            s += f * std::polar(1.0, k * t);
        }
        return s;
    }

    std::vector<CComplex> coef_;
};

inline Curve make_circle(double r0, Vec2 center = Vec2::Zero()) { return Curve::circle(r0, center); }
inline Curve make_ellipse(double a, double b, Vec2 center = Vec2::Zero(), double angle = 0.0) {
    return Curve::ellipse(a, b, center, angle);
}
inline Curve transform(const Curve& c, Vec2 translation, double rotation = 0.0, double scale = 1.0) {
    return c.transformed(translation, rotation, scale);
}
inline double enclosed_area(const Curve& c) { return c.enclosed_area(); }

inline double sampled_min_distance(const Curve& a, const Curve& b, int n = 128) {
    double dmin = std::numeric_limits<double>::infinity();
    const double h = 2.0 * std::numbers::pi / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            dmin = std::min(dmin, (a.point(h * i) - b.point(h * j)).norm());
    return dmin;
}

/// Winding-number test against a sampled polygon approximation of c.
inline bool curve_contains(const Curve& c, const Vec2& p, int n = 256) {
    const double h = 2.0 * std::numbers::pi / n;
    double total = 0.0;
    Vec2 prev = c.point(0.0) - p;
    for (int i = 1; i <= n; ++i) {
        const Vec2 cur = c.point(h * i) - p;
        total += std::atan2(prev.x() * cur.y() - prev.y() * cur.x(), prev.dot(cur));
        prev = cur;
    }
    return std::abs(total) > std::numbers::pi;
}

/// True when the interiors intersect: either boundary carries a sampled
/// point inside the other curve. Catches both partial overlap and full
/// containment, which a boundary-gap check alone can miss.
inline bool curves_overlap(const Curve& a, const Curve& b, int n = 64) {
    const double h = 2.0 * std::numbers::pi / n;
    for (int i = 0; i < n; ++i) {
        if (curve_contains(a, b.point(h * i))) return true;
        if (curve_contains(b, a.point(h * i))) return true;
    }
    return false;
}

/// One or more pairwise-disjoint cells. rho = sqrt(total enclosed area),
/// f = rho^2. The unit-cell containment check is separate because the
/// same type also carries rescaled (order-one) configurations.
struct CellConfiguration {
    std::vector<Curve> curves;
    double rho = 0.0;
    double f = 0.0;

    static constexpr double kMinGap = 1e-3;

    explicit CellConfiguration(std::vector<Curve> cs) : curves(std::move(cs)) {
        if (curves.empty()) throw std::invalid_argument("CellConfiguration: no curves");
        double area = 0.0;
        for (const auto& c : curves) {
            c.validate();
            area += c.enclosed_area();
        }
        for (std::size_t i = 0; i < curves.size(); ++i)
            for (std::size_t j = i + 1; j < curves.size(); ++j) {
                if (curves_overlap(curves[i], curves[j]))
                    throw std::invalid_argument("CellConfiguration: curve interiors overlap");
                if (sampled_min_distance(curves[i], curves[j]) < kMinGap)
                    throw std::invalid_argument("CellConfiguration: curves closer than minimum gap");
            }
        rho = std::sqrt(area);
        f = area;
    }

    /// All curves strictly inside the unit square [0,1]^2 with clearance.
    void require_inside_unit_cell(double clearance = kMinGap) const {
        const double tp = 2.0 * std::numbers::pi;
        for (const auto& c : curves) {
            for (int j = 0; j < 256; ++j) {
                const Vec2 p = c.point(tp * j / 256.0);
                if (p.x() < clearance || p.x() > 1.0 - clearance || p.y() < clearance ||
                    p.y() > 1.0 - clearance)
                    throw std::invalid_argument("CellConfiguration: curve not strictly inside unit cell");
            }
        }
        if (!(f < 1.0)) throw std::invalid_argument("CellConfiguration: volume fraction must be < 1");
    }

    CellConfiguration transformed(Vec2 translation, double rotation = 0.0, double scale = 1.0) const {
        std::vector<Curve> cs;
        cs.reserve(curves.size());
        for (const auto& c : curves) cs.push_back(c.transformed(translation, rotation, scale));
        return CellConfiguration(std::move(cs));
    }
};

/// Per-cell affine-plus-bump map Phi(x) = A x + b with an optional radial
/// perturbation, drawn under the diffeomorphism constraints
/// det A >= kappa, |A|_F <= kappa', sup |Phi(x) - x| <= max_displacement.
struct DeformationSample {
    Mat2 A = Mat2::Identity();
    Vec2 b = Vec2::Zero();
    std::vector<double> bump_amp;
    std::vector<double> bump_phase;
    std::uint64_t seed = 0;
};

struct DeformationParams {
    double max_translation = 0.0;
    double max_rotation = 0.0;
    double max_shear = 0.0;      // entrywise bound on A - R
    double max_bump = 0.0;       // radial bump amplitude bound
    int bump_modes = 0;
    double det_min = 0.5;        // kappa
    double frob_max = 4.0;       // kappa'
    double max_displacement = 0.25;  // dist(Y^-, dY)/2 budget
    int rejection_budget = 1000;
};

/// Draw one i.i.d. per-cell deformation; rejection sampling enforces the
/// constraints, checked on the cell boundary.
inline DeformationSample sample_deformation(const DeformationParams& p, const Curve& cell,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int attempt = 0; attempt < p.rejection_budget; ++attempt) {
        DeformationSample s;
        s.seed = seed;
        const double theta = p.max_rotation * unit(rng);
        Mat2 R;
        R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
        Mat2 S;
        S << p.max_shear * unit(rng), p.max_shear * unit(rng), p.max_shear * unit(rng),
            p.max_shear * unit(rng);
        s.A = R + S;
        s.b = Vec2(p.max_translation * unit(rng), p.max_translation * unit(rng));
        s.bump_amp.resize(static_cast<std::size_t>(p.bump_modes));
        s.bump_phase.resize(static_cast<std::size_t>(p.bump_modes));
        for (int k = 0; k < p.bump_modes; ++k) {
            s.bump_amp[static_cast<std::size_t>(k)] = p.max_bump * unit(rng);
            s.bump_phase[static_cast<std::size_t>(k)] =
                std::numbers::pi * unit(rng);
        }
        if (!(s.A.determinant() >= p.det_min)) continue;
        if (!(s.A.norm() <= p.frob_max)) continue;
        double disp = 0.0;
        const double tp = 2.0 * std::numbers::pi;
        for (int j = 0; j < 64; ++j) {
            const Vec2 x = cell.point(tp * j / 64.0);
            disp = std::max(disp, (s.A * x + s.b - x).norm());
        }
        if (p.bump_modes > 0) {
            double bsum = 0.0;
            for (double a : s.bump_amp) bsum += std::abs(a);
            disp += bsum * std::sqrt(cell.enclosed_area() / std::numbers::pi) * 4.0;
        }
        if (disp > p.max_displacement) continue;
        return s;
    }
    throw std::runtime_error("sample_deformation: rejection budget exceeded");
}

inline Curve apply_deformation(const Curve& c, const DeformationSample& s) {
    Curve out = c.affine(s.A, s.b);
    if (!s.bump_amp.empty()) out = out.radial_bump(s.bump_amp, s.bump_phase);
    return out;
}

}  // namespace mempol
