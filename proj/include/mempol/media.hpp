#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace mempol {

using Complex = std::complex<double>;

/// Physical constants of the two-phase cell model: a common
/// medium/cytoplasm admittivity (sigma0, eps0) and a thin membrane
/// (sigma_m, eps_m) of thickness delta in unit-cell length units.
struct MembraneModel {
    double sigma0  = 0.5;
    double eps0    = 90.0 * 8.85e-12;
    double sigma_m = 1e-8;
    double eps_m   = 3.5 * 8.85e-12;
    double delta   = 0.7e-3;

    void validate() const {
        if (!(sigma0 > 0.0)) throw std::invalid_argument("MembraneModel: sigma0 must be > 0");
        if (!(sigma_m > 0.0)) throw std::invalid_argument("MembraneModel: sigma_m must be > 0");
        if (!(eps0 > 0.0)) throw std::invalid_argument("MembraneModel: eps0 must be > 0");
        if (eps_m < 0.0) throw std::invalid_argument("MembraneModel: eps_m must be >= 0");
        if (!(delta > 0.0)) throw std::invalid_argument("MembraneModel: delta must be > 0");
    }
};

/// k0(omega) = sigma0 + i omega eps0, the admittivity of medium and cytoplasm.
inline Complex admittivity_k0(const MembraneModel& m, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("admittivity_k0: omega must be > 0");
    return {m.sigma0, omega * m.eps0};
}

/// beta(omega) = delta / (sigma_m + i omega eps_m).
inline Complex beta(const MembraneModel& m, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("beta: omega must be > 0");
    if (m.sigma_m == 0.0 && m.eps_m == 0.0)
        throw std::invalid_argument("beta: degenerate membrane (sigma_m = eps_m = 0)");
    const double den = m.sigma_m * m.sigma_m + omega * omega * m.eps_m * m.eps_m;
    return {m.delta * m.sigma_m / den, -m.delta * omega * m.eps_m / den};
}

/// Coercivity constant
/// beta' = delta (sigma0 sigma_m + omega^2 eps0 eps_m) / (sigma_m^2 + omega^2 eps_m^2).
inline double beta_prime(const MembraneModel& m, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("beta_prime: omega must be > 0");
    if (m.sigma_m == 0.0 && m.eps_m == 0.0)
        throw std::invalid_argument("beta_prime: degenerate membrane");
    const double den = m.sigma_m * m.sigma_m + omega * omega * m.eps_m * m.eps_m;
    return m.delta * (m.sigma0 * m.sigma_m + omega * omega * m.eps0 * m.eps_m) / den;
}

/// Product beta(omega) * k0(omega); the single complex parameter every
/// boundary operator system depends on.
inline Complex beta_k0(const MembraneModel& m, double omega) {
    return beta(m, omega) * admittivity_k0(m, omega);
}

/// Strictly increasing sweep of angular frequencies [rad/s].
struct FrequencyGrid {
    std::vector<double> omegas;

    static FrequencyGrid logspace(double omega_min, double omega_max, int n) {
        if (n < 1 || !(omega_min > 0.0) || !(omega_max > omega_min))
            throw std::invalid_argument("FrequencyGrid::logspace: bad range");
        FrequencyGrid g;
        g.omegas.resize(static_cast<std::size_t>(n));
        if (n == 1) {
            g.omegas[0] = omega_min;
            return g;
        }
        const double l0 = std::log(omega_min), l1 = std::log(omega_max);
        for (int i = 0; i < n; ++i)
            g.omegas[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (n - 1));
        return g;
    }

    void validate() const {
        if (omegas.empty()) throw std::invalid_argument("FrequencyGrid: empty");
        double prev = 0.0;
        for (double w : omegas) {
            if (!(w > prev)) throw std::invalid_argument("FrequencyGrid: not strictly increasing positive");
            prev = w;
        }
    }

    std::size_t size() const { return omegas.size(); }
};

}  // namespace mempol
