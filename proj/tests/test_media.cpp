#include <catch2/catch_amalgamated.hpp>

#include "mempol/media.hpp"

using namespace mempol;
using Catch::Approx;

TEST_CASE("admittivity_k0 combines conductivity and permittivity") {
    MembraneModel m;
    m.sigma0 = 0.5;
    m.eps0 = 0.0;
    CHECK(admittivity_k0(m, 1e6) == Complex(0.5, 0.0));

    m.eps0 = 90.0 * 8.85e-12;
    const Complex k = admittivity_k0(m, 1e6);
    CHECK(k.real() == Approx(0.5));
    CHECK(k.imag() == Approx(7.965e-4));

    m.sigma0 = 1.0;
    m.eps0 = 1.0;
    CHECK(admittivity_k0(m, 1.0) == Complex(1.0, 1.0));
}

TEST_CASE("beta is membrane thickness over membrane admittivity") {
    MembraneModel m;
    m.delta = 1.0;
    m.sigma_m = 1.0;
    m.eps_m = 0.0;
    CHECK(beta(m, 123.0) == Complex(1.0, 0.0));

    m.delta = 2.0;
    m.eps_m = 1.0;
    const Complex b = beta(m, 1.0);
    CHECK(b.real() == Approx(1.0));
    CHECK(b.imag() == Approx(-1.0));
}

TEST_CASE("beta matches the explicit real/imaginary split") {
    MembraneModel m;  // physiological defaults
    const double omega = 1e7;
    const double den = m.sigma_m * m.sigma_m + omega * omega * m.eps_m * m.eps_m;
    const Complex b = beta(m, omega);
    CHECK(b.real() == Approx(m.delta * m.sigma_m / den));
    CHECK(b.imag() == Approx(-m.delta * omega * m.eps_m / den));
}

TEST_CASE("beta_prime is the positive coercivity constant") {
    MembraneModel m;
    m.delta = 1.0;
    m.sigma0 = 1.0;
    m.sigma_m = 1.0;
    m.eps0 = 1e-12;
    m.eps_m = 0.0;
    CHECK(beta_prime(m, 5.0) == Approx(1.0));

    MembraneModel phys;
    CHECK(beta_prime(phys, 1e6) > 0.0);
    CHECK(beta_prime(phys, 1e9) > 0.0);
}

TEST_CASE("degenerate membrane is rejected") {
    MembraneModel m;
    m.sigma_m = 0.0;
    m.eps_m = 0.0;
    CHECK_THROWS(beta(m, 1e6));
}

TEST_CASE("model invariants") {
    MembraneModel m;
    CHECK_NOTHROW(m.validate());
    m.sigma0 = 0.0;
    CHECK_THROWS(m.validate());
    m = MembraneModel{};
    m.delta = 0.0;
    CHECK_THROWS(m.validate());
}

TEST_CASE("frequency grid is log-spaced, increasing and validated") {
    const auto g = FrequencyGrid::logspace(1e4, 1e9, 11);
    REQUIRE(g.size() == 11);
    CHECK(g.omegas.front() == Approx(1e4));
    CHECK(g.omegas.back() == Approx(1e9));
    CHECK(g.omegas[1] / g.omegas[0] == Approx(g.omegas[10] / g.omegas[9]));
    CHECK_NOTHROW(g.validate());

    CHECK_THROWS(FrequencyGrid::logspace(1e9, 1e4, 5));
    CHECK_THROWS(FrequencyGrid::logspace(0.0, 1e4, 5));
    FrequencyGrid bad;
    CHECK_THROWS(bad.validate());
    bad.omegas = {2.0, 1.0};
    CHECK_THROWS(bad.validate());
}
