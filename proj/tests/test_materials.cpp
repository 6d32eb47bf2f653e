#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>

#include "sitert/materials.hpp"

using namespace sitert;

namespace {

// Independent high-precision Fresnel evaluation: long double arithmetic and
// a polar-form square root, deliberately a different numeric path from the
// implementation.
struct OracleFresnel {
    std::complex<long double> r_perp, r_par;
};

OracleFresnel oracle_fresnel(std::complex<long double> eta, long double theta) {
    auto sqrt_polar = [](std::complex<long double> z) {
        long double mag = std::sqrt(std::abs(z));
        long double ang = std::arg(z) / 2.0L;
        std::complex<long double> s = std::polar(mag, ang);
        if (s.real() < 0.0L || (s.real() == 0.0L && s.imag() > 0.0L)) s = -s;
        return s;
    };
    long double c = std::cos(theta);
    long double s2 = std::sin(theta) * std::sin(theta);
    std::complex<long double> w = sqrt_polar(eta - s2);
    OracleFresnel o;
    o.r_perp = (c - w) / (c + w);
    o.r_par = (eta * c - w) / (eta * c + w);
    return o;
}

MaterialRecord fixed_material(MaterialClass cls, double eps, double sigma) {
    MaterialRecord r;
    r.cls = cls;
    r.eps_a = eps;
    r.sigma_c = sigma;
    r.f_min_ghz = 0.001;
    r.f_max_ghz = 1000.0;
    return r;
}

double db(double x) { return 10.0 * std::log10(x); }

}  // namespace

TEST_CASE("permittivity: air is exactly 1 - j0") {
    auto p = eval_permittivity(fixed_material(MaterialClass::Air, 1.0, 0.0), 6.75e9);
    CHECK(p.eta.real() == 1.0);
    CHECK(p.eta.imag() == 0.0);
}

TEST_CASE("permittivity: concrete and wood spot values at 6.75 GHz") {
    auto c = eval_permittivity(fixed_material(MaterialClass::Concrete, 5.24, 0.237), 6.75e9);
    CHECK(c.eta.real() == doctest::Approx(5.24));
    CHECK(c.eta.imag() == doctest::Approx(-0.237 / (8.854e-12 * 2 * kPi * 6.75e9)).epsilon(1e-12));
    CHECK(c.eta.imag() == doctest::Approx(-0.631).epsilon(1e-3));

    auto w = eval_permittivity(fixed_material(MaterialClass::Wood, 1.99, 0.036), 6.75e9);
    CHECK(w.eta.imag() == doctest::Approx(-0.0959).epsilon(1e-3));
}

TEST_CASE("permittivity: out-of-range frequency clamps with warning flag") {
    MaterialRecord r = fixed_material(MaterialClass::Glass, 6.31, 0.0036);
    r.f_min_ghz = 1.0;
    r.f_max_ghz = 10.0;
    auto p = eval_permittivity(r, 50e9);
    CHECK(p.freq_clamped);
    auto q = eval_permittivity(r, 5e9);
    CHECK_FALSE(q.freq_clamped);
    CHECK_THROWS_AS(eval_permittivity(r, -1.0), InputError);
}

TEST_CASE("fresnel: air-air interface reflects nothing") {
    for (double deg : {0.0, 30.0, 60.0, 89.0}) {
        auto f = fresnel(Complex(1.0, 0.0), deg2rad(deg));
        CHECK(std::abs(f.r_perp) < 1e-12);
        CHECK(std::abs(f.r_par) < 1e-12);
        CHECK(std::abs(f.t_perp - 1.0) < 1e-12);
    }
}

TEST_CASE("fresnel: eta=4 normal incidence gives r = -1/3") {
    auto f = fresnel(Complex(4.0, 0.0), 0.0);
    CHECK(f.r_perp.real() == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(f.r_perp.imag()) < 1e-14);
    CHECK(reflected_power_fraction(f, Polarization::Perp) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("fresnel: domain error at grazing and beyond") {
    CHECK_THROWS_AS(fresnel(Complex(4.0, 0.0), kPi / 2.0), std::domain_error);
    CHECK_THROWS_AS(fresnel(Complex(4.0, 0.0), -0.1), std::domain_error);
}

TEST_CASE("fresnel: matches independent oracle on lossy concrete at 60 deg") {
    Complex eta(5.24, -0.631);
    auto f = fresnel(eta, deg2rad(60.0));
    auto o = oracle_fresnel({5.24L, -0.631L}, deg2rad(60.0));
    CHECK(std::abs(f.r_perp - Complex((double)o.r_perp.real(), (double)o.r_perp.imag())) < 1e-12);
    CHECK(std::abs(f.r_par - Complex((double)o.r_par.real(), (double)o.r_par.imag())) < 1e-12);
}

TEST_CASE("fresnel: random sweep against oracle, t = 1 + r") {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> eps_dist(1.0, 10.0), sig_dist(0.0, 10.0),
        theta_dist(0.0, deg2rad(89.0));
    for (int i = 0; i < 500; ++i) {
        double eps = eps_dist(rng), sig = sig_dist(rng), theta = theta_dist(rng);
        double im = -sig / (kVacuumPermittivity * 2 * kPi * 6.75e9);
        Complex eta(eps, im);
        auto f = fresnel(eta, theta);
        auto o = oracle_fresnel({(long double)eps, (long double)im}, theta);
        CHECK(std::abs(f.r_perp - Complex((double)o.r_perp.real(), (double)o.r_perp.imag())) <
              1e-10 * (1.0 + std::abs(f.r_perp)));
        CHECK(std::abs(f.r_par - Complex((double)o.r_par.real(), (double)o.r_par.imag())) <
              1e-10 * (1.0 + std::abs(f.r_par)));
        CHECK(std::abs(f.t_perp - (1.0 + f.r_perp)) < 1e-12);
        CHECK(std::abs(f.t_par - (1.0 + f.r_par)) < 1e-12);
        // passivity
        CHECK(std::abs(f.r_perp) <= 1.0 + 1e-12);
        CHECK(std::abs(f.r_par) <= 1.0 + 1e-12);
    }
}

TEST_CASE("fresnel: normal incidence magnitudes agree across polarizations") {
    for (auto eta : {Complex(4.0, 0.0), Complex(5.24, -0.631), Complex(1.99, -0.0959)}) {
        auto f = fresnel(eta, 0.0);
        CHECK(std::abs(std::abs(f.r_perp) - std::abs(f.r_par)) < 1e-12);
    }
}

TEST_CASE("fresnel: |r_perp| non-decreasing toward grazing for real eta") {
    Complex eta(3.7, 0.0);
    double prev = 0.0;
    for (int k = 0; k <= 88; ++k) {
        double r = std::abs(fresnel(eta, deg2rad(double(k))).r_perp);
        CHECK(r >= prev - 1e-12);
        prev = r;
    }
    CHECK(prev > 0.95);  // grazing limit approaches 1
}

TEST_CASE("fresnel: lossless power flux balance") {
    // R + T = 1 with T via the transmitted normal wavevector (Poynting flux).
    for (double eps : {2.0, 4.0, 6.31}) {
        for (double deg : {0.0, 20.0, 45.0, 70.0, 85.0}) {
            double theta = deg2rad(deg);
            Complex eta(eps, 0.0);
            auto f = fresnel(eta, theta);
            double c = std::cos(theta);
            double kz2 = std::sqrt(eps - std::sin(theta) * std::sin(theta));
            double Ts = std::norm(f.t_perp) * kz2 / c;
            double Tp = std::norm(f.t_par) * (kz2 / eps) / c;
            CHECK(std::norm(f.r_perp) + Ts == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(std::norm(f.r_par) + Tp == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("misclassification: concrete vs wood reflected-power gap at 6.75 GHz") {
    Complex eta_c(5.24, -0.631), eta_w(1.99, -0.0959);
    // Normal incidence is the worst case; the gap narrows toward grazing.
    double gap0 = db(reflected_power_fraction(fresnel(eta_c, 0.0), Polarization::Perp)) -
                  db(reflected_power_fraction(fresnel(eta_w, 0.0), Polarization::Perp));
    CHECK(gap0 == doctest::Approx(7.26).epsilon(0.01));
    // At oblique incidence (60 deg, perpendicular polarization) the per-bounce
    // error sits in the 3-5 dB band.
    double gap60 =
        db(reflected_power_fraction(fresnel(eta_c, deg2rad(60.0)), Polarization::Perp)) -
        db(reflected_power_fraction(fresnel(eta_w, deg2rad(60.0)), Polarization::Perp));
    CHECK(gap60 >= 3.0);
    CHECK(gap60 <= 5.0);
}

TEST_CASE("misclassification: concrete vs wood penetration gap, 0.05 m slab") {
    Complex eta_c(5.24, -0.631), eta_w(1.99, -0.0959);
    auto tc = slab_transmission(eta_c, 0.0, 0.05, 6.75e9);
    auto tw = slab_transmission(eta_w, 0.0, 0.05, 6.75e9);
    double gap = db(std::norm(tw.t_perp)) - db(std::norm(tc.t_perp));
    CHECK(gap >= 6.0);
    CHECK(gap <= 10.0);
}

TEST_CASE("slab transmission attenuates for lossy materials") {
    Complex eta(5.24, -0.631);
    for (double deg : {0.0, 30.0, 60.0}) {
        auto t = slab_transmission(eta, deg2rad(deg), 0.1, 6.75e9);
        CHECK(std::abs(t.t_perp) < 1.0);
        CHECK(std::abs(t.t_par) < 1.0);
        CHECK(std::abs(t.t_perp) > 0.0);
    }
}

TEST_CASE("metal behaves as near-perfect reflector") {
    MaterialTable table = MaterialTable::builtin();
    auto eta = table.permittivity(MaterialClass::Metal, 6.75e9).eta;
    auto f = fresnel(eta, deg2rad(30.0));
    CHECK(std::abs(f.r_perp) > 0.999);
    CHECK(std::abs(f.r_par) > 0.999);
    auto t = slab_transmission(eta, 0.0, table.get(MaterialClass::Metal).thickness_m, 6.75e9);
    CHECK(std::abs(t.t_perp) < 1e-6);
}

TEST_CASE("material table: file matches builtin and paper spot values") {
    MaterialTable file = MaterialTable::load(std::string(SITERT_SOURCE_DIR) + "/data/materials.tsv");
    MaterialTable builtin = MaterialTable::builtin();
    for (MaterialClass c : all_material_classes()) {
        REQUIRE(file.has(c));
        const auto& a = file.get(c);
        const auto& b = builtin.get(c);
        CHECK(a.eps_a == doctest::Approx(b.eps_a));
        CHECK(a.sigma_c == doctest::Approx(b.sigma_c));
        CHECK(a.thickness_m == doctest::Approx(b.thickness_m));
    }
    // spot checks at 6.75 GHz: eps_r exact, sigma within the spread between
    // the P.2040 power law and the values quoted alongside it
    const auto& concrete = file.get(MaterialClass::Concrete);
    CHECK(concrete.eps_r(6.75) == doctest::Approx(5.24));
    CHECK(concrete.sigma(6.75) > 0.15);
    CHECK(concrete.sigma(6.75) < 0.30);
    const auto& wood = file.get(MaterialClass::Wood);
    CHECK(wood.eps_r(6.75) == doctest::Approx(1.99));
    CHECK(wood.sigma(6.75) == doctest::Approx(0.036).epsilon(0.02));
}

TEST_CASE("material table: invariants over the validated ranges") {
    MaterialTable t = MaterialTable::builtin();
    for (MaterialClass c : all_material_classes()) {
        const auto& rec = t.get(c);
        for (double f = rec.f_min_ghz; f <= rec.f_max_ghz; f *= 2.0) {
            CHECK(rec.eps_r(f) >= 1.0);
            CHECK(rec.sigma(f) >= 0.0);
            auto eta = eval_permittivity(rec, f * 1e9).eta;
            CHECK(eta.real() >= 1.0);
            CHECK(eta.imag() <= 0.0);
        }
    }
}

TEST_CASE("material table: parse errors") {
    CHECK_THROWS_AS(MaterialTable::load("/nonexistent/materials.tsv"), InputError);
}
