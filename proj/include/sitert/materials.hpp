#pragma once

// Material electromagnetic properties: ITU-R P.2040 style power-law
// (eps_r, sigma) records, complex permittivity, Fresnel reflection and
// transmission, and the single-slab penetration model.

#include <algorithm>
#include <complex>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sitert/geom.hpp"

namespace sitert {

using Complex = std::complex<double>;

enum class MaterialClass { Concrete, Wood, Metal, Glass, Plywood, Air };

inline const char* to_string(MaterialClass c) {
    switch (c) {
        case MaterialClass::Concrete: return "concrete";
        case MaterialClass::Wood: return "wood";
        case MaterialClass::Metal: return "metal";
        case MaterialClass::Glass: return "glass";
        case MaterialClass::Plywood: return "plywood";
        case MaterialClass::Air: return "air";
    }
    return "?";
}

inline std::optional<MaterialClass> parse_material_class(const std::string& s) {
    if (s == "concrete") return MaterialClass::Concrete;
    if (s == "wood") return MaterialClass::Wood;
    if (s == "metal") return MaterialClass::Metal;
    if (s == "glass") return MaterialClass::Glass;
    if (s == "plywood") return MaterialClass::Plywood;
    if (s == "air") return MaterialClass::Air;
    return std::nullopt;
}

inline const std::vector<MaterialClass>& all_material_classes() {
    static const std::vector<MaterialClass> k = {
        MaterialClass::Concrete, MaterialClass::Wood, MaterialClass::Metal,
        MaterialClass::Glass, MaterialClass::Plywood, MaterialClass::Air};
    return k;
}

// eps_r = a * f_GHz^b, sigma = c * f_GHz^d  (f in GHz, sigma in S/m)
struct MaterialRecord {
    MaterialClass cls = MaterialClass::Air;
    double eps_a = 1.0, eps_b = 0.0;
    double sigma_c = 0.0, sigma_d = 0.0;
    double f_min_ghz = 0.001, f_max_ghz = 100.0;
    double thickness_m = 0.0;  // default slab thickness for penetration

    double eps_r(double f_ghz) const { return eps_a * std::pow(f_ghz, eps_b); }
    double sigma(double f_ghz) const { return sigma_c * std::pow(f_ghz, sigma_d); }
};

struct ComplexPermittivity {
    Complex eta{1.0, 0.0};
    bool freq_clamped = false;  // frequency fell outside the validated range
};

// eta = eps_r - j*sigma/(eps0 * 2*pi*f)
inline ComplexPermittivity eval_permittivity(const MaterialRecord& rec, double freq_hz) {
    if (freq_hz <= 0.0)
        throw InputError("eval_permittivity: frequency must be positive");
    double f_ghz = freq_hz / 1e9;
    ComplexPermittivity out;
    double f_eval = std::clamp(f_ghz, rec.f_min_ghz, rec.f_max_ghz);
    out.freq_clamped = (f_eval != f_ghz);
    double eps = rec.eps_r(f_eval);
    double sig = rec.sigma(f_eval);
    out.eta = Complex(eps, -sig / (kVacuumPermittivity * 2.0 * kPi * freq_hz));
    return out;
}

// Principal complex square root with Re >= 0; tie broken toward Im <= 0.
// Eq-of-interest is branch sensitive for lossy media.
inline Complex sqrt_branch(Complex z) {
    Complex s = std::sqrt(z);
    if (s.real() < 0.0 || (s.real() == 0.0 && s.imag() > 0.0)) s = -s;
    return s;
}

struct FresnelCoeffs {
    Complex r_perp, r_par;
    Complex t_perp, t_par;  // t = 1 + r per polarization
};

// Air-to-material Fresnel coefficients at incidence angle theta_i from the normal.
inline FresnelCoeffs fresnel(const Complex& eta, double theta_i) {
    if (!(theta_i >= 0.0 && theta_i < kPi / 2.0))
        throw std::domain_error("fresnel: incidence angle must be in [0, pi/2)");
    double c = std::cos(theta_i);
    double s2 = std::sin(theta_i) * std::sin(theta_i);
    Complex root = sqrt_branch(eta - s2);
    FresnelCoeffs f;
    f.r_perp = (c - root) / (c + root);
    f.r_par = (eta * c - root) / (eta * c + root);
    f.t_perp = 1.0 + f.r_perp;
    f.t_par = 1.0 + f.r_par;
    return f;
}

enum class Polarization { Perp, Par };

inline double reflected_power_fraction(const FresnelCoeffs& f, Polarization pol) {
    Complex r = (pol == Polarization::Perp) ? f.r_perp : f.r_par;
    return std::norm(r);
}

// Single-slab transmission: interface coefficients at entry/exit plus the
// in-material propagation factor relative to the same length of free space.
// Internal multiple reflections are not modeled.
struct SlabTransmission {
    Complex t_perp, t_par;
};

inline SlabTransmission slab_transmission(const Complex& eta, double theta_i,
                                          double thickness_m, double freq_hz) {
    FresnelCoeffs f = fresnel(eta, theta_i);
    double c = std::cos(theta_i);
    double s2 = std::sin(theta_i) * std::sin(theta_i);
    double k0 = 2.0 * kPi * freq_hz / kSpeedOfLight;
    Complex kz_mat = k0 * sqrt_branch(eta - s2);
    double kz_air = k0 * c;
    // excess phase/attenuation of the slab over the air path it replaces
    Complex prop = std::exp(Complex(0.0, -1.0) * (kz_mat - kz_air) * thickness_m);
    SlabTransmission t;
    t.t_perp = f.t_perp * (1.0 - f.r_perp) * prop;
    t.t_par = f.t_par * (1.0 - f.r_par) * prop;
    return t;
}

// ------------------------------------------------------------------
// Material table

class MaterialTable {
public:
    const MaterialRecord& get(MaterialClass c) const {
        auto it = records_.find(c);
        if (it == records_.end())
            throw InputError(std::string("material table has no entry for ") + to_string(c));
        return it->second;
    }

    bool has(MaterialClass c) const { return records_.count(c) != 0; }
    void set(const MaterialRecord& rec) { records_[rec.cls] = rec; }
    const std::map<MaterialClass, MaterialRecord>& records() const { return records_; }

    ComplexPermittivity permittivity(MaterialClass c, double freq_hz) const {
        return eval_permittivity(get(c), freq_hz);
    }

    // Columns: class a b c d f_min_GHz f_max_GHz thickness_m.  '#' comments.
    static MaterialTable load(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw InputError("cannot open material table: " + path);
        MaterialTable table;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string cls_name;
            if (!(ls >> cls_name)) continue;
            auto cls = parse_material_class(cls_name);
            if (!cls)
                throw InputError(path + ":" + std::to_string(lineno) +
                                 ": unknown material class '" + cls_name + "'");
            MaterialRecord rec;
            rec.cls = *cls;
            if (!(ls >> rec.eps_a >> rec.eps_b >> rec.sigma_c >> rec.sigma_d >>
                  rec.f_min_ghz >> rec.f_max_ghz >> rec.thickness_m))
                throw InputError(path + ":" + std::to_string(lineno) +
                                 ": expected 8 columns (class a b c d f_min f_max thickness)");
            table.set(rec);
        }
        return table;
    }

    // ITU-R P.2040 power-law coefficients for the supported classes.
    static MaterialTable builtin() {
        MaterialTable t;
        t.set({MaterialClass::Concrete, 5.24, 0.0, 0.0462, 0.7822, 1.0, 100.0, 0.10});
        t.set({MaterialClass::Wood, 1.99, 0.0, 0.0047, 1.0718, 0.001, 100.0, 0.04});
        t.set({MaterialClass::Metal, 1.0, 0.0, 1e7, 0.0, 1.0, 100.0, 0.002});
        t.set({MaterialClass::Glass, 6.31, 0.0, 0.0036, 1.3394, 0.1, 100.0, 0.006});
        t.set({MaterialClass::Plywood, 2.71, 0.0, 0.33, 0.0, 1.0, 40.0, 0.012});
        t.set({MaterialClass::Air, 1.0, 0.0, 0.0, 0.0, 0.001, 1000.0, 0.0});
        return t;
    }

private:
    std::map<MaterialClass, MaterialRecord> records_;
};

}  // namespace sitert
