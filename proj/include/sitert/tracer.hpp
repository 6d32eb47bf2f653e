#pragma once

// Shooting-and-bouncing-ray path discovery with image-method validation to a
// point receiver.  Per-interaction Fresnel physics with a full 3D polarization
// vector; omnidirectional PDPs are formed non-coherently.

#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "sitert/geom.hpp"
#include "sitert/materials.hpp"
#include "sitert/scene.hpp"

namespace sitert {

struct SimConfig {
    double freq_hz = 6.75e9;
    Vec3 tx_pos{0, 0, 2.4};
    Vec3 rx_pos{5, 0, 1.5};
    double tx_power_dbm = 0.0;
    long n_rays = 1000000;
    int max_reflections = 5;
    bool reflection = true;
    bool penetration = true;
    int max_penetrations = 3;
    double dynamic_range_db = 25.0;
    bool allow_open_meshes = false;  // accept single-surface (non-watertight) geometry
    bool bin_delays = false;
    double bin_width_s = 1e-9;
    int threads = 0;  // 0 = hardware concurrency
    MaterialTable materials = MaterialTable::builtin();

    void validate() const {
        if (freq_hz <= 0 || n_rays < 1 || max_reflections < 0 || dynamic_range_db <= 0)
            throw InputError("sim config: invalid parameter values");
    }

    // Mechanism names from config files; diffraction is rejected, not ignored.
    void set_mechanisms(const std::vector<std::string>& names) {
        reflection = false;
        penetration = false;
        for (const auto& m : names) {
            if (m == "reflection") reflection = true;
            else if (m == "penetration") penetration = true;
            else if (m == "diffraction")
                throw PhysicsError("diffraction is not implemented");
            else
                throw InputError("unknown propagation mechanism '" + m + "'");
        }
    }
};

struct Interaction {
    enum class Kind { Reflect, Penetrate };
    Kind kind = Kind::Reflect;
    FaceRef face;
    Vec3 point;
    double incidence_rad = 0.0;
};

struct PropPath {
    std::vector<Interaction> interactions;
    double delay_s = 0.0;
    Complex amplitude{0.0, 0.0};  // field gain relative to 1 W isotropic TX
    double power_dbm = 0.0;
};

struct Pdp {
    struct Entry {
        double delay_s;
        double power_mw;
    };
    std::vector<Entry> entries;

    double total_power_mw() const {
        double s = 0;
        for (const auto& e : entries) s += e.power_mw;
        return s;
    }
};

struct TraceStats {
    long rays_launched = 0;
    long candidates = 0;
    long validated = 0;
};

struct TraceResult {
    std::vector<PropPath> paths;
    TraceStats stats;
};

// ------------------------------------------------------------------
// Launch directions: spherical Fibonacci lattice, deterministic for fixed n.

inline Vec3 fibonacci_direction(long i, long n) {
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden_angle * static_cast<double>(i);
    return {r * std::cos(phi), r * std::sin(phi), z};
}

inline std::vector<Vec3> fibonacci_directions(long n) {
    if (n < 1)
        throw InputError("fibonacci_directions: n must be >= 1");
    std::vector<Vec3> dirs;
    dirs.reserve(n);
    for (long i = 0; i < n; ++i) dirs.push_back(fibonacci_direction(i, n));
    return dirs;
}

// ------------------------------------------------------------------
// Polarization bookkeeping

struct CVec3 {
    Complex x{0, 0}, y{0, 0}, z{0, 0};
};

inline CVec3 operator*(const Complex& s, const Vec3& v) {
    return {s * v.x, s * v.y, s * v.z};
}

inline CVec3 operator+(const CVec3& a, const CVec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
}

inline Complex cdot(const CVec3& a, const Vec3& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

// Vertical-polarization unit vector perpendicular to the propagation
// direction (isotropic antenna, no pattern loss).
inline Vec3 vertical_pol(const Vec3& d) {
    Vec3 up{0, 0, 1};
    Vec3 e = up - d * dot(up, d);
    double n = norm(e);
    if (n < 1e-9) return {1, 0, 0};  // vertical link: any transverse axis
    return e / n;
}

namespace detail {

// s-axis of the local plane of incidence; arbitrary transverse axis at
// normal incidence.
inline Vec3 s_axis(const Vec3& d, const Vec3& n_oriented) {
    Vec3 s = cross(d, n_oriented);
    double len = norm(s);
    if (len < 1e-9) {
        Vec3 aux = std::abs(d.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        return normalized(cross(d, aux));
    }
    return s / len;
}

}  // namespace detail

// ------------------------------------------------------------------
// Tracer

class Tracer {
public:
    Tracer(const Scene& scene, const SimConfig& config) : scene_(scene), config_(config) {
        config_.validate();
        if (norm(config_.tx_pos - config_.rx_pos) < 1e-9)
            throw InputError("trace: TX and RX coincide");
        if (!config_.allow_open_meshes && !scene_.meshes().empty()) {
            auto reports = scene_.manifold_reports();
            for (size_t i = 0; i < reports.size(); ++i) {
                if (!reports[i].is_watertight)
                    throw PhysicsError(
                        "trace: mesh '" + scene_.meshes()[i].object_id +
                        "' is not watertight (boundary=" +
                        std::to_string(reports[i].boundary_edge_count) + ", nonmanifold=" +
                        std::to_string(reports[i].nonmanifold_edge_count) + ", inconsistent=" +
                        std::to_string(reports[i].inconsistent_normal_pairs) +
                        "); pass allow_open_meshes for single-surface geometry");
            }
        }
    }

    TraceResult run() const {
        std::set<std::vector<int>> candidates = discover_candidates();
        candidates.insert(std::vector<int>{});  // LOS

        TraceResult result;
        result.stats.rays_launched = config_.n_rays;
        result.stats.candidates = static_cast<long>(candidates.size());
        for (const auto& seq : candidates) {
            auto path = validate_sequence(seq);
            if (path) result.paths.push_back(std::move(*path));
        }
        result.stats.validated = static_cast<long>(result.paths.size());
        std::sort(result.paths.begin(), result.paths.end(),
                  [](const PropPath& a, const PropPath& b) {
                      if (a.delay_s != b.delay_s) return a.delay_s < b.delay_s;
                      return a.power_dbm > b.power_dbm;
                  });
        return result;
    }

    // Image-method validation of one candidate reflection-face sequence.
    // Empty sequence is the LOS path.
    std::optional<PropPath> validate_sequence(const std::vector<int>& seq) const {
        const int k = static_cast<int>(seq.size());
        std::vector<Vec3> normals(k);
        std::vector<double> offsets(k);
        std::vector<Vec3> images(k + 1);
        images[0] = config_.tx_pos;
        for (int i = 0; i < k; ++i) {
            const Scene::Face& f = scene_.faces()[seq[i]];
            normals[i] = f.normal;
            offsets[i] = -dot(f.normal, f.v0);
            images[i + 1] = mirror_point(images[i], normals[i], offsets[i]);
        }

        // Backward stencil solve from RX toward the deepest image.
        std::vector<Vec3> stencil(k);
        Vec3 target = config_.rx_pos;
        for (int i = k - 1; i >= 0; --i) {
            Vec3 seg = images[i + 1] - target;
            double denom = dot(normals[i], seg);
            if (std::abs(denom) < 1e-12) return std::nullopt;
            double t = -(dot(normals[i], target) + offsets[i]) / denom;
            if (t <= 1e-9 || t >= 1.0 - 1e-9) return std::nullopt;
            Vec3 q = target + seg * t;
            if (!point_in_face(scene_.faces()[seq[i]], q)) return std::nullopt;
            stencil[i] = q;
            target = q;
        }

        // Assemble the vertex chain tx -> stencil... -> rx and apply physics.
        std::vector<Vec3> chain;
        chain.push_back(config_.tx_pos);
        for (const auto& q : stencil) chain.push_back(q);
        chain.push_back(config_.rx_pos);

        PropPath path;
        double total_len = 0.0;
        CVec3 field;
        Vec3 dir0 = normalized(chain[1] - chain[0]);
        {
            Vec3 e0 = vertical_pol(dir0);
            field = Complex(1.0, 0.0) * e0;
        }
        Vec3 dir = dir0;
        for (size_t s = 0; s + 1 < chain.size(); ++s) {
            Vec3 a = chain[s], b = chain[s + 1];
            double len = norm(b - a);
            if (len < 1e-9) return std::nullopt;
            dir = (b - a) / len;
            total_len += len;

            // obstruction walk along the open segment; penetrable hits
            // accumulate slab transmission, otherwise the path dies
            double t_cursor = 1e-6;
            const double t_end = len - 1e-6;
            while (t_cursor < t_end) {
                auto hit = scene_.intersect(a, dir, t_cursor, t_end);
                if (!hit) break;
                t_cursor = hit->t + 1e-6;
                int hit_idx = scene_.face_index(hit->ref);
                bool endpoint_face =
                    (s > 0 && hit_idx == seq[s - 1]) ||
                    (s + 1 < chain.size() - 1 && hit_idx == seq[s]);
                if (endpoint_face) continue;
                if (!config_.penetration) return std::nullopt;
                // The slab model covers entry interface, in-material loss, and
                // exit interface in one event, applied on the entry-side
                // crossing (dir against the stored normal).  The matching
                // exit-side crossing of a closed solid contributes nothing.
                if (dot(dir, hit->normal) < 0.0) {
                    if (!apply_penetration(*hit, dir, field, path)) return std::nullopt;
                }
            }

            // reflection at the far end of every segment except the last
            if (s + 1 < chain.size() - 1) {
                const Scene::Face& f = scene_.faces()[seq[s]];
                if (!apply_reflection(f, b, dir, field, path)) return std::nullopt;
            }
        }

        // receiver projection onto vertical polarization
        Complex rx_amp = cdot(field, vertical_pol(dir));
        double lambda = kSpeedOfLight / config_.freq_hz;
        double tau = total_len / kSpeedOfLight;
        Complex a = rx_amp * (lambda / (4.0 * kPi * total_len)) *
                    std::exp(Complex(0.0, -2.0 * kPi * config_.freq_hz * tau));
        double gain_db = 10.0 * std::log10(std::norm(a) + 1e-300);
        path.delay_s = tau;
        path.amplitude = a;
        path.power_dbm = config_.tx_power_dbm + gain_db;
        if (std::norm(a) < 1e-300) return std::nullopt;
        return path;
    }

private:
    bool point_in_face(const Scene::Face& f, const Vec3& q) const {
        Vec3 e1 = f.v1 - f.v0, e2 = f.v2 - f.v0, d = q - f.v0;
        double d11 = dot(e1, e1), d12 = dot(e1, e2), d22 = dot(e2, e2);
        double dq1 = dot(d, e1), dq2 = dot(d, e2);
        double det = d11 * d22 - d12 * d12;
        if (std::abs(det) < 1e-18) return false;
        double u = (d22 * dq1 - d12 * dq2) / det;
        double v = (d11 * dq2 - d12 * dq1) / det;
        const double eps = 1e-9;
        return u >= -eps && v >= -eps && u + v <= 1.0 + eps;
    }

    bool apply_reflection(const Scene::Face& f, const Vec3& point, Vec3& dir, CVec3& field,
                          PropPath& path) const {
        Vec3 n = dot(dir, f.normal) < 0 ? f.normal : -f.normal;
        double cos_i = std::clamp(-dot(dir, n), 0.0, 1.0);
        double theta = std::acos(cos_i);
        if (theta >= kPi / 2.0) return false;

        Complex eta = config_.materials.permittivity(f.material, config_.freq_hz).eta;
        FresnelCoeffs fr = fresnel(eta, theta);

        Vec3 s_hat = detail::s_axis(dir, n);
        Vec3 p_in = cross(s_hat, dir);
        Complex es = cdot(field, s_hat);
        Complex ep = cdot(field, p_in);
        Vec3 new_dir = reflect_dir(dir, n);
        Vec3 p_out = cross(s_hat, new_dir);
        field = (fr.r_perp * es) * s_hat + (fr.r_par * ep) * p_out;
        dir = new_dir;

        Interaction it;
        it.kind = Interaction::Kind::Reflect;
        it.face = f.ref;
        it.point = point;
        it.incidence_rad = theta;
        path.interactions.push_back(it);
        return true;
    }

    bool apply_penetration(const Hit& hit, const Vec3& dir, CVec3& field, PropPath& path) const {
        Vec3 n = dot(dir, hit.normal) < 0 ? hit.normal : -hit.normal;
        double cos_i = std::clamp(-dot(dir, n), 0.0, 1.0);
        double theta = std::acos(cos_i);
        if (theta >= kPi / 2.0 - 1e-9) return false;  // grazing: treat as blocked

        const MaterialRecord& rec = config_.materials.get(hit.material);
        Complex eta = eval_permittivity(rec, config_.freq_hz).eta;
        SlabTransmission tr = slab_transmission(eta, theta, rec.thickness_m, config_.freq_hz);

        Vec3 s_hat = detail::s_axis(dir, n);
        Vec3 p_in = cross(s_hat, dir);
        Complex es = cdot(field, s_hat);
        Complex ep = cdot(field, p_in);
        field = (tr.t_perp * es) * s_hat + (tr.t_par * ep) * p_in;

        Interaction it;
        it.kind = Interaction::Kind::Penetrate;
        it.face = hit.ref;
        it.point = hit.point;
        it.incidence_rad = theta;
        path.interactions.push_back(it);
        return true;
    }

    // SBR phase: launch Fibonacci directions, bounce specularly, branch
    // through penetrable faces, and collect reflecting-face sequences.
    std::set<std::vector<int>> discover_candidates() const {
        if (scene_.faces().empty()) return {};
        int n_threads = config_.threads > 0
                            ? config_.threads
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        n_threads = static_cast<int>(std::min<long>(n_threads, config_.n_rays));

        std::vector<std::set<std::vector<int>>> partial(n_threads);
        auto worker = [&](int tid) {
            std::set<std::vector<int>>& found = partial[tid];
            long begin = config_.n_rays * tid / n_threads;
            long end = config_.n_rays * (tid + 1) / n_threads;
            struct State {
                Vec3 origin, dir;
                int refl = 0, pen = 0;
                std::vector<int> seq;
            };
            std::vector<State> stack;
            for (long i = begin; i < end; ++i) {
                stack.clear();
                stack.push_back({config_.tx_pos, fibonacci_direction(i, config_.n_rays), 0, 0, {}});
                while (!stack.empty()) {
                    State st = std::move(stack.back());
                    stack.pop_back();
                    auto hit = scene_.intersect(st.origin, st.dir, 1e-4, 1e12);
                    if (!hit) continue;
                    int face_idx = scene_.face_index(hit->ref);
                    if (config_.reflection && st.refl < config_.max_reflections) {
                        State next;
                        next.origin = hit->point;
                        Vec3 n = dot(st.dir, hit->normal) < 0 ? hit->normal : -hit->normal;
                        next.dir = reflect_dir(st.dir, n);
                        next.refl = st.refl + 1;
                        next.pen = st.pen;
                        next.seq = st.seq;
                        next.seq.push_back(face_idx);
                        found.insert(next.seq);
                        stack.push_back(std::move(next));
                    }
                    if (config_.penetration && st.pen < config_.max_penetrations) {
                        State next;
                        next.origin = hit->point;
                        next.dir = st.dir;
                        next.refl = st.refl;
                        next.pen = st.pen + 1;
                        next.seq = std::move(st.seq);
                        stack.push_back(std::move(next));
                    }
                }
            }
        };

        std::vector<std::thread> threads;
        for (int t = 1; t < n_threads; ++t) threads.emplace_back(worker, t);
        worker(0);
        for (auto& t : threads) t.join();

        std::set<std::vector<int>> merged;
        for (auto& p : partial) merged.merge(p);
        return merged;
    }

    const Scene& scene_;
    SimConfig config_;
};

inline TraceResult trace(const Scene& scene, const SimConfig& config) {
    return Tracer(scene, config).run();
}

// One entry per path, power = |a_i|^2 * P_tx, sorted by delay.  No phasor
// summation across paths; optional delay binning merges powers within a bin.
inline Pdp synthesize_pdp(const std::vector<PropPath>& paths, const SimConfig& config) {
    Pdp pdp;
    for (const auto& p : paths)
        pdp.entries.push_back({p.delay_s, std::pow(10.0, p.power_dbm / 10.0)});
    std::sort(pdp.entries.begin(), pdp.entries.end(),
              [](const Pdp::Entry& a, const Pdp::Entry& b) { return a.delay_s < b.delay_s; });
    if (config.bin_delays && !pdp.entries.empty()) {
        std::map<long long, double> bins;
        for (const auto& e : pdp.entries)
            bins[static_cast<long long>(std::floor(e.delay_s / config.bin_width_s))] += e.power_mw;
        pdp.entries.clear();
        for (const auto& [bin, power] : bins)
            pdp.entries.push_back({(bin + 0.5) * config.bin_width_s, power});
    }
    return pdp;
}

}  // namespace sitert
