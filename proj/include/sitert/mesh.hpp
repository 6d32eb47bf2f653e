#pragma once

// Triangle meshes with per-face material labels, the watertight-manifold
// census, and ASCII PLY read/write.

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sitert/geom.hpp"
#include "sitert/materials.hpp"

namespace sitert {

struct TriMesh {
    std::string object_id;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<MaterialClass> face_material;  // one entry per face

    Vec3 face_normal(int f) const {
        const auto& t = faces[f];
        return normalized(cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]));
    }

    double face_area(int f) const {
        const auto& t = faces[f];
        return 0.5 * norm(cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]));
    }

    void set_uniform_material(MaterialClass c) {
        face_material.assign(faces.size(), c);
    }

    // Throws on index out-of-range, material count mismatch, or a degenerate face.
    void validate_basic(double eps_area = 1e-8) const {
        if (face_material.size() != faces.size())
            throw InputError("mesh '" + object_id + "': face_material size mismatch");
        for (size_t f = 0; f < faces.size(); ++f) {
            for (int k = 0; k < 3; ++k) {
                int v = faces[f][k];
                if (v < 0 || v >= static_cast<int>(vertices.size()))
                    throw InputError("mesh '" + object_id + "': face vertex index out of range");
            }
            if (face_area(static_cast<int>(f)) <= eps_area)
                throw InputError("mesh '" + object_id + "': degenerate face " + std::to_string(f));
        }
    }
};

struct ManifoldReport {
    bool is_watertight = false;
    int boundary_edge_count = 0;
    int nonmanifold_edge_count = 0;
    int inconsistent_normal_pairs = 0;
};

// Edge-incidence census.  An edge shared by exactly two faces with opposing
// traversal orientation is manifold; one incidence is a boundary edge, three
// or more is non-manifold, two with the same orientation means the adjacent
// faces wind inconsistently.
inline ManifoldReport validate_manifold(const TriMesh& mesh) {
    struct Incidence {
        int forward = 0;   // traversed as (a,b) with a < b
        int backward = 0;  // traversed as (b,a)
    };
    std::map<std::pair<int, int>, Incidence> edges;
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            int a = f[k], b = f[(k + 1) % 3];
            if (a < b)
                edges[{a, b}].forward++;
            else
                edges[{b, a}].backward++;
        }
    }
    ManifoldReport rep;
    for (const auto& [key, inc] : edges) {
        int total = inc.forward + inc.backward;
        if (total == 1) {
            rep.boundary_edge_count++;
        } else if (total > 2) {
            rep.nonmanifold_edge_count++;
        } else if (inc.forward == 2 || inc.backward == 2) {
            rep.inconsistent_normal_pairs++;
        }
    }
    rep.is_watertight = rep.boundary_edge_count == 0 && rep.nonmanifold_edge_count == 0 &&
                        rep.inconsistent_normal_pairs == 0;
    return rep;
}

// ------------------------------------------------------------------
// ASCII PLY.  Vertices carry x y z; faces carry a vertex_indices list and an
// optional material index resolved through "comment material <id> <class>"
// header lines.

inline void write_ply(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write mesh file: " + path);
    // Stable material id assignment in class order.
    std::map<MaterialClass, int> mat_ids;
    for (MaterialClass m : mesh.face_material)
        mat_ids.emplace(m, 0);
    int next = 0;
    for (auto& [m, id] : mat_ids) id = next++;

    out << "ply\nformat ascii 1.0\n";
    for (const auto& [m, id] : mat_ids)
        out << "comment material " << id << " " << to_string(m) << "\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.faces.size() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "property int material\n";
    out << "end_header\n";
    out.precision(17);
    for (const auto& v : mesh.vertices)
        out << v.x << " " << v.y << " " << v.z << "\n";
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& t = mesh.faces[f];
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << " "
            << mat_ids.at(mesh.face_material[f]) << "\n";
    }
    if (!out)
        throw InputError("write failed: " + path);
}

inline TriMesh read_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open mesh file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "ply")
        throw InputError(path + ": not a PLY file");

    size_t n_vertices = 0, n_faces = 0;
    bool face_has_material = false;
    std::map<int, MaterialClass> mat_by_id;
    std::string element;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "end_header") break;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "ascii")
                throw InputError(path + ": only ascii PLY supported");
        } else if (tok == "comment") {
            std::string what;
            ls >> what;
            if (what == "material") {
                int id;
                std::string name;
                if (ls >> id >> name) {
                    auto cls = parse_material_class(name);
                    if (!cls)
                        throw InputError(path + ": unknown material '" + name + "'");
                    mat_by_id[id] = *cls;
                }
            }
        } else if (tok == "element") {
            size_t count;
            ls >> element >> count;
            if (element == "vertex") n_vertices = count;
            else if (element == "face") n_faces = count;
        } else if (tok == "property" && element == "face") {
            std::string rest;
            std::getline(ls, rest);
            if (rest.find("material") != std::string::npos) face_has_material = true;
        }
    }

    TriMesh mesh;
    mesh.vertices.reserve(n_vertices);
    for (size_t i = 0; i < n_vertices; ++i) {
        Vec3 v;
        if (!(in >> v.x >> v.y >> v.z))
            throw InputError(path + ": truncated vertex data");
        mesh.vertices.push_back(v);
    }
    mesh.faces.reserve(n_faces);
    for (size_t i = 0; i < n_faces; ++i) {
        int n, a, b, c;
        if (!(in >> n >> a >> b >> c) || n != 3)
            throw InputError(path + ": faces must be triangles");
        mesh.faces.push_back({a, b, c});
        if (face_has_material) {
            int id;
            if (!(in >> id))
                throw InputError(path + ": truncated face material");
            auto it = mat_by_id.find(id);
            if (it == mat_by_id.end())
                throw InputError(path + ": face material id " + std::to_string(id) +
                                 " has no comment mapping");
            mesh.face_material.push_back(it->second);
        }
    }
    if (!face_has_material)
        mesh.face_material.assign(mesh.faces.size(), MaterialClass::Air);
    return mesh;
}

// ------------------------------------------------------------------
// Fixture builders used by tests and docs.

// Closed axis-aligned box (12 triangles, outward normals).
inline TriMesh make_box(const Vec3& lo, const Vec3& hi, MaterialClass mat,
                        const std::string& id = "box") {
    TriMesh m;
    m.object_id = id;
    m.vertices = {
        {lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
        {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
    m.faces = {
        {0, 2, 1}, {0, 3, 2},  // bottom (z = lo)
        {4, 5, 6}, {4, 6, 7},  // top
        {0, 1, 5}, {0, 5, 4},  // y = lo
        {2, 3, 7}, {2, 7, 6},  // y = hi
        {1, 2, 6}, {1, 6, 5},  // x = hi
        {3, 0, 4}, {3, 4, 7},  // x = lo
    };
    m.set_uniform_material(mat);
    return m;
}

// Room interior: same box with faces wound so normals point inward.
inline TriMesh make_room(const Vec3& lo, const Vec3& hi, MaterialClass mat,
                         const std::string& id = "room") {
    TriMesh m = make_box(lo, hi, mat, id);
    for (auto& f : m.faces) std::swap(f[1], f[2]);
    return m;
}

}  // namespace sitert
