#pragma once

// RT scene: material-labeled triangle meshes, spatial index, and the
// XML container format (a documented subset of Mitsuba-style scene XML).

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "sitert/bvh.hpp"
#include "sitert/geom.hpp"
#include "sitert/mesh.hpp"

namespace sitert {

class Scene {
public:
    struct Face {
        FaceRef ref;
        Vec3 v0, v1, v2;
        Vec3 normal;  // unit, from stored winding
        MaterialClass material;
    };

    explicit Scene(std::vector<TriMesh> meshes = {}) : meshes_(std::move(meshes)) {
        finalize();
    }

    const std::vector<TriMesh>& meshes() const { return meshes_; }
    const std::vector<Face>& faces() const { return faces_; }
    const Aabb& bounds() const { return bounds_; }

    const Face& face(const FaceRef& r) const { return faces_[face_index(r)]; }

    int face_index(const FaceRef& r) const {
        return mesh_face_offset_[r.mesh] + r.face;
    }

    // Nearest intersection with t in (t_min, t_max].
    std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir, double t_min,
                                 double t_max) const {
        double t_hit;
        auto idx = bvh_.closest(origin, dir, t_min, t_max,
                                [&](int i, double& t) {
                                    const Face& f = faces_[i];
                                    return detail::ray_triangle(origin, dir, f.v0, f.v1, f.v2, t);
                                },
                                t_hit);
        if (!idx) return std::nullopt;
        return make_hit(*idx, origin, dir, t_hit);
    }

    // Exhaustive scan; the oracle the index must agree with.
    std::optional<Hit> intersect_brute(const Vec3& origin, const Vec3& dir, double t_min,
                                       double t_max) const {
        std::optional<int> best;
        double best_t = t_max;
        for (size_t i = 0; i < faces_.size(); ++i) {
            double t;
            if (detail::ray_triangle(origin, dir, faces_[i].v0, faces_[i].v1, faces_[i].v2, t) &&
                t > t_min && t <= best_t) {
                best_t = t;
                best = static_cast<int>(i);
            }
        }
        if (!best) return std::nullopt;
        return make_hit(*best, origin, dir, best_t);
    }

    std::vector<ManifoldReport> manifold_reports() const {
        std::vector<ManifoldReport> reps;
        reps.reserve(meshes_.size());
        for (const auto& m : meshes_) reps.push_back(validate_manifold(m));
        return reps;
    }

    bool all_watertight() const {
        for (const auto& r : manifold_reports())
            if (!r.is_watertight) return false;
        return true;
    }

private:
    void finalize() {
        faces_.clear();
        mesh_face_offset_.clear();
        bounds_ = Aabb{};
        for (size_t mi = 0; mi < meshes_.size(); ++mi) {
            const TriMesh& m = meshes_[mi];
            m.validate_basic();
            mesh_face_offset_.push_back(static_cast<int>(faces_.size()));
            for (size_t fi = 0; fi < m.faces.size(); ++fi) {
                Face f;
                f.ref = {static_cast<int>(mi), static_cast<int>(fi)};
                f.v0 = m.vertices[m.faces[fi][0]];
                f.v1 = m.vertices[m.faces[fi][1]];
                f.v2 = m.vertices[m.faces[fi][2]];
                f.normal = normalized(cross(f.v1 - f.v0, f.v2 - f.v0));
                f.material = m.face_material[fi];
                faces_.push_back(f);
                bounds_.expand(f.v0);
                bounds_.expand(f.v1);
                bounds_.expand(f.v2);
            }
        }
        bvh_.build(static_cast<int>(faces_.size()), [&](int i) {
            return std::array<Vec3, 3>{faces_[i].v0, faces_[i].v1, faces_[i].v2};
        });
    }

    Hit make_hit(int face_idx, const Vec3& origin, const Vec3& dir, double t) const {
        const Face& f = faces_[face_idx];
        Hit h;
        h.ref = f.ref;
        h.t = t;
        h.point = origin + dir * t;
        h.normal = f.normal;
        h.material = f.material;
        return h;
    }

    std::vector<TriMesh> meshes_;
    std::vector<Face> faces_;
    std::vector<int> mesh_face_offset_;
    Bvh bvh_;
    Aabb bounds_;
};

// ------------------------------------------------------------------
// Scene XML.  Supported shapes:
//   <shape type="ply" id="..."><string name="filename" value="mesh.ply"/>
//                              [<string name="material" value="concrete"/>]</shape>
//   <shape type="trimesh" id="..."><string name="material" value="glass"/>
//                                  <vertices>x y z ...</vertices>
//                                  <faces>a b c ...</faces></shape>
// A shape-level material applies to every face; a ply shape without one must
// carry per-face material indices in the mesh file.

namespace detail {

inline std::string shape_prop(const boost::property_tree::ptree& shape, const std::string& name) {
    for (const auto& [key, child] : shape) {
        if (key != "string") continue;
        if (child.get<std::string>("<xmlattr>.name", "") == name)
            return child.get<std::string>("<xmlattr>.value", "");
    }
    return {};
}

}  // namespace detail

inline Scene load_scene(const std::string& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_xml(path, tree);
    } catch (const pt::xml_parser_error& e) {
        throw InputError("scene XML parse error: " + std::string(e.what()));
    }
    auto scene_node = tree.get_child_optional("scene");
    if (!scene_node)
        throw InputError(path + ": missing <scene> root element");

    std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::vector<TriMesh> meshes;
    for (const auto& [key, shape] : *scene_node) {
        if (key != "shape") continue;
        std::string type = shape.get<std::string>("<xmlattr>.type", "");
        std::string id = shape.get<std::string>("<xmlattr>.id",
                                                "shape" + std::to_string(meshes.size()));
        std::string mat_name = detail::shape_prop(shape, "material");
        std::optional<MaterialClass> mat;
        if (!mat_name.empty()) {
            mat = parse_material_class(mat_name);
            if (!mat)
                throw InputError(path + ": shape '" + id + "' has unknown material '" +
                                 mat_name + "'");
        }

        TriMesh mesh;
        if (type == "ply") {
            std::string filename = detail::shape_prop(shape, "filename");
            if (filename.empty())
                throw InputError(path + ": ply shape '" + id + "' lacks a filename");
            std::filesystem::path mesh_path = base / filename;
            if (!std::filesystem::exists(mesh_path))
                throw InputError(path + ": shape '" + id + "' references missing mesh file " +
                                 mesh_path.string());
            mesh = read_ply(mesh_path.string());
        } else if (type == "trimesh") {
            std::istringstream vs(shape.get<std::string>("vertices", ""));
            Vec3 v;
            while (vs >> v.x >> v.y >> v.z) mesh.vertices.push_back(v);
            std::istringstream fs(shape.get<std::string>("faces", ""));
            int a, b, c;
            while (fs >> a >> b >> c) mesh.faces.push_back({a, b, c});
            if (mesh.vertices.empty() || mesh.faces.empty())
                throw InputError(path + ": trimesh shape '" + id + "' has no geometry");
            if (!mat)
                throw InputError(path + ": trimesh shape '" + id + "' needs a material");
        } else {
            throw InputError(path + ": shape '" + id + "' has unsupported type '" + type + "'");
        }
        mesh.object_id = id;
        if (mat)
            mesh.set_uniform_material(*mat);
        else if (mesh.face_material.size() != mesh.faces.size())
            throw InputError(path + ": shape '" + id + "' has no material binding");
        meshes.push_back(std::move(mesh));
    }
    return Scene(std::move(meshes));
}

// Writes scene.xml plus one <id>.ply per mesh next to it.
inline void save_scene(const Scene& scene, const std::string& path) {
    namespace pt = boost::property_tree;
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    pt::ptree root;
    pt::ptree& sc = root.add_child("scene", pt::ptree{});
    sc.put("<xmlattr>.version", "0.1");
    for (const auto& mesh : scene.meshes()) {
        std::string filename = mesh.object_id + ".ply";
        write_ply(mesh, (base / filename).string());
        pt::ptree shape;
        shape.put("<xmlattr>.type", "ply");
        shape.put("<xmlattr>.id", mesh.object_id);
        pt::ptree file_prop;
        file_prop.put("<xmlattr>.name", "filename");
        file_prop.put("<xmlattr>.value", filename);
        shape.add_child("string", file_prop);
        bool uniform = true;
        for (MaterialClass m : mesh.face_material)
            if (m != mesh.face_material.front()) { uniform = false; break; }
        if (uniform && !mesh.face_material.empty()) {
            pt::ptree mat_prop;
            mat_prop.put("<xmlattr>.name", "material");
            mat_prop.put("<xmlattr>.value", to_string(mesh.face_material.front()));
            shape.add_child("string", mat_prop);
        }
        sc.add_child("shape", shape);
    }
    try {
        pt::write_xml(path, root, std::locale(),
                      pt::xml_writer_settings<std::string>(' ', 2));
    } catch (const pt::xml_parser_error& e) {
        throw InputError("cannot write scene XML: " + std::string(e.what()));
    }
}

}  // namespace sitert
