#pragma once

// Bounding-volume hierarchy over triangle faces.  Construction is
// deterministic (median split on the longest centroid axis, stable order)
// so traced results are reproducible run to run.

#include <algorithm>
#include <optional>
#include <vector>

#include "sitert/geom.hpp"
#include "sitert/mesh.hpp"

namespace sitert {

struct FaceRef {
    int mesh = 0;
    int face = 0;
};

struct Hit {
    FaceRef ref;
    double t = 0;          // distance along the ray
    Vec3 point;
    Vec3 normal;           // geometric normal as stored (not flipped)
    MaterialClass material = MaterialClass::Air;
};

namespace detail {

// Moller-Trumbore with relative barycentric epsilon.
inline bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& v0, const Vec3& v1,
                         const Vec3& v2, double& t_out, double eps_bary = 1e-7) {
    Vec3 e1 = v1 - v0, e2 = v2 - v0;
    Vec3 p = cross(d, e2);
    double det = dot(e1, p);
    if (std::abs(det) < 1e-14) return false;
    double inv = 1.0 / det;
    Vec3 s = o - v0;
    double u = dot(s, p) * inv;
    if (u < -eps_bary || u > 1.0 + eps_bary) return false;
    Vec3 q = cross(s, e1);
    double v = dot(d, q) * inv;
    if (v < -eps_bary || u + v > 1.0 + eps_bary) return false;
    double t = dot(e2, q) * inv;
    if (t <= 0.0) return false;
    t_out = t;
    return true;
}

}  // namespace detail

class Bvh {
public:
    Bvh() = default;

    // Triangles are fetched through the callback so the Bvh stays decoupled
    // from mesh storage.
    template <typename GetTri>
    void build(int n_faces, GetTri&& get_tri) {
        prims_.resize(n_faces);
        std::vector<Aabb> boxes(n_faces);
        std::vector<Vec3> centroids(n_faces);
        for (int i = 0; i < n_faces; ++i) {
            prims_[i] = i;
            auto [a, b, c] = get_tri(i);
            boxes[i].expand(a);
            boxes[i].expand(b);
            boxes[i].expand(c);
            centroids[i] = (a + b + c) / 3.0;
        }
        nodes_.clear();
        if (n_faces > 0)
            build_node(0, n_faces, boxes, centroids);
    }

    Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_[0].box; }

    // Nearest hit with t in (t_min, t_max]; Intersect does the per-face test.
    template <typename Intersect>
    std::optional<int> closest(const Vec3& o, const Vec3& d, double t_min, double t_max,
                               Intersect&& isect, double& t_hit) const {
        if (nodes_.empty()) return std::nullopt;
        Vec3 inv{1.0 / d.x, 1.0 / d.y, 1.0 / d.z};
        std::optional<int> best;
        double best_t = t_max;
        int stack[64];
        int sp = 0;
        stack[sp++] = 0;
        while (sp > 0) {
            const Node& node = nodes_[stack[--sp]];
            if (!node.box.hit(o, inv, t_min, best_t)) continue;
            if (node.count > 0) {
                for (int i = node.first; i < node.first + node.count; ++i) {
                    double t;
                    if (isect(prims_[i], t) && t > t_min && t <= best_t) {
                        best_t = t;
                        best = prims_[i];
                    }
                }
            } else {
                stack[sp++] = node.right;
                stack[sp++] = node.first;  // left child index
            }
        }
        if (best) t_hit = best_t;
        return best;
    }

private:
    struct Node {
        Aabb box;
        int first = 0;  // leaf: first prim index; inner: left child
        int count = 0;  // leaf: prim count; inner: 0
        int right = 0;
    };

    int build_node(int begin, int end, const std::vector<Aabb>& boxes,
                   const std::vector<Vec3>& centroids) {
        int idx = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        Aabb box;
        Aabb cbox;
        for (int i = begin; i < end; ++i) {
            box.expand(boxes[prims_[i]]);
            cbox.expand(centroids[prims_[i]]);
        }
        nodes_[idx].box = box;
        int count = end - begin;
        if (count <= 4) {
            nodes_[idx].first = begin;
            nodes_[idx].count = count;
            return idx;
        }
        int axis = cbox.longest_axis();
        int mid = begin + count / 2;
        std::nth_element(prims_.begin() + begin, prims_.begin() + mid, prims_.begin() + end,
                         [&](int a, int b) {
                             double ca = centroids[a][axis], cb = centroids[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        int left = build_node(begin, mid, boxes, centroids);
        int right = build_node(mid, end, boxes, centroids);
        nodes_[idx].first = left;
        nodes_[idx].count = 0;
        nodes_[idx].right = right;
        return idx;
    }

    std::vector<Node> nodes_;
    std::vector<int> prims_;
};

}  // namespace sitert
