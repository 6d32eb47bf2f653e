#pragma once

// Reconstruction pipeline: outlier filtering, confidence-weighted fusion,
// plane fitting/merging, vertex projection, frame-vote material labeling,
// and assembly of the RT scene.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sitert/geom.hpp"
#include "sitert/materials.hpp"
#include "sitert/mesh.hpp"
#include "sitert/pointcloud.hpp"
#include "sitert/scene.hpp"

namespace sitert {

// w = min{1, k/|r|}; w(0) = 1.
inline double huber_weight(double residual, double k = 1.345) {
    if (k <= 0.0)
        throw InputError("huber_weight: threshold must be positive");
    double r = std::abs(residual);
    return r <= k ? 1.0 : k / r;
}

// ------------------------------------------------------------------
// Outlier filtering

struct FilterResult {
    PointCloud cloud;
    size_t input_points = 0;
    size_t removed_reproj = 0;
    size_t removed_small_clusters = 0;
    double retention_ratio = 0.0;
    bool empty = false;  // everything was filtered away
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

struct CellKey {
    int64_t x, y, z;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
    size_t operator()(const CellKey& k) const {
        uint64_t h = 1469598103934665603ull;
        for (int64_t v : {k.x, k.y, k.z}) {
            h ^= static_cast<uint64_t>(v);
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Connected components under Euclidean distance <= radius (grid-accelerated).
inline std::vector<int> euclidean_components(const std::vector<Vec3>& pts, double radius) {
    UnionFind uf(pts.size());
    std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
    auto key_of = [&](const Vec3& p) {
        return CellKey{static_cast<int64_t>(std::floor(p.x / radius)),
                       static_cast<int64_t>(std::floor(p.y / radius)),
                       static_cast<int64_t>(std::floor(p.z / radius))};
    };
    for (size_t i = 0; i < pts.size(); ++i) grid[key_of(pts[i])].push_back(static_cast<int>(i));
    double r2 = radius * radius;
    for (size_t i = 0; i < pts.size(); ++i) {
        CellKey k = key_of(pts[i]);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
                    if (it == grid.end()) continue;
                    for (int j : it->second) {
                        if (j <= static_cast<int>(i)) continue;
                        if (uf.find(static_cast<int>(i)) == uf.find(j)) continue;
                        if (norm2(pts[i] - pts[j]) <= r2) uf.unite(static_cast<int>(i), j);
                    }
                }
    }
    std::vector<int> comp(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) comp[i] = uf.find(static_cast<int>(i));
    return comp;
}

}  // namespace detail

// Reprojection gate (strictly greater than max_reproj is rejected), then
// removal of Euclidean-connected clusters with fewer than min_cluster points.
inline FilterResult filter_outliers(const PointCloud& cloud, double max_reproj = 0.1,
                                    int min_cluster = 100, double cluster_radius = 0.1) {
    if (max_reproj <= 0.0 || min_cluster < 1 || cluster_radius <= 0.0)
        throw InputError("filter_outliers: invalid parameters");
    cloud.validate();
    FilterResult res;
    res.input_points = cloud.points.size();

    std::vector<int> keep;
    keep.reserve(cloud.points.size());
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        if (cloud.points[i].reproj_error > max_reproj)
            res.removed_reproj++;
        else
            keep.push_back(static_cast<int>(i));
    }

    std::vector<Vec3> pts;
    pts.reserve(keep.size());
    for (int i : keep) pts.push_back(cloud.points[i].position);
    std::vector<int> comp = detail::euclidean_components(pts, cluster_radius);
    std::unordered_map<int, int> comp_size;
    for (int c : comp) comp_size[c]++;

    bool labeled = cloud.has_labels();
    for (size_t k = 0; k < keep.size(); ++k) {
        if (comp_size[comp[k]] < min_cluster) {
            res.removed_small_clusters++;
            continue;
        }
        int i = keep[k];
        res.cloud.points.push_back(cloud.points[i]);
        if (labeled) {
            res.cloud.semantic_label.push_back(cloud.semantic_label[i]);
            if (!cloud.instance_id.empty()) res.cloud.instance_id.push_back(cloud.instance_id[i]);
        }
    }
    res.retention_ratio =
        res.input_points ? static_cast<double>(res.cloud.points.size()) / res.input_points : 0.0;
    res.empty = res.cloud.points.empty();
    return res;
}

// ------------------------------------------------------------------
// Fusion and plane fitting

struct Observation {
    Vec3 position;
    double confidence = 1.0;
    double quality = 1.0;
};

// Confidence-weighted average with w_k = C_k * Q_k.
inline Vec3 fuse_observations(const std::vector<Observation>& obs) {
    if (obs.empty())
        throw InputError("fuse_observations: no observations");
    Vec3 sum;
    double wsum = 0.0;
    for (const auto& o : obs) {
        double w = o.confidence * o.quality;
        if (w < 0.0)
            throw InputError("fuse_observations: negative weight");
        sum += o.position * w;
        wsum += w;
    }
    if (wsum <= 0.0)
        throw InputError("fuse_observations: all weights zero");
    return sum / wsum;
}

struct PlanePrimitive {
    Vec3 normal;        // unit
    double offset = 0;  // n.p + offset = 0
    std::vector<int> inlier_ids;
    double area = 0.0;  // m^2

    double distance(const Vec3& p) const { return std::abs(dot(normal, p) + offset); }
};

namespace detail {

// Smallest eigenpair of a symmetric 3x3 matrix via cyclic Jacobi sweeps.
inline void smallest_eigenvector(double m[3][3], Vec3& evec) {
    double a[3][3];
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = m[i][j];
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (a[i][i] < a[best][best]) best = i;
    evec = {v[0][best], v[1][best], v[2][best]};
}

}  // namespace detail

// Weighted least-squares plane: normal is the smallest eigenvector of the
// weighted covariance about the weighted centroid.  Sign is canonicalized so
// the largest-magnitude normal component is positive.
inline PlanePrimitive fit_plane(const std::vector<std::pair<Vec3, double>>& weighted_points) {
    if (weighted_points.size() < 3)
        throw InputError("fit_plane: need at least 3 points");
    Vec3 centroid;
    double wsum = 0.0;
    for (const auto& [p, w] : weighted_points) {
        centroid += p * w;
        wsum += w;
    }
    if (wsum <= 0.0)
        throw InputError("fit_plane: total weight must be positive");
    centroid = centroid / wsum;

    double cov[3][3] = {};
    for (const auto& [p, w] : weighted_points) {
        Vec3 d = p - centroid;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cov[i][j] += w * d[i] * d[j];
    }
    Vec3 n;
    detail::smallest_eigenvector(cov, n);
    double nn = norm(n);
    if (nn < 1e-12)
        throw InputError("fit_plane: degenerate point set");
    n = n / nn;
    // Collinear input leaves the normal undetermined: check the spread of
    // points off the dominant direction.
    {
        Vec3 dom{1, 1, 1};  // power iteration on cov
        for (int it = 0; it < 30; ++it) {
            Vec3 next{cov[0][0] * dom.x + cov[0][1] * dom.y + cov[0][2] * dom.z,
                      cov[1][0] * dom.x + cov[1][1] * dom.y + cov[1][2] * dom.z,
                      cov[2][0] * dom.x + cov[2][1] * dom.y + cov[2][2] * dom.z};
            double nx = norm(next);
            if (nx < 1e-300) break;
            dom = next / nx;
        }
        double max_perp = 0.0;
        for (const auto& [p, w] : weighted_points) {
            Vec3 d = p - centroid;
            Vec3 perp = d - dom * dot(d, dom);
            max_perp = std::max(max_perp, norm(perp));
        }
        if (max_perp < 1e-12)
            throw InputError("fit_plane: points are collinear");
    }

    int big = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(n[i]) > std::abs(n[big])) big = i;
    if (n[big] < 0.0) n = -n;

    PlanePrimitive prim;
    prim.normal = n;
    prim.offset = -dot(n, centroid);
    return prim;
}

// ------------------------------------------------------------------
// Plane merging

// Pairwise merge relation: normal angle within max_normal_angle_deg
// (orientation-insensitive) and mutual centroid projection distance within
// max_proj_dist.  Groups are the transitive closure; each group is re-fitted
// over the union with per-point weights equal to the member primitive's area.
inline std::vector<PlanePrimitive> merge_planes(const std::vector<PlanePrimitive>& prims,
                                                const std::vector<Vec3>& positions,
                                                double max_proj_dist = 0.1,
                                                double max_normal_angle_deg = 10.0) {
    if (prims.empty()) return {};
    const double cos_thresh = std::cos(deg2rad(max_normal_angle_deg)) - 1e-12;
    const double dist_thresh = max_proj_dist + 1e-12;

    std::vector<Vec3> centroids(prims.size());
    for (size_t i = 0; i < prims.size(); ++i) {
        Vec3 c;
        for (int id : prims[i].inlier_ids) c += positions[id];
        centroids[i] = prims[i].inlier_ids.empty() ? Vec3{} : c / double(prims[i].inlier_ids.size());
    }

    detail::UnionFind uf(prims.size());
    for (size_t i = 0; i < prims.size(); ++i)
        for (size_t j = i + 1; j < prims.size(); ++j) {
            double cosang = std::abs(dot(prims[i].normal, prims[j].normal));
            if (cosang < cos_thresh) continue;
            if (prims[i].distance(centroids[j]) > dist_thresh) continue;
            if (prims[j].distance(centroids[i]) > dist_thresh) continue;
            uf.unite(static_cast<int>(i), static_cast<int>(j));
        }

    std::map<int, std::vector<int>> groups;  // root -> member primitives
    for (size_t i = 0; i < prims.size(); ++i)
        groups[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));

    std::vector<PlanePrimitive> out;
    for (const auto& [root, members] : groups) {
        if (members.size() == 1) {
            out.push_back(prims[members[0]]);
            continue;
        }
        std::vector<std::pair<Vec3, double>> pts;
        PlanePrimitive merged;
        for (int m : members) {
            double w = prims[m].area > 0.0 ? prims[m].area : 1.0;
            for (int id : prims[m].inlier_ids) {
                pts.emplace_back(positions[id], w);
                merged.inlier_ids.push_back(id);
            }
            merged.area += prims[m].area;
        }
        PlanePrimitive fit = fit_plane(pts);
        merged.normal = fit.normal;
        merged.offset = fit.offset;
        std::sort(merged.inlier_ids.begin(), merged.inlier_ids.end());
        out.push_back(std::move(merged));
    }
    return out;
}

// Orthogonal projection of every vertex onto the plane; connectivity unchanged.
inline TriMesh project_to_plane(const TriMesh& mesh, const PlanePrimitive& plane) {
    TriMesh out = mesh;
    for (auto& v : out.vertices)
        v = v - plane.normal * (dot(plane.normal, v) + plane.offset);
    return out;
}

// ------------------------------------------------------------------
// Material voting

struct VoteOutcome {
    MaterialClass material = MaterialClass::Concrete;
    bool tied = false;
    std::map<MaterialClass, int> counts;
};

// Tie-break priority, most EM-impactful first.
inline int material_priority(MaterialClass c) {
    switch (c) {
        case MaterialClass::Concrete: return 0;
        case MaterialClass::Metal: return 1;
        case MaterialClass::Glass: return 2;
        case MaterialClass::Wood: return 3;
        case MaterialClass::Plywood: return 4;
        case MaterialClass::Air: return 5;
    }
    return 6;
}

inline VoteOutcome vote_material(const std::vector<FrameVote>& votes, int object_id) {
    VoteOutcome out;
    for (const auto& v : votes)
        if (v.object_id == object_id) out.counts[v.predicted_material]++;
    if (out.counts.empty())
        throw InputError("vote_material: no votes for object " + std::to_string(object_id));
    int best_count = -1;
    int n_at_best = 0;
    for (const auto& [mat, count] : out.counts) {
        if (count > best_count) {
            best_count = count;
            out.material = mat;
            n_at_best = 1;
        } else if (count == best_count) {
            ++n_at_best;
            if (material_priority(mat) < material_priority(out.material)) out.material = mat;
        }
    }
    out.tied = n_at_best > 1;
    return out;
}

// ------------------------------------------------------------------
// Scene assembly

struct ReconConfig {
    double max_reproj_m = 0.1;
    int min_cluster_points = 100;
    double cluster_radius_m = 0.1;
    double merge_proj_dist_m = 0.1;
    double merge_normal_angle_deg = 10.0;
    double footprint_margin_m = 0.0;  // padding around the inlier footprint
    bool huber_in_fusion = false;     // multiply Huber weight into fusion weights
    double huber_k = 1.345;
    MaterialTable materials = MaterialTable::builtin();
    std::set<std::string> planar_classes = {"wall", "floor", "ceiling"};
};

struct PipelineReport {
    FilterResult filter;
    int planes_before_merge = 0;
    int planes_after_merge = 0;
    std::vector<int> tied_objects;
    std::map<std::string, std::string> object_material;
    std::vector<std::pair<std::string, ManifoldReport>> manifold;
};

struct BuildResult {
    Scene scene;
    PipelineReport report;
};

namespace detail {

// Closed thin slab over the oriented bounding rectangle of the primitive's
// inliers: front face on the fitted plane, extruded by `thickness` along -n.
inline TriMesh plane_slab_mesh(const PlanePrimitive& prim, const std::vector<Vec3>& positions,
                               double thickness, double margin, MaterialClass mat,
                               const std::string& id) {
    const Vec3& n = prim.normal;
    // in-plane basis seeded from the least-aligned coordinate axis
    int axis = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(n[i]) < std::abs(n[axis])) axis = i;
    Vec3 seed{};
    seed[axis] = 1.0;
    Vec3 u0 = normalized(seed - n * dot(seed, n));
    Vec3 v0 = cross(n, u0);

    // principal in-plane axes from the 2D covariance of projected inliers
    double sxx = 0, sxy = 0, syy = 0;
    Vec3 centroid;
    for (int idp : prim.inlier_ids) centroid += positions[idp];
    centroid = centroid / double(prim.inlier_ids.size());
    centroid = centroid - n * (dot(n, centroid) + prim.offset);
    for (int idp : prim.inlier_ids) {
        Vec3 p = positions[idp];
        p = p - n * (dot(n, p) + prim.offset);
        double a = dot(p - centroid, u0), b = dot(p - centroid, v0);
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
    }
    double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Vec3 u = u0 * std::cos(theta) + v0 * std::sin(theta);
    Vec3 v = cross(n, u);

    double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
    for (int idp : prim.inlier_ids) {
        Vec3 p = positions[idp];
        p = p - n * (dot(n, p) + prim.offset);
        double a = dot(p - centroid, u), b = dot(p - centroid, v);
        umin = std::min(umin, a);
        umax = std::max(umax, a);
        vmin = std::min(vmin, b);
        vmax = std::max(vmax, b);
    }
    umin -= margin;
    umax += margin;
    vmin -= margin;
    vmax += margin;

    auto corner = [&](double a, double b, double depth) {
        return centroid + u * a + v * b - n * depth;
    };
    TriMesh m;
    m.object_id = id;
    double t = std::max(thickness, 1e-3);
    // layout mirrors make_box with (u, v, n) as (x, y, z)
    m.vertices = {corner(umin, vmin, t), corner(umax, vmin, t), corner(umax, vmax, t),
                  corner(umin, vmax, t), corner(umin, vmin, 0), corner(umax, vmin, 0),
                  corner(umax, vmax, 0), corner(umin, vmax, 0)};
    m.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
               {2, 3, 7}, {2, 7, 6}, {1, 2, 6}, {1, 6, 5}, {3, 0, 4}, {3, 4, 7}};
    m.set_uniform_material(mat);
    return m;
}

}  // namespace detail

// Planar instances (walls/floors/ceilings) become merged, plane-fitted slab
// meshes; other instances must arrive pre-meshed (matched by object_id =
// instance id) and watertight.  Every face gets its instance's majority-vote
// material.
inline BuildResult build_rt_model(const PointCloud& cloud, const std::vector<FrameVote>& votes,
                                  const std::vector<TriMesh>& nonplanar_meshes,
                                  const ReconConfig& config = {}) {
    cloud.validate();
    if (!cloud.has_labels() || cloud.instance_id.empty())
        throw InputError("build_rt_model: cloud must carry semantic and instance labels");

    PipelineReport report;
    report.filter = filter_outliers(cloud, config.max_reproj_m, config.min_cluster_points,
                                    config.cluster_radius_m);
    if (report.filter.empty)
        throw InputError("build_rt_model: all points removed by filtering");
    const PointCloud& clean = report.filter.cloud;

    std::vector<Vec3> positions;
    positions.reserve(clean.points.size());
    for (const auto& p : clean.points) positions.push_back(p.position);

    // group point indices by instance
    std::map<int, std::vector<int>> instances;
    std::map<int, std::string> instance_class;
    for (size_t i = 0; i < clean.points.size(); ++i) {
        int inst = clean.instance_id[i];
        instances[inst].push_back(static_cast<int>(i));
        instance_class[inst] = clean.semantic_label[i];
    }

    // check vote coverage up front
    std::set<int> voted;
    for (const auto& v : votes) voted.insert(v.object_id);
    std::vector<int> unlabeled;
    for (const auto& [inst, ids] : instances)
        if (!voted.count(inst)) unlabeled.push_back(inst);
    if (!unlabeled.empty()) {
        std::string msg = "build_rt_model: instances without material votes:";
        for (int i : unlabeled) msg += " " + std::to_string(i);
        throw InputError(msg);
    }

    // planar primitives, one per planar instance
    std::vector<PlanePrimitive> prims;
    std::vector<std::vector<int>> prim_instances;  // member instance ids
    std::vector<int> nonplanar_instances;
    for (const auto& [inst, ids] : instances) {
        if (!config.planar_classes.count(instance_class.at(inst))) {
            nonplanar_instances.push_back(inst);
            continue;
        }
        std::vector<std::pair<Vec3, double>> pts;
        pts.reserve(ids.size());
        for (int i : ids) pts.emplace_back(positions[i], 1.0);
        PlanePrimitive prim = fit_plane(pts);
        prim.inlier_ids = ids;
        // footprint-rectangle area as the merge weight
        {
            Aabb box;
            for (int i : ids) box.expand(positions[i]);
            Vec3 d = box.hi - box.lo;
            double dims[3] = {d.x, d.y, d.z};
            std::sort(dims, dims + 3);
            prim.area = std::max(dims[1] * dims[2], 1e-6);
        }
        prims.push_back(std::move(prim));
        prim_instances.push_back({inst});
    }
    report.planes_before_merge = static_cast<int>(prims.size());

    // merge, tracking which instances each merged primitive covers
    std::vector<PlanePrimitive> merged = merge_planes(prims, positions, config.merge_proj_dist_m,
                                                      config.merge_normal_angle_deg);
    report.planes_after_merge = static_cast<int>(merged.size());
    std::vector<std::vector<int>> merged_instances(merged.size());
    {
        std::map<int, int> point_to_prim;
        for (size_t pi = 0; pi < prims.size(); ++pi)
            for (int id : prims[pi].inlier_ids) point_to_prim[id] = static_cast<int>(pi);
        for (size_t mi = 0; mi < merged.size(); ++mi) {
            std::set<int> insts;
            for (int id : merged[mi].inlier_ids)
                insts.insert(prim_instances[point_to_prim.at(id)][0]);
            merged_instances[mi].assign(insts.begin(), insts.end());
        }
    }

    std::vector<TriMesh> out_meshes;
    for (size_t mi = 0; mi < merged.size(); ++mi) {
        // pool votes across all member instances
        std::vector<FrameVote> pool;
        for (const auto& v : votes)
            if (std::find(merged_instances[mi].begin(), merged_instances[mi].end(), v.object_id) !=
                merged_instances[mi].end())
                pool.push_back(v);
        // majority vote over the pooled multiset
        VoteOutcome outcome;
        for (const auto& v : pool) outcome.counts[v.predicted_material]++;
        int best = -1;
        int at_best = 0;
        for (const auto& [mat, count] : outcome.counts) {
            if (count > best) {
                best = count;
                outcome.material = mat;
                at_best = 1;
            } else if (count == best) {
                ++at_best;
                if (material_priority(mat) < material_priority(outcome.material))
                    outcome.material = mat;
            }
        }
        outcome.tied = at_best > 1;
        if (outcome.tied)
            for (int inst : merged_instances[mi]) report.tied_objects.push_back(inst);

        std::string id = "plane";
        for (int inst : merged_instances[mi]) id += "_" + std::to_string(inst);
        double thickness = config.materials.get(outcome.material).thickness_m;
        TriMesh mesh = detail::plane_slab_mesh(merged[mi], positions, thickness,
                                               config.footprint_margin_m, outcome.material, id);
        report.object_material[id] = to_string(outcome.material);
        report.manifold.emplace_back(id, validate_manifold(mesh));
        out_meshes.push_back(std::move(mesh));
    }

    // non-planar instances: supplied meshes, validated
    std::map<std::string, const TriMesh*> supplied;
    for (const auto& m : nonplanar_meshes) supplied[m.object_id] = &m;
    for (int inst : nonplanar_instances) {
        auto it = supplied.find(std::to_string(inst));
        if (it == supplied.end())
            throw InputError("build_rt_model: non-planar instance " + std::to_string(inst) +
                             " (" + instance_class.at(inst) + ") has no supplied mesh");
        ManifoldReport rep = validate_manifold(*it->second);
        report.manifold.emplace_back(it->second->object_id, rep);
        if (!rep.is_watertight)
            throw PhysicsError("build_rt_model: supplied mesh for instance " +
                               std::to_string(inst) + " is not watertight (" +
                               std::to_string(rep.boundary_edge_count) + " boundary, " +
                               std::to_string(rep.nonmanifold_edge_count) + " non-manifold edges, " +
                               std::to_string(rep.inconsistent_normal_pairs) +
                               " inconsistent pairs)");
        VoteOutcome outcome = vote_material(votes, inst);
        if (outcome.tied) report.tied_objects.push_back(inst);
        TriMesh mesh = *it->second;
        mesh.object_id = "object_" + std::to_string(inst);
        mesh.set_uniform_material(outcome.material);
        report.object_material[mesh.object_id] = to_string(outcome.material);
        out_meshes.push_back(std::move(mesh));
    }

    std::sort(report.tied_objects.begin(), report.tied_objects.end());
    return BuildResult{Scene(std::move(out_meshes)), std::move(report)};
}

}  // namespace sitert
