#pragma once

// Confidence-scored point clouds with semantic/instance sidecar labels,
// plus the per-frame material vote table.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sitert/geom.hpp"
#include "sitert/materials.hpp"

namespace sitert {

struct RawPoint {
    Vec3 position;
    double confidence = 1.0;  // C in [0,1]
    double quality = 1.0;     // Q in [0,1], defaults to 1 when absent
    int frame_id = 0;
    double reproj_error = 0.0;  // meters
};

struct PointCloud {
    std::vector<RawPoint> points;
    std::vector<std::string> semantic_label;  // empty, or one per point
    std::vector<int> instance_id;             // empty, or one per point

    bool has_labels() const { return !semantic_label.empty(); }

    void validate() const {
        if (!instance_id.empty() && semantic_label.empty())
            throw InputError("point cloud: instance ids present without semantic labels");
        if (!semantic_label.empty() && semantic_label.size() != points.size())
            throw InputError("point cloud: semantic label count mismatch");
        if (!instance_id.empty() && instance_id.size() != points.size())
            throw InputError("point cloud: instance id count mismatch");
        for (const auto& p : points) {
            if (p.confidence < 0 || p.confidence > 1 || p.quality < 0 || p.quality > 1)
                throw InputError("point cloud: confidence/quality outside [0,1]");
            if (p.reproj_error < 0)
                throw InputError("point cloud: negative reprojection error");
        }
    }
};

struct FrameVote {
    int object_id = 0;
    int frame_id = 0;
    MaterialClass predicted_material = MaterialClass::Concrete;
};

// ------------------------------------------------------------------
// Point cloud file: ASCII PLY, vertices extended with per-point attributes.
// Semantic classes are interned through "comment semantic <id> <name>" lines.

inline void write_point_cloud(const PointCloud& cloud, const std::string& path) {
    cloud.validate();
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write point cloud: " + path);
    std::map<std::string, int> sem_ids;
    for (const auto& s : cloud.semantic_label) sem_ids.emplace(s, 0);
    int next = 0;
    for (auto& [s, id] : sem_ids) id = next++;

    bool labeled = cloud.has_labels();
    out << "ply\nformat ascii 1.0\n";
    for (const auto& [s, id] : sem_ids)
        out << "comment semantic " << id << " " << s << "\n";
    out << "element vertex " << cloud.points.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "property double confidence\nproperty double quality\n";
    out << "property int frame_id\nproperty double reproj_error\n";
    if (labeled)
        out << "property int semantic_id\nproperty int instance_id\n";
    out << "end_header\n";
    out.precision(17);
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const RawPoint& p = cloud.points[i];
        out << p.position.x << " " << p.position.y << " " << p.position.z << " "
            << p.confidence << " " << p.quality << " " << p.frame_id << " " << p.reproj_error;
        if (labeled) {
            int inst = cloud.instance_id.empty() ? -1 : cloud.instance_id[i];
            out << " " << sem_ids.at(cloud.semantic_label[i]) << " " << inst;
        }
        out << "\n";
    }
}

inline PointCloud read_point_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open point cloud: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "ply")
        throw InputError(path + ": not a PLY file");

    size_t n = 0;
    std::vector<std::string> props;
    std::map<int, std::string> sem_by_id;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "end_header") break;
        if (tok == "comment") {
            std::string what;
            ls >> what;
            if (what == "semantic") {
                int id;
                std::string name;
                if (ls >> id >> name) sem_by_id[id] = name;
            }
        } else if (tok == "element") {
            std::string name;
            ls >> name >> n;
            if (name != "vertex")
                throw InputError(path + ": unexpected element '" + name + "'");
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            props.push_back(name);
        }
    }

    auto has = [&](const std::string& p) {
        return std::find(props.begin(), props.end(), p) != props.end();
    };
    bool labeled = has("semantic_id");
    PointCloud cloud;
    cloud.points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw InputError(path + ": truncated point data");
        std::istringstream ls(line);
        RawPoint p;
        std::map<std::string, double> vals;
        for (const auto& name : props) {
            double v;
            if (!(ls >> v))
                throw InputError(path + ": bad point record at row " + std::to_string(i));
            vals[name] = v;
        }
        p.position = {vals["x"], vals["y"], vals["z"]};
        if (has("confidence")) p.confidence = vals["confidence"];
        if (has("quality")) p.quality = vals["quality"];
        if (has("frame_id")) p.frame_id = static_cast<int>(vals["frame_id"]);
        if (has("reproj_error")) p.reproj_error = vals["reproj_error"];
        cloud.points.push_back(p);
        if (labeled) {
            int sid = static_cast<int>(vals["semantic_id"]);
            auto it = sem_by_id.find(sid);
            if (it == sem_by_id.end())
                throw InputError(path + ": semantic id " + std::to_string(sid) + " unmapped");
            cloud.semantic_label.push_back(it->second);
            cloud.instance_id.push_back(static_cast<int>(vals["instance_id"]));
        }
    }
    cloud.validate();
    return cloud;
}

// Vote file: CSV rows object_id,frame_id,material (header optional).
inline std::vector<FrameVote> read_votes(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open vote file: " + path);
    std::vector<FrameVote> votes;
    std::set<std::pair<int, int>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
            throw InputError(path + ":" + std::to_string(lineno) + ": expected 3 CSV columns");
        if (lineno == 1 && a == "object_id") continue;  // header row
        FrameVote v;
        try {
            v.object_id = std::stoi(a);
            v.frame_id = std::stoi(b);
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": bad integer field");
        }
        // trim whitespace off the material token
        c.erase(0, c.find_first_not_of(" \t\r"));
        c.erase(c.find_last_not_of(" \t\r") + 1);
        auto mat = parse_material_class(c);
        if (!mat)
            throw InputError(path + ":" + std::to_string(lineno) + ": unknown material '" + c + "'");
        v.predicted_material = *mat;
        if (!seen.insert({v.object_id, v.frame_id}).second)
            throw InputError(path + ":" + std::to_string(lineno) + ": duplicate (object, frame) vote");
        votes.push_back(v);
    }
    return votes;
}

inline void write_votes(const std::vector<FrameVote>& votes, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write vote file: " + path);
    out << "object_id,frame_id,material\n";
    for (const auto& v : votes)
        out << v.object_id << "," << v.frame_id << "," << to_string(v.predicted_material) << "\n";
}

}  // namespace sitert
