#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "sitert/pointcloud.hpp"
#include "sitert/scene.hpp"

using namespace sitert;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int n = 0;
    fs::path p = fs::temp_directory_path() / ("sitert_scene_" + std::to_string(::getpid()) +
                                              "_" + std::to_string(n++));
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("make_box normals point outward, make_room inward") {
    TriMesh box = make_box({0, 0, 0}, {2, 3, 4}, MaterialClass::Concrete);
    Vec3 c{1, 1.5, 2};
    for (size_t f = 0; f < box.faces.size(); ++f) {
        Vec3 centroid = (box.vertices[box.faces[f][0]] + box.vertices[box.faces[f][1]] +
                         box.vertices[box.faces[f][2]]) / 3.0;
        CHECK(dot(box.face_normal((int)f), centroid - c) > 0);
    }
    TriMesh room = make_room({0, 0, 0}, {2, 3, 4}, MaterialClass::Concrete);
    for (size_t f = 0; f < room.faces.size(); ++f) {
        Vec3 centroid = (room.vertices[room.faces[f][0]] + room.vertices[room.faces[f][1]] +
                         room.vertices[room.faces[f][2]]) / 3.0;
        CHECK(dot(room.face_normal((int)f), centroid - c) < 0);
    }
}

TEST_CASE("manifold census: closed box is watertight") {
    auto rep = validate_manifold(make_box({0, 0, 0}, {1, 1, 1}, MaterialClass::Wood));
    CHECK(rep.is_watertight);
    CHECK(rep.boundary_edge_count == 0);
    CHECK(rep.nonmanifold_edge_count == 0);
    CHECK(rep.inconsistent_normal_pairs == 0);
}

TEST_CASE("manifold census: removing a face exposes boundary edges") {
    TriMesh m = make_box({0, 0, 0}, {1, 1, 1}, MaterialClass::Wood);
    m.faces.pop_back();
    m.face_material.pop_back();
    auto rep = validate_manifold(m);
    CHECK_FALSE(rep.is_watertight);
    CHECK(rep.boundary_edge_count == 3);
}

TEST_CASE("manifold census: flipped face winds inconsistently") {
    TriMesh m = make_box({0, 0, 0}, {1, 1, 1}, MaterialClass::Wood);
    std::swap(m.faces[0][1], m.faces[0][2]);
    auto rep = validate_manifold(m);
    CHECK_FALSE(rep.is_watertight);
    CHECK(rep.inconsistent_normal_pairs == 3);
}

TEST_CASE("manifold census: three faces on one edge are non-manifold") {
    TriMesh m;
    m.object_id = "fan";
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, -1, 0}};
    m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}};
    m.set_uniform_material(MaterialClass::Glass);
    auto rep = validate_manifold(m);
    CHECK_FALSE(rep.is_watertight);
    CHECK(rep.nonmanifold_edge_count == 1);
}

TEST_CASE("validate_basic rejects degenerate faces and bad indices") {
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    m.set_uniform_material(MaterialClass::Wood);
    CHECK_NOTHROW(m.validate_basic());

    TriMesh deg = m;
    deg.vertices[2] = {0.5, 0, 0};  // collinear
    CHECK_THROWS_AS(deg.validate_basic(), InputError);

    TriMesh oob = m;
    oob.faces[0][2] = 7;
    CHECK_THROWS_AS(oob.validate_basic(), InputError);

    TriMesh mismatch = m;
    mismatch.face_material.clear();
    CHECK_THROWS_AS(mismatch.validate_basic(), InputError);
}

TEST_CASE("ply round trip preserves geometry and per-face materials") {
    TriMesh m = make_box({0, 0, 0}, {1, 2, 3}, MaterialClass::Concrete, "mixed");
    m.face_material[3] = MaterialClass::Glass;
    m.face_material[7] = MaterialClass::Metal;
    fs::path dir = temp_dir();
    std::string path = (dir / "mixed.ply").string();
    write_ply(m, path);
    TriMesh r = read_ply(path);
    REQUIRE(r.vertices.size() == m.vertices.size());
    REQUIRE(r.faces.size() == m.faces.size());
    for (size_t i = 0; i < m.vertices.size(); ++i)
        CHECK(r.vertices[i] == m.vertices[i]);
    for (size_t f = 0; f < m.faces.size(); ++f) {
        CHECK(r.faces[f] == m.faces[f]);
        CHECK(r.face_material[f] == m.face_material[f]);
    }
    fs::remove_all(dir);
}

TEST_CASE("ply reader rejects garbage") {
    fs::path dir = temp_dir();
    std::string path = (dir / "bad.ply").string();
    std::ofstream(path) << "solid nope\n";
    CHECK_THROWS_AS(read_ply(path), InputError);
    CHECK_THROWS_AS(read_ply((dir / "missing.ply").string()), InputError);
    fs::remove_all(dir);
}

TEST_CASE("scene xml round trip") {
    std::vector<TriMesh> meshes;
    meshes.push_back(make_room({0, 0, 0}, {5, 4, 3}, MaterialClass::Concrete, "room"));
    meshes.push_back(make_box({1, 1, 0}, {2, 2, 1}, MaterialClass::Wood, "crate"));
    Scene scene(std::move(meshes));
    fs::path dir = temp_dir();
    std::string xml = (dir / "scene.xml").string();
    save_scene(scene, xml);
    Scene loaded = load_scene(xml);
    REQUIRE(loaded.meshes().size() == 2);
    CHECK(loaded.meshes()[0].object_id == "room");
    CHECK(loaded.meshes()[1].object_id == "crate");
    CHECK(loaded.faces().size() == scene.faces().size());
    CHECK(loaded.meshes()[1].face_material[0] == MaterialClass::Wood);
    CHECK(loaded.all_watertight());
    fs::remove_all(dir);
}

TEST_CASE("scene xml: inline trimesh shape") {
    fs::path dir = temp_dir();
    std::string xml = (dir / "scene.xml").string();
    std::ofstream(xml) << R"(<scene version="0.1">
  <shape type="trimesh" id="tri">
    <string name="material" value="glass"/>
    <vertices>0 0 0  1 0 0  0 1 0</vertices>
    <faces>0 1 2</faces>
  </shape>
</scene>)";
    Scene s = load_scene(xml);
    REQUIRE(s.faces().size() == 1);
    CHECK(s.faces()[0].material == MaterialClass::Glass);
    CHECK_FALSE(s.all_watertight());  // single open triangle
    fs::remove_all(dir);
}

TEST_CASE("scene xml error reporting") {
    fs::path dir = temp_dir();
    auto write_scene = [&](const std::string& body) {
        std::string xml = (dir / "s.xml").string();
        std::ofstream(xml) << body;
        return xml;
    };

    // missing mesh file is named in the error
    std::string xml = write_scene(R"(<scene><shape type="ply" id="a">
      <string name="filename" value="ghost.ply"/></shape></scene>)");
    CHECK_THROWS_WITH_AS(load_scene(xml), doctest::Contains("ghost.ply"), InputError);

    xml = write_scene(R"(<scene><shape type="trimesh" id="b">
      <string name="material" value="adamantium"/>
      <vertices>0 0 0 1 0 0 0 1 0</vertices><faces>0 1 2</faces></shape></scene>)");
    CHECK_THROWS_WITH_AS(load_scene(xml), doctest::Contains("adamantium"), InputError);

    xml = write_scene(R"(<scene><shape type="trimesh" id="c">
      <vertices>0 0 0 1 0 0 0 1 0</vertices><faces>0 1 2</faces></shape></scene>)");
    CHECK_THROWS_AS(load_scene(xml), InputError);  // no material binding

    xml = write_scene("<scene><shape");
    CHECK_THROWS_AS(load_scene(xml), InputError);  // malformed XML

    CHECK_THROWS_AS(load_scene((dir / "nope.xml").string()), InputError);
    fs::remove_all(dir);
}

TEST_CASE("bvh agrees with brute-force intersection on random rays") {
    std::vector<TriMesh> meshes;
    meshes.push_back(make_room({0, 0, 0}, {6, 5, 3}, MaterialClass::Concrete, "room"));
    meshes.push_back(make_box({1, 1, 0}, {2, 2, 1.5}, MaterialClass::Wood, "b1"));
    meshes.push_back(make_box({3.5, 2, 0}, {4.5, 4, 2.2}, MaterialClass::Metal, "b2"));
    Scene scene(std::move(meshes));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> px(0.1, 5.9), py(0.1, 4.9), pz(0.1, 2.9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int hits = 0;
    for (int i = 0; i < 2000; ++i) {
        Vec3 o{px(rng), py(rng), pz(rng)};
        Vec3 d{u(rng), u(rng), u(rng)};
        if (norm(d) < 1e-6) continue;
        d = normalized(d);
        auto a = scene.intersect(o, d, 1e-6, 1e9);
        auto b = scene.intersect_brute(o, d, 1e-6, 1e9);
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            ++hits;
            CHECK(a->t == doctest::Approx(b->t).epsilon(1e-12));
            CHECK(scene.face_index(a->ref) == scene.face_index(b->ref));
            CHECK(a->material == b->material);
        }
    }
    CHECK(hits > 1500);  // rays inside a closed room nearly always hit
}

TEST_CASE("intersect respects the open lower bound t_min") {
    Scene scene({make_room({0, 0, 0}, {4, 4, 4}, MaterialClass::Concrete, "room")});
    Vec3 o{2, 2, 2};
    Vec3 d{1, 0, 0};
    auto h = scene.intersect(o, d, 1e-6, 1e9);
    REQUIRE(h);
    CHECK(h->t == doctest::Approx(2.0));
    // starting exactly on the wall, the same wall is excluded by t_min
    auto h2 = scene.intersect({4, 2, 2}, d, 1e-4, 1e9);
    CHECK_FALSE(h2.has_value());
}

TEST_CASE("face_index is a stable global enumeration") {
    Scene scene({make_box({0, 0, 0}, {1, 1, 1}, MaterialClass::Wood, "a"),
                 make_box({2, 0, 0}, {3, 1, 1}, MaterialClass::Glass, "b")});
    CHECK(scene.face_index({0, 0}) == 0);
    CHECK(scene.face_index({0, 11}) == 11);
    CHECK(scene.face_index({1, 0}) == 12);
    CHECK(scene.face_index({1, 11}) == 23);
}

TEST_CASE("point cloud round trip with labels") {
    PointCloud c;
    c.points.push_back({{1, 2, 3}, 0.9, 0.8, 4, 0.01});
    c.points.push_back({{-1, 0.5, 2}, 0.5, 1.0, 7, 0.2});
    c.semantic_label = {"wall", "chair"};
    c.instance_id = {3, 12};
    fs::path dir = temp_dir();
    std::string path = (dir / "cloud.ply").string();
    write_point_cloud(c, path);
    PointCloud r = read_point_cloud(path);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].position == c.points[0].position);
    CHECK(r.points[0].confidence == doctest::Approx(0.9));
    CHECK(r.points[1].frame_id == 7);
    CHECK(r.points[1].reproj_error == doctest::Approx(0.2));
    CHECK(r.semantic_label == c.semantic_label);
    CHECK(r.instance_id == c.instance_id);
    fs::remove_all(dir);
}

TEST_CASE("point cloud validation") {
    PointCloud c;
    c.points.push_back({{0, 0, 0}, 1.5, 1.0, 0, 0.0});
    CHECK_THROWS_AS(c.validate(), InputError);
    c.points[0].confidence = 1.0;
    c.points[0].reproj_error = -1.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c.points[0].reproj_error = 0.0;
    c.instance_id = {1};
    CHECK_THROWS_AS(c.validate(), InputError);  // instance without semantic
    c.semantic_label = {"wall"};
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("vote csv round trip and duplicate rejection") {
    std::vector<FrameVote> votes = {{1, 0, MaterialClass::Concrete},
                                    {1, 1, MaterialClass::Wood},
                                    {2, 0, MaterialClass::Metal}};
    fs::path dir = temp_dir();
    std::string path = (dir / "votes.csv").string();
    write_votes(votes, path);
    auto r = read_votes(path);
    REQUIRE(r.size() == 3);
    CHECK(r[1].object_id == 1);
    CHECK(r[1].frame_id == 1);
    CHECK(r[1].predicted_material == MaterialClass::Wood);

    std::ofstream(path) << "1,0,concrete\n1,0,wood\n";
    CHECK_THROWS_AS(read_votes(path), InputError);
    std::ofstream(path) << "1,0,vibranium\n";
    CHECK_THROWS_AS(read_votes(path), InputError);
    fs::remove_all(dir);
}
