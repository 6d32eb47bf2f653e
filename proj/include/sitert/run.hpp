#pragma once

// End-to-end orchestrator: pipeline build -> scene check -> per-link trace
// -> PDP synthesis -> validation, with a manifest tying inputs to outputs.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sitert/io.hpp"
#include "sitert/recon.hpp"
#include "sitert/scene.hpp"
#include "sitert/tracer.hpp"
#include "sitert/validation.hpp"

namespace sitert {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunInputs {
    std::string cloud_path;
    std::string votes_path;
    std::string meshes_dir;       // optional: pre-meshed non-planar objects
    std::string links_path;       // CSV of TX-RX pairs
    std::string meas_dir;         // optional: measured PDP CSVs
    std::string sim_config_path;  // optional TOML, Table-style defaults otherwise
    std::string match_config_path;
    std::string materials_path;  // optional material table override
    std::string out_dir;
};

struct RunManifest {
    std::map<std::string, std::string> input_fingerprints;
    std::map<std::string, double> stage_ms;
    std::vector<std::string> outputs;
    Json config_snapshot;
};

namespace detail {

template <typename F>
auto run_stage(const std::string& name, std::map<std::string, double>& timing, F&& fn) {
    auto start = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            timing[name] =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
        } else {
            auto result = fn();
            timing[name] =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
            return result;
        }
    } catch (const InputError& e) {
        throw InputError("stage '" + name + "': " + e.what());
    } catch (const PhysicsError& e) {
        throw PhysicsError("stage '" + name + "': " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error("stage '" + name + "': " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write " + path);
    out << content;
}

}  // namespace detail

inline RunManifest full_run(const RunInputs& in) {
    namespace fs = std::filesystem;
    if (in.out_dir.empty())
        throw InputError("run: output directory required");
    fs::create_directories(in.out_dir);
    fs::create_directories(fs::path(in.out_dir) / "scene");
    fs::create_directories(fs::path(in.out_dir) / "paths");
    fs::create_directories(fs::path(in.out_dir) / "sim_pdps");

    RunManifest manifest;
    for (const std::string& p :
         {in.cloud_path, in.votes_path, in.links_path, in.sim_config_path, in.match_config_path,
          in.materials_path})
        if (!p.empty()) manifest.input_fingerprints[p] = file_fingerprint(p);

    SimConfig sim_defaults;
    if (!in.materials_path.empty())
        sim_defaults.materials = MaterialTable::load(in.materials_path);
    if (!in.sim_config_path.empty())
        sim_defaults = sim_config_from_toml(FlatToml::parse_file(in.sim_config_path), sim_defaults);
    MatchParams match_params;
    if (!in.match_config_path.empty())
        match_params = match_params_from_toml(FlatToml::parse_file(in.match_config_path));
    manifest.config_snapshot = {
        {"freq_hz", sim_defaults.freq_hz},
        {"n_rays", sim_defaults.n_rays},
        {"max_reflections", sim_defaults.max_reflections},
        {"tx_power_dbm", sim_defaults.tx_power_dbm},
        {"dynamic_range_db", sim_defaults.dynamic_range_db},
        {"match",
         {{"delay_scale_ns", match_params.delay_scale_s * 1e9},
          {"power_scale_db", match_params.power_scale_db},
          {"gate_delay_ns", match_params.gate_delay_s * 1e9},
          {"gate_power_db", match_params.gate_power_db}}},
        {"version", kToolVersion}};

    // ---- pipeline build
    BuildResult build = detail::run_stage("pipeline", manifest.stage_ms, [&] {
        PointCloud cloud = read_point_cloud(in.cloud_path);
        std::vector<FrameVote> votes = read_votes(in.votes_path);
        std::vector<TriMesh> supplied;
        if (!in.meshes_dir.empty()) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(in.meshes_dir))
                if (e.path().extension() == ".ply") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                TriMesh m = read_ply(f.string());
                m.object_id = f.stem().string();
                supplied.push_back(std::move(m));
            }
        }
        ReconConfig config;
        config.materials = sim_defaults.materials;
        return build_rt_model(cloud, votes, supplied, config);
    });

    std::string scene_xml = (fs::path(in.out_dir) / "scene" / "scene.xml").string();
    detail::run_stage("scene_export", manifest.stage_ms, [&] {
        save_scene(build.scene, scene_xml);
        Json rep;
        rep["retention_ratio"] = build.report.filter.retention_ratio;
        rep["removed_reproj"] = build.report.filter.removed_reproj;
        rep["removed_small_clusters"] = build.report.filter.removed_small_clusters;
        rep["planes_before_merge"] = build.report.planes_before_merge;
        rep["planes_after_merge"] = build.report.planes_after_merge;
        rep["tied_objects"] = build.report.tied_objects;
        rep["object_material"] = build.report.object_material;
        for (const auto& [id, mr] : build.report.manifold)
            rep["manifold"][id] = manifold_to_json(mr);
        detail::write_text((fs::path(in.out_dir) / "pipeline_report.json").string(),
                           rep.dump(2) + "\n");
    });
    // outputs are recorded relative to out_dir so manifests from identical
    // inputs are comparable across run directories
    manifest.outputs.push_back("scene/scene.xml");
    manifest.outputs.push_back("pipeline_report.json");

    // ---- scene check
    detail::run_stage("scene_check", manifest.stage_ms, [&] {
        Scene reloaded = load_scene(scene_xml);
        if (!sim_defaults.allow_open_meshes && !reloaded.all_watertight())
            throw PhysicsError("exported scene is not watertight");
    });

    // ---- trace per link
    std::vector<LinkSpec> links = read_links_csv(in.links_path);
    if (links.empty())
        throw InputError("run: links file defines no TX-RX pairs");
    std::vector<LinkPdp> sim_pdps;
    detail::run_stage("trace", manifest.stage_ms, [&] {
        for (const auto& link : links) {
            SimConfig cfg = sim_defaults;
            cfg.tx_pos = link.tx;
            cfg.rx_pos = link.rx;
            TraceResult traced = trace(build.scene, cfg);
            std::string paths_file =
                (fs::path(in.out_dir) / "paths" / (link.link_id + ".json")).string();
            detail::write_text(paths_file, paths_to_json(traced, cfg).dump(2) + "\n");
            manifest.outputs.push_back("paths/" + link.link_id + ".json");

            LinkPdp lp;
            lp.link_id = link.link_id;
            lp.freq_hz = cfg.freq_hz;
            lp.los = link.los;
            lp.pdp = synthesize_pdp(traced.paths, cfg);
            std::string pdp_file =
                (fs::path(in.out_dir) / "sim_pdps" / (link.link_id + ".csv")).string();
            write_pdp_csv(lp, pdp_file);
            manifest.outputs.push_back("sim_pdps/" + link.link_id + ".csv");
            sim_pdps.push_back(std::move(lp));
        }
    });

    // ---- validation (optional: only when measured PDPs are supplied)
    if (!in.meas_dir.empty()) {
        detail::run_stage("validate", manifest.stage_ms, [&] {
            std::vector<LinkPdp> meas;
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(in.meas_dir))
                if (e.path().extension() == ".csv") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) meas.push_back(read_pdp_csv(f.string()));
            MatchReport report =
                compare_runs(sim_pdps, meas, match_params, sim_defaults.dynamic_range_db);
            detail::write_text((fs::path(in.out_dir) / "report.json").string(),
                               match_report_to_json(report).dump(2) + "\n");
        });
        manifest.outputs.push_back("report.json");
    }

    // ---- manifest
    {
        Json j;
        j["version"] = kToolVersion;
        j["inputs"] = manifest.input_fingerprints;
        j["config"] = manifest.config_snapshot;
        j["outputs"] = manifest.outputs;
        j["timing_ms"] = manifest.stage_ms;
        detail::write_text((fs::path(in.out_dir) / "manifest.json").string(), j.dump(2) + "\n");
    }
    return manifest;
}

}  // namespace sitert
