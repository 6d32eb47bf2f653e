// sitert: site-specific wireless propagation toolkit.
// Subcommands: materials eval, scene check, pipeline build, trace, validate, run.
// Exit codes: 0 success, 1 input error, 2 physics/geometry refusal, 3 internal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sitert/io.hpp"
#include "sitert/recon.hpp"
#include "sitert/run.hpp"
#include "sitert/scene.hpp"
#include "sitert/tracer.hpp"
#include "sitert/validation.hpp"

namespace {

using namespace sitert;
namespace fs = std::filesystem;

MaterialTable load_materials(const std::string& path) {
    return path.empty() ? MaterialTable::builtin() : MaterialTable::load(path);
}

void emit(const Json& j, bool json_mode, const std::string& text) {
    if (json_mode)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << text;
}

int cmd_materials_eval(const std::string& cls_name, double freq_hz, double theta_deg,
                       const std::string& table_path, bool json_mode) {
    auto cls = parse_material_class(cls_name);
    if (!cls)
        throw InputError("unknown material class '" + cls_name + "'");
    MaterialTable table = load_materials(table_path);
    ComplexPermittivity perm = table.permittivity(*cls, freq_hz);
    FresnelCoeffs fr = fresnel(perm.eta, deg2rad(theta_deg));

    Json j = {{"class", cls_name},
              {"freq_hz", freq_hz},
              {"theta_deg", theta_deg},
              {"eta", {perm.eta.real(), perm.eta.imag()}},
              {"freq_clamped", perm.freq_clamped},
              {"r_perp", {fr.r_perp.real(), fr.r_perp.imag()}},
              {"r_par", {fr.r_par.real(), fr.r_par.imag()}},
              {"R_perp", reflected_power_fraction(fr, Polarization::Perp)},
              {"R_par", reflected_power_fraction(fr, Polarization::Par)}};
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s @ %.4g Hz, theta = %.4g deg%s\n"
                  "  eta    = %.6f %+.6fj\n"
                  "  r_perp = %.6f %+.6fj   |r_perp|^2 = %.6f\n"
                  "  r_par  = %.6f %+.6fj   |r_par|^2  = %.6f\n",
                  cls_name.c_str(), freq_hz, theta_deg,
                  perm.freq_clamped ? " (frequency clamped to validated range)" : "",
                  perm.eta.real(), perm.eta.imag(), fr.r_perp.real(), fr.r_perp.imag(),
                  reflected_power_fraction(fr, Polarization::Perp), fr.r_par.real(),
                  fr.r_par.imag(), reflected_power_fraction(fr, Polarization::Par));
    emit(j, json_mode, buf);
    return 0;
}

int cmd_scene_check(const std::string& path, bool json_mode) {
    Scene scene = load_scene(path);
    auto reports = scene.manifold_reports();
    Json j = Json::array();
    bool all_ok = true;
    std::string text;
    for (size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const std::string& id = scene.meshes()[i].object_id;
        Json jr = manifold_to_json(r);
        jr["object"] = id;
        j.push_back(jr);
        all_ok = all_ok && r.is_watertight;
        text += id + ": " + (r.is_watertight ? "watertight" : "NOT watertight") +
                " (boundary=" + std::to_string(r.boundary_edge_count) +
                ", nonmanifold=" + std::to_string(r.nonmanifold_edge_count) +
                ", inconsistent=" + std::to_string(r.inconsistent_normal_pairs) + ")\n";
    }
    emit(j, json_mode, text);
    return all_ok ? 0 : 2;
}

int cmd_pipeline_build(const std::string& cloud_path, const std::string& votes_path,
                       const std::string& meshes_dir, const std::string& out_path,
                       const std::string& report_path, const std::string& table_path,
                       bool json_mode) {
    PointCloud cloud = read_point_cloud(cloud_path);
    std::vector<FrameVote> votes = read_votes(votes_path);
    std::vector<TriMesh> supplied;
    if (!meshes_dir.empty()) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(meshes_dir))
            if (e.path().extension() == ".ply") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            TriMesh m = read_ply(f.string());
            m.object_id = f.stem().string();
            supplied.push_back(std::move(m));
        }
    }
    ReconConfig config;
    config.materials = load_materials(table_path);
    BuildResult result = build_rt_model(cloud, votes, supplied, config);
    if (!out_path.empty()) {
        fs::create_directories(fs::path(out_path).parent_path());
        save_scene(result.scene, out_path);
    }

    Json rep;
    rep["retention_ratio"] = result.report.filter.retention_ratio;
    rep["removed_reproj"] = result.report.filter.removed_reproj;
    rep["removed_small_clusters"] = result.report.filter.removed_small_clusters;
    rep["planes_before_merge"] = result.report.planes_before_merge;
    rep["planes_after_merge"] = result.report.planes_after_merge;
    rep["tied_objects"] = result.report.tied_objects;
    rep["object_material"] = result.report.object_material;
    for (const auto& [id, mr] : result.report.manifold)
        rep["manifold"][id] = manifold_to_json(mr);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << rep.dump(2) << "\n";
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "built %zu meshes (%d planes merged to %d), retention %.3f\n",
                  result.scene.meshes().size(), result.report.planes_before_merge,
                  result.report.planes_after_merge, result.report.filter.retention_ratio);
    emit(rep, json_mode, buf);
    return 0;
}

int cmd_trace(const std::string& scene_path, const std::string& config_path,
              const std::string& out_path, const std::string& pdp_path,
              const std::string& table_path, bool json_mode) {
    Scene scene = load_scene(scene_path);
    SimConfig config;
    config.materials = load_materials(table_path);
    if (!config_path.empty())
        config = sim_config_from_toml(FlatToml::parse_file(config_path), config);
    TraceResult result = trace(scene, config);
    Json j = paths_to_json(result, config);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out)
            throw InputError("cannot write " + out_path);
        out << j.dump(2) << "\n";
    }
    if (!pdp_path.empty()) {
        LinkPdp lp;
        lp.link_id = "trace";
        lp.freq_hz = config.freq_hz;
        lp.pdp = synthesize_pdp(result.paths, config);
        write_pdp_csv(lp, pdp_path);
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf), "rays=%ld candidates=%ld paths=%ld\n",
                  result.stats.rays_launched, result.stats.candidates, result.stats.validated);
    emit(j, json_mode, buf);
    return 0;
}

std::vector<LinkPdp> read_pdp_dir(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<LinkPdp> out;
    for (const auto& f : files) out.push_back(read_pdp_csv(f.string()));
    return out;
}

int cmd_validate(const std::string& sim_dir, const std::string& meas_dir,
                 const std::string& params_path, const std::string& report_path,
                 double dynamic_range_db, bool json_mode) {
    MatchParams params;
    if (!params_path.empty())
        params = match_params_from_toml(FlatToml::parse_file(params_path));
    MatchReport report =
        compare_runs(read_pdp_dir(sim_dir), read_pdp_dir(meas_dir), params, dynamic_range_db);
    Json j = match_report_to_json(report);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out)
            throw InputError("cannot write " + report_path);
        out << j.dump(2) << "\n";
    }
    std::string text;
    for (const auto& [name, s] : report.scenarios) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-8s links=%zu mean=%.2f dB std=%.2f dB median=%.2f dB\n",
                      name.c_str(), s.n_links, s.mean_db, s.std_db, s.median_db);
        text += buf;
    }
    if (report.pooled) {
        char buf[160];
        if (report.pooled->exact)
            std::snprintf(buf, sizeof(buf), "pooled rmse: exact (zero error, %zu pairs)\n",
                          report.pairs.size());
        else
            std::snprintf(buf, sizeof(buf),
                          "pooled rmse: %.4g mW (%.2f dB), dB-domain %.2f dB, %zu pairs\n",
                          report.pooled->rmse_linear_mw, report.pooled->rmse_db,
                          report.pooled->rmse_db_domain, report.pairs.size());
        text += buf;
    }
    emit(j, json_mode, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"site-specific wireless propagation toolkit"};
    app.require_subcommand(1);
    bool json_mode = false;
    app.add_flag("--json", json_mode, "machine-readable JSON output");

    // materials eval
    auto* materials = app.add_subcommand("materials", "material property queries");
    materials->require_subcommand(1);
    auto* mat_eval = materials->add_subcommand("eval", "evaluate permittivity and Fresnel coefficients");
    std::string mat_class = "concrete", mat_table;
    double mat_freq = 6.75e9, mat_theta = 0.0;
    mat_eval->add_option("--class", mat_class, "material class")->required();
    mat_eval->add_option("--freq", mat_freq, "frequency in Hz")->required();
    mat_eval->add_option("--theta-deg", mat_theta, "incidence angle in degrees");
    mat_eval->add_option("--materials", mat_table, "material table file (builtin if omitted)");

    // scene check
    auto* scene_cmd = app.add_subcommand("scene", "scene file operations");
    scene_cmd->require_subcommand(1);
    auto* scene_check = scene_cmd->add_subcommand("check", "validate watertightness per object");
    std::string scene_path;
    scene_check->add_option("file", scene_path, "scene XML file")->required();

    // pipeline build
    auto* pipeline = app.add_subcommand("pipeline", "point cloud to RT scene");
    pipeline->require_subcommand(1);
    auto* pipe_build = pipeline->add_subcommand("build", "build an RT scene from a labeled cloud");
    std::string pb_cloud, pb_votes, pb_meshes, pb_out, pb_report, pb_table;
    pipe_build->add_option("--cloud", pb_cloud, "labeled point cloud (.ply)")->required();
    pipe_build->add_option("--votes", pb_votes, "per-frame material votes CSV")->required();
    pipe_build->add_option("--meshes", pb_meshes, "directory of pre-meshed non-planar objects");
    pipe_build->add_option("--out", pb_out, "output scene XML")->required();
    pipe_build->add_option("--report", pb_report, "pipeline report JSON");
    pipe_build->add_option("--materials", pb_table, "material table file");

    // trace
    auto* trace_cmd = app.add_subcommand("trace", "trace multipath between TX and RX");
    std::string tr_scene, tr_config, tr_out, tr_pdp, tr_table;
    trace_cmd->add_option("--scene", tr_scene, "scene XML")->required();
    trace_cmd->add_option("--config", tr_config, "sim config TOML (Table-style defaults otherwise)");
    trace_cmd->add_option("--out", tr_out, "paths JSON output");
    trace_cmd->add_option("--pdp", tr_pdp, "PDP CSV output");
    trace_cmd->add_option("--materials", tr_table, "material table file");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "compare simulated and measured PDPs");
    std::string va_sim, va_meas, va_params, va_report;
    double va_range = 25.0;
    validate_cmd->add_option("--sim", va_sim, "directory of simulated PDP CSVs")->required();
    validate_cmd->add_option("--meas", va_meas, "directory of measured PDP CSVs")->required();
    validate_cmd->add_option("--params", va_params, "match params TOML");
    validate_cmd->add_option("--report", va_report, "report JSON output");
    validate_cmd->add_option("--dynamic-range", va_range, "MPC extraction dynamic range (dB)");

    // run
    auto* run_cmd = app.add_subcommand("run", "full pipeline: build, check, trace, validate");
    sitert::RunInputs run_in;
    run_cmd->add_option("--cloud", run_in.cloud_path, "labeled point cloud")->required();
    run_cmd->add_option("--votes", run_in.votes_path, "vote CSV")->required();
    run_cmd->add_option("--meshes", run_in.meshes_dir, "non-planar mesh directory");
    run_cmd->add_option("--links", run_in.links_path, "TX-RX link table CSV")->required();
    run_cmd->add_option("--meas", run_in.meas_dir, "measured PDP directory");
    run_cmd->add_option("--sim-config", run_in.sim_config_path, "sim config TOML");
    run_cmd->add_option("--match-config", run_in.match_config_path, "match params TOML");
    run_cmd->add_option("--materials", run_in.materials_path, "material table file");
    run_cmd->add_option("--out", run_in.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (mat_eval->parsed())
            return cmd_materials_eval(mat_class, mat_freq, mat_theta, mat_table, json_mode);
        if (scene_check->parsed())
            return cmd_scene_check(scene_path, json_mode);
        if (pipe_build->parsed())
            return cmd_pipeline_build(pb_cloud, pb_votes, pb_meshes, pb_out, pb_report, pb_table,
                                      json_mode);
        if (trace_cmd->parsed())
            return cmd_trace(tr_scene, tr_config, tr_out, tr_pdp, tr_table, json_mode);
        if (validate_cmd->parsed())
            return cmd_validate(va_sim, va_meas, va_params, va_report, va_range, json_mode);
        if (run_cmd->parsed()) {
            sitert::full_run(run_in);
            std::cout << "run complete: " << run_in.out_dir << "/manifest.json\n";
            return 0;
        }
    } catch (const sitert::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sitert::PhysicsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
