#pragma once

// File bindings: sim/match config TOML, link tables, PDP CSV files, and
// JSON output for paths and validation reports.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sitert/config.hpp"
#include "sitert/tracer.hpp"
#include "sitert/validation.hpp"

namespace sitert {

using Json = nlohmann::json;

inline SimConfig sim_config_from_toml(const FlatToml& toml,
                                      const SimConfig& defaults = SimConfig{}) {
    SimConfig c = defaults;
    c.freq_hz = toml.get_double("freq_hz", c.freq_hz);
    auto tx = toml.get_double_array("tx_pos", {c.tx_pos.x, c.tx_pos.y, c.tx_pos.z});
    auto rx = toml.get_double_array("rx_pos", {c.rx_pos.x, c.rx_pos.y, c.rx_pos.z});
    if (tx.size() != 3 || rx.size() != 3)
        throw InputError("sim config: tx_pos/rx_pos must have 3 components");
    c.tx_pos = {tx[0], tx[1], tx[2]};
    c.rx_pos = {rx[0], rx[1], rx[2]};
    c.tx_power_dbm = toml.get_double("tx_power_dbm", c.tx_power_dbm);
    c.n_rays = toml.get_int("n_rays", c.n_rays);
    c.max_reflections = static_cast<int>(toml.get_int("max_reflections", c.max_reflections));
    c.max_penetrations = static_cast<int>(toml.get_int("max_penetrations", c.max_penetrations));
    c.dynamic_range_db = toml.get_double("dynamic_range_db", c.dynamic_range_db);
    c.allow_open_meshes = toml.get_bool("allow_open_meshes", c.allow_open_meshes);
    c.bin_delays = toml.get_bool("bin_delays", c.bin_delays);
    c.bin_width_s = toml.get_double("bin_width_s", c.bin_width_s);
    c.threads = static_cast<int>(toml.get_int("threads", c.threads));
    if (toml.has("mechanisms"))
        c.set_mechanisms(toml.get_string_array("mechanisms", {}));
    c.validate();
    return c;
}

inline MatchParams match_params_from_toml(const FlatToml& toml) {
    MatchParams p;
    p.delay_scale_s = toml.get_double("delay_scale_ns", p.delay_scale_s * 1e9) * 1e-9;
    p.power_scale_db = toml.get_double("power_scale_db", p.power_scale_db);
    p.gate_delay_s = toml.get_double("gate_delay_ns", p.gate_delay_s * 1e9) * 1e-9;
    p.gate_power_db = toml.get_double("gate_power_db", p.gate_power_db);
    return p;
}

// ------------------------------------------------------------------
// PDP CSV: one file per link.  Header line declares link metadata, then
// delay_ns,power_dbm rows.

inline void write_pdp_csv(const LinkPdp& link, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write PDP file: " + path);
    out << "# link_id=" << link.link_id << " freq_hz=" << link.freq_hz
        << " scenario=" << (link.los ? "LOS" : "NLOS") << "\n";
    out << "delay_ns,power_dbm\n";
    out.precision(12);
    for (const auto& e : link.pdp.entries)
        out << e.delay_s * 1e9 << "," << mw_to_dbm(e.power_mw) << "\n";
}

inline LinkPdp read_pdp_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open PDP file: " + path);
    LinkPdp link;
    link.link_id = std::filesystem::path(path).stem().string();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string tok;
            while (ls >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "link_id") link.link_id = val;
                else if (key == "freq_hz") link.freq_hz = std::stod(val);
                else if (key == "scenario") link.los = (val == "LOS");
            }
            continue;
        }
        if (line.rfind("delay_ns", 0) == 0) continue;  // column header
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b))
            throw InputError(path + ": expected delay_ns,power_dbm rows");
        try {
            link.pdp.entries.push_back({std::stod(a) * 1e-9, dbm_to_mw(std::stod(b))});
        } catch (const std::exception&) {
            throw InputError(path + ": bad numeric row: " + line);
        }
    }
    return link;
}

// ------------------------------------------------------------------
// JSON output

inline Json paths_to_json(const TraceResult& result, const SimConfig& config) {
    Json j;
    j["config"] = {{"freq_hz", config.freq_hz},
                   {"tx_pos", {config.tx_pos.x, config.tx_pos.y, config.tx_pos.z}},
                   {"rx_pos", {config.rx_pos.x, config.rx_pos.y, config.rx_pos.z}},
                   {"tx_power_dbm", config.tx_power_dbm},
                   {"n_rays", config.n_rays},
                   {"max_reflections", config.max_reflections}};
    j["stats"] = {{"rays_launched", result.stats.rays_launched},
                  {"candidates", result.stats.candidates},
                  {"validated", result.stats.validated}};
    j["paths"] = Json::array();
    for (const auto& p : result.paths) {
        Json jp;
        jp["delay_s"] = p.delay_s;
        jp["power_dbm"] = p.power_dbm;
        jp["amplitude_re"] = p.amplitude.real();
        jp["amplitude_im"] = p.amplitude.imag();
        jp["interactions"] = Json::array();
        for (const auto& it : p.interactions) {
            jp["interactions"].push_back(
                {{"kind", it.kind == Interaction::Kind::Reflect ? "reflect" : "penetrate"},
                 {"mesh", it.face.mesh},
                 {"face", it.face.face},
                 {"point", {it.point.x, it.point.y, it.point.z}},
                 {"incidence_deg", rad2deg(it.incidence_rad)}});
        }
        j["paths"].push_back(jp);
    }
    return j;
}

inline Json manifold_to_json(const ManifoldReport& r) {
    return {{"is_watertight", r.is_watertight},
            {"boundary_edges", r.boundary_edge_count},
            {"nonmanifold_edges", r.nonmanifold_edge_count},
            {"inconsistent_normal_pairs", r.inconsistent_normal_pairs}};
}

inline Json rmse_to_json(const RmseResult& r) {
    Json j;
    j["rmse_linear_mw"] = r.rmse_linear_mw;
    j["rmse_db"] = r.exact ? Json("exact") : Json(r.rmse_db);
    j["rmse_db_domain"] = r.rmse_db_domain;
    j["exact"] = r.exact;
    return j;
}

inline Json match_report_to_json(const MatchReport& report) {
    Json j;
    j["links"] = Json::array();
    for (const auto& l : report.links) {
        Json jl = {{"link_id", l.link_id},
                   {"scenario", l.los ? "LOS" : "NLOS"},
                   {"sim_mpcs", l.n_sim_mpcs},
                   {"meas_mpcs", l.n_meas_mpcs},
                   {"matched", l.n_matched}};
        if (l.rmse) jl["rmse"] = rmse_to_json(*l.rmse);
        j["links"].push_back(jl);
    }
    j["matched_pairs"] = report.pairs.size();
    j["unmatched_sim"] = report.unmatched_sim;
    j["unmatched_meas"] = report.unmatched_meas;
    if (report.pooled) j["pooled"] = rmse_to_json(*report.pooled);
    for (const auto& [name, s] : report.scenarios) {
        j["scenarios"][name] = {{"links", s.n_links},
                                {"mean_db", s.mean_db},
                                {"std_db", s.std_db},
                                {"median_db", s.median_db}};
    }
    return j;
}

// ------------------------------------------------------------------
// Link table for multi-link runs: CSV with
// link_id,tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,scenario

struct LinkSpec {
    std::string link_id;
    Vec3 tx, rx;
    bool los = true;
};

inline std::vector<LinkSpec> read_links_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open links file: " + path);
    std::vector<LinkSpec> links;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("link_id", 0) == 0) continue;
        std::istringstream ls(line);
        std::vector<std::string> cols;
        std::string c;
        while (std::getline(ls, c, ',')) cols.push_back(c);
        if (cols.size() != 8)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected 8 CSV columns");
        LinkSpec l;
        l.link_id = cols[0];
        try {
            l.tx = {std::stod(cols[1]), std::stod(cols[2]), std::stod(cols[3])};
            l.rx = {std::stod(cols[4]), std::stod(cols[5]), std::stod(cols[6])};
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": bad coordinate");
        }
        std::string scen = cols[7];
        scen.erase(scen.find_last_not_of(" \t\r") + 1);
        l.los = (scen != "NLOS");
        links.push_back(l);
    }
    return links;
}

// FNV-1a content fingerprint for run manifests.
inline std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open file for fingerprinting: " + path);
    uint64_t h = 1469598103934665603ull;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace sitert
