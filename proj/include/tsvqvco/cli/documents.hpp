#pragma once

// Conversions between JSON documents and library types.
//
// Units used in documents: lengths of layout geometry in "um", everything
// else in SI base units ("H", "ohm", "F", "V", "A", "S", "s", "Hz"), area in
// "mm^2", power in "mW", ratios and counts in "1".

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "tsvqvco/analysis/tank.hpp"
#include "tsvqvco/cli/json_io.hpp"
#include "tsvqvco/em/transformer.hpp"
#include "tsvqvco/sim/metrics.hpp"
#include "tsvqvco/sim/topologies.hpp"

namespace tsvqvco::cli {

// ---- transformer geometry -------------------------------------------------

struct GeometryDoc {
    em::TransformerGeometry geometry;
    Json targets;  // optional reference values, copied into the comparison
};

inline em::TransformerStyle parse_style(const std::string& s, const std::string& where) {
    if (s == "toroidal") return em::TransformerStyle::toroidal;
    if (s == "vertical_spiral") return em::TransformerStyle::vertical_spiral;
    throw InputError("field '" + where + "' must be \"toroidal\" or \"vertical_spiral\"");
}

inline GeometryDoc geometry_from_json(const Json& j) {
    const Reader r(j, "");
    GeometryDoc d;
    auto& g = d.geometry;
    g.style = parse_style(r.string("style"), "style");
    g.turns_primary = r.count("turns_primary");
    g.turns_secondary = r.count("turns_secondary");
    g.tsv_pitch = r.quantity("tsv_pitch", "um");
    g.row_spacing = r.quantity("row_spacing", "um");
    if (r.has("process")) {
        const auto p = r.child("process");
        auto& q = g.process;
        q.substrate_tier_height = p.quantity("substrate_tier_height", "um", q.substrate_tier_height);
        q.tsv_diameter = p.quantity("tsv_diameter", "um", q.tsv_diameter);
        q.liner_thickness = p.quantity("liner_thickness", "um", q.liner_thickness);
        q.min_tsv_pitch = p.quantity("min_tsv_pitch", "um", q.min_tsv_pitch);
        q.m7_thickness = p.quantity("m7_thickness", "um", q.m7_thickness);
        q.m8_thickness = p.quantity("m8_thickness", "um", q.m8_thickness);
        q.m9_thickness = p.quantity("m9_thickness", "um", q.m9_thickness);
        q.m7_width = p.quantity("m7_width", "um", q.m7_width);
        q.m8_width = p.quantity("m8_width", "um", q.m8_width);
        q.m9_width = p.quantity("m9_width", "um", q.m9_width);
        q.via_m9m8 = p.quantity("via_m9m8", "um", q.via_m9m8);
        q.via_m8m7 = p.quantity("via_m8m7", "um", q.via_m8m7);
        q.conductor_resistivity = p.quantity("conductor_resistivity", "ohm*m", q.conductor_resistivity);
        q.substrate_conductivity = p.quantity("substrate_conductivity", "S/m", q.substrate_conductivity);
    }
    if (r.has("targets")) d.targets = j.at("targets");
    return d;
}

inline Json geometry_to_json(const em::TransformerGeometry& g) {
    const auto& p = g.process;
    return Json{{"style", em::to_string(g.style)},
                {"turns_primary", quantity(g.turns_primary, "1")},
                {"turns_secondary", quantity(g.turns_secondary, "1")},
                {"tsv_pitch", quantity(g.tsv_pitch, "um")},
                {"row_spacing", quantity(g.row_spacing, "um")},
                {"process",
                 {{"substrate_tier_height", quantity(p.substrate_tier_height, "um")},
                  {"tsv_diameter", quantity(p.tsv_diameter, "um")},
                  {"liner_thickness", quantity(p.liner_thickness, "um")},
                  {"min_tsv_pitch", quantity(p.min_tsv_pitch, "um")},
                  {"m7_thickness", quantity(p.m7_thickness, "um")},
                  {"m8_thickness", quantity(p.m8_thickness, "um")},
                  {"m9_thickness", quantity(p.m9_thickness, "um")},
                  {"m7_width", quantity(p.m7_width, "um")},
                  {"m8_width", quantity(p.m8_width, "um")},
                  {"m9_width", quantity(p.m9_width, "um")},
                  {"via_m9m8", quantity(p.via_m9m8, "um")},
                  {"via_m8m7", quantity(p.via_m8m7, "um")},
                  {"conductor_resistivity", quantity(p.conductor_resistivity, "ohm*m")},
                  {"substrate_conductivity", quantity(p.substrate_conductivity, "S/m")}}}};
}

// ---- transformer model ----------------------------------------------------

inline Json model_to_json(const em::TransformerModel& m) {
    return Json{{"L_p", quantity(m.L_p, "H")},
                {"L_s1", quantity(m.L_s1, "H")},
                {"L_s2", quantity(m.L_s2, "H")},
                {"R_pdc", quantity(m.R_pdc, "ohm")},
                {"R_pac", quantity(m.R_pac, "ohm")},
                {"R_sdc", quantity(m.R_sdc, "ohm")},
                {"R_sac", quantity(m.R_sac, "ohm")},
                {"k_ps1", quantity(m.k_ps1, "1")},
                {"k_ps2", quantity(m.k_ps2, "1")},
                {"k_ss", quantity(m.k_ss, "1")},
                {"area", quantity(m.area, "mm^2")},
                {"eval_frequency", quantity(m.eval_frequency, "Hz")}};
}

/// Accepts a bare model or any document carrying it under "model".
inline em::TransformerModel model_from_json(const Json& j) {
    const Reader top(j, "");
    const Reader r = top.has("model") ? top.child("model") : top;
    em::TransformerModel m;
    m.L_p = r.quantity("L_p", "H");
    if (r.has("L_s")) {
        m.L_s1 = m.L_s2 = r.quantity("L_s", "H");
    } else {
        m.L_s1 = r.quantity("L_s1", "H");
        m.L_s2 = r.quantity("L_s2", "H");
    }
    m.R_pdc = r.quantity("R_pdc", "ohm");
    m.R_pac = r.quantity("R_pac", "ohm");
    m.R_sdc = r.quantity("R_sdc", "ohm");
    m.R_sac = r.quantity("R_sac", "ohm");
    if (r.has("k_ps")) {
        m.k_ps1 = m.k_ps2 = r.quantity("k_ps", "1");
    } else {
        m.k_ps1 = r.quantity("k_ps1", "1");
        m.k_ps2 = r.quantity("k_ps2", "1");
    }
    m.k_ss = r.quantity("k_ss", "1");
    m.area = r.quantity("area", "mm^2");
    m.eval_frequency = r.quantity("eval_frequency", "Hz", em::default_eval_frequency);
    try {
        em::validate(m);
    } catch (const Error& e) {
        throw InputError(std::string("transformer model: ") + e.what());
    }
    return m;
}

// ---- design spec ----------------------------------------------------------

struct SpecDoc {
    analysis::DesignSpec spec;
    devices::VaractorModel varactor;
    double array_unit_c = 1e-12;  // F
};

inline SpecDoc spec_from_json(const Json& j) {
    const Reader r(j, "");
    SpecDoc d;
    auto& s = d.spec;
    s.supply_voltage = r.quantity("supply_voltage", "V");
    s.center_frequency = r.quantity("center_frequency", "Hz");
    s.output_swing = r.quantity("output_swing", "V");
    s.c_var_min = r.quantity("c_var_min", "F");
    s.c_var_max = r.quantity("c_var_max", "F");
    s.v_c_min = r.quantity("v_c_min", "V");
    s.v_c_max = r.quantity("v_c_max", "V");
    s.c_parasitic = r.quantity("c_parasitic", "F", s.c_parasitic);
    s.gm_margin = r.quantity("gm_margin", "1", s.gm_margin);
    s.max_gm_amplification = r.quantity("max_gm_amplification", "1", s.max_gm_amplification);
    d.array_unit_c = r.quantity("array_unit_c", "F", d.array_unit_c);
    d.varactor = {s.c_var_min, s.c_var_max, s.v_c_min, s.v_c_max, r.quantity("varactor_shape", "1", 2.0)};
    try {
        analysis::validate(s);
        devices::validate(d.varactor);
    } catch (const Error& e) {
        throw InputError(std::string("design spec: ") + e.what());
    }
    if (!(d.array_unit_c > 0.0)) throw InputError("field 'array_unit_c' must be positive");
    return d;
}

// ---- simulation settings --------------------------------------------------

struct SimDoc {
    sim::Topology topology = sim::Topology::tc_qvco;
    sim::SimConfig config;
    std::uint64_t seed = 1;
    double initial_noise = 0.0;     // V, uniform noise on every output node at t = 0
    double vdd = 0.7;               // V
    double v_c = 0.4;               // V
    double c_parasitic = 0.65e-12;  // F
    std::string array_code = "00";
    double gm_scale = 1.0;          // multiplies K of the core transistors
    bool same_dots = false;
    bool buffers = true;
    std::optional<em::TransformerModel> transformer;
    int csv_stride = 1;
    std::vector<std::string> codes{"00"};  // v_c sweeps run once per code
    analysis::TankParams linear_tank{500.0, 4.6e-12, 3e-9, 0.5, 4.0};
};

inline SimDoc sim_from_json(const Json& j, const std::string& base_dir = ".") {
    const Reader r(j, "");
    SimDoc d;
    if (r.has("topology")) {
        try {
            d.topology = sim::parse_topology(r.string("topology"));
        } catch (const NetlistError& e) {
            throw InputError(std::string("field 'topology': ") + e.what());
        }
    }
    d.seed = static_cast<std::uint64_t>(r.count("seed", 1));
    if (r.has("transient")) {
        const auto t = r.child("transient");
        auto& c = d.config;
        c.step = t.quantity("step", "s", 2e-12);
        c.stop = t.quantity("stop", "s", 200e-9);
        c.perturbation = t.quantity("perturbation", "V", c.perturbation);
        d.initial_noise = t.quantity("initial_noise", "V", 0.0);
        c.max_newton = t.count("max_newton", c.max_newton);
        const auto m = t.string("method", "trapezoidal");
        if (m == "trapezoidal") c.method = sim::Integration::trapezoidal;
        else if (m == "backward_euler") c.method = sim::Integration::backward_euler;
        else throw InputError("field 'transient.method' must be \"trapezoidal\" or \"backward_euler\"");
    } else {
        d.config.step = 2e-12;
        d.config.stop = 200e-9;
    }
    if (r.has("circuit")) {
        const auto c = r.child("circuit");
        d.vdd = c.quantity("vdd", "V", d.vdd);
        d.v_c = c.quantity("v_c", "V", d.v_c);
        d.c_parasitic = c.quantity("c_parasitic", "F", d.c_parasitic);
        d.array_code = c.string("array_code", d.array_code);
        d.gm_scale = c.quantity("gm_scale", "1", d.gm_scale);
        d.same_dots = c.flag("same_dots", d.same_dots);
        d.buffers = c.flag("buffers", d.buffers);
        if (c.has("transformer")) {
            std::filesystem::path p = c.string("transformer");
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            d.transformer = model_from_json(read_json_file(p.string()));
        }
        if (!(d.gm_scale > 0.0)) throw InputError("field 'circuit.gm_scale' must be positive");
    }
    if (r.has("linear_tank")) {
        const auto t = r.child("linear_tank");
        auto& k = d.linear_tank;
        k.r = t.quantity("r", "ohm");
        k.c = t.quantity("c", "F");
        k.l_p = t.quantity("l_p", "H");
        k.k = t.quantity("k", "1");
        k.n = t.quantity("n", "1");
    }
    if (r.has("sweep")) {
        const auto s = r.child("sweep");
        if (s.has("codes")) {
            const Json& codes = s.raw().at("codes");
            if (!codes.is_array() || codes.empty()) throw InputError("field 'sweep.codes' must be a non-empty array");
            d.codes.clear();
            for (const auto& c : codes) {
                if (!c.is_string()) throw InputError("field 'sweep.codes' must hold strings like \"01\"");
                d.codes.push_back(c.get<std::string>());
            }
        }
    }
    if (r.has("output")) d.csv_stride = r.child("output").count("csv_stride", 1);
    if (d.csv_stride < 1) throw InputError("field 'output.csv_stride' must be at least 1");
    try {
        sim::validate(d.config);
        for (const auto& c : d.codes) devices::parse_array_code(c);
        devices::parse_array_code(d.array_code);
    } catch (const Error& e) {
        throw InputError(e.what());
    }
    return d;
}

inline sim::Netlist build_netlist(const SimDoc& d) {
    sim::CommonParams common;
    common.vdd = d.vdd;
    common.v_c = d.v_c;
    common.c_parasitic = d.c_parasitic;
    const auto xfmr = d.transformer.value_or(sim::default_transformer());
    switch (d.topology) {
        case sim::Topology::lc_vco: {
            sim::LcVcoParams p;
            p.common = common;
            p.nmos.k *= d.gm_scale;
            return sim::build_lc_vco(p);
        }
        case sim::Topology::tf_vco: {
            sim::TfVcoParams p;
            p.common = common;
            p.transformer = xfmr;
            p.nmos.k *= d.gm_scale;
            return sim::build_tf_vco(p);
        }
        case sim::Topology::cr_vco: {
            sim::CrVcoParams p;
            p.common = common;
            p.nmos.k *= d.gm_scale;
            p.pmos.k *= d.gm_scale;
            return sim::build_cr_vco(p);
        }
        case sim::Topology::tc_qvco: {
            sim::TcQvcoParams p;
            p.common = common;
            p.transformer = xfmr;
            p.array_code = d.array_code;
            p.nmos.k *= d.gm_scale;
            p.pmos.k *= d.gm_scale;
            p.same_dots = d.same_dots;
            p.buffers = d.buffers;
            return sim::build_tc_qvco(p);
        }
    }
    throw InputError("unknown topology");
}

// ---- metrics --------------------------------------------------------------

inline constexpr double swing_target = 0.35;  // V peak-to-peak

inline Json metrics_to_json(const sim::SimMetrics& m, sim::Topology topology) {
    Json outputs = Json::array();
    // quiet runs carry no per-output numbers
    for (std::size_t i = 0; i < m.amplitudes.size(); ++i)
        outputs.push_back({{"node", m.outputs[i]},
                           {"swing", quantity(m.amplitudes[i], "V")},
                           {"swing_error_vs_target", quantity(m.amplitudes[i] / swing_target - 1.0, "1")},
                           {"phase_lag", quantity(m.phases[i], "deg")}});
    Json j{{"topology", sim::to_string(topology)},
           {"oscillating", m.oscillating},
           {"steady", m.steady},
           {"cycles", quantity(m.cycles, "1")},
           {"f_osc", quantity(m.f_osc, "Hz")},
           {"swing_target", quantity(swing_target, "V")},
           {"outputs", outputs},
           {"delta_v_out", quantity(m.delta_v_out, "V")},
           {"startup_time", quantity(m.startup_time, "s")},
           {"power_core", quantity(m.power, "mW")},
           {"power_buffer", quantity(m.buffer_power, "mW")}};
    if (topology == sim::Topology::tc_qvco) j["quadrature"] = sim::quadrature_locked(m) ? "PASS" : "FAIL";
    return j;
}

}  // namespace tsvqvco::cli
