#include "tsvqvco/cli/commands.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "tsvqvco/literature_data.hpp"
#include "tsvqvco/sim/io.hpp"

namespace tsvqvco::cli {

int guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return exit_ok;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const Error& e) {
        // InputError and the library's validation errors
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}

static std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

static Json null_quantity(const std::string& unit) { return Json{{"value", nullptr}, {"unit", unit}}; }

static std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

Json extract_report(const GeometryDoc& doc, std::optional<double> freq) {
    const double f = freq.value_or(em::default_eval_frequency);
    const auto m = em::build_transformer(doc.geometry, f);
    Json notes = Json::array();
    if (!freq) notes.push_back("f_eval not given; using the default 2.5 GHz");

    const std::map<std::string, std::pair<double, std::string>> computed{
        {"L_p", {m.L_p, "H"}},       {"L_s", {m.L_s(), "H"}},     {"R_pdc", {m.R_pdc, "ohm"}},
        {"R_pac", {m.R_pac, "ohm"}}, {"R_sdc", {m.R_sdc, "ohm"}}, {"R_sac", {m.R_sac, "ohm"}},
        {"k_ps", {m.k_ps(), "1"}},   {"k_ss", {m.k_ss, "1"}},     {"area", {m.area, "mm^2"}}};
    Json comparison = Json::array();
    if (!doc.targets.is_null()) {
        const Reader t(doc.targets, "targets");
        for (const char* key : {"L_p", "L_s", "R_pdc", "R_pac", "R_sdc", "R_sac", "k_ps", "k_ss", "area"}) {
            if (!t.has(key)) continue;
            const auto& [value, unit] = computed.at(key);
            const double target = t.quantity(key, unit);
            const double rel = value / target - 1.0;
            comparison.push_back({{"metric", key},
                                  {"computed", quantity(value, unit)},
                                  {"target", quantity(target, unit)},
                                  {"relative_error", quantity(rel, "1")},
                                  {"within_30_percent", std::abs(rel) <= 0.3}});
        }
    }
    const double w = 2.0 * constants::pi * f;
    return Json{{"command", "extract"},
                {"geometry", geometry_to_json(doc.geometry)},
                {"eval_frequency", quantity(f, "Hz")},
                {"model", model_to_json(m)},
                {"L_s", quantity(m.L_s(), "H")},
                {"k_ps", quantity(m.k_ps(), "1")},
                {"q_primary", quantity(w * m.L_p / m.R_pac, "1")},
                {"q_secondary", quantity(w * m.L_s() / m.R_sac, "1")},
                {"comparison", comparison},
                {"notes", notes}};
}

std::string extract_table(const Json& report) {
    std::ostringstream os;
    const auto& m = report["model"];
    auto row = [&](const std::string& name, double v, const std::string& unit) {
        os << "  " << name << std::string(10 - name.size(), ' ') << fmt("%12.5g", v) << "  " << unit << '\n';
    };
    os << "TSV transformer, " << report["geometry"]["style"].get<std::string>() << ", f_eval "
       << fmt("%.4g", report["eval_frequency"]["value"].get<double>()) << " Hz\n";
    for (const char* k : {"L_p", "L_s1", "L_s2", "R_pdc", "R_pac", "R_sdc", "R_sac", "k_ps1", "k_ps2", "k_ss", "area"})
        row(k, m[k]["value"].get<double>(), m[k]["unit"].get<std::string>());
    if (!report["comparison"].empty()) {
        os << "\n  metric      computed        target   rel.err\n";
        for (const auto& c : report["comparison"]) {
            const auto name = c["metric"].get<std::string>();
            os << "  " << name << std::string(8 - name.size(), ' ') << fmt("%12.4g", c["computed"]["value"].get<double>())
               << fmt("%14.4g", c["target"]["value"].get<double>())
               << fmt("%+9.1f%%", 100.0 * c["relative_error"]["value"].get<double>())
               << (c["within_30_percent"].get<bool>() ? "" : "  (outside 30%)") << '\n';
        }
    }
    for (const auto& n : report["notes"]) os << "note: " << n.get<std::string>() << '\n';
    return os.str();
}

void run_extract(const ExtractArgs& a, std::ostream& out) {
    if (a.freq && !(*a.freq >= 0.0)) throw InputError("--freq must be non-negative");
    const auto report = extract_report(geometry_from_json(read_json_file(a.geometry)), a.freq);
    const auto table = extract_table(report);
    if (!a.out_dir.empty()) {
        const auto dir = prepare_dir(a.out_dir);
        write_text((dir / "extract.json").string(), dump(report));
        write_text((dir / "extract.txt").string(), table);
    }
    out << (a.table ? table : dump(report));
}

double design_phase_noise(const analysis::TankParams& t, double swing) {
    const double p_sig_mw = swing * swing / (2.0 * t.r) * 1e3;
    return analysis::phase_noise_leeson(t, p_sig_mw, noise_offset, 0.0);
}

Json design_report(const SpecDoc& s, const em::TransformerModel& x) {
    const auto d = analysis::design_tank(s.spec, x);
    const auto& t = d.tank;
    const double a2 = t.kn() * t.kn();
    const bool defined = a2 > 2.0;
    Json violations = Json::array();
    for (const auto& v : d.violations) violations.push_back({{"constraint", v.constraint}, {"detail", v.detail}});

    Json j{{"command", "design"}, {"verdict", d.feasible() ? "feasible" : "infeasible"}, {"violations", violations}};
    j["tank"] = {{"R", quantity(t.r, "ohm")},       {"C", quantity(t.c, "F")},   {"L_p", quantity(t.l_p, "H")},
                 {"k", quantity(t.k, "1")},         {"N", quantity(t.n, "1")},   {"kN", quantity(t.kn(), "1")},
                 {"L_eff", quantity(t.l_eff(), "H")}};
    j["center_frequency_target"] = quantity(s.spec.center_frequency, "Hz");
    j["f0"] = quantity(d.omega0 / (2.0 * constants::pi), "Hz");
    j["f0_vs_target"] = quantity(d.omega0 / (2.0 * constants::pi) / s.spec.center_frequency - 1.0, "1");
    j["q_inductor"] = quantity(d.q_inductor, "1");
    j["kn_boundary"] = {{"kN", quantity(t.kn(), "1")},
                        {"sqrt2", quantity(std::sqrt(2.0), "1")},
                        {"gm_amplification", defined ? quantity(a2 / (a2 - 2.0), "1") : null_quantity("1")},
                        {"amplification_limit", quantity(s.spec.max_gm_amplification, "1")},
                        {"near_boundary", !defined || a2 / (a2 - 2.0) > s.spec.max_gm_amplification}};
    if (defined) {
        j["gm_min"] = quantity(d.gm_min, "S");
        j["gm_device"] = quantity(d.gm_min * s.spec.gm_margin, "S");
        j["f_predicted"] = quantity(d.omega_osc / (2.0 * constants::pi), "Hz");
        j["f_numeric_root"] =
            quantity(analysis::solve_characteristic(t, d.gm_min) / (2.0 * constants::pi), "Hz");
    } else {
        j["gm_min"] = null_quantity("S");
        j["gm_device"] = null_quantity("S");
        j["f_predicted"] = null_quantity("Hz");
        j["f_numeric_root"] = null_quantity("Hz");
    }
    const auto tr = analysis::predict_tuning_range(t, s.varactor, s.array_unit_c, s.spec.c_parasitic);
    Json codes = Json::array();
    for (const auto& p : tr.codes)
        codes.push_back({{"code", devices::format_array_code(p.code)},
                         {"f_at_v_c_min", quantity(p.f_low_vc, "Hz")},
                         {"f_at_v_c_max", quantity(p.f_high_vc, "Hz")},
                         {"k_vco", quantity(p.k_vco, "Hz/V")}});
    j["tuning"] = {{"codes", codes},
                   {"f_min", quantity(tr.f_min, "Hz")},
                   {"f_max", quantity(tr.f_max, "Hz")},
                   {"ratio", quantity(tr.f_max / tr.f_min, "1")}};
    j["phase_noise"] = {{"offset", quantity(noise_offset, "Hz")},
                        {"signal_swing", quantity(s.spec.output_swing, "V")},
                        {"excess_noise", quantity(0.0, "dB")},
                        {"leeson", quantity(design_phase_noise(t, s.spec.output_swing), "dBc/Hz")}};
    return j;
}

void run_design(const DesignArgs& a, std::ostream& out) {
    const auto spec = spec_from_json(read_json_file(a.spec));
    const auto model = model_from_json(read_json_file(a.transformer));
    const auto report = design_report(spec, model);
    if (!a.out_dir.empty()) write_text((prepare_dir(a.out_dir) / "design.json").string(), dump(report));
    out << dump(report);
}

static std::vector<std::string> present_outputs(const sim::Waveforms& w) {
    std::vector<std::string> out;
    for (const char* n : {"V_o1", "V_o2", "V_o3", "V_o4", "V_buf1", "V_buf2", "V_buf3", "V_buf4"})
        if (w.has_node(n)) out.push_back(n);
    return out;
}

static sim::Waveforms decimate(const sim::Waveforms& w, int stride) {
    if (stride <= 1) return w;
    sim::Waveforms d;
    d.node_names = w.node_names;
    d.voltages.resize(w.voltages.size());
    for (std::size_t i = 0; i < w.time.size(); i += static_cast<std::size_t>(stride)) {
        d.time.push_back(w.time[i]);
        for (std::size_t n = 0; n < w.voltages.size(); ++n) d.voltages[n].push_back(w.voltages[n][i]);
    }
    return d;
}

SimulationResult simulate(const SimDoc& d) {
    const auto net = build_netlist(d);
    auto cfg = d.config;
    if (d.initial_noise > 0.0) {
        std::mt19937_64 rng(d.seed);
        std::uniform_real_distribution<double> u(-d.initial_noise, d.initial_noise);
        for (const char* n : {"V_o1", "V_o2", "V_o3", "V_o4"})
            if (net.has_node(n)) cfg.initial_voltages[n] = u(rng);
    }
    SimulationResult r{sim::transient(net, cfg), {}};
    r.metrics = sim::measure_metrics(r.waveforms, d.vdd);
    return r;
}

void run_simulate(const SimulateArgs& a, std::ostream& out) {
    auto doc = sim_from_json(read_json_file(a.config), std::filesystem::path(a.config).parent_path().string());
    if (!a.topology.empty()) {
        try {
            doc.topology = sim::parse_topology(a.topology);
        } catch (const NetlistError& e) {
            throw InputError(std::string("--topology: ") + e.what());
        }
    }
    const auto r = simulate(doc);
    Json report{{"command", "simulate"}, {"seed", quantity(static_cast<int>(doc.seed), "1")}};
    report["metrics"] = metrics_to_json(r.metrics, doc.topology);
    if (!a.out_dir.empty()) {
        const auto dir = prepare_dir(a.out_dir);
        write_text((dir / "metrics.json").string(), dump(report));
        std::ostringstream csv;
        sim::write_csv(csv, decimate(r.waveforms, doc.csv_stride), present_outputs(r.waveforms));
        write_text((dir / "waveforms.csv").string(), csv.str());
    }
    out << dump(report);
}

static std::vector<double> linspace(double from, double to, int steps) {
    std::vector<double> v;
    for (int i = 0; i < steps; ++i) v.push_back(from + (to - from) * i / (steps - 1));
    return v;
}

std::vector<SweepPoint> sweep_points(const SweepArgs& a, const SimDoc& d) {
    if (a.steps < 2) throw InputError("--steps must be at least 2");
    const auto values = linspace(a.from, a.to, a.steps);
    std::vector<SweepPoint> pts;
    if (a.param == "v_c") {
        for (const auto& c : d.codes)
            for (double v : values) pts.push_back({c, v});
    } else if (a.param == "array_code") {
        for (double v : values) {
            if (v != std::round(v) || v < 0 || v > 3)
                throw InputError("array_code sweep points must be integers 0..3, got " + fmt("%g", v));
            pts.push_back({devices::format_array_code(static_cast<unsigned>(v)), v});
        }
    } else if (a.param == "gm_margin") {
        for (double v : values) {
            if (!(v > 0.0)) throw InputError("gm_margin sweep points must be positive");
            pts.push_back({"", v});
        }
    } else {
        throw InputError("--param must be v_c, array_code or gm_margin, got '" + a.param + "'");
    }
    return pts;
}

static SweepRow sweep_one(const SweepArgs& a, const SimDoc& base, const SweepPoint& p) {
    SweepRow row;
    row.code = p.code;
    row.value = p.value;
    try {
        if (a.param == "gm_margin") {
            const auto& t = base.linear_tank;
            const double w = analysis::oscillation_frequency_closed(t), amp = 1e-3, i = amp / (w * t.l_eff());
            auto cfg = base.config;
            cfg.perturbation = 0.0;
            cfg.initial_voltages = {{"V_o1", amp}, {"V_o2", -amp}};
            cfg.initial_currents = {{"L3", i}, {"L4", -i}};
            const auto wf = sim::transient(sim::build_linear_qvco(t, p.value * analysis::min_transconductance(t)), cfg);
            row.slope = sim::envelope_slope(wf.time, wf.voltage("V_o1"));
            sim::MetricsOptions o;
            o.min_swing = 1e-9;
            const auto m = sim::measure_metrics(wf, 1.0, o);
            if (m.cycles >= 2) {
                const auto env = sim::cycle_envelope(wf.time, wf.voltage("V_o1"));
                row.swing = env.swing.back();
            }
            if (m.oscillating) row.f_osc = m.f_osc;
            row.status = row.slope > 0.0 ? "grows" : "decays";
        } else {
            SimDoc d = base;
            if (a.param == "v_c") d.v_c = p.value;
            d.array_code = p.code;
            const auto r = simulate(d);
            row.power = r.metrics.power;
            if (r.metrics.oscillating) {
                row.f_osc = r.metrics.f_osc;
                row.swing = r.metrics.amplitudes.empty() ? 0.0 : r.metrics.amplitudes.front();
                row.status = "ok";
            } else {
                row.status = "not oscillating";
            }
        }
    } catch (const Error& e) {
        row.status = std::string("failed: ") + e.what();
    }
    return row;
}

/// Runs every point on `jobs` threads; rows come back in point order.

static std::vector<SweepRow> run_points(const SweepArgs& a, const SimDoc& d, const std::vector<SweepPoint>& pts) {
    std::vector<SweepRow> rows(pts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < pts.size(); i = next++) rows[i] = sweep_one(a, d, pts[i]);
    };
    const int n = std::max(1, std::min<int>(a.jobs, static_cast<int>(pts.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return rows;
}

static std::string csv_cell(double v) { return std::isnan(v) ? "" : sim::format_double(v); }

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows) {
    const std::string unit = param == "v_c" ? "V" : "1";
    std::ostringstream os;
    os << "index,code," << param << '_' << unit << ",f_osc_Hz,swing_V,power_mW,envelope_slope_per_s,status\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << i << ',' << r.code << ',' << sim::format_double(r.value) << ',' << csv_cell(r.f_osc) << ','
           << csv_cell(r.swing) << ',' << csv_cell(r.power) << ',' << csv_cell(r.slope) << ',' << r.status << '\n';
    }
    return os.str();
}

Json sweep_summary(const SweepArgs& a, const std::vector<SweepRow>& rows) {
    int failures = 0;
    for (const auto& r : rows) failures += r.status.rfind("failed", 0) == 0;
    Json j{{"command", "sweep"},
           {"param", a.param},
           {"from", quantity(a.from, a.param == "v_c" ? "V" : "1")},
           {"to", quantity(a.to, a.param == "v_c" ? "V" : "1")},
           {"steps", quantity(a.steps, "1")},
           {"points", quantity(static_cast<int>(rows.size()), "1")},
           {"failures", quantity(failures, "1")}};
    if (a.param == "gm_margin") {
        double lo = std::numeric_limits<double>::quiet_NaN(), hi = lo;
        for (const auto& r : rows) {
            if (r.status == "decays" && !(r.value <= lo)) lo = r.value;
            if (r.status == "grows" && !(r.value >= hi)) hi = r.value;
        }
        j["threshold_bracket"] = {{"largest_decaying", std::isnan(lo) ? null_quantity("1") : quantity(lo, "1")},
                                  {"smallest_growing", std::isnan(hi) ? null_quantity("1") : quantity(hi, "1")}};
        return j;
    }
    std::map<std::string, std::pair<double, double>> range;
    std::map<std::string, bool> monotone;
    std::map<std::string, double> last;
    double f_min = std::numeric_limits<double>::infinity(), f_max = 0.0;
    for (const auto& r : rows) {
        if (std::isnan(r.f_osc)) continue;
        auto [it, fresh] = range.try_emplace(r.code, r.f_osc, r.f_osc);
        it->second.first = std::min(it->second.first, r.f_osc);
        it->second.second = std::max(it->second.second, r.f_osc);
        // rows of one code arrive in sweep order
        if (fresh) monotone[r.code] = true;
        else if (a.to > a.from ? r.f_osc >= last[r.code] : r.f_osc <= last[r.code]) monotone[r.code] = false;
        last[r.code] = r.f_osc;
        f_min = std::min(f_min, r.f_osc);
        f_max = std::max(f_max, r.f_osc);
    }
    Json codes = Json::array();
    for (const auto& [code, mm] : range) {
        Json c{{"code", code}, {"f_min", quantity(mm.first, "Hz")}, {"f_max", quantity(mm.second, "Hz")}};
        if (a.param == "v_c") c["frequency_falls_with_v_c"] = monotone[code];
        codes.push_back(c);
    }
    j["codes"] = codes;
    if (f_max > 0.0) {
        j["f_min"] = quantity(f_min, "Hz");
        j["f_max"] = quantity(f_max, "Hz");
        j["ratio"] = quantity(f_max / f_min, "1");
        j["reference_ratio"] = quantity(reference_tuning_ratio, "1");
        if (range.count("00"))
            j["widened_vs_code_00"] = f_min < range["00"].first && f_max >= range["00"].second;
    } else {
        j["f_min"] = null_quantity("Hz");
        j["f_max"] = null_quantity("Hz");
        j["ratio"] = null_quantity("1");
    }
    return j;
}

void run_sweep(const SweepArgs& a, std::ostream& out) {
    if (a.jobs < 1) throw InputError("--jobs must be at least 1");
    const auto doc = sim_from_json(read_json_file(a.config), std::filesystem::path(a.config).parent_path().string());
    const auto rows = run_points(a, doc, sweep_points(a, doc));
    const auto summary = sweep_summary(a, rows);
    if (!a.out_dir.empty()) {
        const auto dir = prepare_dir(a.out_dir);
        write_text((dir / "sweep.csv").string(), sweep_csv(a.param, rows));
        write_text((dir / "sweep_summary.json").string(), dump(summary));
    }
    out << dump(summary);
}

static Json literature() { return parse_json(literature_json, "literature.json"); }

/// FoM of each listed design recomputed from its own phase noise and power.

static Json fom_arithmetic_check(const Json& lit) {
    Json rows = Json::array();
    const Reader in(lit.at("fom_inputs"), "fom_inputs");
    const double carrier = in.quantity("carrier", "Hz"), offset = in.quantity("offset", "Hz");
    for (const auto& e : lit.at("designs")) {
        if (!e.value("proposed", false)) continue;
        const Reader r(e, e.at("label").get<std::string>());
        const double fom = analysis::figure_of_merit(carrier, offset, r.quantity("power", "mW"),
                                                     r.quantity("phase_noise", "dBc/Hz"));
        rows.push_back({{"design", e.at("label")},
                        {"carrier", quantity(carrier, "Hz")},
                        {"offset", quantity(offset, "Hz")},
                        {"power", e.at("power")},
                        {"phase_noise", e.at("phase_noise")},
                        {"fom_computed", quantity(fom, "dB")},
                        {"fom_listed", e.at("fom")},
                        {"difference", quantity(fom - r.quantity("fom", "dB"), "dB")}});
    }
    return rows;
}

void run_report(const std::string& dir, std::ostream& out) {
    const std::filesystem::path base(dir);
    if (!std::filesystem::is_directory(base)) throw InputError("'" + dir + "' is not a directory");
    Json sections = Json::object();
    Json missing = Json::array();
    for (const auto& [name, file] : std::vector<std::pair<std::string, std::string>>{
             {"extraction", "extract.json"}, {"design", "design.json"}, {"simulation", "metrics.json"},
             {"sweep", "sweep_summary.json"}}) {
        const auto p = base / file;
        if (std::filesystem::exists(p)) {
            sections[name] = read_json_file(p.string());
        } else {
            sections[name] = {{"missing", true}, {"expected_file", file}};
            missing.push_back(name);
        }
    }
    const auto lit = literature();
    Json fom{{"arithmetic_check", fom_arithmetic_check(lit)}};
    if (!sections["design"].contains("missing") && !sections["simulation"].contains("missing")) {
        const auto& m = sections["simulation"]["metrics"];
        const double pn = sections["design"]["phase_noise"]["leeson"]["value"].get<double>();
        const double f = m["f_osc"]["value"].get<double>(), p = m["power_core"]["value"].get<double>();
        if (f > 0.0 && p > 0.0)
            fom["computed"] = {{"carrier", quantity(f, "Hz")},
                               {"offset", quantity(noise_offset, "Hz")},
                               {"power", quantity(p, "mW")},
                               {"phase_noise", quantity(pn, "dBc/Hz")},
                               {"fom", quantity(analysis::figure_of_merit(f, noise_offset, p, pn), "dB")}};
        else
            fom["computed"] = {{"missing", true}, {"reason", "simulation did not oscillate"}};
    } else {
        fom["computed"] = {{"missing", true}, {"reason", "needs design.json and metrics.json"}};
    }
    const Json report{{"command", "report"},
                      {"computed", sections},
                      {"missing_sections", missing},
                      {"figure_of_merit", fom},
                      {"literature", {{"note", "published values, reproduced verbatim and not computed"},
                                      {"designs", lit.at("designs")}}}};
    out << dump(report);
}

}  // namespace tsvqvco::cli
