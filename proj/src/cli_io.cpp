#include "pcfm/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pcfm/errors.hpp"
#include "pcfm/spp_solver.hpp"

namespace pcfm::io {

using nlohmann::json;

namespace {

// Silica-like Raman gain shape, peak 0.4 1/(W km) at 13.2 THz offset for a
// 206.5 THz pump. Synthesized; the measured curve is not tabulated anywhere.
const std::vector<std::pair<double, double>>& bundled_smf_raman() {
    static const std::vector<std::pair<double, double>> t = [] {
        const std::vector<std::pair<double, double>> shape{
            {0.0, 0.0},   {1.0, 0.04},  {2.0, 0.09},  {3.0, 0.14},  {4.0, 0.19},
            {5.0, 0.25},  {6.0, 0.31},  {7.0, 0.38},  {8.0, 0.46},  {9.0, 0.55},
            {10.0, 0.65}, {11.0, 0.77}, {12.0, 0.92}, {13.2, 1.0},  {13.7, 0.97},
            {14.2, 0.85}, {14.7, 0.62}, {15.2, 0.45}, {16.0, 0.30}, {17.0, 0.25},
            {18.0, 0.22}, {19.0, 0.12}, {20.0, 0.08}, {22.0, 0.05}, {25.0, 0.02},
            {30.0, 0.0}};
        std::vector<std::pair<double, double>> out;
        for (const auto& [o, s] : shape) out.emplace_back(o, 0.4 * s);
        return out;
    }();
    return t;
}

/// Object reader that remembers which keys were consumed so the rest can be
/// rejected as unknown.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at(const std::string& key) const { return path_ + "/" + key; }

    const json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "required field is missing");
        return j_.at(key);
    }
    double number(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(at(key), "expected a finite number");
        return d;
    }
    double number(const std::string& key, double fallback) {
        return has(key) ? number(key) : (used_.insert(key), fallback);
    }
    std::size_t count(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(at(key), "expected a non-negative integer");
        return v.get<std::size_t>();
    }
    std::size_t count(const std::string& key, std::size_t fallback) {
        return has(key) ? count(key) : (used_.insert(key), fallback);
    }
    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v.get<bool>();
    }
    std::string string(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }
    /// Exactly one of the keys must be present; returns its name.
    std::string one_of(const std::vector<std::string>& keys, bool required = true) {
        std::vector<std::string> present;
        for (const auto& k : keys)
            if (has(k)) present.push_back(k);
        if (present.size() > 1)
            throw ConfigError(at(present[1]), fmt::format("ambiguous units: both '{}' and '{}' given",
                                                          present[0], present[1]));
        if (present.empty()) {
            if (!required) return {};
            throw ConfigError(at(keys.front()),
                              fmt::format("required field is missing (one of {})",
                                          fmt::join(keys, ", ")));
        }
        return present.front();
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError(at(k), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Table1D read_table(const json& v, const std::string& path, bool positive_x = false) {
    if (v.is_number()) return Table1D::constant(v.get<double>());
    if (!v.is_array() || v.empty())
        throw ConfigError(path, "expected a number or a non-empty list of [x, y] pairs");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& e = v[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError(fmt::format("{}/{}", path, i), "expected an [x, y] pair");
        if (positive_x && e[0].get<double>() < 0.0)
            throw ConfigError(fmt::format("{}/{}", path, i), "x must be >= 0");
        pts.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].first == pts[i - 1].first)
            throw ConfigError(path, "repeated abscissa in table");
    return Table1D(std::move(pts));
}

json table_json(const Table1D& t) {
    if (t.points().size() == 1) return t.points().front().second;
    json arr = json::array();
    for (const auto& [x, y] : t.points()) arr.push_back({x, y});
    return arr;
}

double read_power_mw(Obj& o) {
    const auto key = o.one_of({"power_dbm", "power_mw"});
    const double v = o.number(key);
    const double mw = key == "power_dbm" ? dbm_to_mw(v) : v;
    if (!(mw >= 0.0)) throw ConfigError(o.at(key), "power must be non-negative");
    return mw;
}

double read_bandwidth_thz(Obj& o) {
    const auto key = o.one_of({"bandwidth_thz", "symbol_rate_gbaud"});
    if (key == "bandwidth_thz") {
        if (o.has("roll_off"))
            throw ConfigError(o.at("roll_off"), "ambiguous: roll_off given with an explicit bandwidth");
        const double b = o.number(key);
        if (!(b > 0.0)) throw ConfigError(o.at(key), "bandwidth must be positive");
        return b;
    }
    const double rs = o.number(key);
    const double ro = o.number("roll_off", 0.0);
    if (!(rs > 0.0)) throw ConfigError(o.at(key), "symbol rate must be positive");
    if (ro < 0.0 || ro > 1.0) throw ConfigError(o.at("roll_off"), "roll_off must be in [0, 1]");
    return rs * 1e-3 * (1.0 + ro);
}

FiberSpec read_fiber(const json& j, const std::string& path) {
    Obj o(j, path);
    FiberSpec f;
    f.length_km = o.number("length_km");
    if (!(f.length_km > 0.0)) throw ConfigError(o.at("length_km"), "must be positive");
    const auto akey = o.one_of({"alpha_db_per_km", "alpha_per_km"});
    f.alpha_db_per_km = read_table(o.raw(akey), o.at(akey));
    if (akey == "alpha_per_km") {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [x, y] : f.alpha_db_per_km.points())
            pts.emplace_back(x, y * 10.0 / std::log(10.0));
        f.alpha_db_per_km = Table1D(std::move(pts));
    }
    for (const auto& [x, y] : f.alpha_db_per_km.points())
        if (y < 0.0) throw ConfigError(o.at(akey), "attenuation must be non-negative");
    f.beta2 = o.number("beta2_ps2_per_km");
    f.beta3 = o.number("beta3_ps3_per_km", 0.0);
    f.beta4 = o.number("beta4_ps4_per_km", 0.0);
    f.fc_thz = o.number("fc_thz");
    f.aeff_um2 = read_table(o.raw("aeff_um2"), o.at("aeff_um2"));
    for (const auto& [x, y] : f.aeff_um2.points())
        if (!(y > 0.0)) throw ConfigError(o.at("aeff_um2"), "effective area must be positive");
    f.n2 = o.number("n2_m2_per_w", 2.6e-20);
    f.raman.table.clear();
    if (o.has("raman_gain")) {
        const auto& r = o.raw("raman_gain");
        const auto rpath = o.at("raman_gain");
        if (r.is_string()) {
            const auto s = r.get<std::string>();
            if (s == "smf") {
                f.raman.ref_pump_thz = 206.5;
                f.raman.table = bundled_smf_raman();
            } else if (s != "none") {
                throw ConfigError(rpath, "expected \"smf\", \"none\" or an object");
            }
        } else {
            Obj ro(r, rpath);
            f.raman.ref_pump_thz = ro.number("ref_pump_thz");
            f.raman.table = read_table(ro.raw("gain_per_w_per_km"), ro.at("gain_per_w_per_km"), true)
                                .points();
            ro.finish();
        }
    }
    if (o.has("lumped_events")) {
        const auto& ev = o.raw("lumped_events");
        if (!ev.is_array()) throw ConfigError(o.at("lumped_events"), "expected a list");
        for (std::size_t i = 0; i < ev.size(); ++i) {
            Obj e(ev[i], fmt::format("{}/{}", o.at("lumped_events"), i));
            LumpedEvent le;
            le.position_km = e.number("position_km");
            le.loss_db = e.number("loss_db");
            const auto to = e.string("applies_to", "both");
            if (to == "signals") le.applies_to = LumpedTarget::signals;
            else if (to == "pumps") le.applies_to = LumpedTarget::pumps;
            else if (to == "both") le.applies_to = LumpedTarget::both;
            else throw ConfigError(e.at("applies_to"), "expected signals, pumps or both");
            if (!(le.position_km > 0.0 && le.position_km < f.length_km))
                throw ConfigError(e.at("position_km"), "must lie strictly inside the span");
            e.finish();
            f.lumped_events.push_back(le);
        }
    }
    o.finish();
    return f;
}

json fiber_json(const FiberSpec& f) {
    json j;
    j["length_km"] = f.length_km;
    j["alpha_db_per_km"] = table_json(f.alpha_db_per_km);
    j["beta2_ps2_per_km"] = f.beta2;
    j["beta3_ps3_per_km"] = f.beta3;
    j["beta4_ps4_per_km"] = f.beta4;
    j["fc_thz"] = f.fc_thz;
    j["aeff_um2"] = table_json(f.aeff_um2);
    j["n2_m2_per_w"] = f.n2;
    if (f.raman.table.empty()) {
        j["raman_gain"] = "none";
    } else {
        json t = json::array();
        for (const auto& [x, y] : f.raman.table) t.push_back({x, y});
        j["raman_gain"] = {{"ref_pump_thz", f.raman.ref_pump_thz}, {"gain_per_w_per_km", t}};
    }
    json ev = json::array();
    for (const auto& e : f.lumped_events) {
        const char* to = e.applies_to == LumpedTarget::signals ? "signals"
                         : e.applies_to == LumpedTarget::pumps ? "pumps"
                                                               : "both";
        ev.push_back({{"position_km", e.position_km}, {"loss_db", e.loss_db}, {"applies_to", to}});
    }
    j["lumped_events"] = ev;
    return j;
}

ChannelPlan read_plan(const json& j, const std::string& path) {
    Obj o(j, path);
    ChannelPlan plan;
    if (!o.has("channels") && !o.has("combs"))
        throw ConfigError(o.at("channels"), "a plan needs 'channels' and/or 'combs'");
    if (o.has("channels")) {
        const auto& arr = o.raw("channels");
        if (!arr.is_array()) throw ConfigError(o.at("channels"), "expected a list");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj c(arr[i], fmt::format("{}/{}", o.at("channels"), i));
            Channel ch;
            ch.center_thz = c.number("center_thz");
            ch.bandwidth_thz = read_bandwidth_thz(c);
            ch.power_mw = read_power_mw(c);
            c.finish();
            plan.channels.push_back(ch);
        }
    }
    if (o.has("combs")) {
        const auto& arr = o.raw("combs");
        if (!arr.is_array()) throw ConfigError(o.at("combs"), "expected a list");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj c(arr[i], fmt::format("{}/{}", o.at("combs"), i));
            const double first = c.number("first_center_thz");
            const double spacing = c.number("spacing_ghz") * 1e-3;
            const std::size_t n = c.count("count");
            const double bw = read_bandwidth_thz(c);
            const double p = read_power_mw(c);
            if (n == 0) throw ConfigError(c.at("count"), "must be at least 1");
            if (n > 1 && !(spacing > 0.0)) throw ConfigError(c.at("spacing_ghz"), "must be positive");
            c.finish();
            for (std::size_t k = 0; k < n; ++k)
                plan.channels.push_back({first + spacing * static_cast<double>(k), bw, p});
        }
    }
    std::stable_sort(plan.channels.begin(), plan.channels.end(),
                     [](const Channel& a, const Channel& b) { return a.center_thz < b.center_thz; });
    plan.cut_index = o.count("cut_index", 0);
    o.finish();
    try {
        plan.validate();
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    return plan;
}

json plan_json(const ChannelPlan& p) {
    json ch = json::array();
    for (const auto& c : p.channels)
        ch.push_back({{"center_thz", c.center_thz},
                      {"bandwidth_thz", c.bandwidth_thz},
                      {"power_mw", c.power_mw}});
    return {{"cut_index", p.cut_index}, {"channels", ch}};
}

const char* mode_name(EngineMode m) {
    switch (m) {
        case EngineMode::oracle: return "oracle";
        case EngineMode::compare: return "compare";
        default: return "pcfm";
    }
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
    Obj root(doc, "");
    ScenarioConfig cfg;
    cfg.name = root.string("name");
    cfg.fit_degree = root.count("fit_degree", 9);
    cfg.grid_points = root.count("grid_points", 1001);
    if (cfg.grid_points < 2) throw ConfigError(root.at("grid_points"), "must be at least 2");
    const auto mode = root.string("engine_mode", "pcfm");
    if (mode == "pcfm") cfg.mode = EngineMode::pcfm;
    else if (mode == "oracle") cfg.mode = EngineMode::oracle;
    else if (mode == "compare") cfg.mode = EngineMode::compare;
    else throw ConfigError(root.at("engine_mode"), "expected pcfm, oracle or compare");
    cfg.output_dir = root.string("output_dir", "out");

    if (root.has("fit")) {
        Obj f(root.raw("fit"), root.at("fit"));
        cfg.fit.constrain_origin = f.boolean("constrain_origin", false);
        f.finish();
    }
    if (root.has("oracle")) {
        Obj q(root.raw("oracle"), root.at("oracle"));
        cfg.oracle.include_mci = q.boolean("include_mci", true);
        cfg.oracle.lozenge_domains = q.boolean("lozenge_domains", true);
        cfg.oracle.stretch_xci = q.boolean("stretch_xci", false);
        const auto prof = q.string("profile", "sampled");
        if (prof == "sampled") cfg.oracle.use_polynomials = false;
        else if (prof == "polynomial") cfg.oracle.use_polynomials = true;
        else throw ConfigError(q.at("profile"), "expected sampled or polynomial");
        cfg.oracle.rel_tol = q.number("rel_tol", 1e-4);
        if (!(cfg.oracle.rel_tol > 0.0)) throw ConfigError(q.at("rel_tol"), "must be positive");
        cfg.oracle.max_evaluations = q.count("max_evaluations", cfg.oracle.max_evaluations);
        if (cfg.oracle.lozenge_domains && cfg.oracle.stretch_xci)
            throw ConfigError(q.at("stretch_xci"), "stretching applies to rectangle domains only");
        q.finish();
    }
    if (root.has("nli_correction")) {
        const auto& c = root.raw("nli_correction");
        if (!c.is_array()) throw ConfigError(root.at("nli_correction"), "expected a list of multipliers");
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!c[i].is_number() || !(c[i].get<double>() > 0.0))
                throw ConfigError(fmt::format("{}/{}", root.at("nli_correction"), i),
                                  "expected a positive number");
            cfg.correction.push_back(c[i].get<double>());
        }
    }
    if (root.has("sweep_degrees")) {
        const auto& d = root.raw("sweep_degrees");
        if (!d.is_array() || d.empty())
            throw ConfigError(root.at("sweep_degrees"), "expected a non-empty list");
        cfg.sweep_degrees.clear();
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!d[i].is_number_integer() || d[i].get<long long>() < 0)
                throw ConfigError(fmt::format("{}/{}", root.at("sweep_degrees"), i),
                                  "expected a non-negative integer");
            cfg.sweep_degrees.push_back(d[i].get<std::size_t>());
        }
    }

    std::map<std::string, FiberSpec> fibers;
    if (root.has("fibers")) {
        const auto& f = root.raw("fibers");
        if (!f.is_object()) throw ConfigError(root.at("fibers"), "expected an object of named fibers");
        for (const auto& [k, v] : f.items()) fibers[k] = read_fiber(v, root.at("fibers") + "/" + k);
    }
    std::map<std::string, ChannelPlan> plans;
    if (root.has("channel_plans")) {
        const auto& p = root.raw("channel_plans");
        if (!p.is_object())
            throw ConfigError(root.at("channel_plans"), "expected an object of named plans");
        for (const auto& [k, v] : p.items())
            plans[k] = read_plan(v, root.at("channel_plans") + "/" + k);
    }

    const auto& spans = root.raw("spans");
    if (!spans.is_array() || spans.empty())
        throw ConfigError(root.at("spans"), "expected a non-empty list of spans");
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const std::string sp = fmt::format("{}/{}", root.at("spans"), i);
        Obj s(spans[i], sp);
        LinkSpan span;
        const auto& fj = s.raw("fiber");
        if (fj.is_string()) {
            const auto it = fibers.find(fj.get<std::string>());
            if (it == fibers.end()) throw ConfigError(s.at("fiber"), "unknown fiber name");
            span.fiber = it->second;
        } else {
            span.fiber = read_fiber(fj, s.at("fiber"));
        }
        const auto& pj = s.raw("plan");
        if (pj.is_string()) {
            const auto it = plans.find(pj.get<std::string>());
            if (it == plans.end()) throw ConfigError(s.at("plan"), "unknown channel plan name");
            span.plan = it->second;
        } else {
            span.plan = read_plan(pj, s.at("plan"));
        }
        if (s.has("pumps")) {
            const auto& pumps = s.raw("pumps");
            if (!pumps.is_array()) throw ConfigError(s.at("pumps"), "expected a list");
            for (std::size_t k = 0; k < pumps.size(); ++k) {
                Obj p(pumps[k], fmt::format("{}/{}", s.at("pumps"), k));
                RamanPump pump;
                pump.frequency_thz = p.number("frequency_thz");
                pump.power_mw = read_power_mw(p);
                const auto dir = p.string("direction", "backward");
                if (dir == "backward") pump.direction = PumpDirection::backward;
                else if (dir == "forward") pump.direction = PumpDirection::forward;
                else throw ConfigError(p.at("direction"), "expected forward or backward");
                p.finish();
                span.pumps.push_back(pump);
            }
        }
        if (s.has("lumped_gain_db")) {
            const auto& g = s.raw("lumped_gain_db");
            if (g.is_number()) {
                span.lumped_gain_db.assign(span.plan.size(), g.get<double>());
            } else if (g.is_array() && g.size() == span.plan.size()) {
                for (const auto& v : g) {
                    if (!v.is_number()) throw ConfigError(s.at("lumped_gain_db"), "expected numbers");
                    span.lumped_gain_db.push_back(v.get<double>());
                }
            } else if (!(g.is_string() && g.get<std::string>() == "transparent")) {
                throw ConfigError(s.at("lumped_gain_db"),
                                  "expected a number, one value per channel, or \"transparent\"");
            }
        }
        const std::size_t repeat = s.count("repeat", 1);
        if (repeat == 0) throw ConfigError(s.at("repeat"), "must be at least 1");
        s.finish();
        for (std::size_t r = 0; r < repeat; ++r) cfg.spans.push_back(span);
    }
    const std::size_t nch = cfg.spans.front().plan.size();
    for (std::size_t i = 0; i < cfg.spans.size(); ++i)
        if (cfg.spans[i].plan.size() != nch)
            throw ConfigError(fmt::format("/spans/{}/plan", i),
                              "all spans must carry the same number of channels");
    if (!cfg.correction.empty() && cfg.correction.size() != nch)
        throw ConfigError("/nli_correction", "one multiplier per channel required");
    root.finish();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open scenario file");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), std::string("JSON syntax error: ") + e.what());
    }
    return parse_scenario(doc);
}

ScenarioConfig load_named_scenario(const std::string& name_or_path) {
    std::filesystem::path p(name_or_path);
    if (std::filesystem::exists(p)) return load_scenario(p);
#ifdef PCFM_SCENARIO_DIR
    const auto bundled = std::filesystem::path(PCFM_SCENARIO_DIR) / (name_or_path + ".json");
    if (std::filesystem::exists(bundled)) return load_scenario(bundled);
#endif
    throw ConfigError(name_or_path, "no such scenario file or bundled scenario");
}

json normalized_json(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    j["fit_degree"] = c.fit_degree;
    j["grid_points"] = c.grid_points;
    j["engine_mode"] = mode_name(c.mode);
    j["output_dir"] = c.output_dir;
    j["fit"] = {{"constrain_origin", c.fit.constrain_origin}};
    j["oracle"] = {{"include_mci", c.oracle.include_mci},
                   {"lozenge_domains", c.oracle.lozenge_domains},
                   {"stretch_xci", c.oracle.stretch_xci},
                   {"profile", c.oracle.use_polynomials ? "polynomial" : "sampled"},
                   {"rel_tol", c.oracle.rel_tol},
                   {"max_evaluations", c.oracle.max_evaluations}};
    if (!c.correction.empty()) j["nli_correction"] = c.correction;
    j["sweep_degrees"] = c.sweep_degrees;
    json spans = json::array();
    for (const auto& s : c.spans) {
        json sj;
        sj["fiber"] = fiber_json(s.fiber);
        sj["plan"] = plan_json(s.plan);
        json pumps = json::array();
        for (const auto& p : s.pumps)
            pumps.push_back({{"frequency_thz", p.frequency_thz},
                             {"power_mw", p.power_mw},
                             {"direction", p.direction == PumpDirection::forward ? "forward" : "backward"}});
        sj["pumps"] = pumps;
        if (s.lumped_gain_db.empty()) sj["lumped_gain_db"] = "transparent";
        else sj["lumped_gain_db"] = s.lumped_gain_db;
        spans.push_back(sj);
    }
    j["spans"] = spans;
    return j;
}

namespace {

std::string num(double v) { return fmt::format("{:.10e}", v); }

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, RunSummary& summary) : out_(path) {
        if (!out_) throw Error("cannot write " + path.string());
        summary.written.push_back(path);
    }
    void line(const std::string& s) { out_ << s << '\n'; }

private:
    std::ofstream out_;
};

void write_spp(const std::filesystem::path& dir, std::size_t span, const SppGrid& spp,
               RunSummary& summary) {
    CsvFile f(dir / fmt::format("spp_span{}.csv", span), summary);
    std::string head = "z_km";
    for (std::size_t c = 0; c < spp.channel_count(); ++c) head += fmt::format(",p_ch{}", c);
    for (std::size_t p = 0; p < spp.pump_profiles.size(); ++p) head += fmt::format(",pump{}_mw", p);
    f.line(head);
    auto row = [&](std::size_t i, bool left) {
        std::string s = num(spp.z[i]);
        for (std::size_t c = 0; c < spp.channel_count(); ++c)
            s += "," + num(left ? spp.left_value(c, i) : spp.profiles[c][i]);
        for (const auto& pp : spp.pump_profiles) s += "," + num(pp[i]);
        f.line(s);
    };
    for (std::size_t i = 0; i < spp.z.size(); ++i) {
        // events: left limit first, then the right limit at the same z
        if (std::find(spp.event_nodes.begin(), spp.event_nodes.end(), i) != spp.event_nodes.end())
            row(i, true);
        row(i, false);
    }
}

void write_polys(const std::filesystem::path& dir, std::size_t span, std::size_t degree,
                 const ChannelPlan& plan, const std::vector<PolyProfile>& polys,
                 RunSummary& summary) {
    CsvFile f(dir / fmt::format("poly_span{}_np{}.csv", span, degree), summary);
    std::string head = "channel,f_thz,degree,rms_residual";
    for (std::size_t n = 0; n <= degree; ++n) head += fmt::format(",p{}", n);
    f.line(head);
    for (std::size_t c = 0; c < polys.size(); ++c) {
        std::string s = fmt::format("{},{},{},{}", c, num(plan.channels[c].center_thz),
                                    polys[c].degree(), num(polys[c].rms_residual));
        for (double p : polys[c].coeffs) s += "," + num(p);
        f.line(s);
    }
}

std::string quoted(const std::vector<std::string>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "; " : "") + w[i];
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

void write_report(const std::filesystem::path& path, const NliReport& rep, RunSummary& summary) {
    CsvFile f(path, summary);
    f.line("channel,f_cut_thz,g_nli_mw_per_thz,p_ch_mw,p_nli_mw,gsnr_nli_db,warnings");
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        f.line(fmt::format("{},{},{},{},{},{},{}", i, num(r.f_cut_thz), num(r.g_nli), num(r.p_ch),
                           num(r.p_nli), num(r.gsnr_nli_db), quoted(r.warnings)));
    }
}

LinkOptions link_options(const ScenarioConfig& c, std::size_t degree) {
    LinkOptions o;
    o.degree = degree;
    o.grid_points = c.grid_points;
    o.fit = c.fit;
    o.correction = c.correction;
    return o;
}

void collect_warnings(const LinkResult& r, RunSummary& summary) {
    std::size_t flagged = 0;
    for (const auto& row : r.report.rows) flagged += row.warnings.empty() ? 0 : 1;
    if (flagged)
        summary.warnings.push_back(fmt::format(
            "{} channel(s) have islands below the stretching guideline |beta2_eff| B^2 > 0.01", flagged));
    if (r.report.mci_ignored)
        summary.warnings.push_back(
            fmt::format("{} MCI islands not modelled by PCFM (summed over CUTs)", r.report.mci_ignored));
}

}  // namespace

NliReport oracle_link_report(const ScenarioConfig& config, const LinkResult& pcfm) {
    const std::size_t N = config.spans.front().plan.size();
    std::vector<std::vector<double>> per_span;
    for (std::size_t s = 0; s < config.spans.size(); ++s) {
        const auto& span = config.spans[s];
        oracle::ReferenceOptions ro;
        ro.include_mci = config.oracle.include_mci;
        ro.lozenge_domains = config.oracle.lozenge_domains;
        ro.stretch_xci = config.oracle.stretch_xci;
        ro.rel_tol = config.oracle.rel_tol;
        ro.max_evaluations = config.oracle.max_evaluations;
        ro.lumped_gain_db = span.lumped_gain_db;
        if (config.oracle.use_polynomials) ro.polynomials = &pcfm.spans[s].profiles;
        per_span.push_back(
            oracle::full_gn_reference(span.plan, span.fiber, pcfm.spans[s].spp, ro).g_nli);
    }
    std::vector<double> g_end(N), p_end(N), psd(config.spans.size()), tr(config.spans.size());
    for (std::size_t ch = 0; ch < N; ++ch) {
        double through = 1.0;
        for (std::size_t s = 0; s < config.spans.size(); ++s) {
            psd[s] = per_span[s][ch];
            tr[s] = pcfm.spans[s].transfer[ch];
            through *= tr[s];
        }
        g_end[ch] = accumulate_link(psd, tr);
        p_end[ch] = config.spans.front().plan.channels[ch].power_mw * through;
    }
    return gsnr_nli(config.spans.front().plan, g_end, p_end, config.correction);
}

RunSummary run(const ScenarioConfig& config, Verb verb, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunSummary summary;
    std::vector<SppGrid> spps;
    for (const auto& s : config.spans) spps.push_back(solve_span_spp(s, config.grid_points));
    for (std::size_t s = 0; s < spps.size(); ++s) write_spp(out_dir, s, spps[s], summary);
    if (verb == Verb::spp) return summary;

    if (verb == Verb::sweep_np) {
        CsvFile sweep(out_dir / "sweep_np.csv", summary);
        sweep.line("degree,channel,f_cut_thz,gsnr_nli_db");
        for (std::size_t d : config.sweep_degrees) {
            const auto r = evaluate_link(config.spans, link_options(config, d), &spps);
            for (std::size_t s = 0; s < r.spans.size(); ++s)
                write_polys(out_dir, s, d, config.spans[s].plan, r.spans[s].profiles, summary);
            write_report(out_dir / fmt::format("nli_report_np{}.csv", d), r.report, summary);
            for (std::size_t i = 0; i < r.report.rows.size(); ++i)
                sweep.line(fmt::format("{},{},{},{}", d, i, num(r.report.rows[i].f_cut_thz),
                                       num(r.report.rows[i].gsnr_nli_db)));
        }
        return summary;
    }

    const auto r = evaluate_link(config.spans, link_options(config, config.fit_degree), &spps);
    for (std::size_t s = 0; s < r.spans.size(); ++s)
        write_polys(out_dir, s, config.fit_degree, config.spans[s].plan, r.spans[s].profiles,
                    summary);
    if (verb == Verb::fit) return summary;
    collect_warnings(r, summary);
    if (verb == Verb::nli) {
        write_report(out_dir / "nli_report.csv", r.report, summary);
        return summary;
    }
    const auto ref = oracle_link_report(config, r);
    write_report(out_dir / "oracle_report.csv", ref, summary);
    if (verb == Verb::oracle) return summary;

    write_report(out_dir / "nli_report.csv", r.report, summary);
    const auto delta = delta_gsnr(r.report, ref);
    CsvFile f(out_dir / "delta_gsnr.csv", summary);
    f.line("channel,f_cut_thz,gsnr_pcfm_db,gsnr_oracle_db,delta_gsnr_db");
    for (std::size_t i = 0; i < delta.size(); ++i)
        f.line(fmt::format("{},{},{},{},{}", i, num(r.report.rows[i].f_cut_thz),
                           num(r.report.rows[i].gsnr_nli_db), num(ref.rows[i].gsnr_nli_db),
                           num(delta[i])));
    return summary;
}

RunSummary run(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
    switch (config.mode) {
        case EngineMode::oracle: return run(config, Verb::oracle, out_dir);
        case EngineMode::compare: return run(config, Verb::compare, out_dir);
        default: return run(config, Verb::nli, out_dir);
    }
}

}  // namespace pcfm::io
