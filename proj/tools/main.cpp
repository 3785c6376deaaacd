#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epipanel/analysis.hpp"
#include "epipanel/corr.hpp"
#include "epipanel/csv.hpp"
#include "epipanel/errors.hpp"
#include "epipanel/ingest.hpp"
#include "epipanel/models.hpp"
#include "epipanel/output.hpp"
#include "epipanel/regress.hpp"
#include "epipanel/rng.hpp"
#include "epipanel/table.hpp"
#include "epipanel/version.hpp"
#include "fetch.hpp"

namespace ep = epipanel;
namespace fs = std::filesystem;
using nlohmann::json;          // sorts keys; used for the canonical config
using nlohmann::ordered_json;  // insertion order; used for documents

namespace {

struct RunConfig {
    std::string data_dir = "data";
    std::string who_path, ears_path, oxcgrt_path, trends_dir;  // resolved from data_dir when empty
    std::string out_dir = "out";
    std::vector<std::string> models = {"1a", "1b", "1c", "1d", "2a", "2b", "2c"};
    std::uint64_t seed = 42;
    std::string window = "6m";
    std::string step = "7d";
    std::string robust = "hc1";
    std::string dependent = "documents";
    int ccf_max_lag = 25;
    std::string ccf_pair = "cases:documents";
    int sdc_window = 70;
    int sdc_max_lag = 21;
    double alpha = 0.01;
    int n_perm = 1000;
    std::string sdc_pair = "cases:documents";
    bool smooth = false;
    std::vector<std::string> countries;  // restricts ccf/sdc; empty = modelled set
    ep::ingest::ColumnMap columns;
};

json columns_to_json(const ep::ingest::ColumnMap& c) {
    return json{
        {"who",
         {{"date", c.who.date},
          {"code", c.who.code},
          {"name", c.who.name},
          {"region", c.who.region},
          {"cases", c.who.cases},
          {"deaths", c.who.deaths}}},
        {"ears",
         {{"date", c.ears.date}, {"country", c.ears.country}, {"documents", c.ears.documents}}},
        {"oxcgrt",
         {{"code", c.oxcgrt.code},
          {"date", c.oxcgrt.date},
          {"vaccinated", c.oxcgrt.vaccinated},
          {"stringency", c.oxcgrt.stringency}}},
        {"trends", {{"week", c.trends.week}, {"index", c.trends.index}}}};
}

json config_to_json(const RunConfig& c) {
    return json{{"data",
                 {{"dir", c.data_dir},
                  {"who", c.who_path},
                  {"ears", c.ears_path},
                  {"oxcgrt", c.oxcgrt_path},
                  {"trends", c.trends_dir}}},
                {"out", c.out_dir},
                {"models", c.models},
                {"seed", c.seed},
                {"window", c.window},
                {"step", c.step},
                {"robust", c.robust},
                {"dependent", c.dependent},
                {"ccf", {{"max_lag", c.ccf_max_lag}, {"pair", c.ccf_pair}}},
                {"sdc",
                 {{"window", c.sdc_window},
                  {"max_lag", c.sdc_max_lag},
                  {"alpha", c.alpha},
                  {"n_perm", c.n_perm},
                  {"pair", c.sdc_pair}}},
                {"smooth", c.smooth},
                {"countries", c.countries},
                {"columns", columns_to_json(c.columns)}};
}

template <typename T>
void maybe(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

void apply_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ep::ConfigError("config file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ep::ConfigError("bad config file " + path + ": " + e.what());
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        maybe(d, "dir", c.data_dir);
        maybe(d, "who", c.who_path);
        maybe(d, "ears", c.ears_path);
        maybe(d, "oxcgrt", c.oxcgrt_path);
        maybe(d, "trends", c.trends_dir);
    }
    maybe(j, "out", c.out_dir);
    maybe(j, "models", c.models);
    maybe(j, "seed", c.seed);
    maybe(j, "window", c.window);
    maybe(j, "step", c.step);
    maybe(j, "robust", c.robust);
    maybe(j, "dependent", c.dependent);
    if (j.contains("ccf")) {
        maybe(j.at("ccf"), "max_lag", c.ccf_max_lag);
        maybe(j.at("ccf"), "pair", c.ccf_pair);
    }
    if (j.contains("sdc")) {
        const auto& s = j.at("sdc");
        maybe(s, "window", c.sdc_window);
        maybe(s, "max_lag", c.sdc_max_lag);
        maybe(s, "alpha", c.alpha);
        maybe(s, "n_perm", c.n_perm);
        maybe(s, "pair", c.sdc_pair);
    }
    maybe(j, "smooth", c.smooth);
    maybe(j, "countries", c.countries);
    if (j.contains("columns")) {
        const auto& col = j.at("columns");
        if (col.contains("who")) {
            const auto& w = col.at("who");
            maybe(w, "date", c.columns.who.date);
            maybe(w, "code", c.columns.who.code);
            maybe(w, "name", c.columns.who.name);
            maybe(w, "region", c.columns.who.region);
            maybe(w, "cases", c.columns.who.cases);
            maybe(w, "deaths", c.columns.who.deaths);
        }
        if (col.contains("ears")) {
            const auto& e = col.at("ears");
            maybe(e, "date", c.columns.ears.date);
            maybe(e, "country", c.columns.ears.country);
            maybe(e, "documents", c.columns.ears.documents);
        }
        if (col.contains("oxcgrt")) {
            const auto& o = col.at("oxcgrt");
            maybe(o, "code", c.columns.oxcgrt.code);
            maybe(o, "date", c.columns.oxcgrt.date);
            maybe(o, "vaccinated", c.columns.oxcgrt.vaccinated);
            maybe(o, "stringency", c.columns.oxcgrt.stringency);
        }
        if (col.contains("trends")) {
            maybe(col.at("trends"), "week", c.columns.trends.week);
            maybe(col.at("trends"), "index", c.columns.trends.index);
        }
    }
}

void resolve_paths(RunConfig& c) {
    if (c.who_path.empty()) c.who_path = (fs::path(c.data_dir) / "who.csv").string();
    if (c.ears_path.empty()) c.ears_path = (fs::path(c.data_dir) / "ears.csv").string();
    if (c.oxcgrt_path.empty()) c.oxcgrt_path = (fs::path(c.data_dir) / "oxcgrt.csv").string();
    if (c.trends_dir.empty()) c.trends_dir = (fs::path(c.data_dir) / "trends").string();
}

struct Context {
    RunConfig cfg;
    std::string command;
    json effective;
    std::string config_hash;

    ep::output::Metadata meta(const std::string& range = "") const {
        ep::output::Metadata m;
        m.config_hash = config_hash;
        m.seed = cfg.seed;
        m.range = range;
        return m;
    }
    fs::path out(const std::string& file) const { return fs::path(cfg.out_dir) / file; }
};

struct Manifest {
    std::vector<std::string> outputs;
    std::vector<std::string> failures;
};

void write_manifest(const Context& ctx, const Manifest& man) {
    ordered_json doc;
    doc["epipanel"] = ep::kVersion;
    doc["command"] = ctx.command;
    doc["config_hash"] = ctx.config_hash;
    doc["config"] = ctx.effective;
    doc["outputs"] = man.outputs;
    doc["failures"] = man.failures;
    doc["status"] = man.failures.empty() ? "ok" : "partial";
    std::ofstream out(ctx.out("manifest.json"), std::ios::binary);
    out << doc.dump(2) << "\n";
}

struct LoadedSources {
    ep::ingest::SourceData src;
    bool has_ox = false;
    bool has_trends = false;
    std::string ox_error, trends_error;
};

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw ep::ConfigError(what + " file not found: " + path);
}

LoadedSources load_sources(const RunConfig& cfg, bool need_ox, bool need_trends) {
    LoadedSources loaded;
    require_file(cfg.who_path, "WHO surveillance");
    require_file(cfg.ears_path, "EARS");
    auto who = ep::ingest::parse_who_surveillance(cfg.who_path, cfg.columns.who);
    loaded.src.registry = std::move(who.registry);
    loaded.src.cases = std::move(who.cases);
    loaded.src.deaths = std::move(who.deaths);
    loaded.src.documents = ep::ingest::parse_ears(cfg.ears_path, cfg.columns.ears);
    if (need_ox) {
        try {
            require_file(cfg.oxcgrt_path, "OxCGRT");
            auto ox = ep::ingest::parse_oxcgrt(cfg.oxcgrt_path, cfg.columns.oxcgrt);
            loaded.src.vaccinated = std::move(ox.vaccinated);
            loaded.src.stringency = std::move(ox.stringency);
            loaded.has_ox = true;
        } catch (const std::exception& e) {
            loaded.ox_error = e.what();
        }
    }
    if (need_trends) {
        try {
            if (!fs::is_directory(cfg.trends_dir))
                throw ep::ConfigError("trends directory not found: " + cfg.trends_dir);
            loaded.src.trends = ep::ingest::load_trends_dir(cfg.trends_dir, cfg.columns.trends);
            loaded.has_trends = true;
        } catch (const std::exception& e) {
            loaded.trends_error = e.what();
        }
    }
    return loaded;
}

bool model_needs_ox(const ep::ModelSpec& spec) {
    for (const auto& r : spec.regressors)
        if (r == "vacc_change" || r == "stringency") return true;
    return false;
}

bool model_needs_trends(const ep::ModelSpec& spec) { return spec.dependent == "trends"; }

void check_model_sources(const ep::ModelSpec& spec, const LoadedSources& loaded) {
    if (model_needs_ox(spec) && !loaded.has_ox)
        throw ep::ConfigError("OxCGRT source unavailable: " + loaded.ox_error);
    if (model_needs_trends(spec) && !loaded.has_trends)
        throw ep::ConfigError("trends source unavailable: " + loaded.trends_error);
}

std::string panel_range(const ep::ingest::PanelDataset& p) {
    return ep::format_date(p.start) + ".." + ep::format_date(p.end_date()) + " " +
           ep::cadence_name(p.cadence);
}

std::string series_range(const ep::Series& s) {
    return ep::format_date(s.start) + ".." + ep::format_date(s.end_date()) + " " +
           ep::cadence_name(s.cadence);
}

// ---------------------------------------------------------------- ingest ---

int cmd_ingest(Context& ctx, Manifest& man) {
    const auto& cfg = ctx.cfg;
    bool want_ox = fs::exists(cfg.oxcgrt_path);
    bool want_trends = fs::is_directory(cfg.trends_dir);
    for (const auto& id_text : cfg.models) {
        auto spec = ep::ModelSpec::standard(ep::parse_model_id(id_text));
        want_ox = want_ox || model_needs_ox(spec);
        want_trends = want_trends || model_needs_trends(spec);
    }
    auto loaded = load_sources(cfg, want_ox, want_trends);

    {
        std::ofstream os(ctx.out("summary.csv"), std::ios::binary);
        ep::CsvWriter w(os);
        ep::output::write_header(w, ctx.meta());
        w.row({"variable", "source", "countries", "start", "end", "cadence"});
        auto row = [&](const char* label, const char* source,
                       const std::map<std::string, ep::Series>& by_country) {
            if (by_country.empty()) return;
            ep::Date lo = by_country.begin()->second.start;
            ep::Date hi = by_country.begin()->second.end_date();
            for (const auto& [code, s] : by_country) {
                lo = std::min(lo, s.start);
                hi = std::max(hi, s.end_date());
            }
            w.row({label, source, std::to_string(by_country.size()), ep::format_date(lo),
                   ep::format_date(hi),
                   ep::cadence_name(by_country.begin()->second.cadence)});
        };
        row("New cases", "WHO", loaded.src.cases);
        row("New deaths", "WHO", loaded.src.deaths);
        row("New documents", "WHO-EARS", loaded.src.documents);
        row("Google Trends", "Google", loaded.src.trends);
        row("Vaccinations (%)", "OxCGRT", loaded.src.vaccinated);
        row("Stringency Index", "OxCGRT", loaded.src.stringency);
    }
    man.outputs.push_back("summary.csv");

    for (const auto& id_text : cfg.models) {
        try {
            auto spec = ep::ModelSpec::standard(ep::parse_model_id(id_text));
            check_model_sources(spec, loaded);
            auto panel = ep::ingest::build_panel(spec, loaded.src);
            std::string file = "panel_" + std::string(ep::model_id_name(spec.id)) + ".csv";
            std::ofstream os(ctx.out(file), std::ios::binary);
            ep::CsvWriter w(os);
            auto m = ctx.meta(panel_range(panel));
            m.extra.emplace_back("model", ep::model_id_name(spec.id));
            m.extra.emplace_back("observations", std::to_string(panel.obs()));
            ep::output::write_header(w, m);
            ep::ingest::write_panel_rows(w, panel);
            man.outputs.push_back(file);
        } catch (const std::exception& e) {
            man.failures.push_back("panel " + id_text + ": " + e.what());
        }
    }
    return man.failures.empty() ? 0 : 1;
}

// ------------------------------------------------------------------- fit ---

int cmd_fit(Context& ctx, Manifest& man) {
    const auto& cfg = ctx.cfg;
    auto robust = ep::regress::parse_robust_kind(cfg.robust);
    bool need_ox = false, need_trends = false;
    std::vector<ep::ModelSpec> specs;
    for (const auto& id_text : cfg.models) {
        auto spec = ep::ModelSpec::standard(ep::parse_model_id(id_text));
        need_ox = need_ox || model_needs_ox(spec);
        need_trends = need_trends || model_needs_trends(spec);
        specs.push_back(spec);
    }
    auto loaded = load_sources(cfg, need_ox, need_trends);

    std::vector<std::pair<std::string, ep::regress::FitResult>> fits;
    std::map<std::string, std::map<std::string, double>> vif_blocks;
    std::map<std::string, std::string> ranges;
    for (const auto& spec : specs) {
        const std::string name = ep::model_id_name(spec.id);
        try {
            check_model_sources(spec, loaded);
            auto panel = ep::ingest::build_panel(spec, loaded.src);
            auto fit = ep::regress::fixed_effects_fit(panel, spec, robust);

            auto cols = spec.regressors;
            cols.insert(cols.end(), panel.dummies.begin(), panel.dummies.end());
            auto design = ep::regress::panel_design(panel, cols);
            Eigen::VectorXd zero = Eigen::VectorXd::Zero(design.n());
            ep::regress::within_transform(design, zero);
            auto vifs = ep::regress::vif(design, spec.regressors);

            ordered_json doc;
            doc["meta"] = {{"epipanel", ep::kVersion},
                           {"config", ctx.config_hash},
                           {"seed", cfg.seed},
                           {"range", panel_range(panel)},
                           {"robust", ep::regress::robust_kind_name(robust)}};
            auto body = ordered_json::parse(ep::table::fit_json(name, fit, vifs));
            for (auto& [key, value] : body.items()) doc[key] = value;
            ordered_json interp = ordered_json::object();
            for (const auto& r : spec.regressors)
                interp[r] = ep::analysis::elasticity_interpretation(fit, r);
            doc["interpretation"] = interp;

            std::string file = "fit_" + name + ".json";
            std::ofstream os(ctx.out(file), std::ios::binary);
            os << doc.dump(2) << "\n";
            man.outputs.push_back(file);

            fits.emplace_back(name, std::move(fit));
            vif_blocks[name] = vifs;
            ranges[name] = panel_range(panel);
        } catch (const std::exception& e) {
            man.failures.push_back("model " + name + ": " + e.what());
        }
    }

    if (!fits.empty()) {
        std::ofstream os(ctx.out("fits.txt"), std::ios::binary);
        ep::CsvWriter header(os);
        bool same = true;
        for (const auto& [name, range] : ranges) same = same && range == ranges.begin()->second;
        auto m = ctx.meta(same ? ranges.begin()->second : "varies by model");
        m.extra.emplace_back("robust", ep::regress::robust_kind_name(robust));
        if (!same)
            for (const auto& [name, range] : ranges) m.extra.emplace_back("range " + name, range);
        ep::output::write_header(header, m);
        os << "\n" << ep::table::significance_table(fits);
        os << "\nVariance inflation factors\n";
        for (const auto& [name, vifs] : vif_blocks) {
            os << "  (" << name << ")";
            for (const auto& [col, v] : vifs) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f", v);
                os << " " << ep::column_label(col) << "=" << buf;
            }
            os << "\n";
        }
        os << "\nElasticity readings\n";
        for (const auto& [name, fit] : fits) {
            for (const auto& [col, beta] : fit.coefficients) {
                if (ep::table::is_dummy_column(col)) continue;
                os << "  (" << name << ") "
                   << ep::analysis::elasticity_interpretation(fit, col) << "\n";
            }
        }
        man.outputs.push_back("fits.txt");
    }
    return man.failures.empty() ? 0 : 1;
}

// --------------------------------------------------------------- rolling ---

int cmd_rolling(Context& ctx, Manifest& man, const std::string& dependent) {
    const auto& cfg = ctx.cfg;
    try {
        auto robust = ep::regress::parse_robust_kind(cfg.robust);
        ep::ModelSpec spec;
        if (dependent == "documents")
            spec = ep::ModelSpec::standard(ep::ModelId::M1b);
        else if (dependent == "trends")
            spec = ep::ModelSpec::standard(ep::ModelId::M2b);
        else
            throw ep::ConfigError("rolling dependent must be documents or trends, got '" +
                                  dependent + "'");
        auto loaded = load_sources(cfg, false, model_needs_trends(spec));
        check_model_sources(spec, loaded);
        auto panel = ep::ingest::build_panel(spec, loaded.src);
        auto window = ep::analysis::parse_duration(cfg.window);
        auto step = ep::analysis::parse_duration(cfg.step);
        auto traj = ep::analysis::rolling_elasticity(panel, spec, window, step, robust);

        std::string file = "rolling_" + dependent + ".csv";
        auto m = ctx.meta(panel_range(panel));
        m.extra.emplace_back("dependent", dependent);
        m.extra.emplace_back("model", ep::model_id_name(spec.id));
        ep::output::write_trajectory_csv(ctx.out(file).string(), m, traj);
        man.outputs.push_back(file);
    } catch (const std::exception& e) {
        man.failures.push_back("rolling " + dependent + ": " + e.what());
    }
    return man.failures.empty() ? 0 : 1;
}

// ------------------------------------------------------------- countries ---

int cmd_countries(Context& ctx, Manifest& man) {
    const auto& cfg = ctx.cfg;
    try {
        auto robust = ep::regress::parse_robust_kind(cfg.robust);
        auto spec = ep::ModelSpec::standard(ep::ModelId::M1b);
        auto loaded = load_sources(cfg, false, false);
        auto panel = ep::ingest::build_panel(spec, loaded.src);

        auto results = ep::analysis::per_country_fit(panel, spec);
        auto report = ep::analysis::taxonomy(results);
        auto global = ep::regress::fixed_effects_fit(panel, spec, robust);
        std::pair<double, double> panel_point{
            global.coefficients.at(spec.regressors[0]),
            global.coefficients.at(spec.regressors[1])};

        auto m = ctx.meta(panel_range(panel));
        m.extra.emplace_back("model", ep::model_id_name(spec.id));
        ep::output::write_scatter_csv(ctx.out("scatter.csv").string(), m, results, report,
                                      panel_point);
        ep::output::write_difference_csv(ctx.out("difference.csv").string(), m, report);
        ep::output::write_lollipop_csv(ctx.out("lollipop.csv").string(), m, results);
        man.outputs.push_back("scatter.csv");
        man.outputs.push_back("difference.csv");
        man.outputs.push_back("lollipop.csv");
        for (const auto& r : results)
            if (r.singular) man.failures.push_back("country " + r.country + ": singular design");
    } catch (const std::exception& e) {
        man.failures.push_back(std::string("countries: ") + e.what());
    }
    return man.failures.empty() ? 0 : 1;
}

// ------------------------------------------------------------- ccf / sdc ---

std::pair<std::string, std::string> parse_pair(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size())
        throw ep::ConfigError("pair must look like 'cases:documents', got '" + text + "'");
    return {text.substr(0, colon), text.substr(colon + 1)};
}

const std::map<std::string, ep::Series>* source_for(const ep::ingest::SourceData& src,
                                                    const std::string& var) {
    if (var == "cases") return &src.cases;
    if (var == "deaths") return &src.deaths;
    if (var == "documents") return &src.documents;
    if (var == "trends") return &src.trends;
    if (var == "vaccinated_pct") return &src.vaccinated;
    if (var == "stringency") return &src.stringency;
    throw ep::ConfigError("unknown variable '" + var + "'");
}

std::vector<std::string> pair_countries(const RunConfig& cfg, const ep::ingest::SourceData& src,
                                        const std::map<std::string, ep::Series>& a,
                                        const std::map<std::string, ep::Series>& b) {
    std::vector<std::string> out;
    if (!cfg.countries.empty()) {
        out = cfg.countries;
        std::sort(out.begin(), out.end());
        return out;
    }
    // default to the modelled set: countries with document data
    const auto& base = src.documents.empty() ? a : src.documents;
    for (const auto& [code, s] : base)
        if (a.count(code) && b.count(code)) out.push_back(code);
    return out;
}

std::pair<ep::Series, ep::Series> aligned_pair(const ep::Series& raw_a, const ep::Series& raw_b,
                                               bool smooth) {
    ep::Series a = smooth ? ep::rolling_mean(raw_a, 7) : raw_a;
    ep::Series b = smooth ? ep::rolling_mean(raw_b, 7) : raw_b;
    ep::Date lo = std::max(a.start, b.start);
    ep::Date hi = std::min(a.end_date(), b.end_date());
    if (lo > hi)
        throw ep::CoverageError(a.label() + " and " + b.label() + " do not overlap");
    auto cropped = ep::align({a, b}, ep::DateRange(lo, hi));
    return {cropped[0], cropped[1]};
}

int cmd_ccf(Context& ctx, Manifest& man) {
    const auto& cfg = ctx.cfg;
    try {
        auto [var_a, var_b] = parse_pair(cfg.ccf_pair);
        bool need_trends = var_a == "trends" || var_b == "trends";
        bool need_ox = var_a == "vaccinated_pct" || var_b == "vaccinated_pct" ||
                       var_a == "stringency" || var_b == "stringency";
        auto loaded = load_sources(cfg, need_ox, need_trends);
        const auto* map_a = source_for(loaded.src, var_a);
        const auto* map_b = source_for(loaded.src, var_b);

        std::vector<ep::corr::CcfResult> results;
        std::string range;
        for (const auto& code : pair_countries(cfg, loaded.src, *map_a, *map_b)) {
            if (!map_a->count(code) || !map_b->count(code)) {
                man.failures.push_back("ccf " + code + ": series missing for pair " +
                                       cfg.ccf_pair);
                continue;
            }
            auto [a, b] = aligned_pair(map_a->at(code), map_b->at(code), cfg.smooth);
            results.push_back(ep::corr::ccf(a, b, cfg.ccf_max_lag));
            range = series_range(a);
        }
        if (results.empty()) throw ep::ConfigError("no country with both series of " + cfg.ccf_pair);

        auto m = ctx.meta(range);
        m.extra.emplace_back("pair", cfg.ccf_pair);
        m.extra.emplace_back("smooth", cfg.smooth ? "7d" : "raw");
        ep::output::write_ccf_csv(ctx.out("ccf.csv").string(), m, results);
        man.outputs.push_back("ccf.csv");
    } catch (const std::exception& e) {
        man.failures.push_back(std::string("ccf: ") + e.what());
    }
    return man.failures.empty() ? 0 : 1;
}

int cmd_sdc(Context& ctx, Manifest& man) {
    const auto& cfg = ctx.cfg;
    try {
        auto [var_a, var_b] = parse_pair(cfg.sdc_pair);
        bool need_trends = var_a == "trends" || var_b == "trends";
        bool need_ox = var_a == "vaccinated_pct" || var_b == "vaccinated_pct" ||
                       var_a == "stringency" || var_b == "stringency";
        auto loaded = load_sources(cfg, need_ox, need_trends);
        const auto* map_a = source_for(loaded.src, var_a);
        const auto* map_b = source_for(loaded.src, var_b);

        bool wrote = false;
        for (const auto& code : pair_countries(cfg, loaded.src, *map_a, *map_b)) {
            if (!map_a->count(code) || !map_b->count(code)) {
                man.failures.push_back("sdc " + code + ": series missing for pair " +
                                       cfg.sdc_pair);
                continue;
            }
            auto [a, b] = aligned_pair(map_a->at(code), map_b->at(code), cfg.smooth);
            std::uint64_t country_seed =
                ep::mix64(cfg.seed ^ ep::output::fnv1a64(code));
            auto grid = ep::corr::sdc(a, b, cfg.sdc_window, cfg.sdc_max_lag, cfg.alpha,
                                      cfg.n_perm, country_seed);
            std::string file = "sdc_" + code + ".csv";
            auto m = ctx.meta(series_range(a));
            m.extra.emplace_back("pair", cfg.sdc_pair);
            m.extra.emplace_back("smooth", cfg.smooth ? "7d" : "raw");
            ep::output::write_sdc_csv(ctx.out(file).string(), m, grid);
            man.outputs.push_back(file);
            wrote = true;
        }
        if (!wrote) throw ep::ConfigError("no country with both series of " + cfg.sdc_pair);
    } catch (const std::exception& e) {
        man.failures.push_back(std::string("sdc: ") + e.what());
    }
    return man.failures.empty() ? 0 : 1;
}

int cmd_all(Context& ctx, Manifest& man) {
    cmd_ingest(ctx, man);
    cmd_fit(ctx, man);
    cmd_rolling(ctx, man, "documents");
    cmd_rolling(ctx, man, "trends");
    cmd_countries(ctx, man);
    cmd_ccf(ctx, man);
    cmd_sdc(ctx, man);
    return man.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"epipanel: panel elasticities and correlation analyses for "
                 "epidemic and infodemic surveillance data"};
    app.set_version_flag("--version", std::string("epipanel ") + ep::kVersion);
    app.require_subcommand(1);

    std::string f_config, f_data_dir, f_who, f_ears, f_ox, f_trends, f_out;
    std::vector<std::string> f_models, f_countries;
    std::uint64_t f_seed = 0;
    std::string f_window, f_step, f_robust, f_dependent, f_pair;
    int f_max_lag = 0, f_n_perm = 0, f_sdc_window = 0;
    double f_alpha = 0;
    bool f_smooth = false;
    std::map<std::string, CLI::Option*> given;

    auto add_common = [&](CLI::App* sub) {
        given["config:" + sub->get_name()] =
            sub->add_option("--config", f_config, "JSON config file");
        given["data-dir:" + sub->get_name()] = sub->add_option(
            "--data-dir", f_data_dir, "data directory ($EPIPANEL_DATA_DIR, default ./data)");
        given["who:" + sub->get_name()] = sub->add_option("--who", f_who, "WHO surveillance CSV");
        given["ears:" + sub->get_name()] = sub->add_option("--ears", f_ears, "EARS CSV");
        given["oxcgrt:" + sub->get_name()] = sub->add_option("--oxcgrt", f_ox, "OxCGRT CSV");
        given["trends:" + sub->get_name()] =
            sub->add_option("--trends", f_trends, "Google Trends directory");
        given["out:" + sub->get_name()] = sub->add_option("--out", f_out, "output directory");
        given["seed:" + sub->get_name()] = sub->add_option("--seed", f_seed, "RNG seed");
        given["robust:" + sub->get_name()] =
            sub->add_option("--robust", f_robust, "covariance: hc1 or cluster")
                ->check(CLI::IsMember({"hc1", "cluster"}));
    };
    auto add_models = [&](CLI::App* sub) {
        given["models:" + sub->get_name()] =
            sub->add_option("--models", f_models, "model ids (1a..1d, 2a..2c)")->delimiter(',');
    };
    auto add_rolling = [&](CLI::App* sub) {
        given["window:" + sub->get_name()] =
            sub->add_option("--window", f_window, "rolling window, e.g. 6m");
        given["step:" + sub->get_name()] = sub->add_option("--step", f_step, "window step");
        given["dependent:" + sub->get_name()] =
            sub->add_option("--dependent", f_dependent, "documents or trends")
                ->check(CLI::IsMember({"documents", "trends"}));
    };
    auto add_corr = [&](CLI::App* sub) {
        given["max-lag:" + sub->get_name()] = sub->add_option("--max-lag", f_max_lag, "lag bound");
        given["alpha:" + sub->get_name()] =
            sub->add_option("--alpha", f_alpha, "significance level");
        given["n-perm:" + sub->get_name()] =
            sub->add_option("--n-perm", f_n_perm, "permutations per cell");
        given["sdc-window:" + sub->get_name()] =
            sub->add_option("--sdc-window", f_sdc_window, "SDC window length in days");
        given["pair:" + sub->get_name()] =
            sub->add_option("--pair", f_pair, "variable pair, e.g. cases:documents");
        given["smooth:" + sub->get_name()] =
            sub->add_flag("--smooth", f_smooth, "7-day rolling mean before correlating");
        given["countries:" + sub->get_name()] =
            sub->add_option("--countries", f_countries, "restrict to these codes")
                ->delimiter(',');
    };

    auto* s_ingest = app.add_subcommand("ingest", "parse sources, write panel snapshots");
    add_common(s_ingest);
    add_models(s_ingest);
    auto* s_fit = app.add_subcommand("fit", "fixed-effects fits with starred tables");
    add_common(s_fit);
    add_models(s_fit);
    auto* s_rolling = app.add_subcommand("rolling", "rolling-window elasticity trajectory");
    add_common(s_rolling);
    add_rolling(s_rolling);
    auto* s_countries = app.add_subcommand("countries", "per-country elasticities and taxonomy");
    add_common(s_countries);
    auto* s_ccf = app.add_subcommand("ccf", "lagged cross-correlation per country");
    add_common(s_ccf);
    add_corr(s_ccf);
    auto* s_sdc = app.add_subcommand("sdc", "scale-dependent correlation grids");
    add_common(s_sdc);
    add_corr(s_sdc);
    auto* s_all = app.add_subcommand("all", "run every analysis");
    add_common(s_all);
    add_models(s_all);
    add_rolling(s_all);
    add_corr(s_all);
    auto* s_fetch = app.add_subcommand("fetch", "download archived source files (explicit only)");
    std::string f_what = "all";
    s_fetch->add_option("--what", f_what, "who, oxcgrt, or all");
    s_fetch->add_option("--data-dir", f_data_dir, "download destination");

    CLI11_PARSE(app, argc, argv);
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    if (name == "fetch") {
        std::string dir = f_data_dir;
        if (dir.empty()) {
            const char* env = std::getenv("EPIPANEL_DATA_DIR");
            dir = env && *env ? env : "data";
        }
        return run_fetch(dir, f_what);
    }

    auto was_given = [&](const char* key) {
        auto it = given.find(std::string(key) + ":" + name);
        return it != given.end() && it->second->count() > 0;
    };

    Context ctx;
    ctx.command = name;
    try {
        RunConfig& cfg = ctx.cfg;
        const char* env = std::getenv("EPIPANEL_DATA_DIR");
        if (env && *env) cfg.data_dir = env;
        if (was_given("config")) apply_config_file(cfg, f_config);
        if (was_given("data-dir")) cfg.data_dir = f_data_dir;
        if (was_given("who")) cfg.who_path = f_who;
        if (was_given("ears")) cfg.ears_path = f_ears;
        if (was_given("oxcgrt")) cfg.oxcgrt_path = f_ox;
        if (was_given("trends")) cfg.trends_dir = f_trends;
        if (was_given("out")) cfg.out_dir = f_out;
        if (was_given("seed")) cfg.seed = f_seed;
        if (was_given("robust")) cfg.robust = f_robust;
        if (was_given("models")) cfg.models = f_models;
        if (was_given("window")) cfg.window = f_window;
        if (was_given("step")) cfg.step = f_step;
        if (was_given("dependent")) cfg.dependent = f_dependent;
        if (was_given("max-lag")) {
            cfg.ccf_max_lag = f_max_lag;
            cfg.sdc_max_lag = f_max_lag;
        }
        if (was_given("alpha")) cfg.alpha = f_alpha;
        if (was_given("n-perm")) cfg.n_perm = f_n_perm;
        if (was_given("sdc-window")) cfg.sdc_window = f_sdc_window;
        if (was_given("pair")) {
            cfg.ccf_pair = f_pair;
            cfg.sdc_pair = f_pair;
        }
        if (was_given("smooth")) cfg.smooth = f_smooth;
        if (was_given("countries")) cfg.countries = f_countries;
        resolve_paths(cfg);

        ctx.effective = config_to_json(cfg);
        ctx.config_hash = ep::output::hex64(ep::output::fnv1a64(ctx.effective.dump()));
        fs::create_directories(cfg.out_dir);

        Manifest man;
        int rc = 1;
        if (name == "ingest")
            rc = cmd_ingest(ctx, man);
        else if (name == "fit")
            rc = cmd_fit(ctx, man);
        else if (name == "rolling")
            rc = cmd_rolling(ctx, man, cfg.dependent);
        else if (name == "countries")
            rc = cmd_countries(ctx, man);
        else if (name == "ccf")
            rc = cmd_ccf(ctx, man);
        else if (name == "sdc")
            rc = cmd_sdc(ctx, man);
        else if (name == "all")
            rc = cmd_all(ctx, man);
        write_manifest(ctx, man);
        for (const auto& f : man.failures) std::cerr << "failed: " << f << "\n";
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
