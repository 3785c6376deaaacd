#include "epipanel/table.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "epipanel/models.hpp"

namespace epipanel::table {

namespace {

const std::set<std::string>& dummy_names() {
    static const std::set<std::string> names = {"tuesday", "wednesday", "thursday", "friday",
                                                "saturday", "sunday",   "spring",   "summer",
                                                "autumn",   "(intercept)"};
    return names;
}

std::string fixed(double v, int decimals = 3) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Table rows follow the models' regressor order rather than map order.
std::vector<std::string> row_order(
    const std::vector<std::pair<std::string, regress::FitResult>>& fits, bool include_dummies) {
    static const std::vector<std::string> canonical = {"cases",       "cases_nb", "deaths",
                                                       "deaths_nb",   "vacc_change",
                                                       "stringency"};
    std::vector<std::string> order;
    std::set<std::string> seen;
    auto push = [&](const std::string& name) {
        if (seen.insert(name).second) order.push_back(name);
    };
    for (const auto& name : canonical)
        for (const auto& [id, fit] : fits)
            if (fit.coefficients.count(name)) push(name);
    for (const auto& [id, fit] : fits)
        for (const auto& [name, beta] : fit.coefficients)
            if (!is_dummy_column(name)) push(name);
    if (include_dummies)
        for (const auto& [id, fit] : fits)
            for (const auto& [name, beta] : fit.coefficients)
                if (is_dummy_column(name)) push(name);
    return order;
}

}  // namespace

std::string stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

bool is_dummy_column(const std::string& name) { return dummy_names().count(name) > 0; }

std::string with_separators(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    int count = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (count && count % 3 == 0) out.push_back(',');
        out.push_back(*it);
        ++count;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string significance_table(
    const std::vector<std::pair<std::string, regress::FitResult>>& fits, bool include_dummies) {
    auto order = row_order(fits, include_dummies);

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> head{""};
    for (const auto& [id, fit] : fits) head.push_back("(" + id + ")");
    grid.push_back(head);

    for (const auto& name : order) {
        std::vector<std::string> coef_row{column_label(name)};
        std::vector<std::string> se_row{""};
        for (const auto& [id, fit] : fits) {
            auto it = fit.coefficients.find(name);
            if (it == fit.coefficients.end()) {
                coef_row.push_back("");
                se_row.push_back("");
                continue;
            }
            coef_row.push_back(fixed(it->second) + stars(fit.p_values.at(name)));
            se_row.push_back("(" + fixed(fit.robust_se.at(name)) + ")");
        }
        grid.push_back(coef_row);
        grid.push_back(se_row);
    }

    auto stat_row = [&](const std::string& label, auto value) {
        std::vector<std::string> row{label};
        for (const auto& [id, fit] : fits) row.push_back(value(fit));
        grid.push_back(row);
    };
    stat_row("Observations",
             [](const regress::FitResult& f) { return with_separators(f.n_obs); });
    stat_row("R2 (within)", [](const regress::FitResult& f) { return fixed(f.r2); });
    stat_row("R2 (overall)", [](const regress::FitResult& f) { return fixed(f.overall_r2); });
    stat_row("Adjusted R2", [](const regress::FitResult& f) { return fixed(f.adjusted_r2); });

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream os;
    for (std::size_t r = 0; r < grid.size(); ++r) {
        const auto& row = grid[r];
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0) {
                os << row[c] << std::string(widths[c] - row[c].size(), ' ');
            } else {
                os << "  " << std::string(widths[c] - row[c].size(), ' ') << row[c];
            }
        }
        os << "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c ? 2 : 0);
            os << std::string(total, '-') << "\n";
        }
    }
    os << "Significance: * p<0.1, ** p<0.05, *** p<0.01; robust standard errors in "
          "parentheses.\n";
    return os.str();
}

std::string fit_json(const std::string& model, const regress::FitResult& fit,
                     const std::map<std::string, double>& vifs) {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["dependent"] = fit.dependent;
    j["n_obs"] = fit.n_obs;
    nlohmann::ordered_json coefs = nlohmann::ordered_json::object();
    for (const auto& [name, beta] : fit.coefficients) {
        coefs[name] = {{"coefficient", beta},
                       {"robust_se", fit.robust_se.at(name)},
                       {"p_value", fit.p_values.at(name)},
                       {"stars", stars(fit.p_values.at(name))},
                       {"label", column_label(name)}};
    }
    j["coefficients"] = coefs;
    j["r2_within"] = fit.r2;
    j["r2_overall"] = fit.overall_r2;
    j["adjusted_r2"] = fit.adjusted_r2;
    if (!fit.fixed_effects.empty()) j["fixed_effects"] = fit.fixed_effects;
    if (!vifs.empty()) j["vif"] = vifs;
    return j.dump(2) + "\n";
}

}  // namespace epipanel::table
