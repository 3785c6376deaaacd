#include "epipanel/models.hpp"

#include "epipanel/errors.hpp"

namespace epipanel {

const char* model_id_name(ModelId id) {
    switch (id) {
        case ModelId::M1a: return "1a";
        case ModelId::M1b: return "1b";
        case ModelId::M1c: return "1c";
        case ModelId::M1d: return "1d";
        case ModelId::M2a: return "2a";
        case ModelId::M2b: return "2b";
        case ModelId::M2c: return "2c";
        case ModelId::Custom: return "custom";
    }
    return "?";
}

ModelId parse_model_id(const std::string& text) {
    std::string t = text;
    if (t.size() > 1 && (t[0] == 'm' || t[0] == 'M')) t = t.substr(1);
    if (t == "1a") return ModelId::M1a;
    if (t == "1b") return ModelId::M1b;
    if (t == "1c") return ModelId::M1c;
    if (t == "1d") return ModelId::M1d;
    if (t == "2a") return ModelId::M2a;
    if (t == "2b") return ModelId::M2b;
    if (t == "2c") return ModelId::M2c;
    throw ConfigError("unknown model id '" + text + "'");
}

void ModelSpec::validate() const {
    if (dependent.empty()) throw ConfigError("model spec has no dependent variable");
    if (regressors.empty()) throw ConfigError("model spec has no regressors");
    if (cadence == Cadence::Weekly && weekday_dummies)
        throw ConfigError("weekly model specs cannot include weekday dummies");
}

ModelSpec ModelSpec::standard(ModelId id) {
    ModelSpec s;
    s.id = id;
    switch (id) {
        case ModelId::M1a:
            s.dependent = "documents";
            s.regressors = {"cases", "cases_nb"};
            break;
        case ModelId::M1b:
            s.dependent = "documents";
            s.regressors = {"deaths", "deaths_nb"};
            break;
        case ModelId::M1c:
            s.dependent = "documents";
            s.regressors = {"cases", "cases_nb", "deaths", "deaths_nb"};
            break;
        case ModelId::M1d:
            s.dependent = "documents";
            s.regressors = {"deaths", "deaths_nb", "vacc_change", "stringency"};
            break;
        case ModelId::M2a:
            s.dependent = "trends";
            s.regressors = {"cases", "cases_nb"};
            s.cadence = Cadence::Weekly;
            s.weekday_dummies = false;
            break;
        case ModelId::M2b:
            s.dependent = "trends";
            s.regressors = {"deaths", "deaths_nb"};
            s.cadence = Cadence::Weekly;
            s.weekday_dummies = false;
            break;
        case ModelId::M2c:
            s.dependent = "trends";
            s.regressors = {"cases", "cases_nb", "deaths", "deaths_nb"};
            s.cadence = Cadence::Weekly;
            s.weekday_dummies = false;
            break;
        case ModelId::Custom:
            throw ConfigError("no standard spec for custom model");
    }
    s.validate();
    return s;
}

std::string column_label(const std::string& column) {
    if (column == "cases") return "New cases";
    if (column == "cases_nb") return "New cases (neighbours)";
    if (column == "deaths") return "New deaths";
    if (column == "deaths_nb") return "New deaths (neighbours)";
    if (column == "vacc_change") return "Vaccinated population % change";
    if (column == "stringency") return "Stringency Index";
    if (column == "documents") return "New documents";
    if (column == "trends") return "Google Trends";
    return column;
}

}  // namespace epipanel
