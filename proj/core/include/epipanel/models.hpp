#pragma once

#include <string>
#include <vector>

#include "epipanel/series.hpp"

namespace epipanel {

enum class ModelId { M1a, M1b, M1c, M1d, M2a, M2b, M2c, Custom };

const char* model_id_name(ModelId id);
ModelId parse_model_id(const std::string& text);

/// Declarative description of one regression: dependent variable, ordered
/// regressors, dummy blocks, cadence. Weekly specs never carry weekday
/// dummies (there is no within-week variation left to explain).
struct ModelSpec {
    ModelId id = ModelId::Custom;
    std::string dependent;                // panel column name
    std::vector<std::string> regressors;  // ordered panel column names
    bool weekday_dummies = true;
    bool season_dummies = true;
    Cadence cadence = Cadence::Daily;

    /// Throws ConfigError when the invariants are violated.
    void validate() const;

    /// The named specifications. Regressor columns:
    ///   cases, cases_nb, deaths, deaths_nb, vacc_change, stringency
    /// Dependents: documents (daily) or trends (weekly).
    static ModelSpec standard(ModelId id);
};

/// Human labels for panel columns, used by the table renderer.
std::string column_label(const std::string& column);

}  // namespace epipanel
