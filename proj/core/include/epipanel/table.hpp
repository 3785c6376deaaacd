#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "epipanel/regress.hpp"

namespace epipanel::table {

// "***" below 0.01, "**" below 0.05, "*" below 0.1, otherwise empty.
std::string stars(double p);

bool is_dummy_column(const std::string& name);

// Integer with thousands separators ("31,620").
std::string with_separators(std::size_t n);

// Multi-column regression table: starred coefficients with robust standard
// errors in parentheses beneath, then observation counts and the three R^2
// lines. Dummy rows are hidden unless requested.
std::string significance_table(
    const std::vector<std::pair<std::string, regress::FitResult>>& fits,
    bool include_dummies = false);

// JSON document for one fit: coefficients, robust SEs, p-values, stars, both
// R^2 variants, fixed effects, and the VIF block when provided.
std::string fit_json(const std::string& model, const regress::FitResult& fit,
                     const std::map<std::string, double>& vifs = {});

}  // namespace epipanel::table
