#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epipanel/ingest.hpp"
#include "epipanel/models.hpp"

namespace epipanel::regress {

// Pivot threshold for rank decisions: a column is dependent when its
// decomposition pivot falls below this fraction of the largest pivot.
inline constexpr double kPivotThreshold = 1e-10;

struct DesignMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd X;                 // n x names.size()
    std::vector<std::string> entity;   // country per row; empty when not a panel

    long n() const { return X.rows(); }
    long k() const { return X.cols(); }
    void validate() const;
};

struct FitResult {
    std::string dependent;
    std::map<std::string, double> coefficients;
    std::map<std::string, double> robust_se;
    std::map<std::string, double> p_values;
    double r2 = 0.0;           // within r2 for fixed-effects fits
    double adjusted_r2 = 0.0;
    double overall_r2 = 0.0;   // grand-mean r2; equals r2 for plain OLS
    Eigen::VectorXd residuals;
    std::map<std::string, double> fixed_effects;
    std::size_t n_obs = 0;
};

enum class RobustKind { HC1, ClusterByEntity };

const char* robust_kind_name(RobustKind k);
RobustKind parse_robust_kind(const std::string& text);

// Two-sided p-value for z = estimate / se under the normal approximation.
double normal_p_value(double estimate, double se);

// Stacks panel columns country-major (row = country * T + t) and records the
// entity index.
DesignMatrix panel_design(const ingest::PanelDataset& panel,
                          const std::vector<std::string>& columns);

// Demeans y and every column of X per entity, in place.
void within_transform(DesignMatrix& X, Eigen::VectorXd& y);

// Least squares via column-pivoted QR. Robust (HC1) standard errors and
// normal-approximation p-values are filled in.
FitResult ols(const DesignMatrix& X, const Eigen::VectorXd& y);

// HC1 sandwich: (n / (n - k - absorbed)) (X'X)^-1 X' diag(e^2) X (X'X)^-1.
// `absorbed` counts parameters eliminated before the fit (the N fixed
// effects of a within regression).
Eigen::MatrixXd robust_covariance(const DesignMatrix& X, const Eigen::VectorXd& residuals,
                                  std::size_t absorbed = 0);

// CR1 cluster-robust sandwich, clustering on the entity index.
Eigen::MatrixXd clustered_covariance(const DesignMatrix& X, const Eigen::VectorXd& residuals,
                                     std::size_t absorbed = 0);

// Within-transformation fixed-effects estimator. Coefficients match the
// least-squares-dummy-variable construction; alpha_i are recovered from the
// entity means; the covariance counts the absorbed intercepts in its
// degrees-of-freedom correction.
FitResult fixed_effects_fit(const ingest::PanelDataset& panel, const ModelSpec& spec,
                            RobustKind robust = RobustKind::HC1);

// Variance inflation factors. `report` selects the columns to diagnose
// (all when empty); every other column still enters the auxiliary
// regressions.
std::map<std::string, double> vif(const DesignMatrix& X,
                                  const std::vector<std::string>& report = {});

}  // namespace epipanel::regress
