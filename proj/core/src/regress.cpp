#include "epipanel/regress.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "epipanel/errors.hpp"

namespace epipanel::regress {

namespace {

// Solves X P = Q R, checking rank against kPivotThreshold. Throws
// SingularDesignError naming the first column pivoted into the deficient
// block.
Eigen::ColPivHouseholderQR<Eigen::MatrixXd> checked_qr(const Eigen::MatrixXd& X,
                                                       const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(kPivotThreshold);
    if (qr.rank() < X.cols()) {
        long pos = qr.rank();
        long col = qr.colsPermutation().indices()(pos);
        const std::string& name = names[std::size_t(col)];
        throw SingularDesignError(name, "design matrix is rank deficient: column '" + name +
                                            "' is linearly dependent on the others");
    }
    return qr;
}

Eigen::MatrixXd xtx_inverse(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
    long k = qr.matrixQR().cols();
    Eigen::MatrixXd rinv = qr.matrixR()
                               .topLeftCorner(k, k)
                               .triangularView<Eigen::Upper>()
                               .solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd pr = qr.colsPermutation() * rinv;
    return pr * pr.transpose();
}

Eigen::MatrixXd sandwich(const DesignMatrix& X, const Eigen::VectorXd& residuals,
                         std::size_t absorbed, bool cluster) {
    X.validate();
    if (residuals.size() != X.n())
        throw LengthError("residual vector length " + std::to_string(residuals.size()) +
                          " does not match " + std::to_string(X.n()) + " design rows");
    const long n = X.n();
    const long k = X.k();
    const double dof = double(n) - double(k) - double(absorbed);
    if (dof <= 0) throw LengthError("no residual degrees of freedom");

    auto qr = checked_qr(X.X, X.names);
    Eigen::MatrixXd bread = xtx_inverse(qr);

    Eigen::MatrixXd meat(k, k);
    double scale = 0;
    if (cluster) {
        if (X.entity.empty())
            throw ConfigError("clustered covariance requires an entity index");
        std::map<std::string, std::vector<long>> groups;
        for (long i = 0; i < n; ++i) groups[X.entity[std::size_t(i)]].push_back(i);
        const double g = double(groups.size());
        if (g < 2) throw ConfigError("clustered covariance needs at least 2 clusters");
        meat.setZero();
        for (const auto& [name, rows] : groups) {
            Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
            for (long i : rows) s += X.X.row(i).transpose() * residuals(i);
            meat += s * s.transpose();
        }
        scale = (g / (g - 1.0)) * (double(n - 1) / dof);
    } else {
        Eigen::MatrixXd weighted = X.X.array().colwise() * residuals.array().square();
        meat = X.X.transpose() * weighted;
        scale = double(n) / dof;
    }
    Eigen::MatrixXd cov = scale * bread * meat * bread;
    return 0.5 * (cov + cov.transpose());
}

void fill_inference(FitResult& fit, const std::vector<std::string>& names,
                    const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov) {
    for (std::size_t j = 0; j < names.size(); ++j) {
        double se = std::sqrt(std::max(0.0, cov(long(j), long(j))));
        fit.coefficients[names[j]] = beta(long(j));
        fit.robust_se[names[j]] = se;
        fit.p_values[names[j]] = normal_p_value(beta(long(j)), se);
    }
}

}  // namespace

void DesignMatrix::validate() const {
    if (X.cols() != long(names.size()))
        throw ConfigError("design matrix has " + std::to_string(X.cols()) + " columns but " +
                          std::to_string(names.size()) + " names");
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw ConfigError("design matrix column names repeat");
    if (X.rows() <= X.cols())
        throw LengthError("design matrix needs more rows than columns (" +
                          std::to_string(X.rows()) + " x " + std::to_string(X.cols()) + ")");
    if (!entity.empty() && long(entity.size()) != X.rows())
        throw ConfigError("entity index length does not match design rows");
}

const char* robust_kind_name(RobustKind k) {
    return k == RobustKind::ClusterByEntity ? "cluster" : "hc1";
}

RobustKind parse_robust_kind(const std::string& text) {
    if (text == "hc1" || text == "HC1") return RobustKind::HC1;
    if (text == "cluster") return RobustKind::ClusterByEntity;
    throw ConfigError("unknown robust covariance kind '" + text + "'");
}

double normal_p_value(double estimate, double se) {
    if (se <= 0.0) return estimate == 0.0 ? 1.0 : 0.0;
    return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

DesignMatrix panel_design(const ingest::PanelDataset& panel,
                          const std::vector<std::string>& columns) {
    DesignMatrix d;
    d.names = columns;
    const long n = long(panel.n());
    const long t = long(panel.periods);
    d.X.resize(n * t, long(columns.size()));
    d.entity.reserve(std::size_t(n * t));
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < t; ++j) d.entity.push_back(panel.countries[std::size_t(i)].code);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const Eigen::MatrixXd& m = panel.column(columns[c]);
        for (long i = 0; i < n; ++i)
            d.X.block(i * t, long(c), t, 1) = m.row(i).transpose();
    }
    return d;
}

void within_transform(DesignMatrix& X, Eigen::VectorXd& y) {
    if (X.entity.empty()) throw ConfigError("within transform requires an entity index");
    if (y.size() != X.n()) throw LengthError("y length does not match design rows");
    std::map<std::string, std::vector<long>> groups;
    for (long i = 0; i < X.n(); ++i) groups[X.entity[std::size_t(i)]].push_back(i);
    for (const auto& [name, rows] : groups) {
        Eigen::RowVectorXd xbar = Eigen::RowVectorXd::Zero(X.k());
        double ybar = 0;
        for (long i : rows) {
            xbar += X.X.row(i);
            ybar += y(i);
        }
        xbar /= double(rows.size());
        ybar /= double(rows.size());
        for (long i : rows) {
            X.X.row(i) -= xbar;
            y(i) -= ybar;
        }
    }
}

FitResult ols(const DesignMatrix& X, const Eigen::VectorXd& y) {
    X.validate();
    if (y.size() != X.n()) throw LengthError("y length does not match design rows");
    auto qr = checked_qr(X.X, X.names);
    Eigen::VectorXd beta = qr.solve(y);
    FitResult fit;
    fit.residuals = y - X.X * beta;
    fit.n_obs = std::size_t(X.n());

    const double tss = (y.array() - y.mean()).square().sum();
    const double rss = fit.residuals.squaredNorm();
    fit.r2 = tss > 0 ? 1.0 - rss / tss : 0.0;
    fit.overall_r2 = fit.r2;
    const double dof = double(X.n() - X.k());
    fit.adjusted_r2 = 1.0 - (1.0 - fit.r2) * double(X.n() - 1) / dof;

    fill_inference(fit, X.names, beta, sandwich(X, fit.residuals, 0, false));
    return fit;
}

Eigen::MatrixXd robust_covariance(const DesignMatrix& X, const Eigen::VectorXd& residuals,
                                  std::size_t absorbed) {
    return sandwich(X, residuals, absorbed, false);
}

Eigen::MatrixXd clustered_covariance(const DesignMatrix& X, const Eigen::VectorXd& residuals,
                                     std::size_t absorbed) {
    return sandwich(X, residuals, absorbed, true);
}

FitResult fixed_effects_fit(const ingest::PanelDataset& panel, const ModelSpec& spec,
                            RobustKind robust) {
    std::vector<std::string> columns = spec.regressors;
    columns.insert(columns.end(), panel.dummies.begin(), panel.dummies.end());

    DesignMatrix design = panel_design(panel, columns);
    Eigen::VectorXd y(design.n());
    {
        const Eigen::MatrixXd& dep = panel.column(spec.dependent);
        const long t = long(panel.periods);
        for (long i = 0; i < long(panel.n()); ++i) y.segment(i * t, t) = dep.row(i).transpose();
    }
    const Eigen::VectorXd y_raw = y;
    const Eigen::MatrixXd x_raw = design.X;

    within_transform(design, y);
    design.validate();
    auto qr = checked_qr(design.X, design.names);
    Eigen::VectorXd beta = qr.solve(y);

    FitResult fit;
    fit.dependent = spec.dependent;
    fit.residuals = y - design.X * beta;
    fit.n_obs = std::size_t(design.n());

    const double rss = fit.residuals.squaredNorm();
    const double tss_within = y.squaredNorm();  // y is demeaned per entity
    fit.r2 = tss_within > 0 ? 1.0 - rss / tss_within : 0.0;
    const double tss_overall = (y_raw.array() - y_raw.mean()).square().sum();
    fit.overall_r2 = tss_overall > 0 ? 1.0 - rss / tss_overall : 0.0;

    const std::size_t absorbed = panel.n();
    const double dof = double(design.n()) - double(design.k()) - double(absorbed);
    if (dof <= 0) throw LengthError("no residual degrees of freedom");
    fit.adjusted_r2 = 1.0 - (1.0 - fit.r2) * double(design.n() - 1) / dof;

    Eigen::MatrixXd cov = robust == RobustKind::ClusterByEntity
                              ? clustered_covariance(design, fit.residuals, absorbed)
                              : robust_covariance(design, fit.residuals, absorbed);
    fill_inference(fit, design.names, beta, cov);

    const long t = long(panel.periods);
    for (long i = 0; i < long(panel.n()); ++i) {
        double ybar = y_raw.segment(i * t, t).mean();
        Eigen::RowVectorXd xbar = x_raw.middleRows(i * t, t).colwise().mean();
        fit.fixed_effects[panel.countries[std::size_t(i)].code] = ybar - xbar * beta;
    }
    return fit;
}

std::map<std::string, double> vif(const DesignMatrix& X, const std::vector<std::string>& report) {
    X.validate();
    checked_qr(X.X, X.names);
    std::vector<std::string> wanted = report.empty() ? X.names : report;

    std::map<std::string, double> out;
    for (const auto& name : wanted) {
        auto it = std::find(X.names.begin(), X.names.end(), name);
        if (it == X.names.end()) throw ConfigError("vif: no column named '" + name + "'");
        long j = it - X.names.begin();

        Eigen::MatrixXd others(X.n(), X.k());
        std::vector<std::string> other_names;
        long c = 0;
        for (long m = 0; m < X.k(); ++m) {
            if (m == j) continue;
            others.col(c++) = X.X.col(m);
            other_names.push_back(X.names[std::size_t(m)]);
        }
        others.col(c) = Eigen::VectorXd::Ones(X.n());
        other_names.push_back("(intercept)");

        Eigen::VectorXd target = X.X.col(j);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(others);
        qr.setThreshold(kPivotThreshold);
        Eigen::VectorXd b = qr.solve(target);
        double rss = (target - others * b).squaredNorm();
        double tss = (target.array() - target.mean()).square().sum();
        double r2 = tss > 0 ? 1.0 - rss / tss : 0.0;
        out[name] = 1.0 / std::max(1.0 - r2, 1e-300);
    }
    return out;
}

}  // namespace epipanel::regress
