#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace realonly {

struct OcSvmConfig {
    double nu = 0.1;          // in (0,1): bounds training-outlier fraction
    double gamma = 0.0;       // 0 = auto (1/d on standardized features)
    double tol = 1e-6;        // KKT stopping tolerance
    long long max_iter = 0;   // 0 = 10 * l^2 pair updates
};

struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;  // population std, floored at 1e-12

    Eigen::VectorXd transform(const Eigen::VectorXd& x) const {
        return (x - mean).cwiseQuotient(std);
    }
    Eigen::VectorXd inverse_transform(const Eigen::VectorXd& z) const {
        return z.cwiseProduct(std) + mean;
    }
};

struct OcSvmModel {
    Eigen::MatrixXd sv;       // rows = support vectors, stored standardized
    Eigen::VectorXd alpha;    // matching coefficients, all > 0
    double rho = 0.0;
    double gamma = 0.0;
    double nu = 0.0;
    Scaler scaler;
    int k = 0;                // feature sampling interval
    std::string extractor;
    std::string merge = "mean";
    std::string version = "realonly-ocsvm/1";
};

struct TrainStats {
    long long iterations = 0;
    double kkt_residual = 0.0;
    int n_support = 0;
    int n_margin_support = 0;     // 0 < alpha < 1/(nu*l)
    double outlier_fraction = 0;  // training points with decision < 0
};

enum class Verdict { Real, Generated };

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma);

Scaler standardize_fit(const std::vector<Eigen::VectorXd>& features);

// Solves min 1/2 a^T K a  s.t. 0 <= a_i <= 1/(nu*l), sum a = 1 by pairwise
// SMO updates on standardized features. Throws on non-convergence.
OcSvmModel train(const std::vector<Eigen::VectorXd>& features, const OcSvmConfig& config,
                 TrainStats* stats = nullptr);

// sum_i alpha_i K(x, t_i) - rho; >= 0 means inside the real-image subspace.
double decision(const OcSvmModel& model, const Eigen::VectorXd& feature);

Verdict predict(const OcSvmModel& model, const Eigen::VectorXd& feature);

// Canonical JSON, round-trip exact.
void save_model(const OcSvmModel& model, const std::string& path);
OcSvmModel load_model(const std::string& path);
std::string model_to_json(const OcSvmModel& model);
OcSvmModel model_from_json(const std::string& text);

}  // namespace realonly
