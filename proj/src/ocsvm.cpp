#include "realonly/ocsvm.hpp"

#include <json.hpp>

#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace realonly {

namespace {

constexpr double kAlphaEps = 1e-12;

Eigen::MatrixXd standardized_matrix(const std::vector<Eigen::VectorXd>& features,
                                    const Scaler& scaler) {
    const Eigen::Index l = static_cast<Eigen::Index>(features.size());
    const Eigen::Index d = features.front().size();
    Eigen::MatrixXd X(l, d);
    for (Eigen::Index i = 0; i < l; ++i) X.row(i) = scaler.transform(features[i]).transpose();
    return X;
}

}  // namespace

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
    if (a.size() != b.size()) throw std::invalid_argument("rbf_kernel: dimension mismatch");
    if (!(gamma > 0)) throw std::invalid_argument("rbf_kernel: gamma must be > 0");
    return std::exp(-gamma * (a - b).squaredNorm());
}

Scaler standardize_fit(const std::vector<Eigen::VectorXd>& features) {
    if (features.size() < 2) throw std::invalid_argument("standardize_fit: need >= 2 vectors");
    const Eigen::Index d = features.front().size();
    for (const auto& f : features)
        if (f.size() != d) throw std::invalid_argument("standardize_fit: dimension mismatch");

    const double n = static_cast<double>(features.size());
    Scaler s;
    s.mean = Eigen::VectorXd::Zero(d);
    for (const auto& f : features) s.mean += f;
    s.mean /= n;

    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (const auto& f : features) var += (f - s.mean).cwiseAbs2();
    var /= n;  // population variance
    s.std = var.cwiseSqrt().cwiseMax(1e-12);
    return s;
}

OcSvmModel train(const std::vector<Eigen::VectorXd>& features, const OcSvmConfig& config,
                 TrainStats* stats) {
    const Eigen::Index l = static_cast<Eigen::Index>(features.size());
    if (l < 2) throw std::invalid_argument("ocsvm train: need >= 2 feature vectors");
    if (!(config.nu > 0.0 && config.nu < 1.0))
        throw std::invalid_argument("ocsvm train: nu must be in (0,1)");
    if (config.nu * static_cast<double>(l) < 1.0)
        throw std::invalid_argument("ocsvm train: nu*l must be >= 1");
    if (!(config.tol > 0)) throw std::invalid_argument("ocsvm train: tol must be > 0");

    const Scaler scaler = standardize_fit(features);
    const Eigen::MatrixXd X = standardized_matrix(features, scaler);
    const Eigen::Index d = X.cols();
    const double gamma = config.gamma > 0 ? config.gamma : 1.0 / static_cast<double>(d);
    const double C = 1.0 / (config.nu * static_cast<double>(l));
    const long long max_iter = config.max_iter > 0
                                   ? config.max_iter
                                   : 10LL * static_cast<long long>(l) * static_cast<long long>(l);

    // Full kernel matrix (l is small: hundreds to a few thousand).
    Eigen::MatrixXd K(l, l);
    {
        const Eigen::VectorXd sq = X.rowwise().squaredNorm();
        K.noalias() = X * X.transpose();
        for (Eigen::Index i = 0; i < l; ++i)
            for (Eigen::Index j = 0; j < l; ++j)
                K(i, j) = std::exp(-gamma * std::max(0.0, sq(i) + sq(j) - 2.0 * K(i, j)));
    }

    // Feasible start: first floor(nu*l) coefficients at the box, remainder on
    // the next one.
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(l);
    {
        const double nl = config.nu * static_cast<double>(l);
        const Eigen::Index full = static_cast<Eigen::Index>(std::floor(nl));
        for (Eigen::Index i = 0; i < full && i < l; ++i) alpha(i) = C;
        if (full < l) alpha(full) = 1.0 - static_cast<double>(full) * C;
    }

    Eigen::VectorXd g = K * alpha;  // gradient of 1/2 a^T K a

    long long iter = 0;
    double violation = std::numeric_limits<double>::infinity();
    while (iter < max_iter) {
        // Maximal violator on the increase side, second-order partner on the
        // decrease side.
        Eigen::Index i = -1, low = -1;
        double gi = std::numeric_limits<double>::infinity();
        double glow = -std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < l; ++t) {
            if (alpha(t) < C - kAlphaEps && g(t) < gi) {
                gi = g(t);
                i = t;
            }
            if (alpha(t) > kAlphaEps && g(t) > glow) {
                glow = g(t);
                low = t;
            }
        }
        violation = (i >= 0 && low >= 0) ? glow - gi : 0.0;
        if (violation <= config.tol) break;

        Eigen::Index j = -1;
        double best_gain = -1.0;
        for (Eigen::Index t = 0; t < l; ++t) {
            if (alpha(t) <= kAlphaEps || g(t) <= gi) continue;
            const double diff = g(t) - gi;
            const double eta = std::max(K(i, i) + K(t, t) - 2.0 * K(i, t), 1e-12);
            const double gain = diff * diff / (2.0 * eta);
            if (gain > best_gain) {
                best_gain = gain;
                j = t;
            }
        }
        if (j < 0) break;

        const double eta = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), 1e-12);
        double delta = (g(j) - g(i)) / eta;
        delta = std::min(delta, std::min(C - alpha(i), alpha(j)));

#ifndef NDEBUG
        const double dobj = delta * (g(i) - g(j)) + 0.5 * delta * delta * eta;
        assert(dobj <= 1e-12 && "dual objective must not increase");
#endif
        alpha(i) += delta;
        alpha(j) -= delta;
        g += delta * (K.col(i) - K.col(j));
        ++iter;
    }

    if (violation > config.tol) {
        throw std::runtime_error("ocsvm train: no convergence within max_iter (KKT residual " +
                                 std::to_string(violation) + ")");
    }

    // rho from margin support vectors; bound-implied midpoint otherwise.
    double rho;
    {
        double sum = 0.0;
        int margin = 0;
        double upper = -std::numeric_limits<double>::infinity();  // from alpha = C side
        double lower = std::numeric_limits<double>::infinity();   // from alpha = 0 side
        for (Eigen::Index t = 0; t < l; ++t) {
            if (alpha(t) > kAlphaEps && alpha(t) < C - kAlphaEps) {
                sum += g(t);
                ++margin;
            } else if (alpha(t) >= C - kAlphaEps) {
                upper = std::max(upper, g(t));
            } else {
                lower = std::min(lower, g(t));
            }
        }
        if (margin > 0) {
            rho = sum / margin;
        } else if (std::isfinite(upper) && std::isfinite(lower)) {
            rho = 0.5 * (upper + lower);
        } else if (std::isfinite(upper)) {
            rho = upper;
        } else {
            rho = lower;
        }

        if (stats) {
            stats->iterations = iter;
            stats->kkt_residual = violation;
            stats->n_margin_support = margin;
            int outliers = 0;
            for (Eigen::Index t = 0; t < l; ++t)
                if (g(t) - rho < 0) ++outliers;
            stats->outlier_fraction = static_cast<double>(outliers) / static_cast<double>(l);
        }
    }

    OcSvmModel model;
    model.gamma = gamma;
    model.nu = config.nu;
    model.rho = rho;
    model.scaler = scaler;

    std::vector<Eigen::Index> sv_idx;
    for (Eigen::Index t = 0; t < l; ++t)
        if (alpha(t) > kAlphaEps) sv_idx.push_back(t);
    model.sv.resize(static_cast<Eigen::Index>(sv_idx.size()), d);
    model.alpha.resize(static_cast<Eigen::Index>(sv_idx.size()));
    for (std::size_t r = 0; r < sv_idx.size(); ++r) {
        model.sv.row(static_cast<Eigen::Index>(r)) = X.row(sv_idx[r]);
        model.alpha(static_cast<Eigen::Index>(r)) = alpha(sv_idx[r]);
    }
    if (stats) stats->n_support = static_cast<int>(sv_idx.size());
    return model;
}

double decision(const OcSvmModel& model, const Eigen::VectorXd& feature) {
    if (feature.size() != model.sv.cols())
        throw std::invalid_argument("ocsvm decision: dimension mismatch");
    if (model.version != "realonly-ocsvm/1")
        throw std::runtime_error("ocsvm decision: unsupported model version " + model.version);
    const Eigen::VectorXd z = model.scaler.transform(feature);
    const Eigen::VectorXd d2 =
        (model.sv.rowwise() - z.transpose()).rowwise().squaredNorm();
    return ((-model.gamma * d2.array()).exp() * model.alpha.array()).sum() - model.rho;
}

Verdict predict(const OcSvmModel& model, const Eigen::VectorXd& feature) {
    return decision(model, feature) >= 0.0 ? Verdict::Real : Verdict::Generated;
}

std::string model_to_json(const OcSvmModel& model) {
    nlohmann::json j;
    j["version"] = model.version;
    j["gamma"] = model.gamma;
    j["nu"] = model.nu;
    j["rho"] = model.rho;
    j["k"] = model.k;
    j["extractor"] = model.extractor;
    j["merge"] = model.merge;
    j["scaler_mean"] = std::vector<double>(model.scaler.mean.begin(), model.scaler.mean.end());
    j["scaler_std"] = std::vector<double>(model.scaler.std.begin(), model.scaler.std.end());
    nlohmann::json sv = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.sv.rows(); ++r) {
        sv.push_back(std::vector<double>(model.sv.row(r).begin(), model.sv.row(r).end()));
    }
    j["sv"] = std::move(sv);
    j["alpha"] = std::vector<double>(model.alpha.begin(), model.alpha.end());
    return j.dump(2) + "\n";
}

OcSvmModel model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    OcSvmModel m;
    m.version = j.at("version").get<std::string>();
    if (m.version != "realonly-ocsvm/1")
        throw std::runtime_error("model version mismatch: " + m.version);
    m.gamma = j.at("gamma").get<double>();
    m.nu = j.at("nu").get<double>();
    m.rho = j.at("rho").get<double>();
    m.k = j.at("k").get<int>();
    m.extractor = j.at("extractor").get<std::string>();
    m.merge = j.at("merge").get<std::string>();
    auto mean = j.at("scaler_mean").get<std::vector<double>>();
    auto sd = j.at("scaler_std").get<std::vector<double>>();
    m.scaler.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.scaler.std = Eigen::Map<Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    const auto& sv = j.at("sv");
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    const Eigen::Index rows = static_cast<Eigen::Index>(sv.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(mean.size());
    m.sv.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        auto row = sv[static_cast<std::size_t>(r)].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw std::runtime_error("model sv dimension mismatch");
        m.sv.row(r) = Eigen::Map<Eigen::VectorXd>(row.data(), cols).transpose();
    }
    m.alpha =
        Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    return m;
}

void save_model(const OcSvmModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << model_to_json(model);
}

OcSvmModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace realonly
