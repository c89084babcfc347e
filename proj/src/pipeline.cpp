#include "realonly/pipeline.hpp"

#include "realonly/imagio.hpp"
#include "realonly/spectrum.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace realonly {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs fn(i) for i in [0,n) across the worker pool; results are stored by
// index so aggregation order never depends on completion order.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".ppm" || ext == ".jpg" || ext == ".jpeg";
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest: " + path);
    json j = json::parse(in);
    Manifest m;
    m.seed = j.value("seed", 0ULL);
    for (const auto& e : j.at("entries")) {
        ManifestEntry entry;
        entry.path = e.at("path").get<std::string>();
        entry.label = e.value("label", "unknown");
        if (entry.label != "real" && entry.label != "generated" && entry.label != "unknown")
            throw std::runtime_error("manifest label must be real/generated/unknown: " + entry.label);
        m.entries.push_back(std::move(entry));
    }
    std::vector<std::string> paths;
    for (const auto& e : m.entries) paths.push_back(e.path);
    std::sort(paths.begin(), paths.end());
    if (std::adjacent_find(paths.begin(), paths.end()) != paths.end())
        throw std::runtime_error("manifest contains duplicate paths");
    return m;
}

void Manifest::save(const std::string& path) const {
    json j;
    j["seed"] = seed;
    j["entries"] = json::array();
    for (const auto& e : entries) j["entries"].push_back({{"path", e.path}, {"label", e.label}});
    write_text(path, j.dump(2) + "\n");
}

Manifest Manifest::from_directory(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
    Manifest m;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image_file(e.path()))
            m.entries.push_back({e.path().string(), "unknown"});
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    return m;
}

int PipelineConfig::resolved_threads() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("REALONLY_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config: " + path);
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "extractor") cfg.extractor = ExtractorSpec::parse(value);
        else if (key == "k") cfg.k = std::stoi(value);
        else if (key == "input_policy") {
            if (value == "center_crop_256") cfg.input_policy = InputPolicy::CenterCrop256;
            else if (value == "resize_256") cfg.input_policy = InputPolicy::Resize256;
            else if (value == "native") cfg.input_policy = InputPolicy::Native;
            else throw std::runtime_error("unknown input_policy: " + value);
        } else if (key == "nu") cfg.ocsvm.nu = std::stod(value);
        else if (key == "gamma") cfg.ocsvm.gamma = value == "auto" ? 0.0 : std::stod(value);
        else if (key == "tol") cfg.ocsvm.tol = std::stod(value);
        else if (key == "max_iter") cfg.ocsvm.max_iter = std::stoll(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "threads") cfg.threads = std::stoi(value);
        else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    }
    return cfg;
}

namespace {

Raster apply_input_policy(const Raster& image, const PipelineConfig& config,
                          bool allow_small) {
    switch (config.input_policy) {
        case InputPolicy::CenterCrop256:
            if (image.width >= 256 && image.height >= 256) {
                return image.width == 256 && image.height == 256 ? image
                                                                 : center_crop(image, 256);
            }
            if (allow_small) return image;
            throw std::runtime_error("image smaller than 256 under center_crop_256 policy");
        case InputPolicy::Resize256:
            return image.width == 256 && image.height == 256
                       ? image
                       : resize(image, 256, 256, ResizeMethod::Bilinear);
        case InputPolicy::Native:
            return image;
    }
    throw std::logic_error("unknown input policy");
}

}  // namespace

FeatureVector compute_feature(const Raster& image, const PipelineConfig& config,
                              const std::string& source_path, int spectrum_upsample_to) {
    const Raster prepared = apply_input_policy(image, config, spectrum_upsample_to > 0);
    const Residual residual = extract_residual(prepared, config.extractor, source_path);
    Spectrum amp = merge_channels(residual);
    if (spectrum_upsample_to > 0 &&
        (amp.M() != spectrum_upsample_to || amp.N() != spectrum_upsample_to)) {
        amp.amp =
            resize_plane(amp.amp, spectrum_upsample_to, spectrum_upsample_to, ResizeMethod::Bilinear);
    }
    if (config.k < 1 || config.k > std::min(amp.M(), amp.N()))
        throw std::runtime_error("sampling interval k invalid for image size");
    FeatureVector f = sample_features(enhance(amp), config.k);
    f.extractor = config.extractor.id();
    f.enhanced = true;
    return f;
}

std::vector<std::optional<Eigen::VectorXd>> compute_features(
    const Manifest& manifest, const PipelineConfig& config, std::vector<std::string>* failures) {
    const int n = static_cast<int>(manifest.entries.size());
    std::vector<std::optional<Eigen::VectorXd>> out(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    parallel_for(n, config.resolved_threads(), [&](int i) {
        const std::string& path = manifest.entries[static_cast<std::size_t>(i)].path;
        try {
            const Raster img = load_image(path);
            out[static_cast<std::size_t>(i)] = compute_feature(img, config, path).values;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    });
    if (failures)
        for (const std::string& e : errors)
            if (!e.empty()) failures->push_back(e);
    return out;
}

TrainResult cmd_train(const Manifest& manifest, const PipelineConfig& config,
                      const std::string& model_out) {
    for (const auto& e : manifest.entries)
        if (e.label != "real")
            throw std::runtime_error(
                "training manifest must contain only real-labeled entries, found '" + e.label +
                "' for " + e.path);
    if (manifest.entries.size() < 2)
        throw std::runtime_error("training needs at least 2 real images");

    TrainResult result;
    if (manifest.entries.size() < 100)
        result.warnings.push_back("fewer than 100 training images; accuracy degrades below ~100");

    std::vector<std::string> failures;
    auto features = compute_features(manifest, config, &failures);
    if (!failures.empty())
        throw std::runtime_error("training image failed: " + failures.front());

    std::vector<Eigen::VectorXd> rows;
    rows.reserve(features.size());
    for (auto& f : features) rows.push_back(std::move(*f));

    // Degenerate corpora (all-identical features) still train; flag them.
    bool all_same = true;
    for (std::size_t i = 1; i < rows.size() && all_same; ++i)
        if ((rows[i] - rows[0]).norm() > 0) all_same = false;
    if (all_same) result.warnings.push_back("all training features identical; model is degenerate");

    result.model = train(rows, config.ocsvm, &result.stats);
    result.model.k = config.k;
    result.model.extractor = config.extractor.id();
    result.model.merge = "mean";
    if (!model_out.empty()) save_model(result.model, model_out);
    return result;
}

namespace {

struct ScoredEntry {
    bool ok = false;
    double decision_value = 0.0;
};

std::vector<ScoredEntry> score_entries(const OcSvmModel& model, const Manifest& manifest,
                                       const PipelineConfig& config,
                                       const std::optional<PerturbSpec>& generated_perturb,
                                       std::vector<std::string>* failures) {
    const int n = static_cast<int>(manifest.entries.size());
    std::vector<ScoredEntry> out(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    parallel_for(n, config.resolved_threads(), [&](int i) {
        const ManifestEntry& entry = manifest.entries[static_cast<std::size_t>(i)];
        try {
            Raster img = load_image(entry.path);
            int spectrum_up = 0;
            if (generated_perturb && entry.label == "generated") {
                PerturbSpec spec = *generated_perturb;
                spec.seed += static_cast<std::uint64_t>(i);  // per-image stream
                img = apply(img, spec);
                if (spec.kind == PerturbSpec::Kind::Crop) spectrum_up = 256;
            }
            const FeatureVector f = compute_feature(img, config, entry.path, spectrum_up);
            out[static_cast<std::size_t>(i)].decision_value = decision(model, f.values);
            out[static_cast<std::size_t>(i)].ok = true;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = entry.path + ": " + e.what();
        }
    });
    if (failures)
        for (const std::string& e : errors)
            if (!e.empty()) failures->push_back(e);
    return out;
}

}  // namespace

DetectReport cmd_detect(const OcSvmModel& model, const Manifest& inputs,
                        const PipelineConfig& config, const std::string& report_out) {
    DetectReport report;
    auto scored = score_entries(model, inputs, config, std::nullopt, &report.failures);
    std::ostringstream csv;
    csv << "path,decision_value,verdict\n";
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (!scored[i].ok) continue;
        DetectRow row;
        row.path = inputs.entries[i].path;
        row.decision_value = scored[i].decision_value;
        row.verdict = row.decision_value >= 0.0 ? Verdict::Real : Verdict::Generated;
        (row.verdict == Verdict::Real ? report.n_real : report.n_generated) += 1;
        csv << row.path << "," << format_double(row.decision_value) << ","
            << (row.verdict == Verdict::Real ? "real" : "generated") << "\n";
        report.rows.push_back(std::move(row));
    }
    write_text(report_out, csv.str());
    return report;
}

std::string eval_report_json(const EvalReport& report) {
    json j;
    j["acc"] = report.acc;
    j["ap"] = report.ap;
    j["f1"] = report.f1;
    j["n_real"] = report.n_real;
    j["n_generated"] = report.n_generated;
    j["threshold"] = report.threshold;
    return j.dump(2) + "\n";
}

EvalReport cmd_eval(const OcSvmModel& model, const Manifest& manifest,
                    const PipelineConfig& config, const std::string& report_out,
                    const std::optional<PerturbSpec>& generated_perturb) {
    bool has_real = false, has_generated = false;
    for (const auto& e : manifest.entries) {
        if (e.label == "real") has_real = true;
        else if (e.label == "generated") has_generated = true;
        else throw std::runtime_error("eval manifest must be fully labeled: " + e.path);
    }
    if (!has_real || !has_generated)
        throw std::runtime_error("eval manifest needs both classes (AP undefined otherwise)");

    std::vector<std::string> failures;
    auto scored = score_entries(model, manifest, config, generated_perturb, &failures);
    if (!failures.empty()) throw std::runtime_error("eval image failed: " + failures.front());

    std::vector<Label> preds, labels;
    std::vector<ScoredLabel> sl;
    EvalReport report;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const Label truth =
            manifest.entries[i].label == "generated" ? Label::Generated : Label::Real;
        labels.push_back(truth);
        preds.push_back(scored[i].decision_value >= 0.0 ? Label::Real : Label::Generated);
        sl.push_back({-scored[i].decision_value, truth});
        (truth == Label::Real ? report.n_real : report.n_generated) += 1;
    }
    report.acc = accuracy(preds, labels);
    report.ap = average_precision(sl);
    report.f1 = f1(preds, labels);
    write_text(report_out, eval_report_json(report));
    return report;
}

std::vector<RobustnessRow> cmd_robustness(const OcSvmModel& model, const Manifest& manifest,
                                          const PipelineConfig& config,
                                          const std::vector<PerturbSpec>& grid,
                                          const std::string& report_out) {
    std::vector<RobustnessRow> rows;
    std::ostringstream csv;
    csv << "spec,acc,ap,f1,n_real,n_generated\n";
    for (const PerturbSpec& spec : grid) {
        RobustnessRow row;
        row.spec = spec.to_string();
        row.metrics = cmd_eval(model, manifest, config, "", spec);
        csv << row.spec << "," << format_double(row.metrics.acc) << ","
            << format_double(row.metrics.ap) << "," << format_double(row.metrics.f1) << ","
            << row.metrics.n_real << "," << row.metrics.n_generated << "\n";
        rows.push_back(std::move(row));
    }
    write_text(report_out, csv.str());
    return rows;
}

SpectrumRenderResult cmd_spectrum(const Manifest& inputs, const PipelineConfig& config,
                                  const std::string& out_dir, bool mean_profile_csv) {
    fs::create_directories(out_dir);
    SpectrumRenderResult result;
    std::vector<Spectrum> amps;
    for (const auto& entry : inputs.entries) {
        try {
            const Raster img = load_image(entry.path);
            const Raster prepared = apply_input_policy(img, config, false);
            const Residual residual = extract_residual(prepared, config.extractor, entry.path);
            const Spectrum amp = merge_channels(residual);
            const std::string stem = fs::path(entry.path).stem().string();
            const std::string raw_path = (fs::path(out_dir) / (stem + "_amp.png")).string();
            const std::string enh_path = (fs::path(out_dir) / (stem + "_enh.png")).string();
            save_image(spectrum_to_image(amp, true, true), raw_path, ImageFormat::Png);
            save_image(spectrum_to_image(enhance(amp), true, true), enh_path, ImageFormat::Png);
            result.written.push_back(raw_path);
            result.written.push_back(enh_path);
            amps.push_back(amp);
        } catch (const std::exception& e) {
            result.failures.push_back(entry.path + ": " + e.what());
        }
    }
    if (mean_profile_csv && !amps.empty()) {
        const Eigen::VectorXd profile = mean_profile(amps);
        std::ostringstream csv;
        for (Eigen::Index u = 0; u < profile.size(); ++u)
            csv << u << "," << format_double(profile(u)) << "\n";
        const std::string path = (fs::path(out_dir) / "mean_profile.csv").string();
        write_text(path, csv.str());
        result.written.push_back(path);
    }
    return result;
}

SimulateResult cmd_simulate(const Manifest& inputs, const SimSpec& spec,
                            const std::string& out_dir) {
    SimulateResult result;
    result.real_dir = (fs::path(out_dir) / "real").string();
    result.gen_dir = (fs::path(out_dir) / "gen").string();
    fs::create_directories(result.real_dir);
    fs::create_directories(result.gen_dir);

    json manifest;
    manifest["method"] = spec.method_name();
    manifest["factor"] = spec.factor;
    manifest["seed"] = spec.seed;
    manifest["files"] = json::array();

    std::uint64_t index = 0;
    for (const auto& entry : inputs.entries) {
        Raster img = load_image(entry.path);
        if (img.width > 256 && img.height > 256) img = center_crop(img, 256);
        if (img.width % spec.factor != 0 || img.height % spec.factor != 0)
            throw std::runtime_error("simulate: factor does not divide image size: " + entry.path);
        SimSpec per = spec;
        per.seed = spec.seed + index;
        const Raster gen = simulate(img, per);
        const std::string stem = fs::path(entry.path).stem().string();
        save_image(img, (fs::path(result.real_dir) / (stem + ".png")).string(), ImageFormat::Png);
        save_image(gen, (fs::path(result.gen_dir) / (stem + ".png")).string(), ImageFormat::Png);
        manifest["files"].push_back({{"stem", stem},
                                     {"method", per.method_name()},
                                     {"factor", per.factor},
                                     {"seed", per.seed}});
        ++index;
    }
    result.count = static_cast<int>(index);
    write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return result;
}

BenchReport cmd_bench(const OcSvmModel& model, const Manifest& inputs,
                      const PipelineConfig& config, const std::string& report_out) {
    const int n = static_cast<int>(inputs.entries.size());
    if (n < 100) throw std::runtime_error("bench needs at least 100 images");

    std::atomic<long long> decode_ns{0}, noise_ns{0}, fft_ns{0}, svm_ns{0};
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    parallel_for(n, config.resolved_threads(), [&](int i) {
        const std::string& path = inputs.entries[static_cast<std::size_t>(i)].path;
        auto a = clock::now();
        Raster img = load_image(path);
        img = apply_input_policy(img, config, false);
        auto b = clock::now();
        const Residual residual = extract_residual(img, config.extractor, path);
        auto c = clock::now();
        FeatureVector f = sample_features(enhance(merge_channels(residual)), config.k);
        auto d = clock::now();
        volatile double value = decision(model, f.values);
        (void)value;
        auto e = clock::now();
        decode_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
        noise_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(c - b).count();
        fft_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(d - c).count();
        svm_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(e - d).count();
    });
    const double wall = std::chrono::duration<double>(clock::now() - t0).count();

    BenchReport report;
    report.n_images = n;
    report.images_per_s = n / wall;
    report.decode_s = decode_ns * 1e-9;
    report.noise_s = noise_ns * 1e-9;
    report.fft_s = fft_ns * 1e-9;
    report.svm_s = svm_ns * 1e-9;

    json j;
    j["images_per_s"] = report.images_per_s;
    j["n_images"] = report.n_images;
    j["stages"] = {{"decode", report.decode_s},
                   {"noise", report.noise_s},
                   {"fft", report.fft_s},
                   {"svm", report.svm_s}};
    write_text(report_out, j.dump(2) + "\n");
    return report;
}

}  // namespace realonly
