#pragma once

#include "realonly/metrics.hpp"
#include "realonly/noise.hpp"
#include "realonly/ocsvm.hpp"
#include "realonly/perturb.hpp"
#include "realonly/simgen.hpp"
#include "realonly/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace realonly {

struct ManifestEntry {
    std::string path;
    std::string label = "unknown";  // real | generated | unknown
};

struct Manifest {
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;

    static Manifest load(const std::string& path);
    void save(const std::string& path) const;
    // Every image file directly inside `dir`, sorted by name, label "unknown".
    static Manifest from_directory(const std::string& dir);
};

enum class InputPolicy { CenterCrop256, Resize256, Native };

struct PipelineConfig {
    ExtractorSpec extractor;       // default gaussian sigma 1.0
    int k = 32;
    InputPolicy input_policy = InputPolicy::CenterCrop256;
    OcSvmConfig ocsvm;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = REALONLY_THREADS env or hardware concurrency

    int resolved_threads() const;

    // Flat key=value config file; unknown keys rejected. CLI flags override.
    static PipelineConfig from_file(const std::string& path);
};

// image -> policy -> residual -> merged amplitude spectrum -> enhance ->
// sample. `spectrum_upsample_to` (0 = off) bilinearly resizes the merged
// amplitude plane before enhancement; used by the crop perturbation protocol.
FeatureVector compute_feature(const Raster& image, const PipelineConfig& config,
                              const std::string& source_path = "",
                              int spectrum_upsample_to = 0);

// Parallel over entries; order of results matches order of entries. Failed
// images are reported in `failures` and skipped.
std::vector<std::optional<Eigen::VectorXd>> compute_features(
    const Manifest& manifest, const PipelineConfig& config,
    std::vector<std::string>* failures = nullptr);

struct TrainResult {
    OcSvmModel model;
    TrainStats stats;
    std::vector<std::string> warnings;
};

TrainResult cmd_train(const Manifest& manifest, const PipelineConfig& config,
                      const std::string& model_out);

struct DetectRow {
    std::string path;
    double decision_value = 0.0;
    Verdict verdict = Verdict::Real;
};

struct DetectReport {
    std::vector<DetectRow> rows;
    std::vector<std::string> failures;
    int n_real = 0;
    int n_generated = 0;
};

DetectReport cmd_detect(const OcSvmModel& model, const Manifest& inputs,
                        const PipelineConfig& config, const std::string& report_out);

struct EvalReport {
    double acc = 0.0;
    double ap = 0.0;
    double f1 = 0.0;
    int n_real = 0;
    int n_generated = 0;
    double threshold = 0.0;
};

// `generated_perturb`: applied to generated-labeled entries only.
EvalReport cmd_eval(const OcSvmModel& model, const Manifest& manifest,
                    const PipelineConfig& config, const std::string& report_out,
                    const std::optional<PerturbSpec>& generated_perturb = std::nullopt);

struct RobustnessRow {
    std::string spec;
    EvalReport metrics;
};

std::vector<RobustnessRow> cmd_robustness(const OcSvmModel& model, const Manifest& manifest,
                                          const PipelineConfig& config,
                                          const std::vector<PerturbSpec>& grid,
                                          const std::string& report_out);

struct SpectrumRenderResult {
    std::vector<std::string> written;  // rendered PNG paths
    std::vector<std::string> failures;
};

SpectrumRenderResult cmd_spectrum(const Manifest& inputs, const PipelineConfig& config,
                                  const std::string& out_dir, bool mean_profile_csv);

struct SimulateResult {
    std::string real_dir;
    std::string gen_dir;
    int count = 0;
};

// Writes <out>/real and <out>/gen plus manifest.json recording
// method/factor/seed per file.
SimulateResult cmd_simulate(const Manifest& inputs, const SimSpec& spec,
                            const std::string& out_dir);

struct BenchReport {
    double images_per_s = 0.0;
    double decode_s = 0.0;
    double noise_s = 0.0;
    double fft_s = 0.0;
    double svm_s = 0.0;
    int n_images = 0;
};

BenchReport cmd_bench(const OcSvmModel& model, const Manifest& inputs,
                      const PipelineConfig& config, const std::string& report_out);

std::string eval_report_json(const EvalReport& report);

}  // namespace realonly
