#include "realonly/imagio.hpp"
#include "realonly/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

using namespace realonly;

Manifest load_inputs(const std::string& inputs) {
    if (std::filesystem::is_directory(inputs)) return Manifest::from_directory(inputs);
    return Manifest::load(inputs);
}

struct CommonOpts {
    std::string config_file;
    std::string extractor;
    int k = 0;
    std::string input_policy;
    double nu = -1.0;
    std::string gamma;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_file, "flat key=value config file");
    cmd->add_option("--extractor", opts.extractor,
                    "residual extractor: gaussian:SIGMA | median:W | wavelet:L,T | external:DIR");
    cmd->add_option("--k", opts.k, "spectrum sampling interval (default 32)");
    cmd->add_option("--input-policy", opts.input_policy, "center_crop_256 | resize_256 | native");
    cmd->add_option("--nu", opts.nu, "one-class nu in (0,1)");
    cmd->add_option("--gamma", opts.gamma, "RBF gamma or 'auto'");
    cmd->add_option("--threads", opts.threads, "worker pool size (REALONLY_THREADS also works)");
    cmd->add_option("--seed", opts.seed, "pipeline seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
}

// flags > config file > defaults
PipelineConfig resolve_config(const CommonOpts& opts) {
    PipelineConfig cfg;
    if (!opts.config_file.empty()) cfg = PipelineConfig::from_file(opts.config_file);
    if (!opts.extractor.empty()) cfg.extractor = ExtractorSpec::parse(opts.extractor);
    if (opts.k > 0) cfg.k = opts.k;
    if (!opts.input_policy.empty()) {
        if (opts.input_policy == "center_crop_256") cfg.input_policy = InputPolicy::CenterCrop256;
        else if (opts.input_policy == "resize_256") cfg.input_policy = InputPolicy::Resize256;
        else if (opts.input_policy == "native") cfg.input_policy = InputPolicy::Native;
        else throw CLI::ValidationError("--input-policy", "unknown policy " + opts.input_policy);
    }
    if (opts.nu > 0) cfg.ocsvm.nu = opts.nu;
    if (!opts.gamma.empty()) cfg.ocsvm.gamma = opts.gamma == "auto" ? 0.0 : std::stod(opts.gamma);
    if (opts.threads > 0) cfg.threads = opts.threads;
    if (opts.seed_set) cfg.seed = opts.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"real-image one-class detector for generated images"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "train the one-class model on real images");
    std::string train_manifest, model_out;
    CommonOpts train_opts;
    train_cmd->add_option("manifest", train_manifest, "manifest JSON with real-labeled entries")
        ->required();
    train_cmd->add_option("-o,--model-out", model_out, "output model JSON")->required();
    add_common(train_cmd, train_opts);

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "classify images with a trained model");
    std::string detect_model, detect_inputs, detect_out;
    CommonOpts detect_opts;
    detect_cmd->add_option("model", detect_model, "model JSON")->required();
    detect_cmd->add_option("inputs", detect_inputs, "image directory or manifest JSON")->required();
    detect_cmd->add_option("-o,--report-out", detect_out, "verdict CSV")->required();
    add_common(detect_cmd, detect_opts);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate on a labeled manifest");
    std::string eval_model, eval_manifest, eval_out;
    CommonOpts eval_opts;
    eval_cmd->add_option("model", eval_model)->required();
    eval_cmd->add_option("manifest", eval_manifest, "labeled manifest JSON")->required();
    eval_cmd->add_option("-o,--report-out", eval_out, "metrics JSON")->required();
    add_common(eval_cmd, eval_opts);

    // robustness
    auto* robust_cmd = app.add_subcommand("robustness", "metrics per perturbation grid point");
    std::string robust_model, robust_manifest, robust_out;
    std::vector<std::string> perturb_specs;
    CommonOpts robust_opts;
    robust_cmd->add_option("model", robust_model)->required();
    robust_cmd->add_option("manifest", robust_manifest)->required();
    robust_cmd->add_option("-o,--report-out", robust_out, "per-spec metrics CSV")->required();
    robust_cmd
        ->add_option("--perturb", perturb_specs, "perturbation spec, e.g. jpeg:85 or gauss:5@seed=7")
        ->required();
    add_common(robust_cmd, robust_opts);

    // spectrum
    auto* spectrum_cmd = app.add_subcommand("spectrum", "render amplitude spectra");
    std::string spectrum_inputs, spectrum_out;
    bool mean_profile_flag = false;
    CommonOpts spectrum_opts;
    spectrum_cmd->add_option("inputs", spectrum_inputs)->required();
    spectrum_cmd->add_option("-o,--out-dir", spectrum_out)->required();
    spectrum_cmd->add_flag("--mean-profile", mean_profile_flag, "write averaged row-profile CSV");
    add_common(spectrum_cmd, spectrum_opts);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "write paired real/gen directories");
    std::string sim_inputs, sim_out, sim_method = "nearest";
    int sim_factor = 4;
    std::uint64_t sim_seed = 0;
    sim_cmd->add_option("inputs", sim_inputs)->required();
    sim_cmd->add_option("-o,--out-dir", sim_out)->required();
    sim_cmd->add_option("--method", sim_method, "nearest | bilinear | transposed_conv");
    sim_cmd->add_option("--factor", sim_factor, "2, 4 or 8");
    sim_cmd->add_option("--seed", sim_seed);

    // perturb
    auto* perturb_cmd = app.add_subcommand("perturb", "apply a post-processing operation");
    std::string perturb_inputs, perturb_out_dir, perturb_spec_text;
    perturb_cmd->add_option("inputs", perturb_inputs)->required();
    perturb_cmd->add_option("-o,--out-dir", perturb_out_dir)->required();
    perturb_cmd->add_option("--perturb", perturb_spec_text)->required();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "end-to-end throughput");
    std::string bench_model, bench_inputs, bench_out;
    CommonOpts bench_opts;
    bench_cmd->add_option("model", bench_model)->required();
    bench_cmd->add_option("inputs", bench_inputs)->required();
    bench_cmd->add_option("-o,--report-out", bench_out, "throughput JSON")->required();
    add_common(bench_cmd, bench_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            const PipelineConfig cfg = resolve_config(train_opts);
            const Manifest manifest = Manifest::load(train_manifest);
            const TrainResult r = cmd_train(manifest, cfg, model_out);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "model written to " << model_out << "\n"
                      << "sum(alpha) = " << r.model.alpha.sum() << "\n"
                      << "support vectors: " << r.stats.n_support << " (" << r.stats.n_margin_support
                      << " on margin)\n"
                      << "training outlier fraction: " << r.stats.outlier_fraction << "\n";
        } else if (*detect_cmd) {
            const PipelineConfig cfg = resolve_config(detect_opts);
            const OcSvmModel model = load_model(detect_model);
            const Manifest inputs = load_inputs(detect_inputs);
            if (inputs.entries.empty()) std::cerr << "warning: no input images\n";
            const DetectReport r = cmd_detect(model, inputs, cfg, detect_out);
            for (const auto& f : r.failures) std::cerr << "skipped: " << f << "\n";
            std::cout << "real: " << r.n_real << "  generated: " << r.n_generated
                      << "  skipped: " << r.failures.size() << "\n";
        } else if (*eval_cmd) {
            const PipelineConfig cfg = resolve_config(eval_opts);
            const EvalReport r =
                cmd_eval(load_model(eval_model), Manifest::load(eval_manifest), cfg, eval_out);
            std::cout << eval_report_json(r);
        } else if (*robust_cmd) {
            const PipelineConfig cfg = resolve_config(robust_opts);
            std::vector<PerturbSpec> grid;
            for (const auto& text : perturb_specs) grid.push_back(PerturbSpec::parse(text));
            const auto rows = cmd_robustness(load_model(robust_model),
                                             Manifest::load(robust_manifest), cfg, grid, robust_out);
            for (const auto& row : rows)
                std::cout << row.spec << "  acc=" << row.metrics.acc << " ap=" << row.metrics.ap
                          << " f1=" << row.metrics.f1 << "\n";
        } else if (*spectrum_cmd) {
            const PipelineConfig cfg = resolve_config(spectrum_opts);
            const auto r =
                cmd_spectrum(load_inputs(spectrum_inputs), cfg, spectrum_out, mean_profile_flag);
            for (const auto& f : r.failures) std::cerr << "skipped: " << f << "\n";
            std::cout << r.written.size() << " files written to " << spectrum_out << "\n";
        } else if (*sim_cmd) {
            const SimSpec spec = SimSpec::parse(sim_method, sim_factor, sim_seed);
            const auto r = cmd_simulate(load_inputs(sim_inputs), spec, sim_out);
            std::cout << r.count << " pairs written to " << sim_out << "\n";
        } else if (*perturb_cmd) {
            const PerturbSpec spec = PerturbSpec::parse(perturb_spec_text);
            const Manifest inputs = load_inputs(perturb_inputs);
            std::filesystem::create_directories(perturb_out_dir);
            PerturbSpec per = spec;
            for (std::size_t i = 0; i < inputs.entries.size(); ++i) {
                per.seed = spec.seed + i;
                const Raster out = apply(load_image(inputs.entries[i].path), per);
                const auto name = std::filesystem::path(inputs.entries[i].path).filename();
                save_image(out, (std::filesystem::path(perturb_out_dir) / name).string());
            }
            std::cout << inputs.entries.size() << " images written to " << perturb_out_dir << "\n";
        } else if (*bench_cmd) {
            const PipelineConfig cfg = resolve_config(bench_opts);
            const BenchReport r =
                cmd_bench(load_model(bench_model), load_inputs(bench_inputs), cfg, bench_out);
            std::cout << "images/s: " << r.images_per_s << "  (decode " << r.decode_s << "s, noise "
                      << r.noise_s << "s, fft " << r.fft_s << "s, svm " << r.svm_s << "s)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
