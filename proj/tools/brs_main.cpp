#include <iostream>

#include <CLI11.hpp>

#include "brs/commands.hpp"

namespace {

// exit codes: 0 ok, 2 config error, 3 runtime error, 4 integrity error
constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;
constexpr int kIntegrityExit = 4;

brs::RunConfig load(const std::string& config_path, const std::string& manifest,
                    const std::string& out_dir, const std::string& checkpoint,
                    const std::string& container, const std::string& binarizer) {
    brs::RunConfig cfg = config_path.empty() ? brs::RunConfig{}
                                             : brs::RunConfig::from_file(config_path);
    if (!manifest.empty()) cfg.manifest = manifest;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
    if (!container.empty()) cfg.container = container;
    if (!binarizer.empty()) cfg.binarizer = binarizer;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary residual streaming pipeline"};
    app.require_subcommand(1);

    std::string config_path, manifest, out_dir, checkpoint, container, binarizer, inspect_path;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("-c,--config", config_path, "flat key-value config file");
        if (needs_config) opt->required();
        cmd->add_option("--manifest", manifest, "override the config manifest path");
        cmd->add_option("--out", out_dir, "override the config output directory");
        cmd->add_option("--checkpoint", checkpoint, "override the config checkpoint path");
        cmd->add_option("--container", container, "override the config container path");
        cmd->add_option("--binarizer", binarizer,
                        "override the binarizer (hardtanh|tanh|sigmoid|stochastic|gumbel)");
    };

    CLI::App* train = app.add_subcommand("train", "train the residual autoencoder");
    add_common(train, true);
    CLI::App* encode = app.add_subcommand("encode", "encode a video into a stream container");
    add_common(encode, true);
    CLI::App* decode = app.add_subcommand("decode", "decode a stream container to frames");
    add_common(decode, true);
    CLI::App* benchmark = app.add_subcommand("benchmark", "rate/quality table vs base codec");
    add_common(benchmark, true);
    CLI::App* compare =
        app.add_subcommand("compare-binarizers", "train and score every binarizer variant");
    add_common(compare, true);
    CLI::App* inspect = app.add_subcommand("inspect", "dump container/checkpoint headers");
    inspect->add_option("file", inspect_path, "container, checkpoint or payload file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            auto out = brs::cmd_train(load(config_path, manifest, out_dir, checkpoint, container, binarizer));
            std::cout << "checkpoint " << out.checkpoint_path << "\n"
                      << "fingerprint " << out.fingerprint << "\n"
                      << "final loss " << out.loss_history.back() << " after "
                      << out.loss_history.size() << " epochs\n";
        } else if (*encode) {
            auto out = brs::cmd_encode(load(config_path, manifest, out_dir, checkpoint, container, binarizer));
            std::cout << "container " << out.container_path << "\n"
                      << "base_bits " << out.report.base_bits << " residual_bits "
                      << out.report.residual_bits << " header_bits " << out.report.header_bits
                      << "\n"
                      << "total " << out.report.total_mbps << " Mbps, "
                      << out.report.bits_per_pixel << " bits/px\n";
            for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
        } else if (*decode) {
            auto out = brs::cmd_decode(load(config_path, manifest, out_dir, checkpoint, container, binarizer));
            std::cout << out.frame_count << " frames -> " << out.frames_dir << "\n"
                      << "total " << out.report.total_mbps << " Mbps, "
                      << out.report.bits_per_pixel << " bits/px\n";
        } else if (*benchmark) {
            auto rows =
                brs::cmd_benchmark(load(config_path, manifest, out_dir, checkpoint, container, binarizer));
            for (const auto& r : rows) {
                std::cout << r.label << " @" << r.target_mbps << "Mbps split " << r.split
                          << ": realized " << r.realized_mbps << " Mbps, psnr " << r.mean_psnr
                          << " dB, ssim " << r.mean_ssim << "\n";
            }
        } else if (*compare) {
            auto rows = brs::cmd_compare_binarizers(
                load(config_path, manifest, out_dir, checkpoint, container, binarizer));
            for (const auto& r : rows) {
                std::cout << r.variant << ": psnr " << r.mean_psnr << " dB, ssim " << r.mean_ssim
                          << ", final loss " << r.final_loss << "\n";
            }
        } else if (*inspect) {
            std::cout << brs::cmd_inspect(inspect_path);
        }
    } catch (const brs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const brs::IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kIntegrityExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeExit;
    }
    return 0;
}
