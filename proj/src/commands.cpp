#include "brs/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "brs/bitio.hpp"

#include "brs/dataset.hpp"

namespace brs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

void write_snapshot(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    write_text((fs::path(cfg.out_dir) / "resolved-config.txt").string(), cfg.resolved_text());
}

json report_to_json(const BitrateReport& r, const std::vector<std::string>& warnings = {}) {
    json j{{"base_bits", r.base_bits},
           {"residual_bits", r.residual_bits},
           {"header_bits", r.header_bits},
           {"total_bits", r.total_bits()},
           {"duration_seconds", r.duration_seconds},
           {"total_mbps", r.total_mbps},
           {"bits_per_pixel", r.bits_per_pixel}};
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

// Fixes a concrete toy quality whenever the config asks for rate-derived
// quality, so the snapshot alone reproduces the run.
RunConfig resolve_quality(RunConfig cfg, const std::vector<Frame>& frames, double fps) {
    if (cfg.codec == "toy" && cfg.quality <= 0.0) {
        const double duration = frames.size() / fps;
        const std::int64_t target = static_cast<std::int64_t>(
            std::llround(cfg.split * cfg.budget_mbps * 1e6 * duration));
        cfg.quality = toy_quality_for_target_bits(frames, target);
    }
    return cfg;
}

}  // namespace

std::vector<ResidualFrame> pad_residuals(const std::vector<ResidualFrame>& residuals,
                                         int multiple) {
    std::vector<ResidualFrame> out;
    out.reserve(residuals.size());
    for (const auto& r : residuals) {
        ResidualFrame p;
        p.orig_height = r.orig_height;
        p.orig_width = r.orig_width;
        p.data = reflect_pad_to_multiple(r.data, multiple);
        out.push_back(std::move(p));
    }
    return out;
}

TrainOutput cmd_train(const RunConfig& raw_cfg) {
    if (raw_cfg.manifest.empty()) throw ConfigError("train: config needs a manifest");
    const Manifest manifest = load_manifest(raw_cfg.manifest);
    const std::vector<Frame> frames = load_frames(manifest);
    const RunConfig cfg = resolve_quality(raw_cfg, frames, manifest.fps);
    write_snapshot(cfg);

    const AutoencoderConfig acfg = cfg.autoencoder_config();
    ResidualData data =
        materialize_residuals(manifest, frames, cfg.codec_kind(), cfg.effective_cache_dir());
    const std::vector<ResidualFrame> padded =
        pad_residuals(data.residuals, acfg.downsample_factor());

    TrainResult result = train_autoencoder(padded, cfg.train_config(), acfg);

    TrainOutput out;
    out.checkpoint_path = (fs::path(cfg.out_dir) / "checkpoint.bin").string();
    save_checkpoint(out.checkpoint_path, result.params);
    out.fingerprint = model_fingerprint(result.params);
    out.loss_history = result.loss_history;

    std::ostringstream csv;
    csv.precision(12);
    csv << "epoch,loss,lr,tau\n";
    for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
        csv << e << "," << result.loss_history[e] << "," << result.lr_history[e] << ","
            << result.tau_history[e] << "\n";
    }
    write_text((fs::path(cfg.out_dir) / "loss.csv").string(), csv.str());
    return out;
}

EncodeOutput cmd_encode(const RunConfig& raw_cfg) {
    if (raw_cfg.manifest.empty()) throw ConfigError("encode: config needs a manifest");
    const Manifest manifest = load_manifest(raw_cfg.manifest);
    const std::vector<Frame> frames = load_frames(manifest);
    const RunConfig cfg = resolve_quality(raw_cfg, frames, manifest.fps);
    write_snapshot(cfg);

    ModelParams params;
    ModelParams* params_ptr = nullptr;
    if (cfg.split < 1.0) {
        if (cfg.checkpoint.empty()) {
            throw ConfigError("encode: split < 1 needs a trained checkpoint");
        }
        params = load_checkpoint(cfg.checkpoint);
        params_ptr = &params;
    }

    EncodeResult result =
        server_encode(frames, manifest.fps, cfg.budget_mbps * 1e6, cfg.split, cfg.codec_kind(),
                      params_ptr, cfg.group_bits);

    EncodeOutput out;
    out.container_path = (fs::path(cfg.out_dir) / "stream.brsc").string();
    write_container(out.container_path, result.container);
    out.report = result.report;
    out.warnings = result.warnings;
    write_text((fs::path(cfg.out_dir) / "encode-report.json").string(),
               report_to_json(result.report, result.warnings).dump(2) + "\n");
    return out;
}

DecodeOutput cmd_decode(const RunConfig& cfg) {
    if (cfg.container.empty()) throw ConfigError("decode: config needs a container path");
    write_snapshot(cfg);
    const StreamContainer container = read_container(cfg.container);

    bool any_residual = false;
    for (const auto& p : container.residual_payloads) any_residual |= !p.empty();
    ModelParams params;
    ModelParams* params_ptr = nullptr;
    if (any_residual) {
        if (cfg.checkpoint.empty()) {
            throw ConfigError("decode: container carries residuals, config needs a checkpoint");
        }
        params = load_checkpoint(cfg.checkpoint);
        params_ptr = &params;
    }
    BaseCodecKind adapter = cfg.codec_kind();

    std::vector<Frame> frames = client_decode(container, params_ptr, &adapter);

    DecodeOutput out;
    out.frames_dir = (fs::path(cfg.out_dir) / "frames").string();
    fs::create_directories(out.frames_dir);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "frame_%05zu.rgb", i);
        write_frame_file((fs::path(out.frames_dir) / name).string(), frames[i]);
        names.push_back(std::string("frames/") + name);
    }
    write_manifest((fs::path(cfg.out_dir) / "decoded-manifest.txt").string(),
                   container.header.fps, container.header.channels, container.header.height,
                   container.header.width, names);
    out.frame_count = static_cast<int>(frames.size());
    out.report = bitrate_account(container, container.header.fps);
    write_text((fs::path(cfg.out_dir) / "decode-report.json").string(),
               report_to_json(out.report).dump(2) + "\n");
    return out;
}

EncodeResult encode_base_only_at_total_bits(const std::vector<Frame>& frames, double fps,
                                            std::int64_t target_total_bits, int group_bits,
                                            int iterations) {
    double llo = std::log(1.0 / 64.0), lhi = std::log(64.0);
    double best_q = std::exp(llo);
    std::int64_t best_err = std::numeric_limits<std::int64_t>::max();
    BaseCodecKind kind;
    kind.variant = CodecVariant::toy_dct;
    const double budget = static_cast<double>(target_total_bits) / (frames.size() / fps);
    for (int i = 0; i < iterations; ++i) {
        kind.quality = std::exp(0.5 * (llo + lhi));
        EncodeResult r =
            server_encode(frames, fps, budget, 1.0, kind, nullptr, group_bits);
        const std::int64_t err = std::llabs(r.report.total_bits() - target_total_bits);
        if (err < best_err) {
            best_err = err;
            best_q = kind.quality;
        }
        if (r.report.total_bits() < target_total_bits) {
            llo = std::log(kind.quality);
        } else {
            lhi = std::log(kind.quality);
        }
    }
    kind.quality = best_q;
    return server_encode(frames, fps, budget, 1.0, kind, nullptr, group_bits);
}

std::vector<BenchmarkRow> cmd_benchmark(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw ConfigError("benchmark: config needs a manifest");
    if (cfg.rate_points.empty()) {
        throw ConfigError("benchmark: config needs at least one rate_point line");
    }
    if (cfg.codec != "toy") {
        throw ConfigError("benchmark: equal-rate baselines are only defined for the toy codec");
    }
    std::string missing;
    for (const auto& rp : cfg.rate_points) {
        if (!fs::exists(rp.checkpoint)) missing += "\n  " + rp.checkpoint;
    }
    if (!missing.empty()) throw ConfigError("benchmark: missing checkpoints:" + missing);

    const Manifest manifest = load_manifest(cfg.manifest);
    const std::vector<Frame> frames = load_frames(manifest);
    write_snapshot(cfg);

    std::vector<BenchmarkRow> rows;
    json summary = json::array();
    int point_index = 0;
    for (const auto& rp : cfg.rate_points) {
        ModelParams params = load_checkpoint(rp.checkpoint);

        BaseCodecKind kind;
        kind.variant = CodecVariant::toy_dct;
        kind.quality = cfg.quality;  // <= 0 requests the rate search
        EncodeResult pipe = server_encode(frames, manifest.fps, rp.mbps * 1e6, rp.split, kind,
                                          &params, cfg.group_bits);
        std::vector<Frame> pipe_out = client_decode(pipe.container, &params);
        QualityScore pipe_score = score_sequence(frames, pipe_out);

        // Base codec alone, matched to the pipeline's realized total.
        EncodeResult base = encode_base_only_at_total_bits(
            frames, manifest.fps, pipe.report.total_bits(), cfg.group_bits);
        std::vector<Frame> base_out = client_decode(base.container, nullptr);
        QualityScore base_score = score_sequence(frames, base_out);

        const std::string tag = std::to_string(point_index++);
        write_scores_csv((fs::path(cfg.out_dir) / ("scores-baseline-" + tag + ".csv")).string(),
                         base_score);
        write_scores_csv((fs::path(cfg.out_dir) / ("scores-pipeline-" + tag + ".csv")).string(),
                         pipe_score);
        summary.push_back({{"target_mbps", rp.mbps},
                           {"baseline", json::parse(scores_json(base_score))},
                           {"pipeline", json::parse(scores_json(pipe_score))}});

        rows.push_back({"baseline", rp.mbps, 1.0, base.report.total_mbps,
                        base.report.bits_per_pixel, base_score.mean_psnr, base_score.mean_ssim,
                        ""});
        rows.push_back({"pipeline", rp.mbps, rp.split, pipe.report.total_mbps,
                        pipe.report.bits_per_pixel, pipe_score.mean_psnr, pipe_score.mean_ssim,
                        rp.checkpoint});
    }
    write_text((fs::path(cfg.out_dir) / "benchmark-summary.json").string(),
               summary.dump(2) + "\n");

    std::ostringstream csv;
    csv.precision(10);
    csv << "label,target_mbps,split,realized_mbps,bits_per_pixel,mean_psnr,mean_ssim,checkpoint\n";
    for (const auto& r : rows) {
        csv << r.label << "," << r.target_mbps << "," << r.split << "," << r.realized_mbps << ","
            << r.bits_per_pixel << "," << r.mean_psnr << "," << r.mean_ssim << "," << r.checkpoint
            << "\n";
    }
    write_text((fs::path(cfg.out_dir) / "benchmark.csv").string(), csv.str());
    return rows;
}

std::vector<CompareRow> cmd_compare_binarizers(const RunConfig& raw_cfg) {
    if (raw_cfg.manifest.empty()) throw ConfigError("compare-binarizers: config needs a manifest");
    const Manifest manifest = load_manifest(raw_cfg.manifest);
    const std::vector<Frame> frames = load_frames(manifest);
    const RunConfig cfg = resolve_quality(raw_cfg, frames, manifest.fps);
    write_snapshot(cfg);

    const int holdout =
        cfg.holdout > 0 ? cfg.holdout : std::max(1, static_cast<int>(frames.size()) / 4);
    if (holdout >= static_cast<int>(frames.size())) {
        throw ConfigError("compare-binarizers: holdout leaves no training frames");
    }

    ResidualData data =
        materialize_residuals(manifest, frames, cfg.codec_kind(), cfg.effective_cache_dir());
    const std::size_t n_train = frames.size() - static_cast<std::size_t>(holdout);

    const std::string csv_path = (fs::path(cfg.out_dir) / "compare-binarizers.csv").string();
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw Error("cannot write " + csv_path);
    csv << "variant,mean_psnr,mean_ssim,final_loss\n";
    csv.precision(10);

    std::vector<CompareRow> rows;
    for (int v = 0; v < kBinarizerVariantCount; ++v) {
        AutoencoderConfig acfg = cfg.autoencoder_config();
        acfg.binarizer = binarizer_variant(v);

        std::vector<ResidualFrame> train_set(data.residuals.begin(),
                                             data.residuals.begin() +
                                                 static_cast<std::ptrdiff_t>(n_train));
        TrainResult trained = train_autoencoder(pad_residuals(train_set, acfg.downsample_factor()),
                                                cfg.train_config(), acfg);

        std::vector<Frame> ref, out;
        for (std::size_t i = n_train; i < frames.size(); ++i) {
            ResidualFrame padded;
            padded.orig_height = data.residuals[i].orig_height;
            padded.orig_width = data.residuals[i].orig_width;
            padded.data =
                reflect_pad_to_multiple(data.residuals[i].data, acfg.downsample_factor());
            Tensor e = encode(padded, trained.params, Mode::eval);
            Tensor z = activate(e, acfg.binarizer, trained.params.config.gumbel, Mode::eval);
            Tensor codes = binarize_forward(z, acfg.binarizer, Mode::eval);
            ResidualFrame rhat = decode(codes, trained.params, padded.orig_height,
                                        padded.orig_width, Mode::eval);
            ref.push_back(frames[i]);
            out.push_back(add_residual(data.decoded[i], rhat));
        }
        QualityScore score = score_sequence(ref, out);
        CompareRow row{std::string(binarizer_name(acfg.binarizer)), score.mean_psnr,
                       score.mean_ssim, trained.loss_history.back()};
        rows.push_back(row);
        // flush after every variant so partial results survive an abort
        csv << row.variant << "," << row.mean_psnr << "," << row.mean_ssim << ","
            << row.final_loss << "\n";
        csv.flush();
    }
    return rows;
}

std::string cmd_inspect(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("inspect: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 4) throw IntegrityError("inspect: file too short");

    std::ostringstream os;
    const std::string magic(bytes.begin(), bytes.begin() + 4);
    if (magic == "BRSC") {
        const StreamContainer c = parse_container(bytes);
        const auto& h = c.header;
        os << "container version " << int(h.version) << "\n"
           << "frames " << h.frame_count << " dims " << h.channels << "x" << h.height << "x"
           << h.width << " fps " << h.fps << "\n"
           << "codec " << (h.codec_variant == CodecVariant::toy_dct ? "toy" : "external")
           << " quality " << h.codec_quality << "\n"
           << "autoencoder L=" << h.layers << " C=" << h.latent_channels << " binarizer "
           << (h.binarizer.empty() ? "-" : h.binarizer) << "\n"
           << "checkpoint fingerprint " << h.checkpoint_fingerprint << "\n"
           << "base payload " << c.base_payload.size() << " bytes\n";
        std::size_t residual = 0;
        for (const auto& p : c.residual_payloads) residual += p.size();
        os << "residual payloads " << residual << " bytes over " << c.residual_payloads.size()
           << " frames\n";
        const BitrateReport r = bitrate_account(c, h.fps);
        os << "total " << r.total_mbps << " Mbps, " << r.bits_per_pixel << " bits/px\n";
    } else if (magic == "BRAE") {
        const ModelParams p = deserialize_model(bytes);
        os << "checkpoint: L=" << p.config.layers << " C=" << p.config.channels
           << " input_channels=" << p.config.input_channels << " binarizer "
           << binarizer_name(p.config.binarizer) << "\n"
           << "gumbel tau " << p.config.gumbel.tau << " (initial " << p.config.gumbel.tau_initial
           << ", anneal " << p.config.gumbel.anneal_factor << ", floor "
           << p.config.gumbel.tau_floor << ")\n"
           << "fingerprint " << model_fingerprint(p) << "\n";
        std::int64_t count = 0;
        ModelParams copy = p;
        for (Tensor* t : copy.trainable()) count += t->numel();
        os << "trainable parameters " << count << "\n";
    } else if (magic == "BTDC") {
        ByteReader reader(bytes);
        reader.take(4);
        os << "toy codec clip version " << int(reader.u8());
        const auto frames = reader.u32();
        const auto c = reader.u32(), h = reader.u32(), w = reader.u32();
        os << ", " << frames << " frames, dims " << c << "x" << h << "x" << w << ", quality "
           << reader.f64() << "\n";
    } else if (bytes[0] == kPayloadMagic) {
        const EncodedPayload p = parse_payload(bytes);
        os << "encoded payload: k=" << p.group_bits << " symbols " << p.symbol_count << " bits "
           << p.bit_count << (p.raw ? " (raw fallback)" : "") << " table "
           << p.table.lengths.size() << " entries\n";
    } else {
        throw IntegrityError("inspect: unrecognized file magic");
    }
    return os.str();
}

}  // namespace brs
