#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "brs/base_codec.hpp"
#include "brs/bitio.hpp"

namespace brs {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'B', 'X', 'T', 'C'};
constexpr std::uint8_t kVersion = 1;

// Scratch space rooted at $BRS_TMPDIR (or the system temp dir); removed on
// scope exit even when the transcode throws.
struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        const char* root = std::getenv("BRS_TMPDIR");
        fs::path base = root && *root ? fs::path(root) : fs::temp_directory_path();
        path = base / ("brs-ext-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter.fetch_add(1)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = tmpl.find(key, pos)) != std::string::npos) {
        tmpl.replace(pos, key.size(), value);
        pos += value.size();
    }
    return tmpl;
}

std::string tail_of_file(const fs::path& p, std::size_t max_bytes = 2048) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "";
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (all.size() > max_bytes) all = all.substr(all.size() - max_bytes);
    return all;
}

void run_command(const std::string& command, const fs::path& log_path) {
    const std::string full = command + " >" + log_path.string() + " 2>&1";
    const int rc = std::system(full.c_str());
    if (rc == -1) throw Error("failed to launch external codec command");
    const int exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    if (exit_code == 127 || exit_code == 126) {
        throw ConfigError("external codec binary not resolvable: '" + command + "'");
    }
    if (exit_code != 0) {
        throw Error("external codec command failed (exit " + std::to_string(exit_code) + "): " +
                    command + "\n" + tail_of_file(log_path));
    }
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read file: " + p.string());
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write: " + p.string());
}

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

std::vector<std::uint8_t> frames_to_raw(const std::vector<Frame>& frames,
                                        const std::string& format) {
    std::vector<std::uint8_t> out;
    if (format == "rgb_planar") {
        for (const Frame& f : frames) {
            auto b = f.to_bytes();
            out.insert(out.end(), b.begin(), b.end());
        }
        return out;
    }
    if (format == "yuv420p") {
        for (const Frame& f : frames) {
            if (f.channels != 3) throw ConfigError("yuv420p interchange needs 3-channel frames");
            if (f.height % 2 || f.width % 2) {
                throw ConfigError("yuv420p interchange needs even frame dims");
            }
            const auto rgb = f.to_bytes();
            const std::size_t plane = static_cast<std::size_t>(f.pixel_count());
            std::vector<std::uint8_t> ybuf(plane);
            std::vector<double> cb(plane), cr(plane);
            for (std::size_t i = 0; i < plane; ++i) {
                const double r = rgb[i], g = rgb[plane + i], b = rgb[2 * plane + i];
                ybuf[i] = clamp_u8(0.299 * r + 0.587 * g + 0.114 * b);
                cb[i] = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
                cr[i] = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
            }
            out.insert(out.end(), ybuf.begin(), ybuf.end());
            for (int y = 0; y < f.height; y += 2)
                for (int x = 0; x < f.width; x += 2) {
                    const std::size_t i00 = static_cast<std::size_t>(y) * f.width + x;
                    const std::size_t i01 = i00 + 1;
                    const std::size_t i10 = i00 + static_cast<std::size_t>(f.width);
                    const std::size_t i11 = i10 + 1;
                    out.push_back(clamp_u8((cb[i00] + cb[i01] + cb[i10] + cb[i11]) / 4.0));
                }
            for (int y = 0; y < f.height; y += 2)
                for (int x = 0; x < f.width; x += 2) {
                    const std::size_t i00 = static_cast<std::size_t>(y) * f.width + x;
                    const std::size_t i01 = i00 + 1;
                    const std::size_t i10 = i00 + static_cast<std::size_t>(f.width);
                    const std::size_t i11 = i10 + 1;
                    out.push_back(clamp_u8((cr[i00] + cr[i01] + cr[i10] + cr[i11]) / 4.0));
                }
        }
        return out;
    }
    throw ConfigError("unknown raw interchange format '" + format +
                      "' (expected rgb_planar|yuv420p)");
}

std::vector<Frame> raw_to_frames(std::span<const std::uint8_t> raw, const std::string& format,
                                 int channels, int h, int w, int frame_count) {
    std::vector<Frame> frames;
    if (format == "rgb_planar") {
        const std::size_t frame_bytes = static_cast<std::size_t>(channels) * h * w;
        if (raw.size() != frame_bytes * static_cast<std::size_t>(frame_count)) {
            throw IntegrityError("external codec: decoded raw size mismatch (got " +
                                 std::to_string(raw.size()) + " bytes, expected " +
                                 std::to_string(frame_bytes * frame_count) + ")");
        }
        for (int i = 0; i < frame_count; ++i) {
            frames.push_back(Frame::from_bytes(
                channels, h, w, raw.subspan(static_cast<std::size_t>(i) * frame_bytes,
                                            frame_bytes)));
        }
        return frames;
    }
    if (format == "yuv420p") {
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        const std::size_t frame_bytes = plane + plane / 2;
        if (raw.size() != frame_bytes * static_cast<std::size_t>(frame_count)) {
            throw IntegrityError("external codec: decoded raw size mismatch");
        }
        for (int i = 0; i < frame_count; ++i) {
            auto fb = raw.subspan(static_cast<std::size_t>(i) * frame_bytes, frame_bytes);
            Frame f = Frame::zeros(3, h, w);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const std::size_t ci =
                        plane + static_cast<std::size_t>(y / 2) * (w / 2) + (x / 2);
                    const double yy = fb[static_cast<std::size_t>(y) * w + x];
                    const double u = static_cast<double>(fb[ci]) - 128.0;
                    const double v = static_cast<double>(fb[ci + plane / 4]) - 128.0;
                    f.at(0, y, x) = std::clamp((yy + 1.402 * v) / 255.0, 0.0, 1.0);
                    f.at(1, y, x) =
                        std::clamp((yy - 0.344136 * u - 0.714136 * v) / 255.0, 0.0, 1.0);
                    f.at(2, y, x) = std::clamp((yy + 1.772 * u) / 255.0, 0.0, 1.0);
                }
            frames.push_back(std::move(f));
        }
        return frames;
    }
    throw ConfigError("unknown raw interchange format '" + format + "'");
}

}  // namespace

BaseCodecResult external_transcode(const std::vector<Frame>& frames, const BaseCodecKind& kind,
                                   double fps) {
    if (frames.empty()) throw ShapeError("external codec: empty frame sequence");
    if (kind.encode_command.empty() || kind.decode_command.empty()) {
        throw ConfigError("external codec requires encode and decode command templates");
    }
    const int c = frames[0].channels, h = frames[0].height, w = frames[0].width;
    (void)fps;

    TempDir tmp;
    const fs::path raw_in = tmp.path / "input.raw";
    const fs::path compressed = tmp.path / "compressed.bin";
    const fs::path raw_out = tmp.path / "output.raw";
    const fs::path log = tmp.path / "codec.log";

    write_file(raw_in, frames_to_raw(frames, kind.raw_format));
    const std::string bitrate = std::to_string(
        static_cast<std::int64_t>(std::llround(std::max(0.0, kind.target_bitrate))));

    std::string enc = substitute(kind.encode_command, "{input}", raw_in.string());
    enc = substitute(enc, "{output}", compressed.string());
    enc = substitute(enc, "{bitrate}", bitrate);
    run_command(enc, log);

    std::string dec = substitute(kind.decode_command, "{input}", compressed.string());
    dec = substitute(dec, "{output}", raw_out.string());
    dec = substitute(dec, "{bitrate}", bitrate);
    run_command(dec, log);

    const std::vector<std::uint8_t> compressed_bytes = read_file(compressed);
    const std::vector<std::uint8_t> raw_bytes = read_file(raw_out);

    BaseCodecResult result;
    result.decoded_frames =
        raw_to_frames(raw_bytes, kind.raw_format, c, h, w, static_cast<int>(frames.size()));
    for (std::size_t i = 0; i < result.decoded_frames.size(); ++i) {
        const Frame& f = result.decoded_frames[i];
        if (f.channels != c || f.height != h || f.width != w) {
            throw IntegrityError("external codec: decoded frame dims mismatch");
        }
    }

    // wrapper so the client can re-run the decode command with matching dims
    std::vector<std::uint8_t>& payload = result.payload;
    payload.insert(payload.end(), kMagic, kMagic + 4);
    put_u8(payload, kVersion);
    put_u32(payload, static_cast<std::uint32_t>(frames.size()));
    put_u32(payload, static_cast<std::uint32_t>(c));
    put_u32(payload, static_cast<std::uint32_t>(h));
    put_u32(payload, static_cast<std::uint32_t>(w));
    put_string(payload, kind.raw_format);
    put_u64(payload, compressed_bytes.size());
    payload.insert(payload.end(), compressed_bytes.begin(), compressed_bytes.end());

    const std::int64_t total_bits = static_cast<std::int64_t>(compressed_bytes.size()) * 8;
    const std::int64_t n = static_cast<std::int64_t>(frames.size());
    // One file for the clip; attribute bits evenly, remainder on the last frame.
    for (std::int64_t i = 0; i < n; ++i) result.per_frame_bits.push_back(total_bits / n);
    result.per_frame_bits.back() += total_bits % n;
    result.payload_bits = total_bits;
    return result;
}

std::vector<Frame> external_decode_payload(const std::vector<std::uint8_t>& payload,
                                           const BaseCodecKind& kind) {
    ByteReader reader(payload);
    auto magic = reader.take(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) {
        throw IntegrityError("external codec payload: bad magic");
    }
    if (reader.u8() != kVersion) throw IntegrityError("external codec payload: bad version");
    const int frame_count = static_cast<int>(reader.u32());
    const int c = static_cast<int>(reader.u32());
    const int h = static_cast<int>(reader.u32());
    const int w = static_cast<int>(reader.u32());
    const std::string format = reader.string();
    const std::uint64_t len = reader.u64();
    auto bytes = reader.take(len);
    if (!reader.done()) throw IntegrityError("external codec payload: trailing bytes");
    if (kind.decode_command.empty()) {
        throw ConfigError("decoding an external-codec container requires a decode command");
    }

    TempDir tmp;
    const fs::path compressed = tmp.path / "compressed.bin";
    const fs::path raw_out = tmp.path / "output.raw";
    const fs::path log = tmp.path / "codec.log";
    write_file(compressed, bytes);
    std::string dec = substitute(kind.decode_command, "{input}", compressed.string());
    dec = substitute(dec, "{output}", raw_out.string());
    dec = substitute(dec, "{bitrate}", "0");
    run_command(dec, log);
    return raw_to_frames(read_file(raw_out), format, c, h, w, frame_count);
}

}  // namespace brs
