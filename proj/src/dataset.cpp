#include "brs/dataset.hpp"

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brs/bitio.hpp"

namespace brs {

namespace fs = std::filesystem;

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    Manifest m;
    m.directory = fs::path(path).parent_path().string();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream is(line);
        std::string key;
        if (!(is >> key) || key[0] == '#') continue;
        if (key == "fps") {
            if (!(is >> m.fps)) throw ConfigError(path + ":" + std::to_string(lineno) + ": bad fps");
        } else if (key == "dims") {
            if (!(is >> m.channels >> m.height >> m.width)) {
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": dims needs channels height width");
            }
        } else if (key == "frame") {
            std::string p;
            if (!(is >> p)) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": frame needs a path");
            }
            m.frame_paths.push_back(p);
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (m.fps <= 0) throw ConfigError("manifest " + path + " must declare a positive fps");
    if (m.channels <= 0 || m.height <= 0 || m.width <= 0) {
        throw ConfigError("manifest " + path + " must declare dims");
    }
    if (m.frame_paths.empty()) throw ConfigError("manifest " + path + " lists no frames");
    return m;
}

void write_manifest(const std::string& path, double fps, int channels, int height, int width,
                    const std::vector<std::string>& frame_paths) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write manifest: " + path);
    out << "fps " << fps << "\n";
    out << "dims " << channels << " " << height << " " << width << "\n";
    for (const auto& p : frame_paths) out << "frame " << p << "\n";
}

std::vector<Frame> load_frames(const Manifest& manifest) {
    std::vector<Frame> frames;
    frames.reserve(manifest.frame_paths.size());
    for (const auto& rel : manifest.frame_paths) {
        const fs::path p = fs::path(manifest.directory) / rel;
        try {
            frames.push_back(
                read_frame_file(p.string(), manifest.channels, manifest.height, manifest.width));
        } catch (const Error& e) {
            throw ConfigError("manifest frame '" + rel + "': " + e.what());
        }
    }
    return frames;
}

std::string default_cache_dir() {
    if (const char* env = std::getenv("BRS_CACHE_DIR"); env && *env) return env;
    return (fs::temp_directory_path() / "brs-cache").string();
}

namespace {

std::uint64_t hash_file(const fs::path& path, std::uint64_t h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file for hashing: " + path.string());
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        h = fnv1a64(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf),
                                                  static_cast<std::size_t>(in.gcount())),
                    h);
    }
    return h;
}

std::uint64_t cache_key(const Manifest& manifest, const BaseCodecKind& codec,
                        const std::string& manifest_dir) {
    std::vector<std::uint8_t> desc;
    put_u8(desc, static_cast<std::uint8_t>(codec.variant));
    put_f64(desc, codec.quality);
    put_f64(desc, codec.target_bitrate);
    for (const std::string& s : {codec.encode_command, codec.decode_command, codec.raw_format}) {
        put_u32(desc, static_cast<std::uint32_t>(s.size()));
        desc.insert(desc.end(), s.begin(), s.end());
    }
    put_f64(desc, manifest.fps);
    put_u32(desc, static_cast<std::uint32_t>(manifest.channels));
    put_u32(desc, static_cast<std::uint32_t>(manifest.height));
    put_u32(desc, static_cast<std::uint32_t>(manifest.width));
    std::uint64_t h = fnv1a64(desc);
    for (const auto& rel : manifest.frame_paths) {
        h = fnv1a64(std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(rel.data()), rel.size()),
                    h);
        h = hash_file(fs::path(manifest_dir) / rel, h);
    }
    return h;
}

constexpr char kCacheMagic[4] = {'B', 'R', 'C', '1'};

}  // namespace

ResidualData make_residual_data(const std::vector<Frame>& frames, const BaseCodecKind& codec,
                                double fps) {
    BaseCodecResult base = run_base_codec(frames, codec, fps);
    ResidualData data;
    data.originals = frames;
    data.decoded = std::move(base.decoded_frames);
    data.per_frame_bits = std::move(base.per_frame_bits);
    data.base_payload_bits = base.payload_bits;
    data.residuals.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        data.residuals.push_back(compute_residual(frames[i], data.decoded[i]));
    }
    return data;
}

ResidualData materialize_residuals(const Manifest& manifest, const std::vector<Frame>& frames,
                                   const BaseCodecKind& codec, const std::string& cache_dir) {
    const std::uint64_t key = cache_key(manifest, codec, manifest.directory);
    const fs::path cache_path =
        fs::path(cache_dir) / ("base-" + std::to_string(key) + ".bin");

    std::vector<std::uint8_t> payload;
    std::vector<std::int64_t> per_frame_bits;
    bool hit = false;
    if (fs::exists(cache_path)) {
        std::ifstream in(cache_path, std::ios::binary);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        try {
            ByteReader reader(bytes);
            auto magic = reader.take(4);
            if (!std::equal(magic.begin(), magic.end(), kCacheMagic)) {
                throw IntegrityError("cache magic");
            }
            const std::uint32_t n = reader.u32();
            for (std::uint32_t i = 0; i < n; ++i) {
                per_frame_bits.push_back(static_cast<std::int64_t>(reader.u64()));
            }
            const std::uint64_t len = reader.u64();
            auto p = reader.take(len);
            payload.assign(p.begin(), p.end());
            hit = reader.done();
        } catch (const IntegrityError&) {
            hit = false;  // stale or torn cache entry; regenerate
            payload.clear();
            per_frame_bits.clear();
        }
    }

    ResidualData data;
    data.originals = frames;
    if (hit) {
        data.decoded = decode_base_payload(payload, codec.variant, &codec);
        data.per_frame_bits = std::move(per_frame_bits);
        for (std::int64_t b : data.per_frame_bits) data.base_payload_bits += b;
    } else {
        BaseCodecResult base = run_base_codec(frames, codec, manifest.fps);
        data.decoded = std::move(base.decoded_frames);
        data.per_frame_bits = base.per_frame_bits;
        data.base_payload_bits = base.payload_bits;

        fs::create_directories(cache_dir);
        std::vector<std::uint8_t> bytes;
        bytes.insert(bytes.end(), kCacheMagic, kCacheMagic + 4);
        put_u32(bytes, static_cast<std::uint32_t>(base.per_frame_bits.size()));
        for (std::int64_t b : base.per_frame_bits) put_u64(bytes, static_cast<std::uint64_t>(b));
        put_u64(bytes, base.payload.size());
        bytes.insert(bytes.end(), base.payload.begin(), base.payload.end());
        const fs::path tmp = cache_path.string() + ".tmp" + std::to_string(::getpid());
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.close();
        fs::rename(tmp, cache_path);
    }
    if (data.decoded.size() != frames.size()) {
        throw IntegrityError("base codec returned wrong frame count");
    }
    data.residuals.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        data.residuals.push_back(compute_residual(frames[i], data.decoded[i]));
    }
    return data;
}

}  // namespace brs
