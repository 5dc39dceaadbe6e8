#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "brs/dataset.hpp"
#include "brs/synthetic.hpp"

// Writes a seeded synthetic clip as raw planar frames plus a manifest, for
// exercising the pipeline without real video data.
int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic moving-texture clip"};
    std::string out_dir = "corpus";
    int frames = 200, height = 32, width = 32;
    double fps = 10.0;
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--frames", frames, "frame count");
    app.add_option("--height", height, "frame height");
    app.add_option("--width", width, "frame width");
    app.add_option("--fps", fps, "frames per second recorded in the manifest");
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        namespace fs = std::filesystem;
        fs::create_directories(fs::path(out_dir) / "frames");
        const auto clip = brs::make_moving_texture_corpus(frames, height, width, seed);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < clip.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "frames/frame_%05zu.rgb", i);
            brs::write_frame_file((fs::path(out_dir) / name).string(), clip[i]);
            names.emplace_back(name);
        }
        brs::write_manifest((fs::path(out_dir) / "manifest.txt").string(), fps, 3, height, width,
                            names);
        std::cout << out_dir << "/manifest.txt with " << clip.size() << " frames\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
