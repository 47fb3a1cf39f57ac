#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vidcont/core/errors.hpp"
#include "vidcont/core/hash.hpp"
#include "vidcont/synth/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vidcont::synth {

namespace {

std::string frame_name(const char *stem, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%05d.ppm", stem, i);
    return buf;
}

template <class T>
void write_pod(std::ostream &out, T v) {
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream &in, const std::string &path) {
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in) throw IoError("truncated file: " + path);
    return v;
}

}  // namespace

void save_clip(const VideoClip &clip, const std::string &dir, uint64_t config_hash, uint64_t seed,
               uint32_t palette_version) {
    fs::create_directories(fs::path(dir) / "frames");
    if (clip.has_sem()) fs::create_directories(fs::path(dir) / "sem");
    for (int i = 0; i < clip.n_frames(); ++i)
        write_ppm(clip.frames[static_cast<size_t>(i)],
                  (fs::path(dir) / "frames" / frame_name("frame", i)).string());
    if (clip.has_sem()) {
        const ClassPalette palette = ClassPalette::default_palette();
        for (int i = 0; i < clip.n_frames(); ++i)
            write_ppm(render_semantic_rgb(clip.sem_maps[static_cast<size_t>(i)], palette),
                      (fs::path(dir) / "sem" / frame_name("sem", i)).string());
    }
    if (clip.has_flow()) {
        const std::string flow_path = (fs::path(dir) / "flow.bin").string();
        std::ofstream out(flow_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + flow_path);
        const auto &f0 = clip.gt_flow.front();
        write_pod<uint32_t>(out, static_cast<uint32_t>(clip.gt_flow.size()));
        write_pod<uint32_t>(out, static_cast<uint32_t>(f0.height));
        write_pod<uint32_t>(out, static_cast<uint32_t>(f0.width));
        write_pod<uint32_t>(out, 2);
        for (const auto &f : clip.gt_flow)
            for (size_t p = 0; p < f.dx.size(); ++p) {
                write_pod<float>(out, f.dx[p]);
                write_pod<float>(out, f.dy[p]);
            }
        // validity masks travel next to the flow
        const std::string occ_path = (fs::path(dir) / "occl.bin").string();
        std::ofstream occ(occ_path, std::ios::binary);
        for (const auto &f : clip.gt_flow)
            occ.write(reinterpret_cast<const char *>(f.valid.data()),
                      static_cast<std::streamsize>(f.valid.size()));
    }
    json meta;
    meta["width"] = clip.frames.empty() ? 0 : clip.frames[0].width;
    meta["height"] = clip.frames.empty() ? 0 : clip.frames[0].height;
    meta["n_frames"] = clip.n_frames();
    meta["fps_hz"] = clip.fps_hz;
    meta["seed"] = seed;
    meta["palette_version"] = palette_version;
    meta["config_hash"] = hash_hex(config_hash);
    meta["has_sem"] = clip.has_sem();
    meta["has_flow"] = clip.has_flow();
    std::ofstream out(fs::path(dir) / "meta.json");
    out << meta.dump(2) << "\n";
    if (!out) throw IoError("cannot write clip manifest in " + dir);
}

VideoClip load_clip(const std::string &dir) {
    const fs::path root(dir);
    std::ifstream meta_in(root / "meta.json");
    if (!meta_in) throw IoError("missing clip manifest: " + (root / "meta.json").string());
    json meta = json::parse(meta_in, nullptr, false);
    if (meta.is_discarded()) throw DataError("malformed clip manifest in " + dir);

    VideoClip clip;
    clip.fps_hz = meta.value("fps_hz", 3.0);
    const int n = meta.value("n_frames", 0);
    for (int i = 0; i < n; ++i)
        clip.frames.push_back(read_ppm((root / "frames" / frame_name("frame", i)).string()));
    if (meta.value("has_sem", false)) {
        const ClassPalette palette = ClassPalette::default_palette();
        for (int i = 0; i < n; ++i) {
            const Image img = read_ppm((root / "sem" / frame_name("sem", i)).string());
            clip.sem_maps.push_back(oracle_segment(img, palette));
        }
    }
    if (meta.value("has_flow", false)) {
        const std::string flow_path = (root / "flow.bin").string();
        std::ifstream in(flow_path, std::ios::binary);
        if (!in) throw IoError("missing flow file: " + flow_path);
        const uint32_t count = read_pod<uint32_t>(in, flow_path);
        const uint32_t h = read_pod<uint32_t>(in, flow_path);
        const uint32_t w = read_pod<uint32_t>(in, flow_path);
        const uint32_t ch = read_pod<uint32_t>(in, flow_path);
        if (ch != 2) throw DataError("unexpected flow channel count in " + flow_path);
        for (uint32_t i = 0; i < count; ++i) {
            PixelFlow f(static_cast<int>(w), static_cast<int>(h));
            for (size_t p = 0; p < f.dx.size(); ++p) {
                f.dx[p] = read_pod<float>(in, flow_path);
                f.dy[p] = read_pod<float>(in, flow_path);
            }
            clip.gt_flow.push_back(std::move(f));
        }
        std::ifstream occ((root / "occl.bin").string(), std::ios::binary);
        if (occ)
            for (auto &f : clip.gt_flow)
                occ.read(reinterpret_cast<char *>(f.valid.data()),
                         static_cast<std::streamsize>(f.valid.size()));
    }
    return clip;
}

VideoClip load_frames(const std::string &dir, double fps_hz, int target_w, int target_h) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".ppm") files.push_back(entry.path().string());
    }
    if (files.empty()) throw IoError("no raster frames (*.ppm) found in directory: " + dir);
    std::sort(files.begin(), files.end());

    VideoClip clip;
    clip.fps_hz = fps_hz;
    int src_w = -1, src_h = -1;
    for (const auto &f : files) {
        Image img = read_ppm(f);
        if (src_w < 0) {
            src_w = img.width;
            src_h = img.height;
        } else if (img.width != src_w || img.height != src_h) {
            throw DataError("mixed frame resolutions in " + dir + ": " + f + " is " +
                            std::to_string(img.width) + "x" + std::to_string(img.height) +
                            ", expected " + std::to_string(src_w) + "x" + std::to_string(src_h));
        }
        // center-crop to target aspect, then bilinear resize
        const double want = static_cast<double>(target_w) / target_h;
        int crop_w = img.width, crop_h = img.height;
        if (static_cast<double>(img.width) / img.height > want)
            crop_w = std::max(1, static_cast<int>(std::lround(img.height * want)));
        else
            crop_h = std::max(1, static_cast<int>(std::lround(img.width / want)));
        clip.frames.push_back(resize_bilinear(center_crop(img, crop_w, crop_h), target_w, target_h));
    }
    return clip;
}

}  // namespace vidcont::synth
