#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vidcont/core/config.hpp"
#include "vidcont/core/image.hpp"

namespace vidcont::synth {

enum class EventProfile { forward, lane_change, turn, stop_and_go, mixed };

EventProfile event_profile_from_string(const std::string &s);
std::string event_profile_name(EventProfile p);

struct SceneConfig {
    int width = 64;
    int height = 64;
    int n_frames = 24;
    int n_vehicles = 3;
    EventProfile event_profile = EventProfile::forward;
    double noise_std = 0.02;  // intensity fraction, [0, 0.1]
    uint64_t seed = 0;
    double fps_hz = 3.0;
    int downsample_factor = 8;  // frames must tile into the tokenizer grid
    double camera_speed = 2.0;  // forward scroll, px/frame

    void validate() const;  // throws ConfigError
    static SceneConfig from_config(const Config &cfg, const std::string &prefix = "scene.");
};

// Dense per-pixel displacement from frame t to t+1 (x = column, y = row),
// with a validity mask (0 = occluded or leaves the frame).
struct PixelFlow {
    int width = 0;
    int height = 0;
    std::vector<float> dx, dy;
    std::vector<uint8_t> valid;

    PixelFlow() = default;
    PixelFlow(int w, int h)
        : width(w),
          height(h),
          dx(static_cast<size_t>(w) * h, 0.0f),
          dy(static_cast<size_t>(w) * h, 0.0f),
          valid(static_cast<size_t>(w) * h, 1) {}
    size_t idx(int y, int x) const { return static_cast<size_t>(y) * width + x; }
    double mean_magnitude() const;
};

struct VideoClip {
    std::vector<Image> frames;
    std::vector<ClassMap> sem_maps;   // empty or one per frame
    std::vector<PixelFlow> gt_flow;   // empty or n_frames-1 entries
    double fps_hz = 3.0;

    int n_frames() const { return static_cast<int>(frames.size()); }
    double duration_seconds() const { return fps_hz > 0 ? n_frames() / fps_hz : 0.0; }
    bool has_sem() const { return !sem_maps.empty(); }
    bool has_flow() const { return !gt_flow.empty(); }
};

struct ClassPalette {
    std::vector<std::array<uint8_t, 3>> colors;
    std::vector<std::string> names;
    uint32_t version = 1;

    int n_classes() const { return static_cast<int>(colors.size()); }
    // Smallest pairwise |dR|+|dG|+|dB| over distinct classes.
    int min_pairwise_l1() const;
    static ClassPalette default_palette();
};

enum : uint8_t {
    kClassRoad = 0,
    kClassSky = 1,
    kClassBackground = 2,
    kClassMarking = 3,
    kClassVehicle = 4,
};

// Deterministic procedural driving scene with exact semantic maps and flow.
VideoClip generate_clip(const SceneConfig &config);

// Nearest palette color in squared RGB distance; ties take the lowest id.
ClassMap oracle_segment(const Image &frame, const ClassPalette &palette);

Image render_semantic_rgb(const ClassMap &sem, const ClassPalette &palette);

// Frame-folder ingestion: lossless PPM rasters, lexicographic order,
// center-crop to the target aspect then bilinear resize.
VideoClip load_frames(const std::string &dir, double fps_hz, int target_w, int target_h);

// Clip persistence: frames/, sem/, flow.bin (+ occlusion in the mask channel),
// meta.json.
void save_clip(const VideoClip &clip, const std::string &dir, uint64_t config_hash,
               uint64_t seed, uint32_t palette_version);
VideoClip load_clip(const std::string &dir);

}  // namespace vidcont::synth
