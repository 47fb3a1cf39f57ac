#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vidcont/core/errors.hpp"
#include "vidcont/synth/scene.hpp"

using namespace vidcont;
using namespace vidcont::synth;
namespace fs = std::filesystem;

namespace {

SceneConfig base_config(uint64_t seed = 7, EventProfile p = EventProfile::forward) {
    SceneConfig cfg;
    cfg.width = 64;
    cfg.height = 64;
    cfg.n_frames = 12;
    cfg.n_vehicles = 2;
    cfg.event_profile = p;
    cfg.noise_std = 0.0;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("single-frame clip has one sem map and no flow") {
    SceneConfig cfg = base_config();
    cfg.n_frames = 1;
    const VideoClip clip = generate_clip(cfg);
    CHECK(clip.n_frames() == 1);
    CHECK(clip.sem_maps.size() == 1);
    CHECK(clip.gt_flow.empty());
}

TEST_CASE("seeded generation is bit-identical") {
    const SceneConfig cfg = base_config(42, EventProfile::mixed);
    const VideoClip a = generate_clip(cfg);
    const VideoClip b = generate_clip(cfg);
    REQUIRE(a.n_frames() == b.n_frames());
    for (int i = 0; i < a.n_frames(); ++i) {
        REQUIRE(a.frames[i].rgb == b.frames[i].rgb);
        REQUIRE(a.sem_maps[i].ids == b.sem_maps[i].ids);
    }
    for (size_t i = 0; i < a.gt_flow.size(); ++i) {
        REQUIRE(a.gt_flow[i].dx == b.gt_flow[i].dx);
        REQUIRE(a.gt_flow[i].dy == b.gt_flow[i].dy);
        REQUIRE(a.gt_flow[i].valid == b.gt_flow[i].valid);
    }
}

TEST_CASE("invalid resolution raises a configuration error") {
    SceneConfig cfg = base_config();
    cfg.width = 63;
    CHECK_THROWS_AS(generate_clip(cfg), ConfigError);
}

TEST_CASE("forward profile: road-pixel flow magnitude matches the motion model") {
    // Independent oracle: under the forward profile the ground scroll per
    // frame equals camera_speed and nothing else moves road pixels, so the
    // expected mean magnitude over road pixels is exactly camera_speed.
    SceneConfig cfg = base_config(11);
    cfg.camera_speed = 2.0;
    cfg.n_frames = 10;
    const double expected = cfg.camera_speed;
    const VideoClip clip = generate_clip(cfg);
    double acc = 0.0;
    int64_t count = 0;
    for (size_t t = 0; t < clip.gt_flow.size(); ++t) {
        const auto &f = clip.gt_flow[t];
        const auto &sem = clip.sem_maps[t];
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x)
                if (sem.at(y, x) == kClassRoad) {
                    const size_t i = f.idx(y, x);
                    acc += std::sqrt(static_cast<double>(f.dx[i]) * f.dx[i] +
                                     static_cast<double>(f.dy[i]) * f.dy[i]);
                    ++count;
                }
    }
    REQUIRE(count > 0);
    const double mean = acc / static_cast<double>(count);
    CHECK(mean == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("flow consistency: backward warp of frame t+1 reproduces frame t") {
    for (EventProfile p : {EventProfile::forward, EventProfile::lane_change, EventProfile::turn,
                           EventProfile::stop_and_go}) {
        SceneConfig cfg = base_config(101 + static_cast<int>(p), p);
        cfg.n_frames = 10;
        cfg.noise_std = 0.0;
        const VideoClip clip = generate_clip(cfg);
        for (size_t t = 0; t < clip.gt_flow.size(); ++t) {
            const auto &f = clip.gt_flow[t];
            const Image &a = clip.frames[t];
            const Image &b = clip.frames[t + 1];
            double err = 0.0;
            int64_t count = 0;
            for (int y = 0; y < f.height; ++y)
                for (int x = 0; x < f.width; ++x) {
                    const size_t i = f.idx(y, x);
                    if (!f.valid[i]) continue;
                    const double tx = x + f.dx[i];
                    const double ty = y + f.dy[i];
                    const int x0 = static_cast<int>(std::floor(tx));
                    const int y0 = static_cast<int>(std::floor(ty));
                    const int x1 = std::min(x0 + 1, f.width - 1);
                    const int y1 = std::min(y0 + 1, f.height - 1);
                    const double wx = tx - x0, wy = ty - y0;
                    for (int c = 0; c < 3; ++c) {
                        const double v0 = b.at(y0, x0, c) * (1 - wx) + b.at(y0, x1, c) * wx;
                        const double v1 = b.at(y1, x0, c) * (1 - wx) + b.at(y1, x1, c) * wx;
                        err += std::abs(v0 * (1 - wy) + v1 * wy - a.at(y, x, c));
                        ++count;
                    }
                }
            REQUIRE(count > 0);
            INFO("profile ", event_profile_name(p), " pair ", t);
            CHECK(err / static_cast<double>(count) <= 2.0);
        }
    }
}

TEST_CASE("palette distinctness and oracle exactness") {
    const ClassPalette palette = ClassPalette::default_palette();
    CHECK(palette.min_pairwise_l1() >= 96);

    SceneConfig cfg = base_config(5);
    cfg.noise_std = 0.0;
    const VideoClip clip = generate_clip(cfg);
    for (int t = 0; t < clip.n_frames(); ++t) {
        const ClassMap seg = oracle_segment(clip.frames[t], palette);
        REQUIRE(seg.ids == clip.sem_maps[t].ids);
    }
}

TEST_CASE("uniform palette-color frame segments to a single class") {
    const ClassPalette palette = ClassPalette::default_palette();
    for (int k = 0; k < palette.n_classes(); ++k) {
        Image img(16, 16);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = palette.colors[k][c];
        const ClassMap seg = oracle_segment(img, palette);
        for (uint8_t id : seg.ids) REQUIRE(id == k);
    }
}

TEST_CASE("oracle accuracy at noise 0.05 over 100 seeded frames") {
    const ClassPalette palette = ClassPalette::default_palette();
    int64_t agree = 0, total = 0;
    for (int s = 0; s < 10; ++s) {
        SceneConfig cfg = base_config(900 + s, EventProfile::mixed);
        cfg.n_frames = 10;
        cfg.noise_std = 0.05;
        const VideoClip clip = generate_clip(cfg);
        for (int t = 0; t < clip.n_frames(); ++t) {
            const ClassMap seg = oracle_segment(clip.frames[t], palette);
            for (size_t i = 0; i < seg.ids.size(); ++i) {
                agree += seg.ids[i] == clip.sem_maps[t].ids[i] ? 1 : 0;
                ++total;
            }
        }
    }
    const double acc = static_cast<double>(agree) / static_cast<double>(total);
    MESSAGE("oracle accuracy at noise 0.05: ", acc);
    CHECK(acc >= 0.99);
}

TEST_CASE("render_semantic_rgb round trips and rejects bad ids") {
    const ClassPalette palette = ClassPalette::default_palette();
    Rng rng(3);
    ClassMap m(24, 24);
    for (auto &id : m.ids) id = static_cast<uint8_t>(rng.below(palette.n_classes()));
    const Image img = render_semantic_rgb(m, palette);
    const ClassMap back = oracle_segment(img, palette);
    REQUIRE(back.ids == m.ids);

    ClassMap all_zero(8, 8);
    const Image img0 = render_semantic_rgb(all_zero, palette);
    for (int y = 0; y < 8; ++y)
        for (int c = 0; c < 3; ++c) REQUIRE(img0.at(y, 3, c) == palette.colors[0][c]);

    ClassMap checker(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) checker.at(y, x) = static_cast<uint8_t>((x + y) % 2);
    const Image imgc = render_semantic_rgb(checker, palette);
    CHECK(imgc.at(0, 0, 0) == palette.colors[0][0]);
    CHECK(imgc.at(0, 1, 0) == palette.colors[1][0]);

    ClassMap bad(4, 4);
    bad.at(0, 0) = 15;
    CHECK_THROWS_AS(render_semantic_rgb(bad, palette), DataError);
}

TEST_CASE("clip persistence round trip") {
    SceneConfig cfg = base_config(77);
    cfg.n_frames = 5;
    cfg.noise_std = 0.03;
    const VideoClip clip = generate_clip(cfg);
    const std::string dir = (fs::temp_directory_path() / "vidcont_clip_rt").string();
    fs::remove_all(dir);
    save_clip(clip, dir, 0x1234, cfg.seed, 1);
    const VideoClip back = load_clip(dir);
    REQUIRE(back.n_frames() == clip.n_frames());
    CHECK(back.fps_hz == clip.fps_hz);
    for (int i = 0; i < clip.n_frames(); ++i) {
        REQUIRE(back.frames[i].rgb == clip.frames[i].rgb);
        REQUIRE(back.sem_maps[i].ids == clip.sem_maps[i].ids);
    }
    for (size_t i = 0; i < clip.gt_flow.size(); ++i) {
        REQUIRE(back.gt_flow[i].dx == clip.gt_flow[i].dx);
        REQUIRE(back.gt_flow[i].valid == clip.gt_flow[i].valid);
    }
    fs::remove_all(dir);
}

TEST_CASE("load_frames: identical images, durations, and error paths") {
    const fs::path dir = fs::temp_directory_path() / "vidcont_frames";
    fs::remove_all(dir);
    fs::create_directories(dir);

    SceneConfig cfg = base_config(8);
    cfg.n_frames = 1;
    const Image frame = generate_clip(cfg).frames[0];
    for (int i = 0; i < 3; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%03d.ppm", i);
        write_ppm(frame, (dir / name).string());
    }
    const VideoClip clip = load_frames(dir.string(), 3.0, 64, 64);
    REQUIRE(clip.n_frames() == 3);
    CHECK(clip.frames[0].rgb == clip.frames[1].rgb);
    CHECK(clip.frames[1].rgb == clip.frames[2].rgb);
    CHECK(!clip.has_sem());
    CHECK(!clip.has_flow());

    // 36 frames at 3 Hz -> 12 seconds
    VideoClip long_clip;
    long_clip.fps_hz = 3.0;
    long_clip.frames.assign(36, frame);
    CHECK(long_clip.duration_seconds() == doctest::Approx(12.0));

    const fs::path empty_dir = fs::temp_directory_path() / "vidcont_frames_empty";
    fs::remove_all(empty_dir);
    fs::create_directories(empty_dir);
    CHECK_THROWS_AS(load_frames(empty_dir.string(), 3.0, 64, 64), IoError);

    // mixed resolutions are rejected with the offending file named
    write_ppm(resize_bilinear(frame, 32, 32), (dir / "img_900.ppm").string());
    try {
        load_frames(dir.string(), 3.0, 64, 64);
        FAIL("expected DataError");
    } catch (const DataError &e) {
        CHECK(std::string(e.what()).find("img_900.ppm") != std::string::npos);
    }
    fs::remove_all(dir);
    fs::remove_all(empty_dir);
}
