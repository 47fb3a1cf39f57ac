#include "vidcont/synth/scene.hpp"

#include <algorithm>
#include <cmath>

#include "vidcont/core/errors.hpp"
#include "vidcont/core/rng.hpp"

namespace vidcont::synth {

EventProfile event_profile_from_string(const std::string &s) {
    if (s == "forward") return EventProfile::forward;
    if (s == "lane_change") return EventProfile::lane_change;
    if (s == "turn") return EventProfile::turn;
    if (s == "stop_and_go") return EventProfile::stop_and_go;
    if (s == "mixed") return EventProfile::mixed;
    throw ConfigError("unknown event profile: " + s);
}

std::string event_profile_name(EventProfile p) {
    switch (p) {
        case EventProfile::forward: return "forward";
        case EventProfile::lane_change: return "lane_change";
        case EventProfile::turn: return "turn";
        case EventProfile::stop_and_go: return "stop_and_go";
        case EventProfile::mixed: return "mixed";
    }
    return "?";
}

void SceneConfig::validate() const {
    if (width <= 0 || height <= 0 || n_frames <= 0)
        throw ConfigError("scene dimensions and frame count must be positive");
    if (downsample_factor <= 0 || width % downsample_factor != 0 ||
        height % downsample_factor != 0)
        throw ConfigError("scene resolution " + std::to_string(width) + "x" +
                          std::to_string(height) + " is not a multiple of the downsample factor " +
                          std::to_string(downsample_factor));
    if (noise_std < 0.0 || noise_std > 0.1)
        throw ConfigError("noise_std must lie in [0, 0.1]");
    if (n_vehicles < 0) throw ConfigError("n_vehicles must be >= 0");
    if (fps_hz <= 0.0) throw ConfigError("fps_hz must be positive");
}

SceneConfig SceneConfig::from_config(const Config &cfg, const std::string &prefix) {
    SceneConfig sc;
    sc.width = static_cast<int>(cfg.get_int(prefix + "width", sc.width));
    sc.height = static_cast<int>(cfg.get_int(prefix + "height", sc.height));
    sc.n_frames = static_cast<int>(cfg.get_int(prefix + "n_frames", sc.n_frames));
    sc.n_vehicles = static_cast<int>(cfg.get_int(prefix + "n_vehicles", sc.n_vehicles));
    sc.event_profile = event_profile_from_string(cfg.get_str(prefix + "event_profile", "forward"));
    sc.noise_std = cfg.get_double(prefix + "noise_std", sc.noise_std);
    sc.seed = static_cast<uint64_t>(cfg.get_int(prefix + "seed", 0));
    sc.fps_hz = cfg.get_double(prefix + "fps_hz", sc.fps_hz);
    sc.downsample_factor =
        static_cast<int>(cfg.get_int(prefix + "downsample_factor", sc.downsample_factor));
    sc.camera_speed = cfg.get_double(prefix + "camera_speed", sc.camera_speed);
    return sc;
}

double PixelFlow::mean_magnitude() const {
    double s = 0.0;
    const size_t n = dx.size();
    for (size_t i = 0; i < n; ++i)
        s += std::sqrt(static_cast<double>(dx[i]) * dx[i] + static_cast<double>(dy[i]) * dy[i]);
    return n ? s / static_cast<double>(n) : 0.0;
}

int ClassPalette::min_pairwise_l1() const {
    int best = 3 * 255;
    for (size_t a = 0; a < colors.size(); ++a)
        for (size_t b = a + 1; b < colors.size(); ++b) {
            int d = 0;
            for (int c = 0; c < 3; ++c)
                d += std::abs(static_cast<int>(colors[a][c]) - colors[b][c]);
            best = std::min(best, d);
        }
    return best;
}

ClassPalette ClassPalette::default_palette() {
    ClassPalette p;
    p.colors = {{{110, 110, 120}},  // road
                {{150, 200, 245}},  // sky
                {{30, 130, 35}},    // background
                {{245, 230, 90}},   // marking
                {{215, 40, 40}}};   // vehicle
    p.names = {"road", "sky", "background", "marking", "vehicle"};
    p.version = 1;
    return p;
}

namespace {

struct Vehicle {
    double w = 0, h = 0;
    double tint[3] = {0, 0, 0};
    double drift_x = 0, drift_y = 0;
    std::vector<std::array<int, 2>> pos;  // rounded top-left per frame
};

struct CameraTrack {
    std::vector<double> cam_x;  // lateral offset (lane changes)
    std::vector<double> yaw;    // horizontal pan (turns), applied to sky too
    std::vector<double> cam_y;  // forward distance
};

double positive_fmod(double a, double m) {
    const double r = std::fmod(a, m);
    return r < 0 ? r + m : r;
}

CameraTrack build_camera(const SceneConfig &cfg, EventProfile profile, Rng &rng) {
    const int n = cfg.n_frames;
    std::vector<double> fwd(static_cast<size_t>(n), cfg.camera_speed);
    std::vector<double> lat(static_cast<size_t>(n), 0.0);
    std::vector<double> yaw_rate(static_cast<size_t>(n), 0.0);

    const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
    switch (profile) {
        case EventProfile::forward: break;
        case EventProfile::lane_change: {
            const int start = std::max(1, n / 3);
            for (int t = start; t < std::min(n, start + 6); ++t)
                lat[static_cast<size_t>(t)] = dir * 1.0;
            break;
        }
        case EventProfile::turn: {
            const int start = std::max(1, (2 * n) / 5);
            for (int t = start; t < std::min(n, start + 8); ++t) {
                yaw_rate[static_cast<size_t>(t)] = dir * 2.5;
                fwd[static_cast<size_t>(t)] = cfg.camera_speed * 0.6;
            }
            break;
        }
        case EventProfile::stop_and_go: {
            const int down = std::max(1, n / 4);
            const int hold_end = std::max(down + 4, (3 * n) / 5);
            for (int t = 0; t < n; ++t) {
                if (t >= down && t < down + 4)
                    fwd[static_cast<size_t>(t)] = cfg.camera_speed * (1.0 - (t - down + 1) / 4.0);
                else if (t >= down + 4 && t < hold_end)
                    fwd[static_cast<size_t>(t)] = 0.0;
                else if (t >= hold_end && t < hold_end + 4)
                    fwd[static_cast<size_t>(t)] = cfg.camera_speed * ((t - hold_end + 1) / 4.0);
            }
            break;
        }
        case EventProfile::mixed: break;  // resolved by the caller
    }

    CameraTrack track;
    track.cam_x.resize(static_cast<size_t>(n));
    track.yaw.resize(static_cast<size_t>(n));
    track.cam_y.resize(static_cast<size_t>(n));
    // start with the road centered in view
    double cx = -cfg.width / 2.0 + rng.uniform(-3.0, 3.0);
    double yw = 0.0;
    double cy = rng.uniform(0.0, 40.0);
    for (int t = 0; t < n; ++t) {
        if (t > 0) {
            cx += lat[static_cast<size_t>(t)];
            yw += yaw_rate[static_cast<size_t>(t)];
            cy += fwd[static_cast<size_t>(t)];
        }
        // whole-pixel camera positions keep frame-to-frame translation
        // integer, so backward warping by gt_flow is sampling-exact
        track.cam_x[static_cast<size_t>(t)] = static_cast<double>(std::lround(cx));
        track.yaw[static_cast<size_t>(t)] = static_cast<double>(std::lround(yw));
        track.cam_y[static_cast<size_t>(t)] = static_cast<double>(std::lround(cy));
    }
    return track;
}

struct SceneGeometry {
    int horizon = 0;
    double period = 0, road_half = 0;
    double dash_period = 12, dash_len = 7, center_half = 1.5;
};

SceneGeometry make_geometry(const SceneConfig &cfg) {
    SceneGeometry g;
    g.horizon = (cfg.height * 27) / 64;
    g.period = 1.5 * cfg.width;
    g.road_half = 0.30 * cfg.width;
    return g;
}

// Scene classes and textures are pure functions of world coordinates so the
// rendered content moves exactly with the ground-truth flow.
uint8_t ground_class(const SceneGeometry &g, double u, double v) {
    const double um = positive_fmod(u + g.road_half, g.period) - g.road_half;
    if (um < -g.road_half || um > g.road_half) return kClassBackground;
    const double au = std::abs(um);
    if (au <= g.center_half && positive_fmod(v, g.dash_period) < g.dash_len) return kClassMarking;
    if (au >= g.road_half - 3.0 && au <= g.road_half - 1.0) return kClassMarking;
    return kClassRoad;
}

double texture_offset(uint8_t cls, double u, double v) {
    constexpr double kTau = 6.283185307179586;
    switch (cls) {
        case kClassRoad: return 4.0 * std::sin(kTau * u / 16.0) + 4.0 * std::sin(kTau * v / 14.0);
        case kClassBackground:
            return 5.0 * std::sin(kTau * u / 13.0) + 5.0 * std::sin(kTau * v / 19.0);
        case kClassMarking: return 2.0 * std::sin(kTau * v / 9.0);
        default: return 0.0;
    }
}

uint8_t clamp_channel(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

VideoClip generate_clip(const SceneConfig &config) {
    config.validate();
    const ClassPalette palette = ClassPalette::default_palette();
    Rng scene_rng(derive_seed(config.seed, 1));

    EventProfile profile = config.event_profile;
    if (profile == EventProfile::mixed) {
        const EventProfile options[4] = {EventProfile::forward, EventProfile::lane_change,
                                         EventProfile::turn, EventProfile::stop_and_go};
        profile = options[scene_rng.below(4)];
    }

    const SceneGeometry geo = make_geometry(config);
    const CameraTrack cam = build_camera(config, profile, scene_rng);
    const int W = config.width, H = config.height, N = config.n_frames;

    std::vector<Vehicle> vehicles(static_cast<size_t>(config.n_vehicles));
    for (auto &veh : vehicles) {
        const double s = W / 64.0;
        veh.w = std::max(4.0, std::floor(scene_rng.uniform(9.0, 14.0) * s));
        veh.h = std::max(3.0, std::floor(scene_rng.uniform(6.0, 10.0) * s));
        for (auto &t : veh.tint) t = scene_rng.uniform(-12.0, 12.0);
        veh.drift_x = scene_rng.uniform(-0.25, 0.25);
        veh.drift_y = scene_rng.uniform(-0.2, 0.2);
        veh.pos.resize(static_cast<size_t>(N));
        double px = W / 2.0 + scene_rng.uniform(-0.6, 0.6) * geo.road_half;
        double py = scene_rng.uniform(geo.horizon + 4.0, std::max(geo.horizon + 5.0, H - veh.h - 2.0));
        for (int t = 0; t < N; ++t) {
            if (t > 0) {
                const size_t st = static_cast<size_t>(t);
                const double dlat =
                    (cam.cam_x[st] - cam.cam_x[st - 1]) + (cam.yaw[st] - cam.yaw[st - 1]);
                const double fwd = cam.cam_y[st] - cam.cam_y[st - 1];
                px += -dlat + veh.drift_x;
                // vehicles hold roughly the ego cruise speed; when the ego
                // slows, the gap opens and the vehicle slides up the frame
                py += (fwd - config.camera_speed) * 0.8 + veh.drift_y;
            }
            px = std::clamp(px, 1.0, W - veh.w - 1.0);
            py = std::clamp(py, geo.horizon + 2.0, H - veh.h - 1.0);
            veh.pos[static_cast<size_t>(t)] = {static_cast<int>(std::lround(px)),
                                               static_cast<int>(std::lround(py))};
        }
    }

    // owner map: -1 ground/sky, otherwise topmost vehicle index
    auto owner_at = [&](int t, int y, int x) -> int {
        int owner = -1;
        for (size_t i = 0; i < vehicles.size(); ++i) {
            const auto &p = vehicles[i].pos[static_cast<size_t>(t)];
            if (x >= p[0] && x < p[0] + static_cast<int>(vehicles[i].w) && y >= p[1] &&
                y < p[1] + static_cast<int>(vehicles[i].h))
                owner = static_cast<int>(i);
        }
        return owner;
    };

    VideoClip clip;
    clip.fps_hz = config.fps_hz;
    clip.frames.reserve(static_cast<size_t>(N));
    clip.sem_maps.reserve(static_cast<size_t>(N));

    constexpr double kTau = 6.283185307179586;
    for (int t = 0; t < N; ++t) {
        const size_t st = static_cast<size_t>(t);
        Image frame(W, H);
        ClassMap sem(W, H);
        Rng noise_rng(derive_seed(config.seed, 2, static_cast<uint64_t>(t)));
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                uint8_t cls;
                double base[3];
                const int own = owner_at(t, y, x);
                if (own >= 0) {
                    cls = kClassVehicle;
                    const Vehicle &veh = vehicles[static_cast<size_t>(own)];
                    const auto &p = veh.pos[st];
                    const double lu = x - p[0], lv = y - p[1];
                    const double tex = 4.0 * std::sin(kTau * (lu / 7.0 + lv / 9.0));
                    for (int c = 0; c < 3; ++c)
                        base[c] = palette.colors[kClassVehicle][c] + veh.tint[c] + tex;
                } else if (y < geo.horizon) {
                    cls = kClassSky;
                    const double su = x + cam.yaw[st];
                    const double grad = 20.0 * (static_cast<double>(y) / geo.horizon - 0.5) * 2.0;
                    const double tex = 4.0 * std::sin(kTau * su / 23.0);
                    for (int c = 0; c < 3; ++c) base[c] = palette.colors[kClassSky][c] + grad + tex;
                } else {
                    const double u = x + cam.cam_x[st] + cam.yaw[st];
                    const double v = y - cam.cam_y[st];
                    cls = ground_class(geo, u, v);
                    const double tex = texture_offset(cls, u, v);
                    for (int c = 0; c < 3; ++c) base[c] = palette.colors[cls][c] + tex;
                }
                sem.at(y, x) = cls;
                for (int c = 0; c < 3; ++c) {
                    const double noisy =
                        base[c] +
                        (config.noise_std > 0.0 ? noise_rng.gauss(0.0, config.noise_std * 255.0)
                                                : 0.0);
                    frame.at(y, x, c) = clamp_channel(noisy);
                }
            }
        clip.frames.push_back(std::move(frame));
        clip.sem_maps.push_back(std::move(sem));
    }

    // exact flow from the displacement model
    if (N > 1) clip.gt_flow.reserve(static_cast<size_t>(N - 1));
    for (int t = 0; t + 1 < N; ++t) {
        const size_t st = static_cast<size_t>(t);
        PixelFlow flow(W, H);
        const double dyaw = cam.yaw[st + 1] - cam.yaw[st];
        const double dlat = cam.cam_x[st + 1] - cam.cam_x[st];
        const double dfwd = cam.cam_y[st + 1] - cam.cam_y[st];
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const size_t i = flow.idx(y, x);
                const int own = owner_at(t, y, x);
                if (own >= 0) {
                    const auto &p0 = vehicles[static_cast<size_t>(own)].pos[st];
                    const auto &p1 = vehicles[static_cast<size_t>(own)].pos[st + 1];
                    flow.dx[i] = static_cast<float>(p1[0] - p0[0]);
                    flow.dy[i] = static_cast<float>(p1[1] - p0[1]);
                } else if (y < geo.horizon) {
                    flow.dx[i] = static_cast<float>(-dyaw);
                    flow.dy[i] = 0.0f;
                } else {
                    flow.dx[i] = static_cast<float>(-(dlat + dyaw));
                    flow.dy[i] = static_cast<float>(dfwd);
                }
                // valid only if the same surface is visible at the target
                const double tx = x + flow.dx[i];
                const double ty = y + flow.dy[i];
                if (tx < 0.0 || ty < 0.0 || tx > W - 1.0 || ty > H - 1.0) {
                    flow.valid[i] = 0;
                    continue;
                }
                const int x0 = static_cast<int>(std::floor(tx));
                const int y0 = static_cast<int>(std::floor(ty));
                const int x1 = std::min(x0 + 1, W - 1);
                const int y1 = std::min(y0 + 1, H - 1);
                bool ok = true;
                for (int yy : {y0, y1})
                    for (int xx : {x0, x1})
                        if (owner_at(t + 1, yy, xx) != own) ok = false;
                if (own < 0 && ((y < geo.horizon) != (y0 < geo.horizon) ||
                                (y < geo.horizon) != (y1 < geo.horizon)))
                    ok = false;
                flow.valid[i] = ok ? 1 : 0;
            }
        clip.gt_flow.push_back(std::move(flow));
    }
    return clip;
}

ClassMap oracle_segment(const Image &frame, const ClassPalette &palette) {
    ClassMap out(frame.width, frame.height);
    const int n = palette.n_classes();
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            int best = 0;
            int64_t best_d = -1;
            for (int k = 0; k < n; ++k) {
                int64_t d = 0;
                for (int c = 0; c < 3; ++c) {
                    const int64_t diff = static_cast<int64_t>(frame.at(y, x, c)) -
                                         palette.colors[static_cast<size_t>(k)][c];
                    d += diff * diff;
                }
                if (best_d < 0 || d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            out.at(y, x) = static_cast<uint8_t>(best);
        }
    return out;
}

Image render_semantic_rgb(const ClassMap &sem, const ClassPalette &palette) {
    Image out(sem.width, sem.height);
    for (int y = 0; y < sem.height; ++y)
        for (int x = 0; x < sem.width; ++x) {
            const uint8_t id = sem.at(y, x);
            if (id >= palette.n_classes())
                throw DataError("semantic id " + std::to_string(id) + " outside palette of " +
                                std::to_string(palette.n_classes()) + " classes");
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = palette.colors[id][c];
        }
    return out;
}

}  // namespace vidcont::synth
