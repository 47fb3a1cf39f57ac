#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "vidcont/core/checkpoint.hpp"
#include "vidcont/core/config.hpp"
#include "vidcont/core/errors.hpp"
#include "vidcont/core/hash.hpp"
#include "vidcont/core/image.hpp"
#include "vidcont/core/rng.hpp"

using namespace vidcont;
namespace fs = std::filesystem;

TEST_CASE("config parsing, layering and hashing") {
    const fs::path p = fs::temp_directory_path() / "vidcont_test.cfg";
    {
        std::ofstream out(p);
        out << "# comment\n"
            << "scene.width = 64\n"
            << "scene.noise_std = 0.05   # trailing comment\n"
            << "model.n_layers = 8\n";
    }
    Config cfg;
    cfg.set("scene.width", "32");
    cfg.set("run.name", "demo");
    cfg.apply_file(p.string());
    CHECK(cfg.get_int("scene.width", 0) == 64);  // file overrides default
    CHECK(cfg.get_double("scene.noise_std", 0) == doctest::Approx(0.05));
    CHECK(cfg.get_str("run.name", "") == "demo");

    // environment overrides known keys (dots become double underscores)
    setenv("VIDCONT_SCENE__WIDTH", "128", 1);
    cfg.apply_env();
    unsetenv("VIDCONT_SCENE__WIDTH");
    CHECK(cfg.get_int("scene.width", 0) == 128);

    cfg.apply_assignment("model.n_layers=4");
    CHECK(cfg.get_int("model.n_layers", 0) == 4);

    const uint64_t h1 = cfg.hash();
    Config same = Config::from_text(cfg.resolved_text());
    CHECK(same.hash() == h1);
    same.set("extra.key", "1");
    CHECK(same.hash() != h1);

    CHECK_THROWS_AS(cfg.get_int("run.name", 0), ConfigError);
    CHECK_THROWS_AS(cfg.require_str("missing.key"), ConfigError);
    fs::remove(p);
}

TEST_CASE("checkpoint container round trip") {
    Checkpoint ck;
    ck.version = 3;
    ck.config_text = "a = 1\nb = two\n";
    Rng rng(5);
    nn::Tensor t = nn::Tensor::randn({3, 4}, rng, 1.0f);
    ck.add("weights.w", t);
    ck.add_raw("stats", {5}, {1, 2, 3, 4, 5});

    const fs::path p = fs::temp_directory_path() / "vidcont_test.ckpt";
    ck.save(p.string());
    const Checkpoint back = Checkpoint::load(p.string());
    CHECK(back.version == 3);
    CHECK(back.config_text == ck.config_text);
    REQUIRE(back.arrays.size() == 2);
    CHECK(back.require("weights.w").shape == nn::Shape{3, 4});
    CHECK(back.require("weights.w").data == t.vec());
    CHECK(back.require("stats").data == std::vector<float>{1, 2, 3, 4, 5});
    CHECK(back.find("nope") == nullptr);
    CHECK_THROWS_AS(back.require("nope"), DataError);

    // same bytes hash equal, different bytes differ
    const uint64_t h = file_hash(p.string());
    CHECK(h == file_hash(p.string()));
    fs::remove(p);
}

TEST_CASE("ppm round trip and helpers") {
    Rng rng(9);
    Image img(13, 7);
    for (auto &v : img.rgb) v = static_cast<uint8_t>(rng.below(256));
    const fs::path p = fs::temp_directory_path() / "vidcont_test.ppm";
    write_ppm(img, p.string());
    const Image back = read_ppm(p.string());
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.rgb == img.rgb);
    CHECK(psnr(img, back) == doctest::Approx(99.0));
    fs::remove(p);

    // tensor conversion round trips within quantization error
    const nn::Tensor t = image_to_tensor(img);
    CHECK(t.shape() == nn::Shape{3, 7, 13});
    const Image img2 = tensor_to_image(t);
    CHECK(mean_abs_diff(img, img2) <= 0.51);

    const Image up = resize_bilinear(img, 26, 14);
    CHECK(up.width == 26);
    const Image crop = center_crop(img, 5, 5);
    CHECK(crop.width == 5);
    CHECK_THROWS_AS(center_crop(img, 100, 100), DataError);
}

TEST_CASE("rng determinism and distribution sanity") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng r(42);
    double mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean += r.gauss();
    mean /= n;
    CHECK(std::abs(mean) < 0.05);

    // below() stays in range and covers values
    Rng r2(7);
    std::vector<int> seen(10, 0);
    for (int i = 0; i < 1000; ++i) ++seen[static_cast<size_t>(r2.below(10))];
    for (int c : seen) CHECK(c > 50);
}

TEST_CASE("line chart renders without incident") {
    const Image chart = render_line_chart({{0.0, 1.0, 0.5, 2.0}, {2.0, 1.5, 1.0, 0.5}}, 200, 120);
    CHECK(chart.width == 200);
    CHECK(chart.height == 120);
}
