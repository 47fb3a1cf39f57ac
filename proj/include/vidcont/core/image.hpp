#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vidcont/nn/tensor.hpp"

namespace vidcont {

// 8-bit RGB image, row-major, 3 bytes per pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0) {}

    uint8_t &at(int y, int x, int c) {
        return rgb[(static_cast<size_t>(y) * width + x) * 3 + static_cast<size_t>(c)];
    }
    uint8_t at(int y, int x, int c) const {
        return rgb[(static_cast<size_t>(y) * width + x) * 3 + static_cast<size_t>(c)];
    }
    bool same_size(const Image &o) const { return width == o.width && height == o.height; }
};

// Per-pixel class ids.
struct ClassMap {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> ids;

    ClassMap() = default;
    ClassMap(int w, int h) : width(w), height(h), ids(static_cast<size_t>(w) * h, 0) {}

    uint8_t &at(int y, int x) { return ids[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return ids[static_cast<size_t>(y) * width + x]; }
};

// Binary PPM (P6). The only raster format the toolkit reads and writes.
Image read_ppm(const std::string &path);
void write_ppm(const Image &img, const std::string &path);

// [3,H,W] float tensor in [-1,1] <-> 8-bit image (clamped on the way back).
nn::Tensor image_to_tensor(const Image &img);
Image tensor_to_image(const nn::Tensor &t);

double psnr(const Image &a, const Image &b);  // dB on the 8-bit scale
double mean_abs_diff(const Image &a, const Image &b);

Image resize_bilinear(const Image &img, int out_w, int out_h);
Image center_crop(const Image &img, int out_w, int out_h);

// Simple polyline chart rendered to an image (probe reports).
Image render_line_chart(const std::vector<std::vector<double>> &series, int width, int height);

}  // namespace vidcont
