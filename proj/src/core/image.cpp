#include "vidcont/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vidcont/core/errors.hpp"

namespace vidcont {

namespace {

// Skips whitespace and '#' comments in a PPM header.
int next_header_int(std::istream &in, const std::string &path) {
    for (;;) {
        const int c = in.peek();
        if (c == EOF) throw IoError("truncated PPM header: " + path);
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int v = 0;
    if (!(in >> v)) throw IoError("bad PPM header: " + path);
    return v;
}

}  // namespace

Image read_ppm(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw IoError("not a binary PPM (P6) file: " + path);
    const int w = next_header_int(in, path);
    const int h = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    if (w <= 0 || h <= 0 || maxval != 255)
        throw IoError("unsupported PPM geometry or depth: " + path);
    in.get();  // single whitespace after maxval
    Image img(w, h);
    in.read(reinterpret_cast<char *>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.rgb.size()))
        throw IoError("truncated PPM pixel data: " + path);
    return img;
}

void write_ppm(const Image &img, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char *>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
    if (!out) throw IoError("failed writing image: " + path);
}

nn::Tensor image_to_tensor(const Image &img) {
    nn::Tensor t = nn::Tensor::zeros({3, img.height, img.width});
    const int64_t hw = static_cast<int64_t>(img.height) * img.width;
    float *d = t.data();
    for (int64_t p = 0; p < hw; ++p)
        for (int c = 0; c < 3; ++c)
            d[c * hw + p] = static_cast<float>(img.rgb[static_cast<size_t>(p) * 3 + c]) / 127.5f - 1.0f;
    return t;
}

Image tensor_to_image(const nn::Tensor &t) {
    if (t.ndim() != 3 || t.dim(0) != 3) throw DataError("tensor_to_image expects [3,H,W]");
    const int H = t.dim(1), W = t.dim(2);
    const int64_t hw = static_cast<int64_t>(H) * W;
    Image img(W, H);
    const float *d = t.data();
    for (int64_t p = 0; p < hw; ++p)
        for (int c = 0; c < 3; ++c) {
            const float v = (d[c * hw + p] + 1.0f) * 127.5f;
            img.rgb[static_cast<size_t>(p) * 3 + c] =
                static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    return img;
}

double psnr(const Image &a, const Image &b) {
    if (!a.same_size(b)) throw DataError("psnr: image sizes differ");
    double mse = 0.0;
    for (size_t i = 0; i < a.rgb.size(); ++i) {
        const double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.rgb.size());
    if (mse <= 0.0) return 99.0;
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double mean_abs_diff(const Image &a, const Image &b) {
    if (!a.same_size(b)) throw DataError("mean_abs_diff: image sizes differ");
    double s = 0.0;
    for (size_t i = 0; i < a.rgb.size(); ++i)
        s += std::abs(static_cast<double>(a.rgb[i]) - b.rgb[i]);
    return s / static_cast<double>(a.rgb.size());
}

Image resize_bilinear(const Image &img, int out_w, int out_h) {
    Image out(out_w, out_h);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            const double fy = (y + 0.5) * sy - 0.5;
            const double fx = (x + 0.5) * sx - 0.5;
            const double cy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
            const double cx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            const int y0 = static_cast<int>(cy), x0 = static_cast<int>(cx);
            const int y1 = std::min(y0 + 1, img.height - 1), x1 = std::min(x0 + 1, img.width - 1);
            const double wy = cy - y0, wx = cx - x0;
            for (int c = 0; c < 3; ++c) {
                const double v0 = img.at(y0, x0, c) * (1 - wx) + img.at(y0, x1, c) * wx;
                const double v1 = img.at(y1, x0, c) * (1 - wx) + img.at(y1, x1, c) * wx;
                out.at(y, x, c) = static_cast<uint8_t>(
                    std::clamp(std::lround(v0 * (1 - wy) + v1 * wy), 0L, 255L));
            }
        }
    return out;
}

Image center_crop(const Image &img, int out_w, int out_h) {
    if (img.width < out_w || img.height < out_h)
        throw DataError("center_crop: target larger than source");
    const int x0 = (img.width - out_w) / 2;
    const int y0 = (img.height - out_h) / 2;
    Image out(out_w, out_h);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return out;
}

Image render_line_chart(const std::vector<std::vector<double>> &series, int width, int height) {
    Image img(width, height);
    std::fill(img.rgb.begin(), img.rgb.end(), static_cast<uint8_t>(255));
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto &s : series)
        for (double v : s) {
            if (first) {
                lo = hi = v;
                first = false;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const int margin = 8;
    const uint8_t palette[6][3] = {{200, 40, 40},  {40, 100, 200}, {30, 150, 60},
                                   {180, 140, 20}, {130, 60, 170}, {60, 60, 60}};
    // axes
    for (int x = margin; x < width - margin; ++x)
        img.at(height - margin, x, 0) = img.at(height - margin, x, 1) =
            img.at(height - margin, x, 2) = 120;
    for (int y = margin; y < height - margin; ++y)
        img.at(y, margin, 0) = img.at(y, margin, 1) = img.at(y, margin, 2) = 120;
    for (size_t si = 0; si < series.size(); ++si) {
        const auto &s = series[si];
        if (s.size() < 2) continue;
        const uint8_t *col = palette[si % 6];
        auto to_px = [&](size_t i) {
            const int x = margin + static_cast<int>((width - 2 * margin - 1) *
                                                    (static_cast<double>(i) / (s.size() - 1)));
            const int y = height - margin -
                          static_cast<int>((height - 2 * margin - 1) * ((s[i] - lo) / (hi - lo)));
            return std::pair<int, int>(x, y);
        };
        for (size_t i = 0; i + 1 < s.size(); ++i) {
            auto [x0, y0] = to_px(i);
            auto [x1, y1] = to_px(i + 1);
            const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0)) + 1;
            for (int st = 0; st <= steps; ++st) {
                const int x = x0 + (x1 - x0) * st / steps;
                const int y = y0 + (y1 - y0) * st / steps;
                if (x >= 0 && x < width && y >= 0 && y < height)
                    for (int c = 0; c < 3; ++c) img.at(y, x, c) = col[c];
            }
        }
    }
    return img;
}

}  // namespace vidcont
