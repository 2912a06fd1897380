#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "maskpriv/errors.hpp"

namespace maskpriv {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Row-major 8-bit RGB raster. Immutable by convention once built: every
/// operation in this library returns a new Image instead of mutating in
/// place, which is what makes the whole pipeline safe to run concurrently.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // 3 * width * height, RGB interleaved

    Image() = default;

    Image(int w, int h, Rgb fill = {0, 0, 0}) : width(w), height(h) {
        if (w <= 0 || h <= 0)
            throw InvalidParameter("image dimensions must be positive");
        if (static_cast<std::int64_t>(w) * h > (1LL << 26))
            throw InvalidParameter("image too large");
        pixels.resize(static_cast<std::size_t>(w) * h * 3);
        for (std::size_t i = 0; i < pixels.size(); i += 3) {
            pixels[i] = fill.r;
            pixels[i + 1] = fill.g;
            pixels[i + 2] = fill.b;
        }
    }

    std::uint8_t& at(int x, int y, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    Rgb rgb(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }

    void set_rgb(int x, int y, Rgb v) {
        at(x, y, 0) = v.r;
        at(x, y, 1) = v.g;
        at(x, y, 2) = v.b;
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    bool operator==(const Image&) const = default;
};

/// Axis-aligned box locating a face inside an image.
struct FaceRegion {
    int x = 0, y = 0, w = 0, h = 0;

    bool valid() const { return x >= 0 && y >= 0 && w >= 1 && h >= 1; }
    bool inside(const Image& img) const {
        return valid() && x + w <= img.width && y + h <= img.height;
    }

    bool operator==(const FaceRegion&) const = default;
};

inline void require_region_inside(const FaceRegion& r, const Image& img, const char* what) {
    if (!r.inside(img))
        throw InvalidParameter(std::string(what) + ": face region outside image bounds");
}

/// Intersection-over-union of two boxes.
inline double region_iou(const FaceRegion& a, const FaceRegion& b) {
    const int x0 = std::max(a.x, b.x);
    const int y0 = std::max(a.y, b.y);
    const int x1 = std::min(a.x + a.w, b.x + b.w);
    const int y1 = std::min(a.y + a.h, b.y + b.h);
    const double inter = (x1 > x0 && y1 > y0)
                             ? static_cast<double>(x1 - x0) * (y1 - y0)
                             : 0.0;
    const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// ---------------------------------------------------------------------------
// Binary PPM (P6) codec. Header: "P6", whitespace-separated width, height and
// maxval 255, one whitespace byte, then 3*w*h payload bytes row-major.
// Writes use the canonical "P6\n<w> <h>\n255\n" header.
// ---------------------------------------------------------------------------

namespace detail {

inline int ppm_read_token(std::istream& in, const char* what) {
    // Skip whitespace and '#' comments, then read a decimal integer.
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
            ch = in.get();
        } else {
            break;
        }
    }
    if (ch == EOF)
        throw IoError(std::string("ppm: malformed header, missing ") + what);
    if (ch < '0' || ch > '9')
        throw IoError(std::string("ppm: malformed header, non-numeric ") + what);
    long value = 0;
    while (ch >= '0' && ch <= '9') {
        value = value * 10 + (ch - '0');
        if (value > std::numeric_limits<int>::max())
            throw IoError(std::string("ppm: malformed header, oversized ") + what);
        ch = in.get();
    }
    if (ch != EOF)
        in.unget();
    return static_cast<int>(value);
}

} // namespace detail

inline Image read_image(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '6')
        throw IoError("ppm: unsupported magic number (expected P6)");
    const int w = detail::ppm_read_token(in, "width");
    const int h = detail::ppm_read_token(in, "height");
    const int maxval = detail::ppm_read_token(in, "maxval");
    if (w < 1 || h < 1)
        throw IoError("ppm: malformed header, non-positive dimensions");
    if (maxval != 255)
        throw IoError("ppm: unsupported maxval (only 255)");
    const int sep = in.get();
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
        throw IoError("ppm: malformed header, missing separator before payload");
    Image img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw IoError("ppm: truncated payload");
    return img;
}

inline Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("ppm: cannot open " + path.string());
    return read_image(in);
}

inline void write_image(const Image& img, std::ostream& out) {
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

inline void write_image(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("ppm: cannot open " + path.string() + " for writing");
    write_image(img, out);
    if (!out)
        throw IoError("ppm: write failed for " + path.string());
}

} // namespace maskpriv
