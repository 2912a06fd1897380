#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "maskpriv/errors.hpp"
#include "maskpriv/image.hpp"

namespace maskpriv {

/// Blur strength as the ratio of the face extent to the kernel size.
/// f = 1 gives a kernel spanning the whole face (maximum blur); large f
/// approaches the identity.
struct BlurFactor {
    double value = 1.0;

    explicit BlurFactor(double v) : value(v) {
        if (!(v >= 1.0))
            throw InvalidParameter("blur factor must be >= 1");
    }

    bool operator==(const BlurFactor&) const = default;
};

/// Normalized, symmetric 1-D Gaussian kernel used separably in both axes.
struct GaussianKernel {
    int size = 1;        // odd tap count
    double sigma = 0.0;  // standard deviation in pixels
    std::vector<double> weights;

    int radius() const { return size / 2; }
};

/// Kernel for a face of the given extent at blur factor f.
/// Tap count is round(extent / f), bumped to the next odd integer and kept
/// within the extent; sigma = max(size/6, 0.3) so the taps cover ~±3 sigma.
inline GaussianKernel make_kernel(int region_extent, BlurFactor f) {
    if (region_extent < 1)
        throw InvalidParameter("make_kernel: region extent must be >= 1");
    int k = static_cast<int>(std::llround(region_extent / f.value));
    k = std::max(1, k);
    if (k % 2 == 0)
        ++k;
    const int max_k = (region_extent % 2 == 1) ? region_extent : region_extent + 1;
    k = std::min(k, max_k);

    GaussianKernel kern;
    kern.size = k;
    kern.sigma = std::max(k / 6.0, 0.3);
    kern.weights.resize(k);
    const int r = k / 2;
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * kern.sigma * kern.sigma));
        kern.weights[i + r] = w;
        sum += w;
    }
    for (double& w : kern.weights)
        w /= sum;
    return kern;
}

namespace detail {

inline int clamp_coord(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

/// Round to nearest, ties away from zero, clamp to [0, 255].
inline std::uint8_t quantize_channel(double v) {
    const double r = std::round(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

} // namespace detail

/// Separable Gaussian blur of one face region. The kernel extent follows the
/// shorter side of the region. Neighborhood reads clamp at the image border
/// and may pull in pixels around the region; writes stay strictly inside it,
/// every pixel outside comes back bit-identical.
inline Image blur_region(const Image& image, const FaceRegion& face, BlurFactor f) {
    require_region_inside(face, image, "blur_region");
    const GaussianKernel kern = make_kernel(std::min(face.w, face.h), f);
    Image out = image;
    if (kern.size == 1)
        return out; // identity kernel

    const int r = kern.radius();
    const int row_lo = detail::clamp_coord(face.y - r, 0, image.height - 1);
    const int row_hi = detail::clamp_coord(face.y + face.h - 1 + r, 0, image.height - 1);
    const int rows = row_hi - row_lo + 1;

    // Horizontal pass over every row the vertical pass can touch.
    std::vector<double> tmp(static_cast<std::size_t>(rows) * face.w * 3);
    for (int yy = row_lo; yy <= row_hi; ++yy) {
        for (int xx = face.x; xx < face.x + face.w; ++xx) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int i = -r; i <= r; ++i) {
                const int sx = detail::clamp_coord(xx + i, 0, image.width - 1);
                const double w = kern.weights[i + r];
                acc[0] += w * image.at(sx, yy, 0);
                acc[1] += w * image.at(sx, yy, 1);
                acc[2] += w * image.at(sx, yy, 2);
            }
            double* t = &tmp[((static_cast<std::size_t>(yy - row_lo)) * face.w + (xx - face.x)) * 3];
            t[0] = acc[0];
            t[1] = acc[1];
            t[2] = acc[2];
        }
    }

    // Vertical pass, writing only inside the region.
    for (int yy = face.y; yy < face.y + face.h; ++yy) {
        for (int xx = face.x; xx < face.x + face.w; ++xx) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int j = -r; j <= r; ++j) {
                const int sy = detail::clamp_coord(yy + j, 0, image.height - 1);
                const double w = kern.weights[j + r];
                const double* t = &tmp[((static_cast<std::size_t>(sy - row_lo)) * face.w + (xx - face.x)) * 3];
                acc[0] += w * t[0];
                acc[1] += w * t[1];
                acc[2] += w * t[2];
            }
            out.at(xx, yy, 0) = detail::quantize_channel(acc[0]);
            out.at(xx, yy, 1) = detail::quantize_channel(acc[1]);
            out.at(xx, yy, 2) = detail::quantize_channel(acc[2]);
        }
    }
    return out;
}

/// Population variance of one channel inside a region.
inline double region_channel_variance(const Image& img, const FaceRegion& region, int channel) {
    require_region_inside(region, img, "region_channel_variance");
    double sum = 0.0, sq = 0.0;
    for (int y = region.y; y < region.y + region.h; ++y) {
        for (int x = region.x; x < region.x + region.w; ++x) {
            const double v = img.at(x, y, channel);
            sum += v;
            sq += v * v;
        }
    }
    const double n = static_cast<double>(region.w) * region.h;
    const double mean = sum / n;
    return sq / n - mean * mean;
}

} // namespace maskpriv
