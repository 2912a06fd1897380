#pragma once

#include <vector>

#include "maskpriv/errors.hpp"
#include "maskpriv/image.hpp"

namespace maskpriv {

/// oracle replays ground-truth regions attached to synthetic frames;
/// heuristic finds skin-toned connected components. The heuristic constants
/// are tuned for the procedural generator and are not production-grade face
/// detection.
enum class DetectorKind { oracle, heuristic };

/// Classic RGB skin predicate.
inline bool skin_tone(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return r > 95 && g > 40 && b > 20 && r > g && r > b &&
           (r > g ? r - g : g - r) > 15;
}

namespace detail {

inline constexpr int kMinDetectionSide = 12;

inline std::vector<FaceRegion> detect_skin_components(const Image& img) {
    const int w = img.width, h = img.height;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            mask[static_cast<std::size_t>(y) * w + x] =
                skin_tone(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)) ? 1 : 0;

    std::vector<FaceRegion> out;
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (mask[idx] != 1)
                continue;
            // 4-connected flood fill collecting the component bounding box.
            int x0 = x, x1 = x, y0 = y, y1 = y;
            mask[idx] = 2;
            stack.push_back(static_cast<int>(idx));
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cy = cur / w, cx = cur % w;
                x0 = std::min(x0, cx);
                x1 = std::max(x1, cx);
                y0 = std::min(y0, cy);
                y1 = std::max(y1, cy);
                const int neighbors[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
                for (const auto& n : neighbors) {
                    if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h)
                        continue;
                    const std::size_t nidx = static_cast<std::size_t>(n[1]) * w + n[0];
                    if (mask[nidx] == 1) {
                        mask[nidx] = 2;
                        stack.push_back(static_cast<int>(nidx));
                    }
                }
            }
            const FaceRegion box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
            if (box.w > kMinDetectionSide && box.h > kMinDetectionSide)
                out.push_back(box);
        }
    }
    return out;
}

} // namespace detail

/// Face regions for a frame. The oracle variant needs the frame's ground
/// truth and returns it verbatim; the heuristic variant works from pixels
/// alone.
inline std::vector<FaceRegion> detect_faces(const Image& image, DetectorKind kind,
                                            const std::vector<FaceRegion>* ground_truth = nullptr) {
    if (kind == DetectorKind::oracle) {
        if (ground_truth == nullptr)
            throw MissingMetadata("detect_faces: oracle detector requires ground-truth metadata");
        for (const FaceRegion& r : *ground_truth)
            require_region_inside(r, image, "detect_faces");
        return *ground_truth;
    }
    return detail::detect_skin_components(image);
}

} // namespace maskpriv
