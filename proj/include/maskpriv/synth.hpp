#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "maskpriv/image.hpp"
#include "maskpriv/rng.hpp"

namespace maskpriv {

enum class MaskLabel : std::uint8_t { no_mask = 0, mask = 1 };

inline const char* to_string(MaskLabel l) { return l == MaskLabel::mask ? "mask" : "no_mask"; }

/// Full recipe for one synthetic face image. Generation is a pure function
/// of this struct: identical specs produce bit-identical samples.
struct SynthSpec {
    int image_size = 64;               // square frame, >= 32
    bool masked = false;
    bool hard_case = false;            // skin-toned or painted-mouth mask
    Rgb mask_color = {140, 180, 210};  // requested cloth color (used when masked)
    std::uint64_t person_id = 0;
    Rgb clothing_color = {48, 80, 144};
    std::uint64_t rng_seed = 0;

    bool operator==(const SynthSpec&) const = default;
};

struct LabeledSample {
    Image image;
    FaceRegion face;
    MaskLabel label = MaskLabel::no_mask;
    SynthSpec spec;
};

/// Clothing colors sit at the centers of the 8-level-per-channel quantization
/// buckets used by the appearance tag, and none of them satisfies the
/// skin-tone predicate of the heuristic detector.
inline constexpr std::array<Rgb, 12> kClothingPalette = {{
    {48, 80, 144},   // navy
    {48, 112, 80},   // forest
    {80, 80, 80},    // charcoal
    {16, 112, 112},  // teal
    {112, 112, 144}, // slate
    {80, 48, 112},   // plum
    {112, 112, 48},  // olive
    {16, 16, 48},    // midnight
    {144, 144, 176}, // gray blue
    {16, 80, 80},    // dark teal
    {144, 160, 176}, // steel
    {80, 112, 16},   // moss
}};

/// Requested mask cloth colors. Rendering anchors them to the face's skin
/// tone with per-channel contrast clamped, so the emitted region stays
/// dominated by fine-grained texture rather than large flat color steps.
inline constexpr std::array<Rgb, 8> kMaskPalette = {{
    {140, 180, 210}, // light blue
    {230, 230, 230}, // white
    {40, 40, 45},    // black
    {150, 170, 120}, // sage
    {200, 130, 140}, // dusty rose
    {170, 150, 190}, // lavender
    {200, 180, 130}, // sand
    {90, 160, 160},  // teal
}};

inline Rgb clothing_for_person(std::uint64_t person_index) {
    return kClothingPalette[person_index % kClothingPalette.size()];
}

namespace detail {

// Per-channel contrast of the rendered mask against the skin tone.
inline constexpr int kMaskContrastCap = 24;
inline constexpr int kMaskContrastMin = 10;
inline constexpr int kHardContrastCap = 14;
// Amplitude of the shared-channel texture noise laid over the whole frame.
inline constexpr int kNoiseAmplitude = 84;

struct FaceGeometry {
    int cx, cy, rx, ry;
};

inline std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

inline Rgb offset_color(Rgb base, int dr, int dg, int db) {
    return {clamp_u8(base.r + dr), clamp_u8(base.g + dg), clamp_u8(base.b + db)};
}

inline int pixel_noise(std::uint64_t noise_seed, int x, int y, int amplitude) {
    const std::uint64_t h = mix64(noise_seed ^
                                  (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) * 0x9E3779B97F4A7C15ULL) ^
                                  (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) * 0xC2B2AE3D27D4EB4FULL));
    return static_cast<int>(h % (2 * static_cast<std::uint64_t>(amplitude) + 1)) - amplitude;
}

inline void fill_ellipse(Image& img, int cx, int cy, int rx, int ry, Rgb color,
                         int row_min, int row_max) {
    for (int y = std::max(cy - ry, std::max(0, row_min)); y <= std::min({cy + ry, img.height - 1, row_max}); ++y) {
        const double dy = static_cast<double>(y - cy) / ry;
        for (int x = std::max(cx - rx, 0); x <= std::min(cx + rx, img.width - 1); ++x) {
            const double dx = static_cast<double>(x - cx) / rx;
            if (dx * dx + dy * dy <= 1.0)
                img.set_rgb(x, y, color);
        }
    }
}

inline void fill_rect(Image& img, int x0, int y0, int x1, int y1, Rgb color) {
    for (int y = std::max(y0, 0); y <= std::min(y1, img.height - 1); ++y)
        for (int x = std::max(x0, 0); x <= std::min(x1, img.width - 1); ++x)
            img.set_rgb(x, y, color);
}

// Render the requested cloth color relative to the skin tone with
// per-channel contrast clamped. Cloth never shows skin's red dominance, so
// the red channel always drops under a mask.
inline Rgb anchor_to_skin(Rgb requested, Rgb skin, int cap, int min_contrast) {
    const int dr = std::clamp(static_cast<int>(requested.r) - skin.r, -cap, -min_contrast);
    const int dg = std::clamp(static_cast<int>(requested.g) - skin.g, -cap, cap);
    const int db = std::clamp(static_cast<int>(requested.b) - skin.b, -cap, cap);
    return offset_color(skin, dr, dg, db);
}

} // namespace detail

/// Deterministic procedural portrait: skin-tone face ellipse with eyes and a
/// mouth over a clothing-colored background, hair cap and neck filling the
/// face's bounding box, optional trapezoidal mask over the mouth/nose region.
/// The returned FaceRegion is the tight bounding box of the face ellipse.
inline LabeledSample synthesize(const SynthSpec& spec) {
    if (spec.image_size < 32)
        throw InvalidParameter("synthesize: image_size must be >= 32");

    const int S = spec.image_size;
    SplitMix64 rng(spec.rng_seed);

    // All draws happen unconditionally and in a fixed order, so two specs
    // differing only in flags share geometry, skin tone and noise field.
    const int cx = S / 2 + static_cast<int>(rng.uniform_int(-S / 16, S / 16));
    const int cy = static_cast<int>(std::lround(0.42 * S)) +
                   static_cast<int>(rng.uniform_int(-S / 24, S / 24));
    const int rx = static_cast<int>(std::lround(S * rng.uniform(0.16, 0.22)));
    const int ry = static_cast<int>(std::lround(rx * rng.uniform(1.25, 1.45)));
    const int skin_r = static_cast<int>(rng.uniform_int(152, 170));
    const int skin_g = skin_r - 30 + static_cast<int>(rng.uniform_int(-4, 4));
    const int skin_b = skin_g - 20 + static_cast<int>(rng.uniform_int(-4, 4));
    const int eye_jitter = static_cast<int>(rng.uniform_int(-6, 6));
    const int mouth_jitter = static_cast<int>(rng.uniform_int(-10, 10));
    const bool painted_mouth_variant = rng.uniform_int(0, 99) < 40;
    // Per-sample floor on mask contrast; the low end overlaps the hard-case
    // range so training sees mild masks too.
    const int mask_min_contrast = static_cast<int>(rng.uniform_int(detail::kMaskContrastMin,
                                                                    detail::kMaskContrastMin + 6));
    // Skin-toned cloth still lacks skin's red dominance, just barely.
    const int hard_dr = -6 - static_cast<int>(rng.uniform_int(0, 8));
    const int hard_dg = static_cast<int>(rng.uniform_int(-detail::kHardContrastCap, detail::kHardContrastCap));
    const int hard_db = static_cast<int>(rng.uniform_int(-detail::kHardContrastCap, detail::kHardContrastCap));
    const int pleat_phase = static_cast<int>(rng.uniform_int(0, 5));
    const std::uint64_t noise_seed = derive_seed(spec.rng_seed, 0x6E6F697365ULL);

    const Rgb skin = {detail::clamp_u8(skin_r), detail::clamp_u8(skin_g), detail::clamp_u8(skin_b)};
    // Hair tracks the skin tone per channel but keeps |R-G| <= 15 so the
    // skin predicate rejects it and detection stops at the face.
    const int hair_m = (skin_r + skin_g) / 2;
    const Rgb hair = {detail::clamp_u8(hair_m + 8), detail::clamp_u8(hair_m - 6),
                      detail::clamp_u8(skin_b + 6)};
    const Rgb eye_color = detail::offset_color({46, 36, 34}, eye_jitter, eye_jitter, eye_jitter);
    const Rgb mouth_color = detail::offset_color({120, 48, 48}, mouth_jitter, mouth_jitter / 2, mouth_jitter / 2);

    Image img(S, S, spec.clothing_color);

    // Hair cap behind the face; wide enough to cover the bounding box
    // corners, clipped so it never reaches below the box.
    const int hx = static_cast<int>(std::lround(rx * 1.70));
    const int hy = static_cast<int>(std::lround(ry * 1.45));
    detail::fill_ellipse(img, cx, cy, hx, hy, hair, 0, cy + ry);

    // Collar band through the lower bounding box, drawn in the hair tone:
    // close to skin in value so a face-sized blur kernel sampling past the
    // region border stays near face colors, yet rejected by the skin
    // predicate so detection stops at the face ellipse.
    const int collar_hw = static_cast<int>(std::lround(rx * 1.50));
    const int collar_drop = std::max(2, (2 * ry + 1) / 4);
    detail::fill_rect(img, cx - collar_hw, cy + static_cast<int>(std::lround(ry * 0.35)),
                      cx + collar_hw, cy + ry + collar_drop, hair);

    detail::fill_ellipse(img, cx, cy, rx, ry, skin, 0, img.height - 1);

    const int eye_dx = static_cast<int>(std::lround(rx * 0.45));
    const int eye_dy = static_cast<int>(std::lround(ry * 0.28));
    const int eye_r = std::max(1, static_cast<int>(std::lround(rx * 0.13)));
    detail::fill_ellipse(img, cx - eye_dx, cy - eye_dy, eye_r, eye_r, eye_color, 0, img.height - 1);
    detail::fill_ellipse(img, cx + eye_dx, cy - eye_dy, eye_r, eye_r, eye_color, 0, img.height - 1);

    const int mouth_cy = cy + static_cast<int>(std::lround(ry * 0.45));
    const int mouth_rx = std::max(2, static_cast<int>(std::lround(rx * 0.46)));
    const int mouth_ry = std::max(1, static_cast<int>(std::lround(ry * 0.11)));
    detail::fill_ellipse(img, cx, mouth_cy, mouth_rx, mouth_ry, mouth_color, 0, img.height - 1);

    if (spec.masked) {
        const bool skin_like = spec.hard_case && !painted_mouth_variant;
        Rgb mask_rgb;
        if (skin_like) {
            mask_rgb = detail::offset_color(skin, hard_dr, hard_dg, hard_db);
        } else {
            mask_rgb = detail::anchor_to_skin(spec.mask_color, skin,
                                              detail::kMaskContrastCap, mask_min_contrast);
        }
        const Rgb pleat_rgb = {detail::clamp_u8(static_cast<int>(mask_rgb.r * 0.55)),
                               detail::clamp_u8(static_cast<int>(mask_rgb.g * 0.55)),
                               detail::clamp_u8(static_cast<int>(mask_rgb.b * 0.55))};

        // Trapezoid over the mouth/nose region: full face width at the top,
        // tapering toward the chin, clipped to the face bounding box.
        const int top_y = cy;
        const int bot_y = cy + ry;
        const int top_hw = rx;
        const int bot_hw = static_cast<int>(std::lround(rx * 0.70));
        for (int y = std::max(top_y, 0); y <= std::min(bot_y, img.height - 1); ++y) {
            const double t = (bot_y == top_y) ? 0.0
                                              : static_cast<double>(y - top_y) / (bot_y - top_y);
            const int hw = static_cast<int>(std::lround(top_hw + t * (bot_hw - top_hw)));
            // Pleats: fine horizontal texture the classifier can key on at
            // mild blur; a face-scale kernel wipes it out entirely.
            const Rgb row_color = ((y - top_y) % 4 == pleat_phase % 4) ? pleat_rgb : mask_rgb;
            for (int x = std::max({cx - hw, cx - rx, 0});
                 x <= std::min({cx + hw, cx + rx, img.width - 1}); ++x)
                img.set_rgb(x, y, row_color);
        }

        if (spec.hard_case && painted_mouth_variant) {
            // Mouth-like ring painted on the cloth.
            const int ring_rx = std::max(2, static_cast<int>(std::lround(rx * 0.50)));
            const int ring_ry = std::max(2, static_cast<int>(std::lround(ry * 0.12)));
            const Rgb ring_color = {152, 58, 62};
            for (int y = std::max(mouth_cy - ring_ry, 0); y <= std::min(mouth_cy + ring_ry, img.height - 1); ++y) {
                for (int x = std::max(cx - ring_rx, 0); x <= std::min(cx + ring_rx, img.width - 1); ++x) {
                    const double ex = static_cast<double>(x - cx) / ring_rx;
                    const double ey = static_cast<double>(y - mouth_cy) / ring_ry;
                    const double e = ex * ex + ey * ey;
                    if (e >= 0.45 && e <= 1.0)
                        img.set_rgb(x, y, ring_color);
                }
            }
        }
    }

    // Shared-channel texture noise over the whole frame. Adding the same
    // value to R, G and B preserves channel ordering, so the skin-tone
    // predicate keeps holding on skin pixels.
    for (int y = 0; y < S; ++y) {
        for (int x = 0; x < S; ++x) {
            const int n = detail::pixel_noise(noise_seed, x, y, detail::kNoiseAmplitude);
            for (int c = 0; c < 3; ++c) {
                std::uint8_t& px = img.at(x, y, c);
                px = detail::clamp_u8(static_cast<int>(px) + n);
            }
        }
    }

    LabeledSample sample;
    sample.image = std::move(img);
    sample.face = FaceRegion{cx - rx, cy - ry, 2 * rx + 1, 2 * ry + 1};
    sample.label = spec.masked ? MaskLabel::mask : MaskLabel::no_mask;
    sample.spec = spec;
    return sample;
}

} // namespace maskpriv
