#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "maskpriv/csv.hpp"
#include "maskpriv/image.hpp"
#include "maskpriv/rng.hpp"
#include "maskpriv/synth.hpp"

namespace maskpriv {

/// Recipe for a balanced synthetic dataset: per_class masked plus per_class
/// unmasked faces, with hard_fraction of the masked ones flagged hard.
struct DatasetConfig {
    int per_class = 500;
    double hard_fraction = 0.0;
    int image_size = 64;
    std::uint64_t seed = 1;
};

inline std::vector<SynthSpec> make_dataset_specs(const DatasetConfig& cfg) {
    if (cfg.per_class < 1)
        throw InvalidParameter("dataset: per_class must be >= 1");
    if (cfg.hard_fraction < 0.0 || cfg.hard_fraction > 1.0)
        throw InvalidParameter("dataset: hard_fraction must be in [0, 1]");
    SplitMix64 rng(derive_seed(cfg.seed, 0xDA7A5E7ULL));
    std::vector<SynthSpec> specs;
    specs.reserve(static_cast<std::size_t>(cfg.per_class) * 2);
    for (int i = 0; i < cfg.per_class * 2; ++i) {
        SynthSpec s;
        s.image_size = cfg.image_size;
        s.masked = (i % 2) == 1;
        s.person_id = static_cast<std::uint64_t>(i) + 1;
        s.clothing_color = kClothingPalette[rng.next() % kClothingPalette.size()];
        s.mask_color = kMaskPalette[rng.next() % kMaskPalette.size()];
        s.hard_case = s.masked && rng.uniform01() < cfg.hard_fraction;
        s.rng_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        specs.push_back(s);
    }
    return specs;
}

inline std::vector<LabeledSample> build_dataset(const DatasetConfig& cfg) {
    std::vector<LabeledSample> samples;
    const auto specs = make_dataset_specs(cfg);
    samples.reserve(specs.size());
    for (const SynthSpec& s : specs)
        samples.push_back(synthesize(s));
    return samples;
}

/// Hard-case evaluation holdout: masked faces only, every one flagged hard.
inline std::vector<LabeledSample> build_hard_holdout(int count, int image_size, std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, 0x4841524443415345ULL));
    std::vector<LabeledSample> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        SynthSpec s;
        s.image_size = image_size;
        s.masked = true;
        s.hard_case = true;
        s.person_id = static_cast<std::uint64_t>(i) + 1;
        s.clothing_color = kClothingPalette[rng.next() % kClothingPalette.size()];
        s.mask_color = kMaskPalette[rng.next() % kMaskPalette.size()];
        s.rng_seed = derive_seed(seed, 0x48415244ULL + static_cast<std::uint64_t>(i));
        samples.push_back(synthesize(s));
    }
    return samples;
}

inline const std::vector<std::string>& manifest_header() {
    static const std::vector<std::string> header = {
        "path", "label", "face_x", "face_y", "face_w", "face_h",
        "image_size", "masked", "hard_case",
        "mask_r", "mask_g", "mask_b", "person_id",
        "clothing_r", "clothing_g", "clothing_b", "rng_seed"};
    return header;
}

/// Writes one PPM per sample plus manifest.csv describing every file.
inline void write_dataset(const std::filesystem::path& dir, const std::vector<LabeledSample>& samples) {
    std::filesystem::create_directories(dir);
    std::vector<csv::Row> rows;
    rows.push_back(manifest_header());
    char name[32];
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const LabeledSample& s = samples[i];
        std::snprintf(name, sizeof(name), "img_%05zu.ppm", i);
        write_image(s.image, dir / name);
        rows.push_back({name, to_string(s.label),
                        std::to_string(s.face.x), std::to_string(s.face.y),
                        std::to_string(s.face.w), std::to_string(s.face.h),
                        std::to_string(s.spec.image_size),
                        s.spec.masked ? "1" : "0",
                        s.spec.hard_case ? "1" : "0",
                        std::to_string(s.spec.mask_color.r),
                        std::to_string(s.spec.mask_color.g),
                        std::to_string(s.spec.mask_color.b),
                        std::to_string(s.spec.person_id),
                        std::to_string(s.spec.clothing_color.r),
                        std::to_string(s.spec.clothing_color.g),
                        std::to_string(s.spec.clothing_color.b),
                        std::to_string(s.spec.rng_seed)});
    }
    csv::write_file(dir / "manifest.csv", rows);
}

inline std::vector<LabeledSample> load_dataset(const std::filesystem::path& dir) {
    const auto rows = csv::read_file(dir / "manifest.csv");
    if (rows.empty() || rows[0] != manifest_header())
        throw IoError("dataset: unrecognized manifest header in " + dir.string());
    std::vector<LabeledSample> samples;
    samples.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const csv::Row& r = rows[i];
        if (r.size() != manifest_header().size())
            throw IoError("dataset: malformed manifest row " + std::to_string(i));
        LabeledSample s;
        s.image = read_image(dir / r[0]);
        s.label = (r[1] == "mask") ? MaskLabel::mask : MaskLabel::no_mask;
        s.face = {std::stoi(r[2]), std::stoi(r[3]), std::stoi(r[4]), std::stoi(r[5])};
        s.spec.image_size = std::stoi(r[6]);
        s.spec.masked = r[7] == "1";
        s.spec.hard_case = r[8] == "1";
        s.spec.mask_color = {static_cast<std::uint8_t>(std::stoi(r[9])),
                             static_cast<std::uint8_t>(std::stoi(r[10])),
                             static_cast<std::uint8_t>(std::stoi(r[11]))};
        s.spec.person_id = std::stoull(r[12]);
        s.spec.clothing_color = {static_cast<std::uint8_t>(std::stoi(r[13])),
                                 static_cast<std::uint8_t>(std::stoi(r[14])),
                                 static_cast<std::uint8_t>(std::stoi(r[15]))};
        s.spec.rng_seed = std::stoull(r[16]);
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace maskpriv
