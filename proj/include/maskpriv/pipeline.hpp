#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "maskpriv/blur.hpp"
#include "maskpriv/classifier.hpp"
#include "maskpriv/detect.hpp"
#include "maskpriv/errors.hpp"
#include "maskpriv/image.hpp"
#include "maskpriv/synth.hpp"

namespace maskpriv {

enum class ModeKind { baseline, centralized, decentralized };

inline const char* to_string(ModeKind k) {
    switch (k) {
        case ModeKind::baseline: return "baseline";
        case ModeKind::centralized: return "centralized";
        default: return "decentralized";
    }
}

/// Deployment choice. A blur factor is carried exactly when the mode is
/// centralized; the optional checksum pins the central model configuration.
struct DeploymentMode {
    ModeKind kind = ModeKind::baseline;
    std::optional<BlurFactor> blur;
    std::optional<std::uint64_t> checksum;

    static DeploymentMode baseline() { return {ModeKind::baseline, {}, {}}; }
    static DeploymentMode centralized(BlurFactor f, std::optional<std::uint64_t> checksum = {}) {
        return {ModeKind::centralized, f, checksum};
    }
    static DeploymentMode decentralized() { return {ModeKind::decentralized, {}, {}}; }
};

inline void validate(const DeploymentMode& mode) {
    if ((mode.kind == ModeKind::centralized) != mode.blur.has_value())
        throw ConfigurationError("deployment mode: blur factor present iff centralized");
}

/// Simulation-side ground truth attached to a frame; never serialized.
struct GroundTruthFace {
    FaceRegion region;
    MaskLabel label = MaskLabel::no_mask;
    std::uint64_t person_id = 0;
    Rgb clothing;
};

struct Frame {
    std::string camera_id;
    std::uint64_t ts = 0;
    Image image;
    std::vector<GroundTruthFace> truth;
};

/// Aggregate-only wire payload; by construction there is no field that
/// could carry pixel data.
struct EdgeReport {
    std::string camera_id;
    std::uint64_t ts = 0;
    std::uint32_t persons_total = 0;
    std::uint32_t persons_masked = 0;

    bool operator==(const EdgeReport&) const = default;
};

/// Frame whose listed regions went through blur_region on the edge.
struct AnonymizedFrame {
    std::string camera_id;
    std::uint64_t ts = 0;
    Image image;
    std::vector<FaceRegion> regions;
    std::vector<std::uint32_t> tags; // appearance tag per region
    std::uint64_t checksum = 0;      // model digest + blur factor binding

    bool operator==(const AnonymizedFrame&) const = default;
};

/// Baseline-only payload: the unmodified frame. Retained as the
/// privacy-violating reference path; carries no simulation metadata.
struct RawFrame {
    std::string camera_id;
    std::uint64_t ts = 0;
    Image image;

    bool operator==(const RawFrame&) const = default;
};

struct EdgeMessage {
    int version = 1;
    std::variant<EdgeReport, AnonymizedFrame, RawFrame> payload;

    bool operator==(const EdgeMessage&) const = default;
};

struct CameraCounts {
    std::uint64_t total = 0;
    std::uint64_t masked = 0;

    bool operator==(const CameraCounts&) const = default;
};

/// Fold of edge reports. ratio is empty when no persons were counted,
/// forcing consumers to handle the undefined case explicitly.
struct AggregateResult {
    std::uint64_t persons_total = 0;
    std::uint64_t persons_masked = 0;
    std::optional<double> ratio;
    std::map<std::string, CameraCounts> per_camera;

    bool operator==(const AggregateResult&) const = default;
};

// ---------------------------------------------------------------------------
// Appearance tag: mean color of the clothing strip just below a face region,
// quantized to 8 levels per channel and packed one level per byte into a
// 24-bit bucket id. Anonymous and intentionally collision-prone.
// ---------------------------------------------------------------------------

inline std::uint32_t appearance_tag(const Image& image, const FaceRegion& face) {
    require_region_inside(face, image, "appearance_tag");
    // One gap below the chin keeps the strip on clothing rather than neck.
    const int gap = std::max(2, face.h / 4);
    const int strip_h = std::max(2, face.h / 4);
    int y0 = std::min(face.y + face.h + gap, image.height - 1);
    int y1 = std::min(y0 + strip_h, image.height);
    double sum[3] = {0, 0, 0};
    std::uint64_t n = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = face.x; x < face.x + face.w; ++x) {
            for (int c = 0; c < 3; ++c)
                sum[c] += image.at(x, y, c);
            ++n;
        }
    }
    std::uint32_t tag = 0;
    for (int c = 0; c < 3; ++c) {
        const auto mean = static_cast<std::uint32_t>(sum[c] / static_cast<double>(n));
        tag = (tag << 8) | ((mean >> 5) & 0x07);
    }
    return tag;
}

// ---------------------------------------------------------------------------
// Edge node
// ---------------------------------------------------------------------------

using ClassifyFn = std::function<MaskLabel(const Image&, const FaceRegion&)>;

inline ClassifyFn model_classifier(const ClassifierModel& model) {
    return [&model](const Image& img, const FaceRegion& r) {
        return predict(model, preprocess(img, r, model.input_size)).label;
    };
}

namespace detail {

inline const std::vector<FaceRegion>* truth_regions(const Frame& frame,
                                                    std::vector<FaceRegion>& storage) {
    storage.clear();
    storage.reserve(frame.truth.size());
    for (const GroundTruthFace& t : frame.truth)
        storage.push_back(t.region);
    return &storage;
}

inline EdgeMessage edge_process_with(const Frame& frame, const DeploymentMode& mode,
                                     DetectorKind detector, const ClassifyFn& classify) {
    validate(mode);
    std::vector<FaceRegion> storage;
    const std::vector<FaceRegion>* metadata =
        detector == DetectorKind::oracle ? truth_regions(frame, storage) : nullptr;

    switch (mode.kind) {
        case ModeKind::baseline:
            // Reference path only: forwards the raw frame, violating privacy.
            return {1, RawFrame{frame.camera_id, frame.ts, frame.image}};
        case ModeKind::centralized: {
            const auto regions = detect_faces(frame.image, detector, metadata);
            AnonymizedFrame anon;
            anon.camera_id = frame.camera_id;
            anon.ts = frame.ts;
            anon.image = frame.image;
            for (const FaceRegion& r : regions)
                anon.image = blur_region(anon.image, r, *mode.blur);
            anon.regions = regions;
            anon.tags.reserve(regions.size());
            for (const FaceRegion& r : regions)
                anon.tags.push_back(appearance_tag(anon.image, r));
            anon.checksum = mode.checksum.value_or(0);
            return {1, std::move(anon)};
        }
        case ModeKind::decentralized:
        default: {
            if (!classify)
                throw ConfigurationError("edge_process: decentralized mode requires a classifier");
            const auto regions = detect_faces(frame.image, detector, metadata);
            EdgeReport report;
            report.camera_id = frame.camera_id;
            report.ts = frame.ts;
            report.persons_total = static_cast<std::uint32_t>(regions.size());
            for (const FaceRegion& r : regions)
                if (classify(frame.image, r) == MaskLabel::mask)
                    ++report.persons_masked;
            return {1, std::move(report)};
        }
    }
}

} // namespace detail

/// One frame through the edge node. baseline emits the raw frame,
/// centralized blurs every detected face and emits the anonymized frame,
/// decentralized classifies on the edge and emits counts only.
inline EdgeMessage edge_process(const Frame& frame, const DeploymentMode& mode,
                                const ClassifierModel* model, DetectorKind detector) {
    if (mode.kind == ModeKind::decentralized && model == nullptr)
        throw ConfigurationError("edge_process: decentralized mode requires a model");
    ClassifyFn classify;
    if (model)
        classify = model_classifier(*model);
    return detail::edge_process_with(frame, mode, detector, classify);
}

/// Central mask recognition over an anonymized frame. The caller supplies
/// the checksum of its own (model, blur) configuration; a mismatch with the
/// one embedded by the edge is a deployment error.
inline EdgeReport central_classify(const AnonymizedFrame& msg, const ClassifierModel& model,
                                   std::optional<std::uint64_t> expected_checksum = {}) {
    if (expected_checksum && *expected_checksum != msg.checksum)
        throw ConfigurationError("central_classify: configuration checksum mismatch");
    EdgeReport report;
    report.camera_id = msg.camera_id;
    report.ts = msg.ts;
    report.persons_total = static_cast<std::uint32_t>(msg.regions.size());
    for (const FaceRegion& r : msg.regions)
        if (predict(model, preprocess(msg.image, r, model.input_size)).label == MaskLabel::mask)
            ++report.persons_masked;
    return report;
}

/// Baseline central side: detect (heuristically; raw frames carry no
/// metadata) and classify the unmodified frame.
inline EdgeReport classify_raw(const RawFrame& msg, const ClassifierModel& model) {
    const auto regions = detect_faces(msg.image, DetectorKind::heuristic);
    EdgeReport report;
    report.camera_id = msg.camera_id;
    report.ts = msg.ts;
    report.persons_total = static_cast<std::uint32_t>(regions.size());
    for (const FaceRegion& r : regions)
        if (predict(model, preprocess(msg.image, r, model.input_size)).label == MaskLabel::mask)
            ++report.persons_masked;
    return report;
}

/// Order-independent fold over edge reports.
inline AggregateResult aggregate(const std::vector<EdgeReport>& reports) {
    AggregateResult out;
    for (const EdgeReport& r : reports) {
        out.persons_total += r.persons_total;
        out.persons_masked += r.persons_masked;
        CameraCounts& cam = out.per_camera[r.camera_id];
        cam.total += r.persons_total;
        cam.masked += r.persons_masked;
    }
    if (out.persons_total > 0)
        out.ratio = static_cast<double>(out.persons_masked) / static_cast<double>(out.persons_total);
    return out;
}

// ---------------------------------------------------------------------------
// Cross-camera deduplication (centralized only: decentralized forwards no
// per-person data, so no association between streams is possible).
// ---------------------------------------------------------------------------

struct Detection {
    std::string camera_id;
    std::uint64_t ts = 0;
    std::uint32_t tag = 0;
    MaskLabel label = MaskLabel::no_mask;
};

/// Groups detections by appearance tag over the whole run; each group counts
/// once, labeled by majority vote with ties broken by the earliest
/// (ts, camera_id) detection. Distinct persons with colliding tags are
/// merged, which undercounts; that residual error is inherent to the tag.
inline AggregateResult dedup_detections(const std::vector<Detection>& detections) {
    std::map<std::uint32_t, std::vector<const Detection*>> groups;
    for (const Detection& d : detections)
        groups[d.tag].push_back(&d);
    std::vector<EdgeReport> folded;
    for (auto& [tag, members] : groups) {
        (void)tag;
        std::size_t masked_votes = 0;
        const Detection* earliest = members.front();
        for (const Detection* d : members) {
            if (d->label == MaskLabel::mask)
                ++masked_votes;
            if (d->ts < earliest->ts ||
                (d->ts == earliest->ts && d->camera_id < earliest->camera_id))
                earliest = d;
        }
        bool masked;
        if (2 * masked_votes > members.size())
            masked = true;
        else if (2 * masked_votes < members.size())
            masked = false;
        else
            masked = earliest->label == MaskLabel::mask;
        folded.push_back({earliest->camera_id, earliest->ts, 1, masked ? 1u : 0u});
    }
    return aggregate(folded);
}

/// Deduplicated aggregate from anonymized frames and their per-region
/// classifications.
inline AggregateResult dedup_centralized(const std::vector<AnonymizedFrame>& frames,
                                         const std::vector<std::vector<MaskLabel>>& labels) {
    if (frames.size() != labels.size())
        throw InvalidParameter("dedup_centralized: frames/labels size mismatch");
    std::vector<Detection> detections;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].regions.size() != labels[i].size())
            throw InvalidParameter("dedup_centralized: region/label count mismatch");
        for (std::size_t j = 0; j < labels[i].size(); ++j)
            detections.push_back({frames[i].camera_id, frames[i].ts, frames[i].tags[j], labels[i][j]});
    }
    return dedup_detections(detections);
}

// ---------------------------------------------------------------------------
// Multi-camera overlap simulation
// ---------------------------------------------------------------------------

/// Camera sets per person; a person appearing in several cameras is the
/// source of aggregation bias.
struct DuplicationPlan {
    std::vector<std::vector<int>> cameras_of_person;
};

struct SimulationConfig {
    int cameras = 1;
    DeploymentMode mode = DeploymentMode::decentralized();
    DetectorKind detector = DetectorKind::oracle;
    const ClassifierModel* model = nullptr; // nullptr = perfect (ground-truth) classifier
    int image_size = 64;
    std::uint64_t seed = 1;
};

struct SimulationResult {
    AggregateResult naive;
    std::optional<AggregateResult> dedup; // centralized mode only
    double true_ratio = 0.0;
    std::vector<EdgeMessage> messages;
    std::vector<Detection> detections; // centralized mode only
};

inline std::string camera_name(int index) { return "cam" + std::to_string(index); }

/// Materializes one frame per (person, camera) appearance, runs the full
/// mode pipeline and returns the naive aggregate next to the population's
/// true masked ratio. Each appearance is an independent synthesized view of
/// the same person identity and clothing color.
inline SimulationResult simulate_overlap(const std::vector<bool>& masked, int cameras,
                                         const DuplicationPlan& plan, const SimulationConfig& cfg) {
    validate(cfg.mode);
    if (cameras < 1)
        throw InvalidParameter("simulate_overlap: need at least one camera");
    if (plan.cameras_of_person.size() != masked.size())
        throw InvalidParameter("simulate_overlap: plan size does not match population");
    for (const auto& cams : plan.cameras_of_person) {
        if (cams.empty())
            throw InvalidParameter("simulate_overlap: person with empty camera set");
        for (int c : cams)
            if (c < 0 || c >= cameras)
                throw InvalidParameter("simulate_overlap: camera index out of range");
    }
    if (cfg.mode.kind == ModeKind::decentralized && cfg.model == nullptr &&
        cfg.detector != DetectorKind::oracle)
        throw ConfigurationError("simulate_overlap: perfect classifier requires the oracle detector");

    // Ground-truth classifier: looks the region up in the frame's metadata.
    const auto classify_for = [&](const Frame& frame) -> ClassifyFn {
        if (cfg.model)
            return model_classifier(*cfg.model);
        return [&frame](const Image&, const FaceRegion& r) {
            for (const GroundTruthFace& t : frame.truth)
                if (t.region == r)
                    return t.label;
            throw MissingMetadata("simulate_overlap: region without ground truth");
        };
    };

    SimulationResult result;
    std::vector<EdgeReport> reports;
    std::vector<AnonymizedFrame> anon_frames;
    std::vector<std::vector<MaskLabel>> anon_labels;

    std::vector<std::uint64_t> ts_per_camera(static_cast<std::size_t>(cameras), 0);
    for (int cam = 0; cam < cameras; ++cam) {
        for (std::size_t person = 0; person < masked.size(); ++person) {
            bool appears = false;
            for (int c : plan.cameras_of_person[person])
                if (c == cam)
                    appears = true;
            if (!appears)
                continue;

            SynthSpec spec;
            spec.image_size = cfg.image_size;
            spec.masked = masked[person];
            spec.person_id = person + 1;
            spec.clothing_color = clothing_for_person(person);
            spec.mask_color = kMaskPalette[person % kMaskPalette.size()];
            spec.rng_seed = derive_seed(cfg.seed, person * 0x10000ULL + static_cast<std::uint64_t>(cam));
            LabeledSample sample = synthesize(spec);

            Frame frame;
            frame.camera_id = camera_name(cam);
            frame.ts = ts_per_camera[cam]++;
            frame.image = std::move(sample.image);
            frame.truth.push_back({sample.face, sample.label, spec.person_id, spec.clothing_color});

            EdgeMessage msg = detail::edge_process_with(frame, cfg.mode, cfg.detector,
                                                        classify_for(frame));
            switch (cfg.mode.kind) {
                case ModeKind::baseline: {
                    const RawFrame& raw = std::get<RawFrame>(msg.payload);
                    if (cfg.model) {
                        reports.push_back(classify_raw(raw, *cfg.model));
                    } else {
                        // Perfect classifier: counts follow ground truth.
                        reports.push_back({frame.camera_id, frame.ts, 1,
                                           masked[person] ? 1u : 0u});
                    }
                    break;
                }
                case ModeKind::centralized: {
                    const AnonymizedFrame& anon = std::get<AnonymizedFrame>(msg.payload);
                    std::vector<MaskLabel> frame_labels;
                    EdgeReport report{anon.camera_id, anon.ts,
                                      static_cast<std::uint32_t>(anon.regions.size()), 0};
                    for (std::size_t j = 0; j < anon.regions.size(); ++j) {
                        MaskLabel label;
                        if (cfg.model) {
                            label = predict(*cfg.model,
                                            preprocess(anon.image, anon.regions[j],
                                                       cfg.model->input_size))
                                        .label;
                        } else {
                            label = sample.label;
                        }
                        frame_labels.push_back(label);
                        if (label == MaskLabel::mask)
                            ++report.persons_masked;
                        result.detections.push_back({anon.camera_id, anon.ts, anon.tags[j], label});
                    }
                    reports.push_back(report);
                    anon_frames.push_back(anon);
                    anon_labels.push_back(std::move(frame_labels));
                    break;
                }
                case ModeKind::decentralized:
                    reports.push_back(std::get<EdgeReport>(msg.payload));
                    break;
            }
            result.messages.push_back(std::move(msg));
        }
    }

    result.naive = aggregate(reports);
    if (cfg.mode.kind == ModeKind::centralized)
        result.dedup = dedup_centralized(anon_frames, anon_labels);

    std::size_t truly_masked = 0;
    for (bool m : masked)
        if (m)
            ++truly_masked;
    result.true_ratio = masked.empty() ? 0.0
                                       : static_cast<double>(truly_masked) /
                                             static_cast<double>(masked.size());
    return result;
}

} // namespace maskpriv
