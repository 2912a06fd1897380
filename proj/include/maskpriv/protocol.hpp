#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maskpriv/blur.hpp"
#include "maskpriv/dataset.hpp"
#include "maskpriv/errors.hpp"
#include "maskpriv/pipeline.hpp"

namespace maskpriv {

// ---------------------------------------------------------------------------
// Wire format, version 1. Newline-delimited records: a one-line JSON header,
// followed for pixel-bearing types by a decimal payload length line, the raw
// RGB payload bytes and a terminating newline. decode(encode(m)) == m.
//
//   {"camera_id":"c1","masked":3,"total":4,"ts":7,"type":"report","v":1}
//   {"camera_id":"c0",...,"type":"anon","v":1}
//   12288
//   <bytes>
// ---------------------------------------------------------------------------

inline constexpr int kWireVersion = 1;

inline std::string encode(const EdgeMessage& msg) {
    nlohmann::json j;
    j["v"] = msg.version;
    std::string out;
    const Image* payload = nullptr;
    if (const auto* report = std::get_if<EdgeReport>(&msg.payload)) {
        j["type"] = "report";
        j["camera_id"] = report->camera_id;
        j["ts"] = report->ts;
        j["total"] = report->persons_total;
        j["masked"] = report->persons_masked;
    } else if (const auto* anon = std::get_if<AnonymizedFrame>(&msg.payload)) {
        j["type"] = "anon";
        j["camera_id"] = anon->camera_id;
        j["ts"] = anon->ts;
        j["width"] = anon->image.width;
        j["height"] = anon->image.height;
        auto regions = nlohmann::json::array();
        for (const FaceRegion& r : anon->regions)
            regions.push_back({r.x, r.y, r.w, r.h});
        j["regions"] = std::move(regions);
        j["tags"] = anon->tags;
        j["checksum"] = anon->checksum;
        payload = &anon->image;
    } else {
        const auto& raw = std::get<RawFrame>(msg.payload);
        j["type"] = "raw";
        j["camera_id"] = raw.camera_id;
        j["ts"] = raw.ts;
        j["width"] = raw.image.width;
        j["height"] = raw.image.height;
        payload = &raw.image;
    }
    out += j.dump();
    out += '\n';
    if (payload) {
        out += std::to_string(payload->pixels.size());
        out += '\n';
        out.append(reinterpret_cast<const char*>(payload->pixels.data()), payload->pixels.size());
        out += '\n';
    }
    return out;
}

inline std::string encode_stream(const std::vector<EdgeMessage>& msgs) {
    std::string out;
    for (const EdgeMessage& m : msgs)
        out += encode(m);
    return out;
}

namespace detail {

struct DecodedRecord {
    EdgeMessage msg;
    std::set<std::string> header_keys;
};

inline std::string_view take_line(std::string_view text, std::size_t& pos, const char* what) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
        throw CodecError(std::string("wire: missing newline after ") + what);
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
}

template <typename T>
T json_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
        throw CodecError(std::string("wire: header missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw CodecError(std::string("wire: header field '") + key + "' has wrong type");
    }
}

inline Image decode_payload(std::string_view text, std::size_t& pos, int width, int height) {
    if (width < 1 || height < 1)
        throw CodecError("wire: non-positive image dimensions");
    const std::string_view len_line = take_line(text, pos, "payload length");
    std::uint64_t declared = 0;
    if (len_line.empty())
        throw CodecError("wire: empty payload length");
    for (char c : len_line) {
        if (c < '0' || c > '9')
            throw CodecError("wire: malformed payload length");
        declared = declared * 10 + static_cast<std::uint64_t>(c - '0');
        if (declared > (1ULL << 32))
            throw CodecError("wire: payload length out of range");
    }
    const std::uint64_t expected = static_cast<std::uint64_t>(width) * height * 3;
    if (declared != expected)
        throw CodecError("wire: payload length mismatch with declared dimensions");
    if (pos + declared + 1 > text.size())
        throw CodecError("wire: truncated payload");
    Image img(width, height);
    std::copy_n(reinterpret_cast<const std::uint8_t*>(text.data()) + pos, declared,
                img.pixels.begin());
    pos += declared;
    if (text[pos] != '\n')
        throw CodecError("wire: payload not newline-terminated");
    ++pos;
    return img;
}

inline DecodedRecord decode_record(std::string_view text, std::size_t& pos) {
    const std::string_view header = take_line(text, pos, "header");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception&) {
        throw CodecError("wire: malformed header json");
    }
    if (!j.is_object())
        throw CodecError("wire: header is not an object");

    DecodedRecord rec;
    for (auto it = j.begin(); it != j.end(); ++it)
        rec.header_keys.insert(it.key());

    const int version = json_field<int>(j, "v");
    if (version != kWireVersion)
        throw CodecError("wire: version mismatch (expected " + std::to_string(kWireVersion) +
                         ", got " + std::to_string(version) + ")");
    rec.msg.version = version;

    const std::string type = json_field<std::string>(j, "type");
    if (type == "report") {
        EdgeReport report;
        report.camera_id = json_field<std::string>(j, "camera_id");
        report.ts = json_field<std::uint64_t>(j, "ts");
        report.persons_total = json_field<std::uint32_t>(j, "total");
        report.persons_masked = json_field<std::uint32_t>(j, "masked");
        if (report.persons_masked > report.persons_total)
            throw CodecError("wire: report counts violate 0 <= masked <= total");
        rec.msg.payload = std::move(report);
    } else if (type == "anon") {
        AnonymizedFrame anon;
        anon.camera_id = json_field<std::string>(j, "camera_id");
        anon.ts = json_field<std::uint64_t>(j, "ts");
        const int width = json_field<int>(j, "width");
        const int height = json_field<int>(j, "height");
        const auto regions = json_field<std::vector<std::vector<int>>>(j, "regions");
        anon.tags = json_field<std::vector<std::uint32_t>>(j, "tags");
        anon.checksum = json_field<std::uint64_t>(j, "checksum");
        if (regions.size() != anon.tags.size())
            throw CodecError("wire: region/tag count mismatch");
        anon.image = decode_payload(text, pos, width, height);
        for (const auto& r : regions) {
            if (r.size() != 4)
                throw CodecError("wire: region must have 4 coordinates");
            const FaceRegion region{r[0], r[1], r[2], r[3]};
            if (!region.inside(anon.image))
                throw CodecError("wire: region outside image bounds");
            anon.regions.push_back(region);
        }
        for (std::uint32_t tag : anon.tags)
            if (tag > 0xFFFFFF)
                throw CodecError("wire: appearance tag exceeds 24 bits");
        rec.msg.payload = std::move(anon);
    } else if (type == "raw") {
        RawFrame raw;
        raw.camera_id = json_field<std::string>(j, "camera_id");
        raw.ts = json_field<std::uint64_t>(j, "ts");
        const int width = json_field<int>(j, "width");
        const int height = json_field<int>(j, "height");
        raw.image = decode_payload(text, pos, width, height);
        rec.msg.payload = std::move(raw);
    } else {
        throw CodecError("wire: unknown type tag '" + type + "'");
    }
    return rec;
}

inline const std::set<std::string>& expected_keys(const EdgeMessage& msg) {
    static const std::set<std::string> report_keys = {"v", "type", "camera_id", "ts",
                                                      "total", "masked"};
    static const std::set<std::string> anon_keys = {"v", "type", "camera_id", "ts", "width",
                                                    "height", "regions", "tags", "checksum"};
    static const std::set<std::string> raw_keys = {"v", "type", "camera_id", "ts",
                                                   "width", "height"};
    if (std::holds_alternative<EdgeReport>(msg.payload))
        return report_keys;
    if (std::holds_alternative<AnonymizedFrame>(msg.payload))
        return anon_keys;
    return raw_keys;
}

} // namespace detail

inline EdgeMessage decode(std::string_view bytes) {
    std::size_t pos = 0;
    detail::DecodedRecord rec = detail::decode_record(bytes, pos);
    if (pos != bytes.size())
        throw CodecError("wire: trailing bytes after record");
    return std::move(rec.msg);
}

inline std::vector<EdgeMessage> decode_stream(std::string_view bytes) {
    std::vector<EdgeMessage> out;
    std::size_t pos = 0;
    while (pos < bytes.size())
        out.push_back(detail::decode_record(bytes, pos).msg);
    return out;
}

// ---------------------------------------------------------------------------
// Privacy audit
// ---------------------------------------------------------------------------

struct AuditViolation {
    std::int64_t index = 0; // message index; -1 for stream-level findings
    std::string reason;

    bool operator==(const AuditViolation&) const = default;
};

struct AuditVerdict {
    bool compliant = true;
    std::vector<AuditViolation> violations;
};

/// Upper bound on the per-channel variance a face region can retain after an
/// honest blur at factor f, calibrated once by blurring a fixed set of
/// synthetic faces. Regions above the bound were not plausibly blurred.
/// Heuristic enforcement: "was blurred" is not observable from pixels alone.
inline double blurred_variance_bound(BlurFactor f) {
    double worst = 0.0;
    std::uint64_t case_index = 0;
    for (int size : {48, 64, 96}) {
        for (int i = 0; i < 16; ++i) {
            SynthSpec spec;
            spec.image_size = size;
            spec.masked = (i % 2) == 1;
            spec.person_id = case_index + 1;
            spec.mask_color = kMaskPalette[(i / 2 + size) % kMaskPalette.size()];
            spec.clothing_color = kClothingPalette[(i + size / 16) % kClothingPalette.size()];
            spec.rng_seed = derive_seed(0xCA11B7A7E5EEDULL, case_index++);
            const LabeledSample sample = synthesize(spec);
            const Image blurred = blur_region(sample.image, sample.face, f);
            for (int c = 0; c < 3; ++c)
                worst = std::max(worst, region_channel_variance(blurred, sample.face, c));
        }
    }
    return worst * 1.35 + 25.0;
}

/// Structural and statistical compliance check of a captured byte stream
/// against its declared deployment mode. Throws AuditError when the stream
/// cannot be decoded at all; that is an input failure, not a verdict.
inline AuditVerdict audit(std::string_view bytes, const DeploymentMode& mode) {
    validate(mode);
    std::vector<detail::DecodedRecord> records;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        try {
            records.push_back(detail::decode_record(bytes, pos));
        } catch (const CodecError& e) {
            throw AuditError("undecodable capture at message " +
                             std::to_string(records.size()) + ": " + e.what());
        }
    }

    AuditVerdict verdict;
    auto flag = [&verdict](std::int64_t index, std::string reason) {
        verdict.compliant = false;
        verdict.violations.push_back({index, std::move(reason)});
    };

    if (mode.kind == ModeKind::baseline)
        flag(-1, "baseline mode forwards raw frames and is non-compliant by definition");

    const double bound = mode.kind == ModeKind::centralized
                             ? blurred_variance_bound(*mode.blur)
                             : 0.0;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const detail::DecodedRecord& rec = records[i];
        const auto idx = static_cast<std::int64_t>(i);

        // Schema check is structural: the header may carry exactly the
        // fields of its type, so a report cannot smuggle extra data.
        const std::set<std::string>& allowed = detail::expected_keys(rec.msg);
        for (const std::string& key : rec.header_keys)
            if (!allowed.contains(key))
                flag(idx, "unexpected header field '" + key + "'");

        switch (mode.kind) {
            case ModeKind::baseline:
                break;
            case ModeKind::decentralized:
                if (!std::holds_alternative<EdgeReport>(rec.msg.payload))
                    flag(idx, "non-report message in a decentralized stream");
                break;
            case ModeKind::centralized:
                if (std::holds_alternative<RawFrame>(rec.msg.payload)) {
                    flag(idx, "raw frame in a centralized stream");
                } else if (const auto* anon = std::get_if<AnonymizedFrame>(&rec.msg.payload)) {
                    for (std::size_t r = 0; r < anon->regions.size(); ++r) {
                        for (int c = 0; c < 3; ++c) {
                            const double var =
                                region_channel_variance(anon->image, anon->regions[r], c);
                            if (var > bound) {
                                flag(idx, "region " + std::to_string(r) +
                                              " variance exceeds the blur bound (channel " +
                                              std::to_string(c) + ": " +
                                              std::to_string(var) + " > " +
                                              std::to_string(bound) + ")");
                                break;
                            }
                        }
                    }
                }
                break;
        }
    }
    return verdict;
}

} // namespace maskpriv
