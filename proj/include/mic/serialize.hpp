#ifndef MIC_SERIALIZE_HPP
#define MIC_SERIALIZE_HPP

#include <string>
#include <string_view>

#include <json.hpp>

#include "mic/core.hpp"
#include "mic/errors.hpp"

namespace mic {

// One instance per JSON line. Field order is fixed (id, dataset, segments,
// target, n_exemplars, n_images, meta) and meta keys iterate sorted, so equal
// instances serialize to identical bytes.

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson asset_to_json(const image_asset& a) {
    ojson j;
    switch (a.kind) {
    case asset_kind::file:
        j["kind"] = "file";
        j["uri"] = a.uri;
        break;
    case asset_kind::video_frame:
        j["kind"] = "video_frame";
        j["uri"] = a.uri;
        j["frame"] = a.frame_index;
        break;
    case asset_kind::crop:
        j["kind"] = "crop";
        j["uri"] = a.uri;
        j["rect"] = {a.rect.x0, a.rect.y0, a.rect.x1, a.rect.y1};
        j["parent"] = a.parent ? asset_to_json(*a.parent) : ojson();
        break;
    }
    return j;
}

inline const ojson& want(const ojson& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw parse_error(0, std::string(ctx) + ": missing field '" + key + "'");
    return *it;
}

inline std::string want_string(const ojson& j, const char* key, const char* ctx) {
    const auto& v = want(j, key, ctx);
    if (!v.is_string()) throw parse_error(0, std::string(ctx) + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

inline std::uint32_t want_u32(const ojson& j, const char* key, const char* ctx) {
    const auto& v = want(j, key, ctx);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw parse_error(0, std::string(ctx) + ": field '" + key + "' must be a nonnegative integer");
    return v.get<std::uint32_t>();
}

inline image_asset asset_from_json(const ojson& j) {
    if (!j.is_object()) throw parse_error(0, "asset must be an object");
    const std::string kind = want_string(j, "kind", "asset");
    image_asset a;
    a.uri = want_string(j, "uri", "asset");
    if (kind == "file") {
        a.kind = asset_kind::file;
    } else if (kind == "video_frame") {
        a.kind = asset_kind::video_frame;
        a.frame_index = want_u32(j, "frame", "asset");
    } else if (kind == "crop") {
        a.kind = asset_kind::crop;
        const auto& r = want(j, "rect", "asset");
        if (!r.is_array() || r.size() != 4)
            throw parse_error(0, "asset: 'rect' must be [x0,y0,x1,y1]");
        for (const auto& c : r)
            if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0))
                throw parse_error(0, "asset: rect coordinates must be nonnegative integers");
        a.rect = {r[0].get<std::uint32_t>(), r[1].get<std::uint32_t>(), r[2].get<std::uint32_t>(),
                  r[3].get<std::uint32_t>()};
        a.parent = std::make_shared<const image_asset>(asset_from_json(want(j, "parent", "asset")));
    } else {
        throw parse_error(0, "asset: unknown kind '" + kind + "'");
    }
    return a;
}

}  // namespace detail

/// Serializes to one newline-terminated JSON line. Validates first; a broken
/// instance never reaches the output file.
inline std::string serialize(const interleaved_instance& in) {
    require_valid(in);
    detail::ojson j;
    j["id"] = in.id;
    j["dataset"] = in.dataset;
    auto segs = detail::ojson::array();
    for (const auto& s : in.segments) {
        detail::ojson o;
        if (s.is_text()) {
            o["kind"] = "text";
            o["text"] = s.text;
        } else {
            o["kind"] = "image";
            o["proxy"] = s.proxy;
            o["asset"] = detail::asset_to_json(s.asset);
        }
        segs.push_back(std::move(o));
    }
    j["segments"] = std::move(segs);
    j["target"] = in.target;
    j["n_exemplars"] = in.n_exemplars;
    j["n_images"] = in.n_images;
    auto meta = detail::ojson::object();
    for (const auto& [k, v] : in.meta) meta[k] = v;  // std::map iterates sorted
    j["meta"] = std::move(meta);
    return j.dump() + "\n";
}

/// Parses one JSON line back into an instance and re-checks every invariant.
inline interleaved_instance deserialize(std::string_view line) {
    detail::ojson j;
    try {
        j = detail::ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(e.byte, e.what());
    }
    if (!j.is_object()) throw parse_error(0, "record must be a JSON object");

    interleaved_instance in;
    in.id = detail::want_string(j, "id", "record");
    in.dataset = detail::want_string(j, "dataset", "record");
    const auto& segs = detail::want(j, "segments", "record");
    if (!segs.is_array()) throw parse_error(0, "record: 'segments' must be an array");
    for (const auto& o : segs) {
        if (!o.is_object()) throw parse_error(0, "record: segment must be an object");
        const std::string kind = detail::want_string(o, "kind", "segment");
        if (kind == "text") {
            in.segments.push_back(segment::make_text(detail::want_string(o, "text", "segment")));
        } else if (kind == "image") {
            in.segments.push_back(segment::make_image(
                detail::want_u32(o, "proxy", "segment"),
                detail::asset_from_json(detail::want(o, "asset", "segment"))));
        } else {
            throw parse_error(0, "segment: unknown kind '" + kind + "'");
        }
    }
    in.target = detail::want_string(j, "target", "record");
    in.n_exemplars = detail::want_u32(j, "n_exemplars", "record");
    in.n_images = detail::want_u32(j, "n_images", "record");
    const auto& meta = detail::want(j, "meta", "record");
    if (!meta.is_object()) throw parse_error(0, "record: 'meta' must be an object");
    for (const auto& [k, v] : meta.items()) {
        if (!v.is_string()) throw parse_error(0, "record: meta values must be strings");
        in.meta[k] = v.get<std::string>();
    }
    require_valid(in);
    return in;
}

}  // namespace mic

#endif  // MIC_SERIALIZE_HPP
