#ifndef MIC_INTERCONNECT_HPP
#define MIC_INTERCONNECT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mic/core.hpp"
#include "mic/errors.hpp"
#include "mic/text.hpp"

namespace mic {

/// Named bounding boxes over one parent image.
struct entity_map {
    image_asset parent;
    std::vector<std::pair<std::string, crop_rect>> entries;
};

inline std::vector<violation> validate(const entity_map& m) {
    std::vector<violation> out;
    for (auto& v : validate(m.parent)) out.push_back({"entity_map.parent." + v.where, v.message});
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto& [name, rect] = m.entries[i];
        if (name.empty()) out.push_back({"entity_map", "entity name must be nonempty"});
        for (std::size_t j = 0; j < i; ++j)
            if (m.entries[j].first == name)
                out.push_back({"entity_map", "duplicate entity name '" + name + "'"});
        for (auto& v : validate(rect)) out.push_back({"entity_map[" + name + "]", v.message});
        if (auto b = m.parent.bounds())
            if (rect.x1 > b->width || rect.y1 > b->height)
                out.push_back({"entity_map[" + name + "]", "rect exceeds parent bounds"});
    }
    return out;
}

/// Evenly spaced frame indices: floor(j*T/k) for j=0..k-1 when T >= k,
/// otherwise all T indices. Strictly increasing either way.
inline std::vector<std::uint32_t> select_frames(std::uint32_t frame_count, std::uint32_t k) {
    std::vector<std::uint32_t> out;
    if (frame_count >= k) {
        out.reserve(k);
        for (std::uint32_t j = 0; j < k; ++j)
            out.push_back(static_cast<std::uint32_t>(
                (static_cast<std::uint64_t>(j) * frame_count) / k));
    } else {
        out.reserve(frame_count);
        for (std::uint32_t j = 0; j < frame_count; ++j) out.push_back(j);
    }
    return out;
}

/// One crop spec per entity, in map order. `bounds` supplies the parent's
/// pixel size when the annotation source knows it; crops-of-crops derive it.
inline std::vector<std::pair<std::string, image_asset>> crop_entities(
    const image_asset& parent, const entity_map& entities,
    std::optional<extent> bounds = std::nullopt) {
    if (!bounds) bounds = parent.bounds();
    std::vector<std::pair<std::string, image_asset>> out;
    out.reserve(entities.entries.size());
    for (const auto& [name, rect] : entities.entries) {
        if (bounds && (rect.x1 > bounds->width || rect.y1 > bounds->height))
            throw error(errc::rect_out_of_bounds,
                        "entity '" + name + "' rect exceeds parent bounds of " + parent.uri);
        out.emplace_back(name, image_asset::crop(parent.uri + "#" + name, rect, parent));
    }
    return out;
}

/// Replaces every standalone mention of an entity name with an image segment
/// pointing at that entity's crop. Repeated mentions reuse the same asset.
/// Substituting each image segment back with its entity name reconstructs the
/// input exactly. Unmatched text is passed through verbatim.
inline std::vector<segment> substitute_references(
    const std::string& input, const std::vector<std::pair<std::string, image_asset>>& crops) {
    std::vector<segment> out;
    std::string pending;
    auto flush = [&] {
        if (!pending.empty()) {
            out.push_back(segment::make_text(std::move(pending)));
            pending.clear();
        }
    };

    std::size_t i = 0;
    const std::size_t n = input.size();
    while (i < n) {
        const image_asset* hit = nullptr;
        std::size_t hit_len = 0;
        if (i == 0 || !text::is_word_char(input[i - 1])) {
            for (const auto& [name, asset] : crops) {
                if (name.size() <= hit_len) continue;  // longest match wins
                if (input.compare(i, name.size(), name) != 0) continue;
                const std::size_t end = i + name.size();
                if (end < n && text::is_word_char(input[end])) continue;
                hit = &asset;
                hit_len = name.size();
            }
        }
        if (hit) {
            flush();
            out.push_back(segment::make_image(0, *hit));  // proxies assigned at declaration time
            i += hit_len;
        } else {
            pending += input[i++];
        }
    }
    flush();
    return out;
}

}  // namespace mic

#endif  // MIC_INTERCONNECT_HPP
