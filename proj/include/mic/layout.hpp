#ifndef MIC_LAYOUT_HPP
#define MIC_LAYOUT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mic/core.hpp"
#include "mic/errors.hpp"
#include "mic/text.hpp"

namespace mic {

// Simulates the token-level sequence an interleaved instance occupies once a
// visual-prompt generator replaces each image with a fixed-width block of
// visual slots. No vocabulary, no weights: any deterministic token counter
// plugs in, whitespace splitting by default.

enum class block_kind { text, visual };

struct layout_block {
    block_kind kind = block_kind::text;
    std::uint64_t start = 0;
    std::uint64_t length = 0;
    std::optional<std::uint32_t> proxy;  // visual blocks only

    bool operator==(const layout_block&) const = default;
};

struct layout_report {
    std::vector<layout_block> blocks;
    std::uint64_t total_length = 0;
    std::uint32_t visual_slots_per_image = 32;
};

using token_counter = std::function<std::uint64_t(std::string_view)>;

inline token_counter default_token_counter() {
    return [](std::string_view s) { return text::whitespace_tokens(s); };
}

/// Tiles the instance into text spans and `slots`-wide visual blocks, in
/// segment order. Token counts are per text segment, summed over runs of
/// consecutive text segments; empty runs produce no block.
inline layout_report simulate_layout(const interleaved_instance& in, std::uint32_t slots = 32,
                                     const token_counter& count = default_token_counter()) {
    layout_report rep;
    rep.visual_slots_per_image = slots;
    std::uint64_t cursor = 0;
    std::uint64_t run = 0;
    auto flush = [&] {
        if (run > 0) {
            rep.blocks.push_back({block_kind::text, cursor, run, std::nullopt});
            cursor += run;
            run = 0;
        }
    };
    for (const auto& seg : in.segments) {
        if (seg.is_text()) {
            run += count(seg.text);
        } else {
            flush();
            rep.blocks.push_back({block_kind::visual, cursor, slots, seg.proxy});
            cursor += slots;
        }
    }
    flush();
    rep.total_length = cursor;
    return rep;
}

/// Structural checks on a report alone: blocks must tile [0, total) with no
/// gaps or overlaps and visual blocks must be exactly one slot-width wide.
inline std::vector<violation> validate(const layout_report& rep) {
    std::vector<violation> out;
    std::uint64_t cursor = 0;
    for (std::size_t i = 0; i < rep.blocks.size(); ++i) {
        const auto& b = rep.blocks[i];
        if (b.start != cursor)
            out.push_back({"report.blocks[" + std::to_string(i) + "]",
                           b.start < cursor ? "overlaps previous block" : "leaves a gap"});
        if (b.kind == block_kind::visual && b.length != rep.visual_slots_per_image)
            out.push_back({"report.blocks[" + std::to_string(i) + "]",
                           "visual block must span " +
                               std::to_string(rep.visual_slots_per_image) + " slots"});
        if (b.kind == block_kind::text && b.length == 0)
            out.push_back({"report.blocks[" + std::to_string(i) + "]", "empty text block"});
        cursor = b.start + b.length;
    }
    if (cursor != rep.total_length)
        out.push_back({"report.total_length", "blocks do not tile the sequence"});
    return out;
}

/// Verifies a report against its instance: visual blocks sit where the text
/// declares them (never hoisted to the front), each declaration precedes its
/// own block, and block proxies run 0..K-1 in order. Violations are data, not
/// exceptions.
inline std::vector<violation> check_alignment(const layout_report& rep,
                                              const interleaved_instance& in,
                                              const token_counter& count = default_token_counter()) {
    std::vector<violation> out = validate(rep);

    std::vector<const layout_block*> visual;
    for (const auto& b : rep.blocks)
        if (b.kind == block_kind::visual) visual.push_back(&b);

    if (visual.size() != in.n_images)
        out.push_back({"report", "expected " + std::to_string(in.n_images) + " visual blocks, got " +
                                     std::to_string(visual.size())});
    for (std::size_t j = 0; j < visual.size(); ++j) {
        if (!visual[j]->proxy || *visual[j]->proxy != j) {
            out.push_back({"report", "proxy order: visual blocks must carry proxies 0.." +
                                         std::to_string(visual.size() - 1) + " in order"});
            break;
        }
    }

    // Reference tiling plus the token offset of each image's first mention.
    const layout_report ref = simulate_layout(in, rep.visual_slots_per_image, count);
    std::vector<std::optional<std::uint64_t>> ref_start(in.n_images);
    for (const auto& b : ref.blocks)
        if (b.kind == block_kind::visual && b.proxy && *b.proxy < ref_start.size())
            ref_start[*b.proxy] = b.start;

    std::vector<std::optional<std::uint64_t>> decl_pos(in.n_images);
    {
        std::uint64_t cursor = 0;
        for (const auto& seg : in.segments) {
            if (seg.is_text()) {
                for (std::uint32_t j = 0; j < in.n_images; ++j) {
                    if (decl_pos[j]) continue;
                    const auto at = seg.text.find(proxy_token(j));
                    if (at != std::string::npos)
                        decl_pos[j] = cursor + count(std::string_view(seg.text).substr(0, at));
                }
                cursor += count(seg.text);
            } else {
                cursor += rep.visual_slots_per_image;
            }
        }
    }

    for (std::size_t j = 0; j < visual.size() && j < static_cast<std::size_t>(in.n_images); ++j) {
        const std::uint64_t start = visual[j]->start;
        if (decl_pos[j] && start <= *decl_pos[j]) {
            out.push_back({"report", "front-loaded images: visual block " + std::to_string(j) +
                                         " precedes its declaration"});
            continue;
        }
        if (ref_start[j] && start != *ref_start[j])
            out.push_back({"report",
                           start < *ref_start[j]
                               ? "front-loaded images: visual block " + std::to_string(j) +
                                     " sits before its declared position"
                               : "visual block " + std::to_string(j) + " displaced after its "
                                                                       "declared position"});
    }
    return out;
}

}  // namespace mic

#endif  // MIC_LAYOUT_HPP
