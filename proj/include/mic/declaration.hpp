#ifndef MIC_DECLARATION_HPP
#define MIC_DECLARATION_HPP

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mic/core.hpp"
#include "mic/errors.hpp"
#include "mic/text.hpp"

namespace mic {

/// Phrasing of an image declaration: "image j is [IMGj] " or "image j: [IMGj] ".
enum class declaration_style { is_form, colon_form };

enum class declaration_placement { prefix, inline_marks };

/// Zero-based proxy indices for n images, in document order.
inline std::vector<std::uint32_t> allocate_proxies(std::uint32_t n) {
    std::vector<std::uint32_t> out(n);
    std::iota(out.begin(), out.end(), 0u);
    return out;
}

inline std::string declaration_text(std::uint32_t index, declaration_style style) {
    const char* sep = style == declaration_style::is_form ? " is " : ": ";
    return "image " + std::to_string(index) + sep + proxy_token(index) + " ";
}

/// One declaration pair: the binding text followed by the image slot.
inline std::vector<segment> render_declaration(std::uint32_t index, declaration_style style,
                                               image_asset asset) {
    return {segment::make_text(declaration_text(index, style)),
            segment::make_image(index, std::move(asset))};
}

/// Declares every image of a record and returns the partially-built instance
/// (no exemplars yet). With `prefix` placement all declarations precede the
/// question, each closed by ".\n"; with `inline_marks` the declaration pairs
/// are injected where the question's {image} markers sit.
inline interleaved_instance declare_images(const source_record& record, declaration_style style,
                                           declaration_placement placement) {
    if (text::contains_any_proxy_token(record.question))
        throw error(errc::double_declaration, "record '" + record.id + "' already carries proxy tokens");

    interleaved_instance out;
    out.id = record.id;
    out.dataset = record.dataset;
    out.target = record.answer;
    out.n_images = static_cast<std::uint32_t>(record.images.size());

    if (placement == declaration_placement::prefix) {
        std::uint32_t j = 0;
        for (const auto& asset : record.images) {
            for (auto& seg : render_declaration(j, style, asset)) out.segments.push_back(std::move(seg));
            out.segments.push_back(segment::make_text(".\n"));
            ++j;
        }
        if (!record.question.empty()) out.segments.push_back(segment::make_text(record.question));
        return out;
    }

    // Inline: split the question at {image} markers, one per image.
    static constexpr std::string_view kMark = "{image}";
    std::vector<std::size_t> marks;
    for (std::size_t pos = record.question.find(kMark); pos != std::string::npos;
         pos = record.question.find(kMark, pos + kMark.size()))
        marks.push_back(pos);
    if (marks.size() < record.images.size())
        throw error(errc::placement,
                    "record '" + record.id + "' has " + std::to_string(record.images.size()) +
                        " images but only " + std::to_string(marks.size()) + " {image} markers");

    std::size_t cursor = 0;
    for (std::size_t j = 0; j < record.images.size(); ++j) {
        if (marks[j] > cursor)
            out.segments.push_back(segment::make_text(record.question.substr(cursor, marks[j] - cursor)));
        for (auto& seg : render_declaration(static_cast<std::uint32_t>(j), style, record.images[j]))
            out.segments.push_back(std::move(seg));
        cursor = marks[j] + kMark.size();
    }
    if (cursor < record.question.size())
        out.segments.push_back(segment::make_text(record.question.substr(cursor)));
    return out;
}

}  // namespace mic

#endif  // MIC_DECLARATION_HPP
