#ifndef MIC_ICL_HPP
#define MIC_ICL_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mic/core.hpp"
#include "mic/declaration.hpp"
#include "mic/errors.hpp"
#include "mic/rng.hpp"
#include "mic/templates.hpp"
#include "mic/text.hpp"

namespace mic {

/// One few-shot demonstration: a declared prompt plus its answer, with
/// locally numbered proxies (renumbered at assembly).
struct exemplar {
    std::vector<segment> segments;
    std::string answer;
};

/// Placeholder name -> segments to splice in. Plain string values are a
/// single text segment; the prompt binding of the entity route carries a
/// mixed text/image declaration block.
using binding_map = std::map<std::string, std::vector<segment>>;

inline binding_map standard_bindings(const source_record& record) {
    binding_map b;
    if (!record.question.empty())
        b.emplace("question", std::vector<segment>{segment::make_text(record.question)});
    if (record.options && !record.options->empty()) {
        std::string joined;
        for (std::size_t i = 0; i < record.options->size(); ++i) {
            if (i) joined += "; ";
            joined += (*record.options)[i];
        }
        b.emplace("options", std::vector<segment>{segment::make_text(joined)});
    }
    for (const auto& [k, v] : record.extras)
        if (!v.empty()) b.emplace(k, std::vector<segment>{segment::make_text(v)});
    return b;
}

/// Expands a template: the k-th {image} becomes the image segment for
/// images[k]; every other placeholder splices its binding. {answer} renders
/// as nothing (the answer is the training target, not prompt text).
/// Throws template_arity when the {image} count does not match `images`,
/// missing_field when a used placeholder has no binding.
inline std::vector<segment> fill_segments(const std::string& tmpl, const binding_map& binds,
                                          std::span<const image_asset> images) {
    const auto refs = scan_placeholders(tmpl);
    std::size_t image_marks = 0;
    for (const auto& r : refs)
        if (r.name == "image") ++image_marks;
    if (image_marks != images.size())
        throw error(errc::template_arity,
                    "template declares " + std::to_string(image_marks) + " images, record has " +
                        std::to_string(images.size()));

    std::vector<segment> out;
    std::string pending;
    auto flush = [&] {
        if (!pending.empty()) {
            out.push_back(segment::make_text(std::move(pending)));
            pending.clear();
        }
    };
    auto splice = [&](const std::vector<segment>& segs) {
        for (const auto& s : segs) {
            if (s.is_text()) {
                pending += s.text;
            } else {
                flush();
                out.push_back(s);
            }
        }
    };

    std::size_t cursor = 0;
    std::uint32_t next_image = 0;
    for (const auto& r : refs) {
        pending.append(tmpl, cursor, r.begin - cursor);
        cursor = r.end;
        if (r.name == "image") {
            flush();
            out.push_back(segment::make_image(next_image, images[next_image]));
            ++next_image;
        } else if (r.name == "answer") {
            // target text, never prompt text
        } else {
            auto it = binds.find(r.name);
            if (it == binds.end())
                throw error(errc::missing_field, r.name);
            splice(it->second);
        }
    }
    pending.append(tmpl, cursor, tmpl.size() - cursor);
    flush();
    return out;
}

/// Fills a template from a record. Templates with {image} marks must match
/// the record's image count exactly (their declaration prose is part of the
/// template). A template with no {image} marks gets the record's images
/// declared separately: before everything with prefix placement, or inside
/// the {question} binding when the question carries its own {image} markers
/// (inline placement).
inline interleaved_instance fill_template(
    const std::string& tmpl, const source_record& record, declaration_style style,
    declaration_placement placement = declaration_placement::prefix) {
    interleaved_instance out;
    out.id = record.id;
    out.dataset = record.dataset;
    out.target = record.answer;
    out.n_images = static_cast<std::uint32_t>(record.images.size());

    binding_map binds = standard_bindings(record);
    if (count_image_marks(tmpl) == 0 && !record.images.empty()) {
        if (placement == declaration_placement::prefix) {
            std::uint32_t j = 0;
            for (const auto& asset : record.images) {
                for (auto& seg : render_declaration(j, style, asset))
                    out.segments.push_back(std::move(seg));
                out.segments.push_back(segment::make_text(".\n"));
                ++j;
            }
            if (text::contains_any_proxy_token(record.question))
                throw error(errc::double_declaration,
                            "record '" + record.id + "' already carries proxy tokens");
        } else {
            binds["question"] = declare_images(record, style, placement).segments;
        }
        for (auto& s : fill_segments(tmpl, binds, {})) out.segments.push_back(std::move(s));
    } else {
        out.segments = fill_segments(tmpl, binds, record.images);
    }
    return out;
}

inline std::size_t choose_template_index(const template_bank& bank, rng& g) {
    if (bank.templates.empty()) throw error(errc::empty_bank, "task '" + bank.task + "'");
    return static_cast<std::size_t>(g.below(bank.templates.size()));
}

/// Uniform draw over the bank, deterministic given the generator state.
inline const std::string& choose_template(const template_bank& bank, rng& g) {
    return bank.templates[choose_template_index(bank, g)];
}

struct exemplar_sample {
    std::vector<std::string> ids;
    bool clamped = false;  // fewer than n other records existed
};

/// n distinct ids drawn uniformly without replacement, never the query's own.
/// Clamps to everything available when the dataset is too small.
inline exemplar_sample sample_exemplars(const std::vector<std::string>& dataset_index,
                                        const std::string& query_id, std::size_t n, rng& g) {
    std::vector<std::string> candidates;
    candidates.reserve(dataset_index.size());
    for (const auto& id : dataset_index)
        if (id != query_id) candidates.push_back(id);

    exemplar_sample out;
    if (candidates.size() <= n) {
        out.clamped = candidates.size() < n;
        n = candidates.size();
    }
    // Partial Fisher-Yates: the first n slots become the sample.
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(g.below(candidates.size() - i));
        if (j != i) std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(n);
    out.ids = std::move(candidates);
    return out;
}

namespace detail {

/// Shifts one part's local proxies by `offset`, rewriting image segments and
/// every textual proxy reference (declaration prose included, so "image 0 is
/// [IMG0]" in the second exemplar really reads "image 1 is [IMG1]" after
/// assembly). Local proxies must be dense and in document order.
inline std::pair<std::vector<segment>, std::uint32_t> renumber_part(
    std::span<const segment> part, std::uint32_t offset) {
    std::uint32_t local = 0;
    for (const auto& s : part)
        if (s.is_image()) {
            if (s.proxy != local)
                throw invariant_error(errc::invariant,
                                      "part proxies must be dense and ordered, got " +
                                          std::to_string(s.proxy) + " expecting " +
                                          std::to_string(local));
            ++local;
        }
    const std::uint32_t k = local;
    auto map = [k, offset](std::uint32_t d) -> std::uint32_t {
        if (d >= k)
            throw invariant_error(errc::invariant,
                                  "text references " + proxy_token(d) + " but part has only " +
                                      std::to_string(k) + " images");
        return d + offset;
    };
    std::vector<segment> out;
    out.reserve(part.size());
    for (const auto& s : part) {
        if (s.is_image()) {
            out.push_back(segment::make_image(s.proxy + offset, s.asset));
        } else {
            out.push_back(segment::make_text(text::rewrite_proxies(s.text, map)));
        }
    }
    return {std::move(out), k};
}

}  // namespace detail

/// Concatenates N exemplars and the query into one instance: each exemplar's
/// segments, then " <answer>\n", then the next, ending with the query. All
/// proxies are renumbered to global document order; the query's answer stays
/// the target and never enters the segments.
inline interleaved_instance assemble_instance(std::span<const exemplar> exemplars,
                                              const interleaved_instance& query) {
    interleaved_instance out;
    out.id = query.id;
    out.dataset = query.dataset;
    out.target = query.target;
    out.meta = query.meta;
    out.n_exemplars = static_cast<std::uint32_t>(exemplars.size());

    std::uint32_t offset = 0;
    for (const auto& ex : exemplars) {
        auto [segs, k] = detail::renumber_part(ex.segments, offset);
        for (auto& s : segs) out.segments.push_back(std::move(s));
        out.segments.push_back(segment::make_text(" " + ex.answer + "\n"));
        offset += k;
    }
    auto [segs, k] = detail::renumber_part(query.segments, offset);
    for (auto& s : segs) out.segments.push_back(std::move(s));
    offset += k;
    out.n_images = offset;
    return out;
}

}  // namespace mic

#endif  // MIC_ICL_HPP
