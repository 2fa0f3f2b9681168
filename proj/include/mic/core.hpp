#ifndef MIC_CORE_HPP
#define MIC_CORE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mic/errors.hpp"
#include "mic/text.hpp"

namespace mic {

/// Half-open pixel rectangle: [x0,x1) x [y0,y1).
struct crop_rect {
    std::uint32_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    std::uint32_t width() const { return x1 - x0; }
    std::uint32_t height() const { return y1 - y0; }

    bool operator==(const crop_rect&) const = default;
};

struct extent {
    std::uint32_t width = 0, height = 0;
};

enum class asset_kind { file, video_frame, crop };

/// Symbolic reference to pixels. The compiler never decodes images; a crop or
/// a video frame stays a spec for a downstream consumer to materialize.
struct image_asset {
    asset_kind kind = asset_kind::file;
    std::string uri;
    std::uint32_t frame_index = 0;               // video_frame only
    crop_rect rect{};                            // crop only
    std::shared_ptr<const image_asset> parent;   // crop only

    static image_asset file(std::string uri) {
        image_asset a;
        a.uri = std::move(uri);
        return a;
    }

    static image_asset video_frame(std::string uri, std::uint32_t frame) {
        image_asset a;
        a.kind = asset_kind::video_frame;
        a.uri = std::move(uri);
        a.frame_index = frame;
        return a;
    }

    static image_asset crop(std::string uri, crop_rect r, image_asset parent_asset) {
        image_asset a;
        a.kind = asset_kind::crop;
        a.uri = std::move(uri);
        a.rect = r;
        a.parent = std::make_shared<const image_asset>(std::move(parent_asset));
        return a;
    }

    /// Pixel bounds, when derivable (a crop knows its own size).
    std::optional<extent> bounds() const {
        if (kind == asset_kind::crop) return extent{rect.width(), rect.height()};
        return std::nullopt;
    }

    bool operator==(const image_asset& o) const {
        if (kind != o.kind || uri != o.uri || frame_index != o.frame_index || !(rect == o.rect))
            return false;
        if (!parent != !o.parent) return false;
        return !parent || *parent == *o.parent;
    }
};

enum class segment_kind { text, image };

/// One element of an interleaved sequence: either a text span or an image
/// slot identified by a proxy index.
struct segment {
    segment_kind kind = segment_kind::text;
    std::string text;            // text only
    std::uint32_t proxy = 0;     // image only
    image_asset asset;           // image only

    static segment make_text(std::string t) {
        segment s;
        s.text = std::move(t);
        return s;
    }

    static segment make_image(std::uint32_t proxy, image_asset a) {
        segment s;
        s.kind = segment_kind::image;
        s.proxy = proxy;
        s.asset = std::move(a);
        return s;
    }

    bool is_text() const { return kind == segment_kind::text; }
    bool is_image() const { return kind == segment_kind::image; }

    bool operator==(const segment&) const = default;
};

/// One raw annotated example as ingested, before any transformation.
struct source_record {
    std::string id;
    std::string dataset;
    std::vector<image_asset> images;
    std::string question;
    std::string answer;
    std::optional<std::vector<std::string>> options;
    // Insertion-ordered; order drives crop order downstream.
    std::vector<std::pair<std::string, crop_rect>> entity_boxes;
    std::optional<std::uint32_t> video_frame_count;
    // Auxiliary template values (quadrant, prompt, caption0, caption1, ...).
    std::map<std::string, std::string> extras;
};

/// The compiled training example: an ordered text/image sequence plus target.
struct interleaved_instance {
    std::string id;
    std::string dataset;
    std::vector<segment> segments;
    std::string target;
    std::uint32_t n_exemplars = 0;
    std::uint32_t n_images = 0;
    std::map<std::string, std::string> meta;

    bool operator==(const interleaved_instance&) const = default;
};

struct template_bank {
    std::string task;
    std::vector<std::string> templates;
};

/// All text segments concatenated in document order.
inline std::string rendered_text(const interleaved_instance& in) {
    std::string s;
    for (const auto& seg : in.segments)
        if (seg.is_text()) s += seg.text;
    return s;
}

// ---------------------------------------------------------------------------
// Validation. Each entry point returns the complete list of violations.
// ---------------------------------------------------------------------------

inline std::vector<violation> validate(const crop_rect& r) {
    std::vector<violation> out;
    if (r.x0 >= r.x1) out.push_back({"rect", "x0 must be < x1"});
    if (r.y0 >= r.y1) out.push_back({"rect", "y0 must be < y1"});
    return out;
}

inline std::vector<violation> validate(const image_asset& a) {
    std::vector<violation> out;
    if (a.uri.empty()) out.push_back({"asset.uri", "must be nonempty"});
    switch (a.kind) {
    case asset_kind::file:
        break;
    case asset_kind::video_frame:
        break;
    case asset_kind::crop: {
        for (auto& v : validate(a.rect)) out.push_back(v);
        if (!a.parent) {
            out.push_back({"asset.parent", "crop requires a parent asset"});
        } else {
            for (auto& v : validate(*a.parent)) out.push_back({"asset.parent." + v.where, v.message});
            if (auto b = a.parent->bounds()) {
                if (a.rect.x1 > b->width || a.rect.y1 > b->height)
                    out.push_back({"asset.rect", "crop exceeds parent bounds"});
            }
        }
        break;
    }
    }
    return out;
}

inline std::vector<violation> validate(const segment& s) {
    std::vector<violation> out;
    if (s.is_text()) {
        if (s.text.empty()) out.push_back({"segment.text", "text segments must be nonempty"});
        if (!s.asset.uri.empty()) out.push_back({"segment", "text segment carries an asset"});
    } else {
        if (!s.text.empty()) out.push_back({"segment", "image segment carries text"});
        for (auto& v : validate(s.asset)) out.push_back(v);
    }
    return out;
}

inline std::vector<violation> validate(const source_record& r) {
    std::vector<violation> out;
    if (r.id.empty()) out.push_back({"record.id", "must be nonempty"});
    if (r.dataset.empty()) out.push_back({"record.dataset", "must be nonempty"});
    for (std::size_t i = 0; i < r.images.size(); ++i)
        for (auto& v : validate(r.images[i]))
            out.push_back({"record.images[" + std::to_string(i) + "]." + v.where, v.message});
    for (const auto& [name, rect] : r.entity_boxes) {
        if (name.empty()) {
            out.push_back({"record.entity_boxes", "entity name must be nonempty"});
            continue;
        }
        for (auto& v : validate(rect))
            out.push_back({"record.entity_boxes[" + name + "]", v.message});
        // A name that shows up only embedded in longer words can never be
        // matched; flag it as a likely annotation bug.
        auto standalone = [&](const std::string& hay) {
            std::size_t pos = 0;
            while ((pos = hay.find(name, pos)) != std::string::npos) {
                bool left = pos == 0 || !text::is_word_char(hay[pos - 1]);
                std::size_t end = pos + name.size();
                bool right = end >= hay.size() || !text::is_word_char(hay[end]);
                if (left && right) return true;
                ++pos;
            }
            return false;
        };
        bool in_q = r.question.find(name) != std::string::npos;
        bool in_a = r.answer.find(name) != std::string::npos;
        if ((in_q && !standalone(r.question)) || (!in_q && in_a && !standalone(r.answer)))
            out.push_back({"record.entity_boxes[" + name + "]",
                           "referenced name never appears as a standalone token"});
    }
    if (r.video_frame_count) {
        for (const auto& a : r.images)
            if (a.kind == asset_kind::video_frame && a.frame_index >= *r.video_frame_count)
                out.push_back({"record.images", "frame_index exceeds declared frame count"});
    }
    return out;
}

inline std::vector<violation> validate(const interleaved_instance& in) {
    std::vector<violation> out;
    if (in.id.empty()) out.push_back({"instance.id", "must be nonempty"});
    if (in.dataset.empty()) out.push_back({"instance.dataset", "must be nonempty"});

    std::vector<std::uint32_t> proxies;
    for (std::size_t i = 0; i < in.segments.size(); ++i) {
        for (auto& v : validate(in.segments[i]))
            out.push_back({"instance.segments[" + std::to_string(i) + "]." + v.where, v.message});
        if (in.segments[i].is_image()) proxies.push_back(in.segments[i].proxy);
    }

    const auto k = static_cast<std::uint32_t>(proxies.size());
    if (in.n_images != k)
        out.push_back({"instance.n_images",
                       "declares " + std::to_string(in.n_images) + " images but has " +
                           std::to_string(k) + " image segments"});

    // Image segments must carry exactly the proxies 0..K-1, in document order.
    for (std::size_t i = 0; i < proxies.size(); ++i) {
        if (proxies[i] != i) {
            out.push_back({"instance.segments",
                           "image proxies must be 0.." + std::to_string(k ? k - 1 : 0) +
                               " in document order"});
            break;
        }
    }

    const std::string text = rendered_text(in);
    for (std::uint32_t j = 0; j < k; ++j) {
        const std::size_t mentions = text::count_proxy_token(text, j);
        const std::size_t decls = text::count_declarations(text, j);
        if (mentions == 0)
            out.push_back({"instance.text", "proxy token " + proxy_token(j) + " never appears"});
        if (decls > 1)
            out.push_back({"instance.text", "image " + std::to_string(j) + " declared " +
                                                std::to_string(decls) + " times"});
    }
    std::vector<std::uint32_t> stray;
    for (std::size_t i = 0; i + 5 < text.size(); ++i) {
        if (text[i] != '[') continue;
        std::size_t p = i;
        auto d = text::match_proxy_token(text, p);
        if (d && *d >= k) {
            bool seen = false;
            for (auto s : stray) seen = seen || s == *d;
            if (!seen) stray.push_back(*d);
        }
    }
    for (auto d : stray)
        out.push_back({"instance.text", "references undeclared image " + proxy_token(d)});
    return out;
}

inline void require_valid(const interleaved_instance& in) {
    auto vs = validate(in);
    if (!vs.empty()) throw invariant_error(std::move(vs));
}

}  // namespace mic

#endif  // MIC_CORE_HPP
