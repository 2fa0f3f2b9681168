#ifndef MIC_TESTS_HELPERS_HPP
#define MIC_TESTS_HELPERS_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include "mic/mic.hpp"

namespace mictest {

using namespace mic;

inline const std::vector<std::string>& word_list() {
    // No digits, no "image", no brackets: filler text must never collide with
    // declaration phrases or proxy tokens.
    static const std::vector<std::string> words = {
        "river",  "stone", "cloud", "tiger", "quiet", "maple",  "vivid", "amber",
        "falcon", "harbor", "lumen", "orbit", "prism", "velvet", "willow", "zephyr"};
    return words;
}

inline std::string word(rng& g) { return word_list()[g.below(word_list().size())]; }

inline std::string sentence(rng& g, std::uint64_t max_words = 6) {
    std::string s;
    const std::uint64_t n = 1 + g.below(max_words);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += word(g);
    }
    return s;
}

inline image_asset random_asset(rng& g) {
    switch (g.below(3)) {
    case 0:
        return image_asset::file("img/" + word(g) + std::to_string(g.below(1000)) + ".jpg");
    case 1:
        return image_asset::video_frame("vid/" + word(g) + ".mp4",
                                        static_cast<std::uint32_t>(g.below(100)));
    default: {
        crop_rect r;
        r.x0 = static_cast<std::uint32_t>(g.below(50));
        r.y0 = static_cast<std::uint32_t>(g.below(50));
        r.x1 = r.x0 + 1 + static_cast<std::uint32_t>(g.below(50));
        r.y1 = r.y0 + 1 + static_cast<std::uint32_t>(g.below(50));
        return image_asset::crop(word(g) + "#crop", r, image_asset::file("img/parent.jpg"));
    }
    }
}

/// A valid instance: declaration-prefixed images, filler text, occasional
/// bare-token re-mentions, random meta.
inline interleaved_instance random_instance(rng& g, std::uint32_t max_images = 16) {
    const auto k = static_cast<std::uint32_t>(g.below(max_images + 1));
    const auto style =
        g.below(2) ? declaration_style::is_form : declaration_style::colon_form;
    interleaved_instance in;
    in.id = "id" + std::to_string(g.below(1000000));
    in.dataset = "fuzz";
    for (std::uint32_t j = 0; j < k; ++j) {
        for (auto& s : render_declaration(j, style, random_asset(g))) in.segments.push_back(s);
        in.segments.push_back(segment::make_text(".\n"));
    }
    std::string tail = sentence(g);
    if (k > 0 && g.below(2)) {
        tail += " " + proxy_token(static_cast<std::uint32_t>(g.below(k))) + " ";
        tail += sentence(g, 3);
    }
    in.segments.push_back(segment::make_text(tail));
    in.target = sentence(g, 3);
    in.n_exemplars = static_cast<std::uint32_t>(g.below(5));
    in.n_images = k;
    const std::uint64_t metas = g.below(3);
    for (std::uint64_t i = 0; i < metas; ++i) in.meta["k" + std::to_string(i)] = word(g);
    return in;
}

/// Independent renumbering oracle built on std::regex, for checking
/// assemble_instance. Same rewrite rule, entirely different machinery: one
/// left-to-right pass over a combined phrase-or-token pattern.
inline std::string oracle_rewrite(const std::string& text, std::uint32_t offset) {
    static const std::regex pattern(
        R"(\bimage (\d+)( is |: | labeled | )\[IMG(\d+)\]|\[IMG(\d+)\])");
    std::string out;
    std::size_t cursor = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern);
         it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        out.append(text, cursor, static_cast<std::size_t>(m.position()) - cursor);
        if (m[1].matched && m[1].str() == m[3].str()) {
            const std::uint32_t g = static_cast<std::uint32_t>(std::stoul(m[1].str())) + offset;
            out += "image " + std::to_string(g) + m[2].str() + "[IMG" + std::to_string(g) + "]";
        } else if (m[1].matched) {
            // Prose index does not bind the token; only the token moves.
            const std::uint32_t g = static_cast<std::uint32_t>(std::stoul(m[3].str())) + offset;
            out += "image " + m[1].str() + m[2].str() + "[IMG" + std::to_string(g) + "]";
        } else {
            const std::uint32_t g = static_cast<std::uint32_t>(std::stoul(m[4].str())) + offset;
            out += "[IMG" + std::to_string(g) + "]";
        }
        cursor = static_cast<std::size_t>(m.position() + m.length());
    }
    out.append(text, cursor, text.size() - cursor);
    return out;
}

inline interleaved_instance oracle_assemble(const std::vector<exemplar>& exemplars,
                                            const interleaved_instance& query) {
    interleaved_instance out;
    out.id = query.id;
    out.dataset = query.dataset;
    out.target = query.target;
    out.meta = query.meta;
    out.n_exemplars = static_cast<std::uint32_t>(exemplars.size());

    std::uint32_t offset = 0;
    auto emit_part = [&](const std::vector<segment>& segs) {
        std::uint32_t local = 0;
        for (const auto& s : segs) {
            if (s.is_image()) {
                out.segments.push_back(segment::make_image(offset + local, s.asset));
                ++local;
            } else {
                out.segments.push_back(segment::make_text(oracle_rewrite(s.text, offset)));
            }
        }
        offset += local;
    };
    for (const auto& ex : exemplars) {
        emit_part(ex.segments);
        out.segments.push_back(segment::make_text(" " + ex.answer + "\n"));
    }
    emit_part(query.segments);
    out.n_images = offset;
    return out;
}

class temp_dir {
public:
    explicit temp_dir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("mic_" + tag + "_" + std::to_string(++counter) + "_" +
                 std::to_string(static_cast<std::uint64_t>(
                     std::chrono::steady_clock::now().time_since_epoch().count())));
        std::filesystem::create_directories(path_);
    }
    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Three synthetic datasets (one per construction route) plus a manifest.
/// Returns the manifest path.
inline std::string write_mini_fixture(const temp_dir& dir, std::uint64_t budget,
                                      std::uint64_t seed, int n_vqa = 30, int n_video = 20,
                                      int n_entity = 25) {
    std::string vqa;
    for (int i = 0; i < n_vqa; ++i)
        vqa += R"({"id":"v)" + std::to_string(i) + R"(","images":["img_)" + std::to_string(i) +
               R"(.jpg"],"question":"What color is object )" + std::to_string(i) +
               R"(?","answer":"blue"})" "\n";
    write_file(dir / "vqa.jsonl", vqa);

    std::string video;
    for (int i = 0; i < n_video; ++i)
        video += R"({"id":"d)" + std::to_string(i) + R"(","images":["vid_)" + std::to_string(i) +
                 R"(.mp4"],"question":"What happens in the clip?","answer":"running",)"
                 R"("video_frame_count":)" + std::to_string(80 + i) + "}\n";
    write_file(dir / "video.jsonl", video);

    std::string entity;
    for (int i = 0; i < n_entity; ++i)
        entity += R"({"id":"e)" + std::to_string(i) + R"(","images":["scene_)" +
                  std::to_string(i) +
                  R"(.jpg"],"question":"Why does person1 wave at person2 while person1 smiles?",)"
                  R"("answer":"a wave","options":["a wave","a nod","a frown","a shrug"],)"
                  R"("entity_boxes":{"person1":[0,0,50,100],"person2":[60,0,110,100]}})" "\n";
    write_file(dir / "entity.jsonl", entity);

    const std::string manifest = R"({
  "seed": )" + std::to_string(seed) + R"(,
  "output": "corpus.jsonl",
  "mix": { "budget": )" + std::to_string(budget) + R"( },
  "datasets": [
    { "name": "vqa_syn", "adapter": "vqa", "path": "vqa.jsonl", "task": "vqa", "n_shots": 4 },
    { "name": "video_syn", "adapter": "video", "path": "video.jsonl", "task": "video_qa", "no_exemplars": true },
    { "name": "entity_syn", "adapter": "entity_boxes", "path": "entity.jsonl", "task": "vcr", "no_exemplars": true }
  ]
})";
    const auto path = (dir / "manifest.json").string();
    write_file(path, manifest);
    return path;
}

}  // namespace mictest

#endif  // MIC_TESTS_HELPERS_HPP
