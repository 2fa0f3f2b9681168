#ifndef MIC_INGEST_HPP
#define MIC_INGEST_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mic/core.hpp"
#include "mic/errors.hpp"

namespace mic {

enum class adapter_kind { generic, vqa, video, entity_boxes };

inline const char* adapter_name(adapter_kind a) {
    switch (a) {
    case adapter_kind::generic: return "generic";
    case adapter_kind::vqa: return "vqa";
    case adapter_kind::video: return "video";
    case adapter_kind::entity_boxes: return "entity_boxes";
    }
    return "unknown";
}

inline std::optional<adapter_kind> adapter_from_name(std::string_view s) {
    if (s == "generic") return adapter_kind::generic;
    if (s == "vqa") return adapter_kind::vqa;
    if (s == "video") return adapter_kind::video;
    if (s == "entity_boxes") return adapter_kind::entity_boxes;
    return std::nullopt;
}

struct dataset_descriptor {
    std::string name;
    adapter_kind adapter = adapter_kind::generic;
    std::string path;
    std::string task;
    bool no_exemplars = false;
    std::uint32_t n_shots = 4;
};

struct ingest_report {
    std::uint64_t lines = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::vector<std::pair<std::uint64_t, std::string>> reasons;  // 1-based line -> reason

    // Counts stay exact; stored reasons are capped so a pathological file
    // cannot blow up memory.
    static constexpr std::size_t max_stored_reasons = 10000;

    void reject(std::uint64_t line, std::string reason) {
        ++rejected;
        if (reasons.size() < max_stored_reasons) reasons.emplace_back(line, std::move(reason));
    }
};

enum class pipeline_tag { plain, video, entity };

/// Which construction path a record takes: frame selection for video
/// datasets, crop/substitute for entity-box datasets, plain declaration
/// otherwise.
inline pipeline_tag route(const source_record&, const dataset_descriptor& desc) {
    switch (desc.adapter) {
    case adapter_kind::video: return pipeline_tag::video;
    case adapter_kind::entity_boxes: return pipeline_tag::entity;
    default: return pipeline_tag::plain;
    }
}

namespace detail {

/// Parses one input JSONL line into a record, enforcing the adapter's
/// requirements. Throws parse_error with the rejection reason.
inline source_record parse_source_line(std::string_view line, const dataset_descriptor& desc) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(e.byte, e.what());
    }
    if (!j.is_object()) throw parse_error(0, "record must be a JSON object");

    source_record rec;
    rec.dataset = desc.name;

    if (!j.contains("id") || !j["id"].is_string() || j["id"].get_ref<const std::string&>().empty())
        throw parse_error(0, "missing id");
    rec.id = j["id"].get<std::string>();

    if (j.contains("question")) {
        if (!j["question"].is_string()) throw parse_error(0, "question must be a string");
        rec.question = j["question"].get<std::string>();
    }
    if (j.contains("answer")) {
        if (!j["answer"].is_string()) throw parse_error(0, "answer must be a string");
        rec.answer = j["answer"].get<std::string>();
    }
    if (j.contains("images")) {
        if (!j["images"].is_array()) throw parse_error(0, "images must be an array");
        for (const auto& u : j["images"]) {
            if (!u.is_string() || u.get_ref<const std::string&>().empty())
                throw parse_error(0, "images must be nonempty strings");
            rec.images.push_back(image_asset::file(u.get<std::string>()));
        }
    }
    if (j.contains("options")) {
        if (!j["options"].is_array()) throw parse_error(0, "options must be an array");
        std::vector<std::string> opts;
        for (const auto& o : j["options"]) {
            if (!o.is_string()) throw parse_error(0, "options must be strings");
            opts.push_back(o.get<std::string>());
        }
        rec.options = std::move(opts);
    }
    if (j.contains("entity_boxes")) {
        if (!j["entity_boxes"].is_object()) throw parse_error(0, "entity_boxes must be an object");
        for (const auto& [name, r] : j["entity_boxes"].items()) {
            if (name.empty()) throw parse_error(0, "entity name must be nonempty");
            if (!r.is_array() || r.size() != 4)
                throw parse_error(0, "entity box must be [x0,y0,x1,y1]");
            for (const auto& c : r)
                if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0))
                    throw parse_error(0, "entity box coordinates must be nonnegative integers");
            crop_rect rect{r[0].get<std::uint32_t>(), r[1].get<std::uint32_t>(),
                           r[2].get<std::uint32_t>(), r[3].get<std::uint32_t>()};
            if (!validate(rect).empty())
                throw parse_error(0, "invalid entity box for '" + name + "'");
            rec.entity_boxes.emplace_back(name, rect);
        }
    }
    if (j.contains("video_frame_count")) {
        if (!j["video_frame_count"].is_number_unsigned() &&
            !(j["video_frame_count"].is_number_integer() &&
              j["video_frame_count"].get<std::int64_t>() >= 0))
            throw parse_error(0, "video_frame_count must be a nonnegative integer");
        rec.video_frame_count = j["video_frame_count"].get<std::uint32_t>();
    }
    if (j.contains("extras")) {
        if (!j["extras"].is_object()) throw parse_error(0, "extras must be an object");
        for (const auto& [k, v] : j["extras"].items()) {
            if (!v.is_string()) throw parse_error(0, "extras values must be strings");
            rec.extras[k] = v.get<std::string>();
        }
    }

    switch (desc.adapter) {
    case adapter_kind::generic:
        break;
    case adapter_kind::vqa:
        if (rec.images.empty()) throw parse_error(0, "missing images");
        if (rec.question.empty()) throw parse_error(0, "missing question");
        if (!j.contains("answer")) throw parse_error(0, "missing answer");
        break;
    case adapter_kind::video:
        if (rec.images.empty()) throw parse_error(0, "missing video uri");
        if (!rec.video_frame_count || *rec.video_frame_count == 0)
            throw parse_error(0, "missing frame count");
        if (rec.question.empty()) throw parse_error(0, "missing question");
        if (!j.contains("answer")) throw parse_error(0, "missing answer");
        break;
    case adapter_kind::entity_boxes:
        if (rec.images.empty()) throw parse_error(0, "missing parent image");
        if (rec.entity_boxes.empty()) throw parse_error(0, "missing entity boxes");
        if (rec.question.empty()) throw parse_error(0, "missing question");
        if (!j.contains("answer")) throw parse_error(0, "missing answer");
        break;
    }

    auto vs = validate(rec);
    if (!vs.empty()) throw parse_error(0, vs.front().where + ": " + vs.front().message);
    return rec;
}

}  // namespace detail

/// Streaming single-pass reader: one line in, at most one record out. Bad
/// lines become report entries, never aborts. Memory stays flat apart from
/// the id-uniqueness set.
class ingest_reader {
public:
    explicit ingest_reader(dataset_descriptor desc) : desc_(std::move(desc)), in_(desc_.path) {
        if (!in_) throw error(errc::io, "cannot open dataset file: " + desc_.path);
    }

    std::optional<source_record> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++report_.lines;
            if (line.empty()) {
                report_.reject(report_.lines, "empty line");
                continue;
            }
            try {
                source_record rec = detail::parse_source_line(line, desc_);
                if (!seen_ids_.insert(rec.id).second) {
                    report_.reject(report_.lines, "duplicate id '" + rec.id + "'");
                    continue;
                }
                ++report_.accepted;
                return rec;
            } catch (const parse_error& e) {
                report_.reject(report_.lines, e.what());
            }
        }
        return std::nullopt;
    }

    const ingest_report& report() const { return report_; }
    const dataset_descriptor& descriptor() const { return desc_; }

private:
    dataset_descriptor desc_;
    std::ifstream in_;
    ingest_report report_;
    std::unordered_set<std::string> seen_ids_;
};

/// Convenience: drain a whole file into memory (the build pipeline needs
/// random access for exemplar sampling).
inline std::vector<source_record> ingest_all(const dataset_descriptor& desc,
                                             ingest_report* report_out = nullptr) {
    ingest_reader reader(desc);
    std::vector<source_record> out;
    while (auto rec = reader.next()) out.push_back(std::move(*rec));
    if (report_out) *report_out = reader.report();
    return out;
}

}  // namespace mic

#endif  // MIC_INGEST_HPP
