#ifndef MIC_PIPELINE_HPP
#define MIC_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mic/core.hpp"
#include "mic/declaration.hpp"
#include "mic/errors.hpp"
#include "mic/icl.hpp"
#include "mic/ingest.hpp"
#include "mic/interconnect.hpp"
#include "mic/layout.hpp"
#include "mic/manifest.hpp"
#include "mic/mixer.hpp"
#include "mic/rng.hpp"
#include "mic/serialize.hpp"
#include "mic/templates.hpp"

namespace mic {

inline constexpr std::uint32_t frames_per_video = 8;
inline constexpr const char* format_version = "mic/1";

struct dataset_bundle {
    dataset_descriptor desc;
    std::vector<source_record> records;
    std::vector<std::string> ids;  // record order, for exemplar sampling
    std::unordered_map<std::string, std::size_t> index_of;
    ingest_report ingest;
};

inline dataset_bundle load_bundle(const dataset_descriptor& desc) {
    dataset_bundle b;
    b.desc = desc;
    b.records = ingest_all(desc, &b.ingest);
    b.ids.reserve(b.records.size());
    for (std::size_t i = 0; i < b.records.size(); ++i) {
        b.ids.push_back(b.records[i].id);
        b.index_of.emplace(b.records[i].id, i);
    }
    return b;
}

struct compile_context {
    const pipeline_manifest* manifest = nullptr;
    const bank_set* banks = nullptr;
    const std::vector<dataset_bundle>* bundles = nullptr;
    std::uint64_t seed = 0;
    std::optional<std::uint32_t> shots_override;
};

namespace detail {

struct part_result {
    interleaved_instance partial;
    std::string template_key;
    std::vector<std::string> warnings;
};

inline std::optional<extent> bounds_from_extras(const source_record& rec) {
    auto w = rec.extras.find("image_width");
    auto h = rec.extras.find("image_height");
    if (w == rec.extras.end() || h == rec.extras.end()) return std::nullopt;
    try {
        unsigned long pw = std::stoul(w->second), ph = std::stoul(h->second);
        if (pw == 0 || ph == 0) return std::nullopt;
        return extent{static_cast<std::uint32_t>(pw), static_cast<std::uint32_t>(ph)};
    } catch (...) {
        return std::nullopt;
    }
}

/// Entity route: crop every boxed entity, swap mentions for proxy tokens, and
/// bind the declaration block (scene first, crops in first-mention order) to
/// the template's {prompt} slot.
inline interleaved_instance build_entity_instance(const compile_context& ctx,
                                                  const dataset_descriptor& desc,
                                                  const source_record& rec,
                                                  const std::string& tmpl,
                                                  std::vector<std::string>& warnings) {
    bool has_prompt = false;
    for (const auto& r : scan_placeholders(tmpl)) has_prompt = has_prompt || r.name == "prompt";
    if (!has_prompt)
        throw error(errc::template_arity,
                    "task '" + desc.task + "': entity route needs a {prompt} template");

    const pipeline_manifest& m = *ctx.manifest;
    const image_asset& parent = rec.images.front();
    entity_map em{parent, rec.entity_boxes};
    const auto crops = crop_entities(parent, em, bounds_from_extras(rec));
    const auto substituted = substitute_references(rec.question, crops);

    // Assign proxies by first mention; repeated mentions of one entity share
    // the single declared crop and render as bare proxy tokens.
    std::uint32_t next = m.include_parent ? 1 : 0;
    std::unordered_map<std::string, std::uint32_t> proxy_of;  // crop uri -> proxy
    std::vector<const image_asset*> declared;
    std::string question_text;
    for (const auto& seg : substituted) {
        if (seg.is_text()) {
            question_text += seg.text;
            continue;
        }
        auto [it, fresh] = proxy_of.try_emplace(seg.asset.uri, next);
        if (fresh) {
            declared.push_back(&seg.asset);
            ++next;
        }
        question_text += proxy_token(it->second);
    }
    for (const auto& [name, crop] : crops)
        if (!proxy_of.count(crop.uri))
            warnings.push_back("entity '" + name + "' boxed but never mentioned");

    std::vector<segment> decl;
    auto declare = [&](std::uint32_t j, const image_asset& asset) {
        if (!decl.empty()) decl.push_back(segment::make_text(".\n"));
        for (auto& s : render_declaration(j, m.style, asset)) decl.push_back(std::move(s));
    };
    if (m.include_parent) declare(0, parent);
    for (std::size_t i = 0; i < declared.size(); ++i)
        declare(static_cast<std::uint32_t>(i + (m.include_parent ? 1 : 0)), *declared[i]);

    binding_map binds = standard_bindings(rec);
    binds["question"] = {segment::make_text(std::move(question_text))};
    binds["prompt"] = std::move(decl);

    interleaved_instance out;
    out.id = rec.id;
    out.dataset = rec.dataset;
    out.target = rec.answer;
    out.segments = fill_segments(tmpl, binds, {});
    out.n_images = next;
    return out;
}

inline part_result build_part(const compile_context& ctx, const dataset_bundle& b,
                              const source_record& rec, rng& g) {
    const pipeline_manifest& m = *ctx.manifest;
    const template_bank& bank = ctx.banks->at(b.desc.task);
    const std::size_t ti = choose_template_index(bank, g);
    const std::string& tmpl = bank.templates[ti];

    part_result out;
    out.template_key = b.desc.task + "/" + std::to_string(ti);
    switch (route(rec, b.desc)) {
    case pipeline_tag::plain:
        out.partial = fill_template(tmpl, rec, m.style, m.placement);
        break;
    case pipeline_tag::video: {
        source_record framed = rec;
        framed.images.clear();
        const std::string& uri = rec.images.front().uri;
        for (std::uint32_t f : select_frames(*rec.video_frame_count, frames_per_video))
            framed.images.push_back(image_asset::video_frame(uri, f));
        out.partial = fill_template(tmpl, framed, m.style, m.placement);
        break;
    }
    case pipeline_tag::entity:
        out.partial = build_entity_instance(ctx, b.desc, rec, tmpl, out.warnings);
        break;
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += sep;
        s += parts[i];
    }
    return s;
}

}  // namespace detail

struct compiled_record {
    bool ok = false;
    std::string line;
    std::string template_key;
    std::string skip_reason;
    std::uint32_t records_used = 0;  // query plus exemplars
    std::uint32_t warning_count = 0;
};

/// Pure per-draw transform. All randomness comes from a substream keyed by
/// (seed, dataset, record id), so the result is independent of scheduling.
inline compiled_record compile_record(const compile_context& ctx, std::size_t dataset_index,
                                      std::size_t record_index) {
    const dataset_bundle& b = (*ctx.bundles)[dataset_index];
    const source_record& rec = b.records[record_index];
    compiled_record out;
    try {
        rng g = subrng(ctx.seed, "instance", b.desc.name, rec.id);
        detail::part_result query = detail::build_part(ctx, b, rec, g);
        out.template_key = query.template_key;
        std::vector<std::string> warnings = std::move(query.warnings);

        const std::uint32_t shots =
            b.desc.no_exemplars ? 0u
                                : (ctx.shots_override ? *ctx.shots_override : b.desc.n_shots);
        std::vector<exemplar> exemplars;
        std::vector<std::string> exemplar_ids;
        if (shots > 0) {
            auto sample = sample_exemplars(b.ids, rec.id, shots, g);
            if (sample.clamped)
                warnings.push_back("exemplar clamp: wanted " + std::to_string(shots) + ", dataset has " +
                                   std::to_string(sample.ids.size()) + " others");
            for (const auto& id : sample.ids) {
                const source_record& ex_rec = b.records[b.index_of.at(id)];
                detail::part_result part = detail::build_part(ctx, b, ex_rec, g);
                for (auto& w : part.warnings) warnings.push_back(std::move(w));
                exemplars.push_back({std::move(part.partial.segments), part.partial.target});
                ++out.records_used;
            }
            exemplar_ids = std::move(sample.ids);
        }

        interleaved_instance inst = assemble_instance(exemplars, query.partial);
        inst.meta["format_version"] = format_version;
        inst.meta["source"] = rec.id;
        inst.meta["template"] = query.template_key;
        if (!exemplar_ids.empty()) inst.meta["exemplars"] = detail::join(exemplar_ids, ",");
        if (!warnings.empty()) inst.meta["warnings"] = detail::join(warnings, "; ");

        out.line = serialize(inst);
        out.warning_count = static_cast<std::uint32_t>(warnings.size());
        ++out.records_used;
        out.ok = true;
    } catch (const error& e) {
        out.skip_reason = e.what();
    }
    return out;
}

struct build_overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::uint64_t> budget;
    std::optional<std::uint32_t> shots;
    std::optional<std::string> templates;
    std::uint64_t workers = 1;
};

struct dataset_build_stats {
    std::string name;
    std::string task;
    std::string adapter;
    std::uint64_t lines = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    double probability = 0.0;
    std::uint64_t draws = 0;
    std::uint64_t emitted = 0;
    std::uint64_t skipped = 0;
};

struct build_result {
    std::string output_path;
    std::uint64_t seed = 0;
    std::uint64_t budget = 0;
    std::vector<dataset_build_stats> datasets;
    std::map<std::string, std::uint64_t> template_usage;
    std::uint64_t warning_count = 0;
    std::vector<std::string> skip_samples;  // first few skip reasons
    std::uint64_t records_used = 0;         // queries + exemplars compiled
    // Volatile timing, reported separately from the deterministic report.
    double ingest_seconds = 0.0;
    double build_seconds = 0.0;
    double records_per_second = 0.0;
    std::uint64_t workers = 1;
};

namespace detail {

inline nlohmann::ordered_json report_json(const build_result& r, const pipeline_manifest& m) {
    nlohmann::ordered_json j;
    j["format_version"] = format_version;
    j["seed"] = r.seed;
    j["budget"] = r.budget;
    j["style"] = m.style == declaration_style::is_form ? "is_form" : "colon_form";
    j["placement"] = m.placement == declaration_placement::prefix ? "prefix" : "inline";
    j["slots"] = m.slots;
    j["output"] = r.output_path;
    auto datasets = nlohmann::ordered_json::array();
    for (const auto& d : r.datasets) {
        nlohmann::ordered_json o;
        o["name"] = d.name;
        o["task"] = d.task;
        o["adapter"] = d.adapter;
        o["lines"] = d.lines;
        o["accepted"] = d.accepted;
        o["rejected"] = d.rejected;
        o["probability"] = d.probability;
        o["draws"] = d.draws;
        o["emitted"] = d.emitted;
        o["skipped"] = d.skipped;
        datasets.push_back(std::move(o));
    }
    j["datasets"] = std::move(datasets);
    auto usage = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.template_usage) usage[k] = v;
    j["template_usage"] = std::move(usage);
    j["warnings"] = r.warning_count;
    auto skips = nlohmann::ordered_json::array();
    for (const auto& s : r.skip_samples) skips.push_back(s);
    j["skip_samples"] = std::move(skips);
    j["records_used"] = r.records_used;
    return j;
}

inline nlohmann::ordered_json timing_json(const build_result& r) {
    nlohmann::ordered_json j;
    j["ingest_seconds"] = r.ingest_seconds;
    j["build_seconds"] = r.build_seconds;
    j["records_per_second"] = r.records_per_second;
    j["workers"] = r.workers;
    return j;
}

class scoped_output {
public:
    explicit scoped_output(std::string path) : path_(std::move(path)) {}
    ~scoped_output() {
        if (!keep_) {
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }
    void keep() { keep_ = true; }

private:
    std::string path_;
    bool keep_ = false;
};

}  // namespace detail

/// Runs one full corpus build: ingest, plan, draw, transform, emit. Output is
/// a pure function of (manifest, overrides.seed/budget/shots/out/templates);
/// worker count only changes the wall clock.
inline build_result build_corpus(const pipeline_manifest& manifest,
                                 const build_overrides& overrides = {}) {
    using clock = std::chrono::steady_clock;

    pipeline_manifest m = manifest;
    if (overrides.seed) m.seed = *overrides.seed;
    if (overrides.out) m.output = *overrides.out;
    if (overrides.budget) m.mix = manifest_mix{*overrides.budget, std::nullopt};
    if (overrides.templates) m.templates_path = *overrides.templates;

    bank_set loaded_banks;
    const bank_set* banks = &default_banks();
    if (m.templates_path) {
        loaded_banks = load_banks(*m.templates_path);
        banks = &loaded_banks;
    }
    for (const auto& d : m.datasets)
        if (!banks->count(d.task))
            throw error(errc::manifest, "no templates for task '" + d.task + "'");

    build_result result;
    result.seed = m.seed;
    result.workers = overrides.workers == 0 ? 1 : overrides.workers;

    const auto t0 = clock::now();
    std::vector<dataset_bundle> bundles;
    bundles.reserve(m.datasets.size());
    std::uint64_t total_accepted = 0;
    for (const auto& desc : m.datasets) {
        bundles.push_back(load_bundle(desc));
        if (bundles.back().records.empty())
            throw error(errc::zero_count, "dataset '" + desc.name + "' has no usable records");
        total_accepted += bundles.back().records.size();
    }
    const auto t1 = clock::now();
    result.ingest_seconds = std::chrono::duration<double>(t1 - t0).count();

    const std::uint64_t budget =
        m.mix.budget ? *m.mix.budget : budget_from_fraction(total_accepted, *m.mix.fraction);
    result.budget = budget;

    std::vector<mix_dataset> mix_datasets;
    for (const auto& b : bundles)
        mix_datasets.push_back({b.desc.name, b.records.size(), b.desc.no_exemplars, b.desc.n_shots});
    mix_plan plan = make_mix_plan(std::move(mix_datasets), budget, m.seed);

    for (std::size_t i = 0; i < bundles.size(); ++i) {
        dataset_build_stats s;
        s.name = bundles[i].desc.name;
        s.task = bundles[i].desc.task;
        s.adapter = adapter_name(bundles[i].desc.adapter);
        s.lines = bundles[i].ingest.lines;
        s.accepted = bundles[i].ingest.accepted;
        s.rejected = bundles[i].ingest.rejected;
        s.probability = plan.probabilities[i];
        result.datasets.push_back(std::move(s));
    }

    // Headroom so skipped records can be replaced by further draws while the
    // stream stays a single deterministic sequence.
    mix_plan stream_plan = plan;
    stream_plan.budget = budget + std::max<std::uint64_t>(1000, budget);
    mix_stream stream(stream_plan);

    compile_context ctx{&m, banks, &bundles, m.seed, overrides.shots};

    std::filesystem::path out_path(m.output);
    if (out_path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(out_path.parent_path(), ec);
    }
    std::ofstream out(m.output, std::ios::binary | std::ios::trunc);
    if (!out) throw error(errc::io, "cannot open output file: " + m.output);
    detail::scoped_output guard(m.output);

    constexpr std::size_t chunk_size = 256;
    std::vector<mix_stream::draw> draws;
    std::vector<compiled_record> results;
    std::uint64_t emitted = 0;

    while (emitted < budget) {
        draws.clear();
        const std::uint64_t want = std::min<std::uint64_t>(chunk_size, budget - emitted);
        for (std::uint64_t i = 0; i < want; ++i) {
            auto d = stream.next();
            if (!d) break;
            draws.push_back(*d);
        }
        if (draws.empty())
            throw error(errc::invariant,
                        "draw budget exhausted with only " + std::to_string(emitted) + " of " +
                            std::to_string(budget) + " instances emitted (records keep failing)");

        results.assign(draws.size(), compiled_record{});
        const std::uint64_t workers = std::min<std::uint64_t>(result.workers, draws.size());
        if (workers <= 1) {
            for (std::size_t i = 0; i < draws.size(); ++i)
                results[i] = compile_record(ctx, draws[i].dataset, draws[i].record);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::uint64_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t i = w; i < draws.size(); i += workers)
                        results[i] = compile_record(ctx, draws[i].dataset, draws[i].record);
                });
            }
            for (auto& t : pool) t.join();
        }

        for (std::size_t i = 0; i < draws.size() && emitted < budget; ++i) {
            auto& ds = result.datasets[draws[i].dataset];
            ++ds.draws;
            if (results[i].ok) {
                out.write(results[i].line.data(),
                          static_cast<std::streamsize>(results[i].line.size()));
                ++ds.emitted;
                ++emitted;
                ++result.template_usage[results[i].template_key];
                result.warning_count += results[i].warning_count;
                result.records_used += results[i].records_used;
            } else {
                ++ds.skipped;
                if (result.skip_samples.size() < 100)
                    result.skip_samples.push_back(ds.name + ": " + results[i].skip_reason);
            }
        }
        if (!out) throw error(errc::io, "write failed: " + m.output);
    }

    out.flush();
    if (!out) throw error(errc::io, "write failed: " + m.output);
    out.close();
    const auto t2 = clock::now();
    result.build_seconds = std::chrono::duration<double>(t2 - t1).count();
    result.records_per_second =
        result.build_seconds > 0.0 ? static_cast<double>(result.records_used) / result.build_seconds
                                   : 0.0;
    result.output_path = m.output;

    {
        std::ofstream rep(m.output + ".report.json", std::ios::binary | std::ios::trunc);
        if (!rep) throw error(errc::io, "cannot write report: " + m.output + ".report.json");
        rep << detail::report_json(result, m).dump(2) << "\n";
    }
    {
        std::ofstream tim(m.output + ".timing.json", std::ios::binary | std::ios::trunc);
        if (!tim) throw error(errc::io, "cannot write timing: " + m.output + ".timing.json");
        tim << detail::timing_json(result).dump(2) << "\n";
    }
    guard.keep();
    return result;
}

// ---------------------------------------------------------------------------
// Corpus validation and layout checking.
// ---------------------------------------------------------------------------

struct corpus_validation {
    std::uint64_t lines = 0;
    std::uint64_t instances = 0;
    std::vector<std::pair<std::uint64_t, std::string>> violations;  // 1-based line -> message
};

/// Re-parses every line and re-checks every instance invariant plus the
/// format_version stamp. Empty file is vacuously clean.
inline corpus_validation validate_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io, "cannot open corpus: " + path);
    corpus_validation out;
    std::string line;
    while (std::getline(in, line)) {
        ++out.lines;
        try {
            interleaved_instance inst = deserialize(line);
            ++out.instances;
            auto it = inst.meta.find("format_version");
            if (it == inst.meta.end())
                out.violations.emplace_back(out.lines, "meta.format_version: missing");
            else if (it->second != format_version)
                out.violations.emplace_back(out.lines,
                                            "meta.format_version: unsupported '" + it->second + "'");
        } catch (const invariant_error& e) {
            if (e.violations().empty()) {
                out.violations.emplace_back(out.lines, e.what());
            } else {
                for (const auto& v : e.violations())
                    out.violations.emplace_back(out.lines, v.where + ": " + v.message);
            }
        } catch (const parse_error& e) {
            out.violations.emplace_back(out.lines, e.what());
        }
    }
    return out;
}

struct layout_summary {
    std::uint64_t instances = 0;
    std::uint64_t instances_with_violations = 0;
    std::uint64_t violations = 0;
};

/// Simulates the layout of every instance and writes one JSON report line per
/// instance to `report_path`; returns corpus-level counts.
inline layout_summary layout_check_corpus(const std::string& path, std::uint32_t slots,
                                          const std::string& report_path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io, "cannot open corpus: " + path);
    std::ofstream rep(report_path, std::ios::binary | std::ios::trunc);
    if (!rep) throw error(errc::io, "cannot write layout report: " + report_path);

    layout_summary sum;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        nlohmann::ordered_json j;
        j["line"] = line_no;
        std::vector<std::string> messages;
        try {
            interleaved_instance inst = deserialize(line);
            ++sum.instances;
            layout_report lay = simulate_layout(inst, slots);
            j["id"] = inst.id;
            j["total_length"] = lay.total_length;
            auto blocks = nlohmann::ordered_json::array();
            for (const auto& b : lay.blocks) {
                nlohmann::ordered_json o;
                o["kind"] = b.kind == block_kind::text ? "text" : "visual";
                o["start"] = b.start;
                o["length"] = b.length;
                if (b.proxy) o["proxy"] = *b.proxy;
                blocks.push_back(std::move(o));
            }
            j["blocks"] = std::move(blocks);
            for (const auto& v : check_alignment(lay, inst))
                messages.push_back(v.where + ": " + v.message);
        } catch (const error& e) {
            messages.push_back(e.what());
        }
        if (!messages.empty()) {
            ++sum.instances_with_violations;
            sum.violations += messages.size();
        }
        j["violations"] = messages;
        rep << j.dump() << "\n";
    }
    return sum;
}

}  // namespace mic

#endif  // MIC_PIPELINE_HPP
