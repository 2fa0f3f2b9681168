#ifndef MIC_MANIFEST_HPP
#define MIC_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mic/declaration.hpp"
#include "mic/errors.hpp"
#include "mic/ingest.hpp"

namespace mic {

struct manifest_mix {
    std::optional<std::uint64_t> budget;   // absolute sample count
    std::optional<double> fraction;        // of the total accepted records, (0,1]
};

/// The declarative description of one corpus build. Seeds are explicit by
/// contract: there is no wall-clock or environment fallback.
struct pipeline_manifest {
    std::vector<dataset_descriptor> datasets;
    declaration_style style = declaration_style::is_form;
    declaration_placement placement = declaration_placement::prefix;
    manifest_mix mix;
    std::uint32_t slots = 32;
    bool include_parent = true;  // entity route: declare the uncropped scene as image 0
    std::string output;
    std::uint64_t seed = 0;
    std::optional<std::string> templates_path;
};

namespace detail {

[[noreturn]] inline void manifest_fail(const std::string& what) {
    throw error(errc::manifest, what);
}

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return p;
    return (base / fp).lexically_normal().string();
}

}  // namespace detail

/// Loads and checks a manifest file. Relative dataset/template/output paths
/// resolve against the manifest's own directory.
inline pipeline_manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io, "cannot open manifest: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        detail::manifest_fail(std::string("manifest: ") + e.what());
    }
    if (!j.is_object()) detail::manifest_fail("manifest must be a JSON object");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    pipeline_manifest m;

    if (!j.contains("seed") || !j["seed"].is_number_integer())
        detail::manifest_fail("manifest requires an explicit integer 'seed'");
    m.seed = j["seed"].get<std::uint64_t>();

    if (!j.contains("output") || !j["output"].is_string() ||
        j["output"].get_ref<const std::string&>().empty())
        detail::manifest_fail("manifest requires a nonempty 'output' path");
    m.output = detail::resolve_path(base, j["output"].get<std::string>());

    if (j.contains("style")) {
        const std::string s = j["style"].is_string() ? j["style"].get<std::string>() : "";
        if (s == "is_form") m.style = declaration_style::is_form;
        else if (s == "colon_form") m.style = declaration_style::colon_form;
        else detail::manifest_fail("style must be 'is_form' or 'colon_form'");
    }
    if (j.contains("placement")) {
        const std::string s = j["placement"].is_string() ? j["placement"].get<std::string>() : "";
        if (s == "prefix") m.placement = declaration_placement::prefix;
        else if (s == "inline") m.placement = declaration_placement::inline_marks;
        else detail::manifest_fail("placement must be 'prefix' or 'inline'");
    }
    if (j.contains("slots")) {
        if (!j["slots"].is_number_unsigned() || j["slots"].get<std::uint64_t>() == 0)
            detail::manifest_fail("slots must be a positive integer");
        m.slots = j["slots"].get<std::uint32_t>();
    }
    if (j.contains("include_parent")) {
        if (!j["include_parent"].is_boolean()) detail::manifest_fail("include_parent must be a bool");
        m.include_parent = j["include_parent"].get<bool>();
    }
    if (j.contains("templates")) {
        if (!j["templates"].is_string()) detail::manifest_fail("templates must be a path string");
        m.templates_path = detail::resolve_path(base, j["templates"].get<std::string>());
    }

    if (!j.contains("mix") || !j["mix"].is_object())
        detail::manifest_fail("manifest requires a 'mix' object with 'budget' or 'fraction'");
    const auto& mix = j["mix"];
    if (mix.contains("budget")) {
        if (!mix["budget"].is_number_unsigned() || mix["budget"].get<std::uint64_t>() == 0)
            detail::manifest_fail("mix.budget must be a positive integer");
        m.mix.budget = mix["budget"].get<std::uint64_t>();
    }
    if (mix.contains("fraction")) {
        if (!mix["fraction"].is_number())
            detail::manifest_fail("mix.fraction must be a number in (0,1]");
        const double f = mix["fraction"].get<double>();
        if (!(f > 0.0 && f <= 1.0)) detail::manifest_fail("mix.fraction must be in (0,1]");
        m.mix.fraction = f;
    }
    if (!m.mix.budget && !m.mix.fraction)
        detail::manifest_fail("mix needs 'budget' or 'fraction'");
    if (m.mix.budget && m.mix.fraction)
        detail::manifest_fail("mix takes either 'budget' or 'fraction', not both");

    if (!j.contains("datasets") || !j["datasets"].is_array() || j["datasets"].empty())
        detail::manifest_fail("manifest requires at least one dataset");
    for (const auto& d : j["datasets"]) {
        if (!d.is_object()) detail::manifest_fail("dataset entries must be objects");
        dataset_descriptor desc;
        if (!d.contains("name") || !d["name"].is_string() ||
            d["name"].get_ref<const std::string&>().empty())
            detail::manifest_fail("dataset requires a nonempty 'name'");
        desc.name = d["name"].get<std::string>();
        for (const auto& other : m.datasets)
            if (other.name == desc.name)
                detail::manifest_fail("duplicate dataset name '" + desc.name + "'");
        if (!d.contains("path") || !d["path"].is_string())
            detail::manifest_fail("dataset '" + desc.name + "' requires a 'path'");
        desc.path = detail::resolve_path(base, d["path"].get<std::string>());
        if (!d.contains("task") || !d["task"].is_string() ||
            d["task"].get_ref<const std::string&>().empty())
            detail::manifest_fail("dataset '" + desc.name + "' requires a 'task'");
        desc.task = d["task"].get<std::string>();
        if (d.contains("adapter")) {
            if (!d["adapter"].is_string())
                detail::manifest_fail("dataset '" + desc.name + "': adapter must be a string");
            auto a = adapter_from_name(d["adapter"].get<std::string>());
            if (!a) detail::manifest_fail("dataset '" + desc.name + "': unknown adapter");
            desc.adapter = *a;
        }
        if (d.contains("no_exemplars")) {
            if (!d["no_exemplars"].is_boolean())
                detail::manifest_fail("dataset '" + desc.name + "': no_exemplars must be a bool");
            desc.no_exemplars = d["no_exemplars"].get<bool>();
        }
        if (d.contains("n_shots")) {
            if (!d["n_shots"].is_number_unsigned())
                detail::manifest_fail("dataset '" + desc.name +
                                      "': n_shots must be a nonnegative integer");
            desc.n_shots = d["n_shots"].get<std::uint32_t>();
        }
        m.datasets.push_back(std::move(desc));
    }
    return m;
}

}  // namespace mic

#endif  // MIC_MANIFEST_HPP
