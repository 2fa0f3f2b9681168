// micc: multi-modal in-context corpus compiler.
//
// Subcommands:
//   build <manifest>        compile a corpus per the manifest
//   validate <corpus>       re-check every line against the record invariants
//   stats <manifest>        print the mix plan (N_d, p_d, expected draws)
//   layout-check <corpus>   simulate token layout and report violations
//
// Exit codes: 0 ok, 1 corpus violations, 2 manifest/config error, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mic/mic.hpp"

namespace {

int exit_code_for(const mic::error& e) {
    return e.code() == mic::errc::io ? 3 : 2;
}

int run_build(const std::string& manifest_path, const mic::build_overrides& overrides) {
    mic::pipeline_manifest manifest = mic::load_manifest(manifest_path);
    mic::build_result r = mic::build_corpus(manifest, overrides);
    std::fprintf(stderr,
                 "built %llu instances from %zu datasets in %.2fs (%.0f records/s) -> %s\n",
                 static_cast<unsigned long long>(r.budget), r.datasets.size(),
                 r.ingest_seconds + r.build_seconds, r.records_per_second,
                 r.output_path.c_str());
    if (r.warning_count > 0)
        std::fprintf(stderr, "warnings: %llu (see %s.report.json)\n",
                     static_cast<unsigned long long>(r.warning_count), r.output_path.c_str());
    return 0;
}

int run_validate(const std::string& corpus_path) {
    mic::corpus_validation v = mic::validate_corpus(corpus_path);
    nlohmann::ordered_json j;
    j["corpus"] = corpus_path;
    j["lines"] = v.lines;
    j["instances"] = v.instances;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [line, message] : v.violations)
        arr.push_back({{"line", line}, {"message", message}});
    j["violations"] = std::move(arr);
    std::printf("%s\n", j.dump(2).c_str());
    std::fprintf(stderr, "%llu lines, %zu violations\n",
                 static_cast<unsigned long long>(v.lines), v.violations.size());
    return v.violations.empty() ? 0 : 1;
}

int run_stats(const std::string& manifest_path) {
    mic::pipeline_manifest m = mic::load_manifest(manifest_path);
    std::vector<mic::mix_dataset> datasets;
    std::uint64_t total = 0;
    for (const auto& desc : m.datasets) {
        mic::ingest_report rep;
        auto records = mic::ingest_all(desc, &rep);
        if (records.empty())
            throw mic::error(mic::errc::zero_count,
                             "dataset '" + desc.name + "' has no usable records");
        datasets.push_back({desc.name, records.size(), desc.no_exemplars, desc.n_shots});
        total += records.size();
    }
    const std::uint64_t budget =
        m.mix.budget ? *m.mix.budget : mic::budget_from_fraction(total, *m.mix.fraction);
    mic::mix_plan plan = mic::make_mix_plan(datasets, budget, m.seed);

    std::printf("%-24s %12s %10s %10s\n", "dataset", "N_d", "p_d", "expected");
    for (std::size_t i = 0; i < plan.datasets.size(); ++i) {
        const auto expected =
            static_cast<long long>(std::llround(plan.probabilities[i] * static_cast<double>(budget)));
        std::printf("%-24s %12llu %10.6f %10lld\n", plan.datasets[i].name.c_str(),
                    static_cast<unsigned long long>(plan.datasets[i].count),
                    plan.probabilities[i], expected);
    }
    std::printf("budget %llu, seed %llu\n", static_cast<unsigned long long>(budget),
                static_cast<unsigned long long>(m.seed));
    return 0;
}

int run_layout_check(const std::string& corpus_path, std::uint32_t slots,
                     std::optional<std::string> out_path) {
    const std::string report_path = out_path ? *out_path : corpus_path + ".layout.jsonl";
    mic::layout_summary s = mic::layout_check_corpus(corpus_path, slots, report_path);
    nlohmann::ordered_json j;
    j["corpus"] = corpus_path;
    j["report"] = report_path;
    j["slots"] = slots;
    j["instances"] = s.instances;
    j["instances_with_violations"] = s.instances_with_violations;
    j["violations"] = s.violations;
    std::printf("%s\n", j.dump(2).c_str());
    std::fprintf(stderr, "%llu instances, %llu violations -> %s\n",
                 static_cast<unsigned long long>(s.instances),
                 static_cast<unsigned long long>(s.violations), report_path.c_str());
    return s.violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"micc: multi-modal in-context corpus compiler"};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string corpus_path;
    mic::build_overrides overrides;
    std::optional<std::uint64_t> seed_opt;
    std::optional<std::string> out_opt;
    std::optional<std::uint64_t> budget_opt;
    std::optional<std::uint32_t> shots_opt;
    std::optional<std::string> templates_opt;
    std::uint64_t workers = 1;
    std::uint32_t slots = 32;
    std::optional<std::string> layout_out;

    auto* build = app.add_subcommand("build", "compile a corpus from a manifest");
    build->add_option("manifest", manifest_path, "pipeline manifest (JSON)")->required();
    build->add_option("--seed", seed_opt, "override the manifest seed");
    build->add_option("--out", out_opt, "override the output path");
    build->add_option("--budget", budget_opt, "override the sample budget");
    build->add_option("--shots", shots_opt, "override n_shots for every dataset");
    build->add_option("--templates", templates_opt, "override the template bank file");
    build->add_option("--workers", workers, "worker threads (output is identical for any count)");

    auto* validate = app.add_subcommand("validate", "re-check a built corpus");
    validate->add_option("corpus", corpus_path, "corpus JSONL file")->required();

    auto* stats = app.add_subcommand("stats", "print the mix plan for a manifest");
    stats->add_option("manifest", manifest_path, "pipeline manifest (JSON)")->required();

    auto* layout = app.add_subcommand("layout-check", "simulate token layout for a corpus");
    layout->add_option("corpus", corpus_path, "corpus JSONL file")->required();
    layout->add_option("--slots", slots, "visual slots per image (default 32)");
    layout->add_option("--out", layout_out, "per-instance report path (default <corpus>.layout.jsonl)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (build->parsed()) {
            overrides.seed = seed_opt;
            overrides.out = out_opt;
            overrides.budget = budget_opt;
            overrides.shots = shots_opt;
            overrides.templates = templates_opt;
            overrides.workers = workers;
            return run_build(manifest_path, overrides);
        }
        if (validate->parsed()) return run_validate(corpus_path);
        if (stats->parsed()) return run_stats(manifest_path);
        if (layout->parsed()) return run_layout_check(corpus_path, slots, layout_out);
    } catch (const mic::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    }
    return 2;
}
