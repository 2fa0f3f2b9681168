#include <doctest.h>

#include <map>

#include "helpers.hpp"

using namespace mic;
using mictest::read_file;
using mictest::temp_dir;
using mictest::write_file;
using mictest::write_mini_fixture;

TEST_CASE("end-to-end: build, determinism, validate, layout") {
    temp_dir dir("pipeline");
    auto manifest_path = write_mini_fixture(dir, 60, 7);
    auto manifest = load_manifest(manifest_path);

    auto r1 = build_corpus(manifest);
    const std::string corpus1 = read_file(r1.output_path);
    const std::string report1 = read_file(r1.output_path + ".report.json");
    CHECK(r1.budget == 60);

    SUBCASE("rebuild is byte-identical, report included") {
        auto r2 = build_corpus(manifest);
        CHECK(read_file(r2.output_path) == corpus1);
        CHECK(read_file(r2.output_path + ".report.json") == report1);
    }
    SUBCASE("worker count does not change the bytes") {
        build_overrides o;
        o.workers = 4;
        o.out = (dir / "corpus_w4.jsonl").string();
        auto r2 = build_corpus(manifest, o);
        CHECK(read_file(r2.output_path) == corpus1);
    }
    SUBCASE("different seed changes the bytes") {
        build_overrides o;
        o.seed = 8;
        o.out = (dir / "corpus_s8.jsonl").string();
        auto r2 = build_corpus(manifest, o);
        CHECK(read_file(r2.output_path) != corpus1);
    }
    SUBCASE("corpus validates clean and respects exemplar flags") {
        auto v = validate_corpus(r1.output_path);
        CHECK(v.lines == 60);
        CHECK(v.instances == 60);
        CHECK(v.violations.empty());

        std::ifstream in(r1.output_path);
        std::string line;
        std::map<std::string, std::uint64_t> per_dataset;
        while (std::getline(in, line)) {
            auto inst = deserialize(line);
            ++per_dataset[inst.dataset];
            if (inst.dataset == "vqa_syn") {
                CHECK(inst.n_exemplars == 4);
                CHECK(inst.n_images == 5);  // 4 exemplars + query, one image each
            } else {
                CHECK(inst.n_exemplars == 0);
            }
            if (inst.dataset == "video_syn") CHECK(inst.n_images == 8);
            if (inst.dataset == "entity_syn") CHECK(inst.n_images == 3);  // scene + 2 crops
            CHECK(inst.meta.at("format_version") == "mic/1");
        }
        CHECK(per_dataset.size() == 3);
    }
    SUBCASE("layout check over the built corpus") {
        auto s = layout_check_corpus(r1.output_path, 32, (dir / "layout.jsonl").string());
        CHECK(s.instances == 60);
        CHECK(s.violations == 0);
    }
    SUBCASE("a corrupted line is caught by validate") {
        std::string corrupted = corpus1;
        auto at = corrupted.find("[IMG0]");
        REQUIRE(at != std::string::npos);
        corrupted.replace(at, 6, "[IMG9]");
        const auto bad_path = (dir / "bad.jsonl").string();
        write_file(bad_path, corrupted);
        auto v = validate_corpus(bad_path);
        CHECK(!v.violations.empty());
    }
}

TEST_CASE("fraction budget applies to the total record pool") {
    temp_dir dir("fraction");
    auto manifest_path = write_mini_fixture(dir, 1, 5, 10, 10, 10);
    // Swap the fixed budget for a fraction.
    std::string manifest_text = read_file(manifest_path);
    auto at = manifest_text.find(R"("mix": { "budget": 1 })");
    REQUIRE(at != std::string::npos);
    manifest_text.replace(at, std::string(R"("mix": { "budget": 1 })").size(),
                          R"("mix": { "fraction": 0.5 })");
    write_file(manifest_path, manifest_text);

    auto manifest = load_manifest(manifest_path);
    auto r = build_corpus(manifest);
    CHECK(r.budget == 15);  // round(30 * 0.5)
}

TEST_CASE("manifest rejection paths") {
    temp_dir dir("manifest");
    const auto path = (dir / "m.json").string();

    auto expect_manifest_error = [&](const std::string& body) {
        write_file(path, body);
        try {
            (void)load_manifest(path);
            FAIL_CHECK("expected manifest error for: " << body);
        } catch (const error& e) {
            CHECK(e.code() == errc::manifest);
        }
    };

    expect_manifest_error(R"({"output":"c.jsonl","mix":{"budget":5},"datasets":[]})");
    expect_manifest_error(R"({"seed":1,"output":"c.jsonl","mix":{"budget":5},"datasets":[]})");
    expect_manifest_error(R"({"seed":1,"output":"c.jsonl","mix":{},"datasets":[{"name":"a","path":"p","task":"vqa"}]})");
    expect_manifest_error(R"({"seed":1,"output":"c.jsonl","mix":{"fraction":1.5},"datasets":[{"name":"a","path":"p","task":"vqa"}]})");
    expect_manifest_error(R"({"seed":1,"output":"c.jsonl","mix":{"budget":5},"datasets":[{"name":"a","path":"p","task":"vqa","adapter":"bogus"}]})");
}

TEST_CASE("build maps missing task templates to a manifest error") {
    temp_dir dir("task");
    auto manifest_path = write_mini_fixture(dir, 10, 7);
    std::string text = read_file(manifest_path);
    auto at = text.find("\"task\": \"vqa\"");
    REQUIRE(at != std::string::npos);
    text.replace(at, std::string("\"task\": \"vqa\"").size(), "\"task\": \"nosuch\"");
    write_file(manifest_path, text);
    try {
        (void)build_corpus(load_manifest(manifest_path));
        FAIL("expected manifest error");
    } catch (const error& e) {
        CHECK(e.code() == errc::manifest);
    }
}

TEST_CASE("empty dataset file is a zero-count error") {
    temp_dir dir("zero");
    auto manifest_path = write_mini_fixture(dir, 10, 7);
    write_file(dir / "vqa.jsonl", "");
    try {
        (void)build_corpus(load_manifest(manifest_path));
        FAIL("expected zero_count");
    } catch (const error& e) {
        CHECK(e.code() == errc::zero_count);
    }
}

TEST_CASE("unwritable output is an io error and leaves no partial file") {
    temp_dir dir("io");
    auto manifest_path = write_mini_fixture(dir, 10, 7);
    build_overrides o;
    o.out = dir.path().string();  // a directory, not a writable file
    try {
        (void)build_corpus(load_manifest(manifest_path), o);
        FAIL("expected io error");
    } catch (const error& e) {
        CHECK(e.code() == errc::io);
    }
}

TEST_CASE("exemplar clamp emits a warning but still builds") {
    temp_dir dir("clamp");
    auto manifest_path = write_mini_fixture(dir, 12, 7, /*n_vqa=*/3, 5, 5);
    auto r = build_corpus(load_manifest(manifest_path));
    auto v = validate_corpus(r.output_path);
    CHECK(v.violations.empty());

    std::ifstream in(r.output_path);
    std::string line;
    bool saw_clamped_vqa = false;
    while (std::getline(in, line)) {
        auto inst = deserialize(line);
        if (inst.dataset != "vqa_syn") continue;
        CHECK(inst.n_exemplars == 2);  // only 2 other records exist
        saw_clamped_vqa = inst.meta.count("warnings") > 0;
    }
    CHECK(saw_clamped_vqa);
}

TEST_CASE("colon style flows from the manifest into every declaration") {
    temp_dir dir("style");
    auto manifest_path = write_mini_fixture(dir, 30, 7);
    std::string text = read_file(manifest_path);
    text.insert(text.find("\"seed\""), "\"style\": \"colon_form\",\n  ");
    write_file(manifest_path, text);
    auto r = build_corpus(load_manifest(manifest_path));
    std::ifstream in(r.output_path);
    std::string line;
    while (std::getline(in, line)) {
        auto inst = deserialize(line);
        const std::string t = rendered_text(inst);
        if (inst.dataset == "entity_syn") {
            CHECK(t.find("image 0: [IMG0] ") != std::string::npos);
            CHECK(t.find("image 0 is [IMG0]") == std::string::npos);
        }
    }
}

TEST_CASE("include_parent=false declares only the crops") {
    temp_dir dir("noparent");
    auto manifest_path = write_mini_fixture(dir, 20, 7);
    std::string text = read_file(manifest_path);
    text.insert(text.find("\"seed\""), "\"include_parent\": false,\n  ");
    write_file(manifest_path, text);
    auto r = build_corpus(load_manifest(manifest_path));
    std::ifstream in(r.output_path);
    std::string line;
    bool saw_entity = false;
    while (std::getline(in, line)) {
        auto inst = deserialize(line);
        if (inst.dataset != "entity_syn") continue;
        saw_entity = true;
        CHECK(inst.n_images == 2);  // the two crops, no scene
        for (const auto& s : inst.segments)
            if (s.is_image()) CHECK(s.asset.kind == asset_kind::crop);
    }
    CHECK(saw_entity);
    CHECK(validate_corpus(r.output_path).violations.empty());
}

TEST_CASE("a build that cannot fill its budget removes the partial output") {
    temp_dir dir("fail");
    // One dataset whose every record fails the transform: single-image records
    // against the eight-image video bank is a guaranteed arity mismatch.
    write_file(dir / "d.jsonl",
               R"({"id":"a","images":["a.jpg"],"question":"Q?","answer":"x"})" "\n");
    write_file(dir / "m.json", R"({
      "seed": 1, "output": "c.jsonl", "mix": {"budget": 5},
      "datasets": [{"name":"d","adapter":"vqa","path":"d.jsonl","task":"video_qa"}]})");
    const auto out = (dir / "c.jsonl").string();
    try {
        (void)build_corpus(load_manifest((dir / "m.json").string()));
        FAIL("expected build failure");
    } catch (const error& e) {
        CHECK(e.code() == errc::invariant);
    }
    CHECK(!std::filesystem::exists(out));
}

TEST_CASE("validate flags a missing format_version stamp") {
    temp_dir dir("stamp");
    interleaved_instance in;
    in.id = "x";
    in.dataset = "d";
    in.segments.push_back(segment::make_text("plain text"));
    const auto path = (dir / "c.jsonl").string();
    write_file(path, serialize(in));
    auto v = validate_corpus(path);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].second.find("format_version") != std::string::npos);
}

TEST_CASE("record cycling repeats records once the pool is exhausted") {
    temp_dir dir("cycle");
    auto manifest_path = write_mini_fixture(dir, 120, 7, 10, 10, 10);
    auto r = build_corpus(load_manifest(manifest_path));
    CHECK(r.budget == 120);
    auto v = validate_corpus(r.output_path);
    CHECK(v.lines == 120);
    CHECK(v.violations.empty());
}
