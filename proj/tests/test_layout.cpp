#include <doctest.h>

#include "helpers.hpp"

using namespace mic;
using mictest::random_instance;

namespace {

interleaved_instance one_image_instance() {
    interleaved_instance in;
    in.id = "l";
    in.dataset = "d";
    in.segments.push_back(segment::make_text("image 0 is [IMG0] "));
    in.segments.push_back(segment::make_image(0, image_asset::file("a.jpg")));
    in.segments.push_back(segment::make_text("Q? Answer:"));
    in.n_images = 1;
    return in;
}

}  // namespace

TEST_CASE("simulate_layout hand-tiled example: 4 + 32 + 2 = 38") {
    auto rep = simulate_layout(one_image_instance(), 32);
    CHECK(rep.total_length == 38);
    REQUIRE(rep.blocks.size() == 3);
    CHECK(rep.blocks[0].kind == block_kind::text);
    CHECK(rep.blocks[0].start == 0);
    CHECK(rep.blocks[0].length == 4);
    CHECK(rep.blocks[1].kind == block_kind::visual);
    CHECK(rep.blocks[1].start == 4);
    CHECK(rep.blocks[1].length == 32);
    CHECK(rep.blocks[1].proxy == 0);
    CHECK(rep.blocks[2].start == 36);
    CHECK(rep.blocks[2].length == 2);
}

TEST_CASE("simulate_layout with zero images is one text block") {
    interleaved_instance in;
    in.id = "t";
    in.dataset = "d";
    in.segments.push_back(segment::make_text("just some words here"));
    auto rep = simulate_layout(in, 32);
    REQUIRE(rep.blocks.size() == 1);
    CHECK(rep.total_length == 4);
}

TEST_CASE("three images occupy 96 visual tokens at 32 slots") {
    rng g(4);
    auto in = random_instance(g, 3);
    while (in.n_images != 3) in = random_instance(g, 3);
    auto rep = simulate_layout(in, 32);
    std::uint64_t visual = 0;
    for (const auto& b : rep.blocks)
        if (b.kind == block_kind::visual) visual += b.length;
    CHECK(visual == 96);
}

TEST_CASE("tiling and the length law hold over fuzzed instances") {
    rng g(777);
    const token_counter by_char = [](std::string_view s) { return s.size(); };
    const token_counter by_space = default_token_counter();
    for (int trial = 0; trial < 1000; ++trial) {
        auto in = random_instance(g);
        const std::uint32_t slots = 1 + static_cast<std::uint32_t>(g.below(64));

        auto check_with = [&](const token_counter& counter) {
            auto rep = simulate_layout(in, slots, counter);
            REQUIRE(validate(rep).empty());

            // Independent length computation straight off the segments.
            std::uint64_t want = 0;
            for (const auto& s : in.segments)
                want += s.is_text() ? counter(s.text) : slots;
            REQUIRE(rep.total_length == want);

            // Visual proxies are 0..K-1 in order.
            std::uint32_t expect = 0;
            for (const auto& b : rep.blocks)
                if (b.kind == block_kind::visual) {
                    REQUIRE(b.proxy == expect);
                    ++expect;
                }
            REQUIRE(expect == in.n_images);
            REQUIRE(check_alignment(rep, in, counter).empty());
        };
        check_with(by_space);
        check_with(by_char);
    }
}

TEST_CASE("check_alignment flags constructed negatives") {
    rng g(31);
    auto in = random_instance(g, 4);
    while (in.n_images < 2) in = random_instance(g, 4);
    auto rep = simulate_layout(in, 32);

    SUBCASE("front-loaded visual blocks") {
        auto bad = rep;
        for (auto& b : bad.blocks)
            if (b.kind == block_kind::visual) b.start = 0;
        auto vs = check_alignment(bad, in);
        REQUIRE(!vs.empty());
        bool flagged = false;
        for (const auto& v : vs) flagged = flagged || v.message.find("front-loaded") != std::string::npos;
        CHECK(flagged);
    }
    SUBCASE("swapped proxy order") {
        auto bad = rep;
        std::vector<layout_block*> visual;
        for (auto& b : bad.blocks)
            if (b.kind == block_kind::visual) visual.push_back(&b);
        REQUIRE(visual.size() >= 2);
        std::swap(visual[0]->proxy, visual[1]->proxy);
        auto vs = check_alignment(bad, in);
        bool flagged = false;
        for (const auto& v : vs) flagged = flagged || v.message.find("proxy order") != std::string::npos;
        CHECK(flagged);
    }
}
