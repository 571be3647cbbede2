#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "symscene/errors.hpp"
#include "symscene/relation_engine.hpp"
#include "symscene/scene_synth.hpp"

using namespace symscene;

namespace {

std::set<TruthRelation> relations_of(std::initializer_list<TruthRelation> rs) { return {rs}; }

std::set<TruthRelation> two_rects(double half_w) {
    const std::vector<ShapeSpec> specs{
        {ShapeKind::rect, "box", {0.25, 0.5}, {half_w, 0.1}, 5.0, "red", 0},
        {ShapeKind::rect, "box", {0.75, 0.5}, {half_w, 0.1}, 5.0, "blue", 0},
    };
    const SynthScene s = render(specs, {201, 201});
    CHECK(edge_set(compose_scene(s.scene)) == s.truth.relations);
    return s.truth.relations;
}

}  // namespace

TEST_CASE("one centered rect") {
    const std::vector<ShapeSpec> specs{{ShapeKind::rect, "box", {0.5, 0.5}, {0.2, 0.2}, 3.0, "orange", 0}};
    const SynthScene s = render(specs, {64, 64});
    CHECK(s.scene.instances.size() == 1);
    CHECK(s.truth.census.size() == 1);
    CHECK(s.truth.census.at({"box", "orange"}) == 1);
    CHECK(s.truth.relations.empty());
}

TEST_CASE("two rects side by side") {
    using K = RelationKind;
    // gap 0.3 > beside_gap
    CHECK(two_rects(0.1) == relations_of({{0, K::left_of, 1}, {1, K::right_of, 0}}));
    // gap 0.08 <= beside_gap
    CHECK(two_rects(0.21) ==
          relations_of({{0, K::left_of, 1}, {0, K::beside, 1}, {1, K::right_of, 0}, {1, K::beside, 0}}));
}

TEST_CASE("ellipse area is close to the analytic area") {
    for (const auto& [rx, ry] : {std::pair{0.1, 0.1}, {0.2, 0.12}, {0.3, 0.25}}) {
        const std::vector<ShapeSpec> specs{{ShapeKind::ellipse, "ball", {0.5, 0.5}, {rx, ry}, 1.0, "blue", 0}};
        const SynthScene s = render(specs, {256, 256});
        const double want = std::numbers::pi * rx * ry * 256 * 256;
        CHECK(std::fabs(static_cast<double>(s.truth.instances[0].area_px) - want) <= 0.03 * want);
    }
}

TEST_CASE("same seed, same bytes; other seed, other scene") {
    const SynthScene a = random_scene(42, 4, 2.0);
    const SynthScene b = random_scene(42, 4, 2.0);
    CHECK(a.scene == b.scene);
    CHECK(write_truth_json(a.truth) == write_truth_json(b.truth));
    CHECK_FALSE(random_scene(43, 4, 2.0).scene == a.scene);
}

TEST_CASE("single shape has no relations") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(random_scene(seed, 1, 2.0).truth.relations.empty());
}

TEST_CASE("visible masks are pairwise disjoint") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SynthScene s = random_scene(seed, 1 + static_cast<int>(seed % 12), 2.0);
        std::vector<int> owner(std::size_t{s.scene.width} * s.scene.height, -1);
        for (const auto& rec : s.scene.instances) {
            const BitGrid m = rle_decode(rec.rle);
            for (std::uint32_t r = 0; r < m.height(); ++r)
                for (std::uint32_t c = 0; c < m.width(); ++c) {
                    if (!m.at(r, c)) continue;
                    auto& o = owner[std::size_t{r} * m.width() + c];
                    REQUIRE(o == -1);
                    o = static_cast<int>(rec.id);
                }
        }
    }
}

TEST_CASE("ground truth is self-consistent") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const SynthScene s = random_scene(seed, 2 + static_cast<int>(seed % 8), 2.0);
        SceneGraph g;
        for (const auto& t : s.truth.instances) {
            InstanceKnowledge k;
            k.id = t.id;
            g.instances.push_back(k);
        }
        for (const auto& r : s.truth.relations)
            g.relations.push_back({r.subject_id, r.object_id, r.kind, 0.5, std::string(kind_phrase(r.kind))});
        CHECK(check_graph_invariants(g).empty());
        CHECK_FALSE(margin_violation(s.specs, {}, 2.0).has_value());
    }
}

TEST_CASE("margin check flags a borderline layout") {
    const std::vector<ShapeSpec> specs{
        {ShapeKind::rect, "a", {0.30, 0.5}, {0.05, 0.05}, 5.0, "red", 0},
        {ShapeKind::rect, "b", {0.36, 0.8}, {0.05, 0.05}, 5.0, "red", 0},
    };
    CHECK(margin_violation(specs, {}, 2.0).has_value());
    CHECK_FALSE(margin_violation(specs, {}, 1.0).has_value());
}

TEST_CASE("render rejects bad specs") {
    auto bad = [](ShapeSpec s) {
        const std::vector<ShapeSpec> v{s};
        CHECK_THROWS_AS(render(v, {64, 64}), GenerationError);
    };
    bad({ShapeKind::rect, "a", {0.5, 0.5}, {0.6, 0.1}, 1.0, "red", 0});
    bad({ShapeKind::rect, "a", {0.5, 0.5}, {0.1, 0.1}, 1.0, "teal", 0});
    bad({ShapeKind::rect, "a", {0.5, 0.5}, {0.0, 0.1}, 1.0, "red", 0});
    const std::vector<ShapeSpec> clash{
        {ShapeKind::rect, "a", {0.5, 0.5}, {0.2, 0.2}, 1.0, "red", 0},
        {ShapeKind::rect, "b", {0.6, 0.6}, {0.2, 0.2}, 2.0, "red", 0},
    };
    CHECK_THROWS_AS(render(clash, {64, 64}), GenerationError);
    CHECK_THROWS_AS(random_scene(0, 13, 2.0), GenerationError);
    CHECK_THROWS_AS(random_scene(0, 3, 0.5), GenerationError);
}

TEST_CASE("occlusion truth comes from pre-occlusion geometry") {
    const SynthScene s = fixture_three_shape();
    CHECK(s.truth.relations.count({0, RelationKind::occludes, 1}));
    CHECK(s.truth.relations.count({1, RelationKind::occluded_by, 0}));
    CHECK(edge_set(compose_scene(s.scene)) == s.truth.relations);
}

TEST_CASE("truth JSON lists census, relations and instances") {
    const SynthScene s = fixture_dogs();
    const auto j = nlohmann::json::parse(write_truth_json(s.truth));
    std::size_t white_dogs = 0;
    for (const auto& c : j["census"])
        if (c["class"] == "dog" && c["color"] == "white") white_dogs = c["count"];
    CHECK(white_dogs == 2);
    CHECK(j["relations"].size() == s.truth.relations.size());
    CHECK(j["instances"].size() == 4);
}
