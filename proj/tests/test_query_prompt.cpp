#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include "symscene/errors.hpp"
#include "symscene/prompt.hpp"
#include "symscene/query.hpp"
#include "symscene/relation_engine.hpp"
#include "symscene/scene_synth.hpp"

using namespace symscene;

namespace {

InstanceKnowledge node(std::int64_t id, std::string cls, std::uint64_t area, std::string color = "white") {
    InstanceKnowledge k;
    k.id = id;
    k.class_label = std::move(cls);
    k.area_px = area;
    k.color_name = std::move(color);
    return k;
}

SymbolicQuery count_query(std::optional<std::string> cls, std::optional<std::string> color) {
    SymbolicQuery q;
    q.kind = QueryKind::count;
    q.class_filter = std::move(cls);
    q.color_filter = std::move(color);
    return q;
}

SymbolicQuery relation_query(const std::string& s, const std::string& o) {
    SymbolicQuery q;
    q.kind = QueryKind::relation;
    q.subject = InstanceSelector::parse(s);
    q.object = InstanceSelector::parse(o);
    return q;
}

// Rank by counting how many same-class instances come first.
std::optional<std::int64_t> selector_oracle(const SceneGraph& g, const std::string& cls, std::size_t ordinal) {
    for (const auto& k : g.instances) {
        if (k.class_label != cls) continue;
        std::size_t before = 0;
        for (const auto& o : g.instances)
            if (o.class_label == cls && (o.area_px > k.area_px || (o.area_px == k.area_px && o.id < k.id)))
                ++before;
        if (before == ordinal) return k.id;
    }
    return std::nullopt;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("selector parsing") {
    const auto a = InstanceSelector::parse("dog:1");
    CHECK(a.class_label == "dog");
    CHECK(a.ordinal == 1);
    CHECK(InstanceSelector::parse("box").ordinal == 0);
    CHECK_THROWS_AS(InstanceSelector::parse("dog:x"), ConfigError);
    CHECK_THROWS_AS(InstanceSelector::parse(":1"), ConfigError);
    CHECK_THROWS_AS(InstanceSelector::parse("dog:-1"), ConfigError);
}

TEST_CASE("selector ordinal follows area then id") {
    SceneGraph g;
    g.instances = {node(0, "dog", 500), node(1, "dog", 200), node(2, "cat", 900)};
    CHECK(resolve_selector(g, {"dog", 0}) == 0);
    CHECK(resolve_selector(g, {"dog", 1}) == 1);
    CHECK(resolve_selector(g, {"DOG", 1}) == 1);
    try {
        resolve_selector(g, {"zebra", 0});
        FAIL("expected a selector error");
    } catch (const SelectorError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("dog") != std::string::npos);
        CHECK(msg.find("cat") != std::string::npos);
    }
    try {
        resolve_selector(g, {"dog", 2});
        FAIL("expected a selector error");
    } catch (const SelectorError& e) {
        CHECK(std::string(e.what()).find("only 2") != std::string::npos);
    }
    g.instances.push_back(node(3, "dog", 500));
    CHECK(resolve_selector(g, {"dog", 1}) == 3);
}

TEST_CASE("selector agrees with a counting oracle on random graphs") {
    SplitMix64 rng(31);
    const std::vector<std::string> classes{"dog", "cat", "cup"};
    for (int i = 0; i < 100; ++i) {
        SceneGraph g;
        const int n = 1 + static_cast<int>(rng.below(10));
        for (int k = 0; k < n; ++k)
            g.instances.push_back(node(k * 7 + 2, classes[rng.below(3)], 1 + rng.below(5)));
        for (const auto& cls : classes)
            for (std::size_t ord = 0; ord < 5; ++ord) {
                const auto want = selector_oracle(g, cls, ord);
                if (want) {
                    REQUIRE(resolve_selector(g, {cls, ord}) == *want);
                } else {
                    REQUIRE_THROWS_AS(resolve_selector(g, {cls, ord}), SelectorError);
                }
            }
    }
}

TEST_CASE("COUNT on the dogs fixture") {
    const SynthScene s = fixture_dogs();
    const SceneGraph g = compose_scene(s.scene);
    const auto white_dogs = answer_query(g, count_query("dog", "white"));
    CHECK(std::get<std::size_t>(white_dogs.result) == 2);
    CHECK(white_dogs.to_json().dump() == R"({"kind":"COUNT","result":2})");
    CHECK(std::get<std::size_t>(answer_query(g, count_query("dog", std::nullopt)).result) == 3);
    CHECK(std::get<std::size_t>(answer_query(g, count_query(std::nullopt, "white")).result) == 3);
    CHECK(std::get<std::size_t>(answer_query(g, count_query("zebra", std::nullopt)).result) == 0);
    CHECK_THROWS_AS(answer_query(g, count_query(std::nullopt, std::nullopt)), ConfigError);
}

TEST_CASE("COUNT matches the census for every filter") {
    for (int seed = 0; seed < 10; ++seed) {
        const SynthScene s = random_scene(500 + seed, 8, 2.0);
        const SceneGraph g = compose_scene(s.scene);
        for (const auto& [key, n] : s.truth.census)
            CHECK(std::get<std::size_t>(answer_query(g, count_query(key.first, key.second)).result) == n);
    }
}

TEST_CASE("RELATION returns exactly the subject-to-object edges") {
    const std::vector<ShapeSpec> specs{
        {ShapeKind::rect, "cup", {0.35, 0.5}, {0.04, 0.04}, 2.0, "red", 0},
        {ShapeKind::rect, "plate", {0.5, 0.5}, {0.04, 0.04}, 4.0, "white", 0},
        {ShapeKind::rect, "wall", {0.85, 0.15}, {0.05, 0.05}, 12.0, "gray", 0},
    };
    const SceneGraph g = compose_scene(render(specs, {201, 201}).scene);
    const auto ans = answer_query(g, relation_query("cup", "plate"));
    std::set<RelationKind> kinds;
    for (const auto& e : std::get<std::vector<RelationEdge>>(ans.result)) {
        CHECK(e.subject_id == 0);
        CHECK(e.object_id == 1);
        kinds.insert(e.kind);
    }
    CHECK(kinds == std::set<RelationKind>{RelationKind::left_of, RelationKind::in_front_of});
    const auto j = ans.to_json();
    CHECK(j["kind"] == "RELATION");
    CHECK(j["result"][0]["phrase"] == "to the left of");
    CHECK_THROWS_AS(answer_query(g, relation_query("cup", "zebra")), SelectorError);
}

TEST_CASE("ATTRIBUTE query") {
    const SceneGraph g = compose_scene(fixture_dogs().scene);
    SymbolicQuery q;
    q.kind = QueryKind::attribute;
    q.subject = InstanceSelector::parse("box");
    q.attribute = "color_name";
    CHECK(answer_query(g, q).to_json().dump() == R"({"kind":"ATTRIBUTE","result":"white"})");
    q.attribute = "mass";
    CHECK_THROWS_AS(answer_query(g, q), ConfigError);
    q.attribute.reset();
    CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("empty graph prompt marks both sections") {
    const std::string p = build_prompt(SceneGraph{}, "what is here?").rendered;
    CHECK(p.find("Question: what is here?\n") != std::string::npos);
    CHECK(p.find("Intrinsic knowledge:\n(none)\n") != std::string::npos);
    CHECK(p.find("Extrinsic knowledge:\n(none)\n") != std::string::npos);
    CHECK(p.rfind(std::string("[") + std::string(kPromptTemplateId) + "]", 0) == 0);
}

TEST_CASE("prompt is deterministic and matches the golden text") {
    const SceneGraph g = compose_scene(fixture_three_shape().scene);
    const std::string q = "What is the relationship between the toy and the white box?";
    const std::string a = build_prompt(g, q).rendered;
    CHECK(a == build_prompt(g, q).rendered);
    CHECK(a == slurp(std::string(SYMSCENE_GOLDEN_DIR) + "/three_shape_prompt.txt"));
}

TEST_CASE("prompt lines") {
    InstanceKnowledge k = node(3, "dog", 10, "brown");
    k.area_frac = 0.12345;
    k.mean_depth = 2.0;
    CHECK(intrinsic_line(k) == "#3 brown dog, area 12.35%, depth 2.000");
    CHECK(extrinsic_line({3, 4, RelationKind::occluded_by, 0.5, "occluded by"}) == "#3 occluded by #4");
}

TEST_CASE("prompt completeness under a query filter") {
    for (int seed = 0; seed < 20; ++seed) {
        const SynthScene s = random_scene(600 + seed, 6, 2.0);
        const SceneGraph g = compose_scene(s.scene);
        const auto& cls = g.instances.front().class_label;
        const SymbolicQuery q = count_query(cls, std::nullopt);
        const PromptBundle b = build_prompt(g, "how many?", q);
        std::set<std::int64_t> keep;
        std::size_t expected_intrinsic = 0;
        for (const auto& k : g.instances)
            if (k.class_label == cls) {
                keep.insert(k.id);
                ++expected_intrinsic;
                CHECK(std::count(b.intrinsic_facts.begin(), b.intrinsic_facts.end(), intrinsic_line(k)) == 1);
            }
        CHECK(b.intrinsic_facts.size() == expected_intrinsic);
        std::size_t expected_extrinsic = 0;
        for (const auto& e : g.relations)
            if (keep.count(e.subject_id) && keep.count(e.object_id)) {
                ++expected_extrinsic;
                CHECK(std::count(b.extrinsic_facts.begin(), b.extrinsic_facts.end(), extrinsic_line(e)) == 1);
            }
        CHECK(b.extrinsic_facts.size() == expected_extrinsic);
    }
}
