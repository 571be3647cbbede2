#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "symscene/errors.hpp"
#include "symscene/instance_analysis.hpp"
#include "symscene/relation_engine.hpp"
#include "symscene/scene_synth.hpp"
#include "test_support.hpp"

using namespace symscene;
using namespace symscene::testing;

namespace {

BitGrid random_mask(SplitMix64& rng, std::uint32_t h, std::uint32_t w, double density) {
    BitGrid g(h, w);
    for (std::uint32_t r = 0; r < h; ++r)
        for (std::uint32_t c = 0; c < w; ++c) g.set(r, c, rng.uniform() < density);
    if (g.count() == 0) g.set(0, 0);
    return g;
}

DepthMap random_depth(SplitMix64& rng, std::uint32_t h, std::uint32_t w) {
    DepthMap d{w, h, {}};
    for (std::size_t i = 0; i < std::size_t{w} * h; ++i) d.values.push_back(static_cast<float>(rng.uniform(0.5, 20.0)));
    return d;
}

}  // namespace

TEST_CASE("constant depth gives that depth") {
    SplitMix64 rng(1);
    const BitGrid m = random_mask(rng, 9, 13, 0.3);
    const DepthMap d{13, 9, std::vector<float>(9 * 13, 7.0f)};
    const auto k = analyze_mask(1, "x", m, d, nullptr).knowledge;
    CHECK(k.mean_depth == 7.0);
    CHECK(k.depth_p05 == 7.0);
    CHECK(k.depth_p95 == 7.0);
}

TEST_CASE("full 2x2 mask averages [1,2,3,4] to 2.5") {
    BitGrid m(2, 2);
    for (std::uint32_t r = 0; r < 2; ++r)
        for (std::uint32_t c = 0; c < 2; ++c) m.set(r, c);
    const auto k = analyze_mask(0, "x", m, DepthMap{2, 2, {1, 2, 3, 4}}, nullptr).knowledge;
    CHECK(k.mean_depth == 2.5);
    CHECK(k.bbox == BBox{0, 0, 1, 1});
    CHECK(k.centroid == Point2{0.5, 0.5});
    CHECK(k.area_px == 4);
    CHECK(k.area_frac == 1.0);
    CHECK(k.color_name == "unknown");
}

TEST_CASE("median estimator") {
    const BitGrid m = box_mask(1, 4, 0, 0, 0, 3);
    AnalysisOptions opts;
    opts.depth_stat = DepthStat::median;
    CHECK(analyze_mask(0, "x", m, DepthMap{4, 1, {1, 100, 3, 2}}, nullptr, opts).knowledge.mean_depth == 2.5);
    CHECK(parse_depth_stat("median") == DepthStat::median);
    CHECK_THROWS_AS(parse_depth_stat("trimmed"), ConfigError);
}

TEST_CASE("random masks: mean equals a pixel-walk oracle, percentiles equal a counting oracle") {
    SplitMix64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const BitGrid m = random_mask(rng, 64, 64, rng.uniform(0.01, 0.9));
        const DepthMap d = random_depth(rng, 64, 64);
        const InstanceRecord rec{i, "x", std::nullopt, rle_encode(m)};
        const auto k = analyze_instance(rec, d, nullptr);
        const long double want = brute_force_mean_depth(rec.rle, d);
        REQUIRE(std::fabs(static_cast<long double>(k.mean_depth) - want) <= 1e-6L * std::fabs(want));

        std::vector<double> xs;
        for (std::uint32_t r = 0; r < 64; ++r)
            for (std::uint32_t c = 0; c < 64; ++c)
                if (m.at(r, c)) xs.push_back(d.at(r, c));
        REQUIRE(k.depth_p05 == counting_percentile(xs, 5));
        REQUIRE(k.depth_p95 == counting_percentile(xs, 95));
        const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
        REQUIRE(*lo <= k.mean_depth);
        REQUIRE(k.mean_depth <= *hi);
        REQUIRE(k.bbox.x_min <= k.centroid.x);
        REQUIRE(k.centroid.x <= k.bbox.x_max);
        REQUIRE(k.bbox.y_min <= k.centroid.y);
        REQUIRE(k.centroid.y <= k.bbox.y_max);
    }
}

TEST_CASE("nearest-rank percentile small cases") {
    CHECK(nearest_rank_percentile({3, 1, 2}, 5) == 1);
    CHECK(nearest_rank_percentile({3, 1, 2}, 95) == 3);
    CHECK(nearest_rank_percentile({5}, 50) == 5);
    CHECK(nearest_rank_percentile({1, 2, 3, 4}, 50) == 2);
    CHECK_THROWS_AS(nearest_rank_percentile({}, 5), InvariantError);
}

TEST_CASE("translation equivariance with padding") {
    SplitMix64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const std::uint32_t h = 40, w = 50, pad = 10;
        const auto sx = static_cast<std::uint32_t>(rng.below(pad + 1));
        const auto sy = static_cast<std::uint32_t>(rng.below(pad + 1));
        BitGrid m(h, w), shifted(h, w);
        DepthMap d{w, h, std::vector<float>(std::size_t{w} * h, 1.0f)}, ds = d;
        for (std::uint32_t r = 0; r + pad < h; ++r)
            for (std::uint32_t c = 0; c + pad < w; ++c) {
                const bool on = rng.uniform() < 0.4 || (r == 0 && c == 0);
                const auto depth = static_cast<float>(rng.uniform(1.0, 9.0));
                m.set(r, c, on);
                shifted.set(r + sy, c + sx, on);
                d.values[std::size_t{r} * w + c] = depth;
                ds.values[std::size_t{r + sy} * w + c + sx] = depth;
            }
        const auto a = analyze_mask(0, "x", m, d, nullptr).knowledge;
        const auto b = analyze_mask(0, "x", shifted, ds, nullptr).knowledge;
        const double ox = sx / double(w - 1), oy = sy / double(h - 1);
        CHECK(b.bbox.x_min == doctest::Approx(a.bbox.x_min + ox).epsilon(1e-9));
        CHECK(b.bbox.y_max == doctest::Approx(a.bbox.y_max + oy).epsilon(1e-9));
        CHECK(std::fabs(b.centroid.x - (a.centroid.x + ox)) <= 1e-9);
        CHECK(std::fabs(b.centroid.y - (a.centroid.y + oy)) <= 1e-9);
        CHECK(b.mean_depth == a.mean_depth);
    }
}

TEST_CASE("depth affine covariance") {
    SplitMix64 rng(4);
    for (int i = 0; i < 30; ++i) {
        const BitGrid m = random_mask(rng, 32, 32, 0.5);
        const DepthMap d = random_depth(rng, 32, 32);
        const double a = rng.uniform(0.1, 10.0), b = rng.uniform(-5.0, 5.0);
        DepthMap t = d;
        for (float& v : t.values) v = static_cast<float>(a * v + b);
        const double m0 = analyze_mask(0, "x", m, d, nullptr).knowledge.mean_depth;
        const double m1 = analyze_mask(0, "x", m, t, nullptr).knowledge.mean_depth;
        CHECK(std::fabs(m1 - (a * m0 + b)) <= 1e-6 * std::fabs(a * m0 + b));
    }
}

TEST_CASE("area is additive over disjoint unions") {
    SplitMix64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const BitGrid u = random_mask(rng, 20, 20, 0.6);
        BitGrid p(20, 20), q(20, 20);
        for (std::uint32_t r = 0; r < 20; ++r)
            for (std::uint32_t c = 0; c < 20; ++c)
                if (u.at(r, c)) (rng.uniform() < 0.5 ? p : q).set(r, c);
        if (p.count() == 0 || q.count() == 0) continue;
        const DepthMap d{20, 20, std::vector<float>(400, 1.0f)};
        CHECK(analyze_mask(0, "x", u, d, nullptr).knowledge.area_px ==
              analyze_mask(1, "x", p, d, nullptr).knowledge.area_px +
                  analyze_mask(2, "x", q, d, nullptr).knowledge.area_px);
    }
}

TEST_CASE("color naming") {
    const std::vector<Rgb> white(5, Rgb{255, 255, 255});
    CHECK(classify_color(white) == "white");

    // Nearest anchor computed here by brute force.
    const Rgb probe{58, 158, 62};
    std::string_view best;
    long best_d = std::numeric_limits<long>::max();
    for (const auto& a : kColorPalette) {
        const long d = (probe.r - a.rgb.r) * (probe.r - a.rgb.r) + (probe.g - a.rgb.g) * (probe.g - a.rgb.g) +
                       (probe.b - a.rgb.b) * (probe.b - a.rgb.b);
        if (d < best_d) {
            best_d = d;
            best = a.name;
        }
    }
    CHECK(best == "green");
    CHECK(classify_color(std::vector<Rgb>(3, probe)) == best);

    CHECK(classify_color(std::vector<Rgb>{{0, 0, 0}, {0, 0, 0}, {255, 255, 255}}) == "black");
    CHECK(classify_color(std::vector<Rgb>{}) == "unknown");
    // Channel-wise median resists a few highlight pixels.
    std::vector<Rgb> red(9, Rgb{220, 40, 40});
    red[0] = red[1] = Rgb{255, 255, 255};
    CHECK(classify_color(red) == "red");
    CHECK(palette_rgb("brown") == Rgb{140, 90, 50});
    CHECK(is_palette_color("pink"));
    CHECK_FALSE(is_palette_color("teal"));
}

TEST_CASE("scene analysis: empty, id order, permutation invariance") {
    SceneInput empty = scene_from_masks(4, 4, {});
    CHECK(analyze_scene(empty).empty());

    const SynthScene s = fixture_three_shape();
    SceneInput permuted = s.scene;
    std::reverse(permuted.instances.begin(), permuted.instances.end());
    const auto a = analyze_scene(s.scene);
    CHECK(a == analyze_scene(permuted));
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].id < a[i].id);
}

TEST_CASE("three-shape fixture matches generator truth") {
    const SynthScene s = fixture_three_shape();
    const auto ks = analyze_scene(s.scene);
    REQUIRE(ks.size() == s.truth.instances.size());
    const double sx = s.scene.width - 1.0, sy = s.scene.height - 1.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const auto& k = ks[i];
        const auto& t = s.truth.instances[i];
        CHECK(k.id == t.id);
        CHECK(k.area_px == t.area_px);
        CHECK(k.bbox == BBox{t.pixel_box.col_min / sx, t.pixel_box.row_min / sy, t.pixel_box.col_max / sx,
                             t.pixel_box.row_max / sy});
        CHECK(k.centroid == t.centroid);
        CHECK(k.color_name == t.color);
        CHECK(std::fabs(k.mean_depth - s.specs[i].depth_value) <= 1e-6);
    }
}

TEST_CASE("depth range over p05/p95") {
    InstanceKnowledge a, b;
    a.depth_p05 = 1;
    a.depth_p95 = 2;
    b.depth_p05 = 5;
    b.depth_p95 = 9;
    const std::vector<InstanceKnowledge> ks{a, b};
    const DepthRange r = scene_depth_range(ks);
    CHECK(r.lo == 1);
    CHECK(r.hi == 9);

    // Against a counting oracle on random scenes.
    SplitMix64 rng(6);
    for (int i = 0; i < 10; ++i) {
        const SynthScene s = random_scene(300 + i, 3, 2.0, {64, 64});
        const auto kn = analyze_scene(s.scene);
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& rec : s.scene.instances) {
            const BitGrid m = rle_decode(rec.rle);
            std::vector<double> xs;
            for (std::uint32_t r = 0; r < 64; ++r)
                for (std::uint32_t c = 0; c < 64; ++c)
                    if (m.at(r, c)) xs.push_back(s.scene.depth.at(r, c));
            lo = std::min(lo, counting_percentile(xs, 5));
            hi = std::max(hi, counting_percentile(xs, 95));
        }
        const DepthRange got = scene_depth_range(kn);
        CHECK(got.lo == lo);
        CHECK(got.hi == hi);
    }
}
