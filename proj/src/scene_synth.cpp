#include "symscene/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "symscene/errors.hpp"

namespace symscene {

namespace {

constexpr Rgb kBackground{40, 44, 52};

double stored_depth(double d) { return static_cast<double>(static_cast<float>(d)); }

bool covers(const ShapeSpec& s, double u, double v) {
    const double du = (u - s.center.x) / s.half_extents.x;
    const double dv = (v - s.center.y) / s.half_extents.y;
    if (s.shape == ShapeKind::rect) {
        return std::abs(du) <= 1.0 && std::abs(dv) <= 1.0;
    }
    return du * du + dv * dv <= 1.0;
}

enum class Cmp { greater, greater_eq, less_eq };

// One comparison inside a decision rule.
struct Atom {
    double value;
    double threshold;
    Cmp cmp;

    bool passes() const {
        switch (cmp) {
            case Cmp::greater: return value > threshold;
            case Cmp::greater_eq: return value >= threshold;
            case Cmp::less_eq: return value <= threshold;
        }
        return false;
    }
    // The value sits at least a factor m away from the threshold on its side.
    bool clear(double m) const {
        const bool upper = cmp != Cmp::less_eq;
        if (passes()) return upper ? value >= m * threshold : value <= threshold / m;
        return upper ? value <= threshold / m : value >= m * threshold;
    }
};

// Fires iff every atom passes.
struct Rule {
    RelationKind kind;
    std::vector<Atom> atoms;

    bool fires() const {
        return std::all_of(atoms.begin(), atoms.end(), [](const Atom& a) { return a.passes(); });
    }
    bool clear(double m) const {
        if (fires()) {
            return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return a.clear(m); });
        }
        return std::any_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return !a.passes() && a.clear(m); });
    }
};

struct AnalyticBox {
    double x0, y0, x1, y1;
};

AnalyticBox box_of(const ShapeSpec& s) {
    return {s.center.x - s.half_extents.x, s.center.y - s.half_extents.y, s.center.x + s.half_extents.x,
            s.center.y + s.half_extents.y};
}

// Rules for subject a against object b, evaluated on spec geometry. Visible
// masks are disjoint after rendering, so OVERLAPS/INSIDE/CONTAINS never fire
// and are omitted.
std::vector<Rule> pair_rules(const ShapeSpec& a, const ShapeSpec& b, double lo, double hi, const Thresholds& th) {
    std::vector<Rule> rules;
    const double dx = b.center.x - a.center.x;
    const double dy = b.center.y - a.center.y;
    rules.push_back({RelationKind::left_of, {{dx, th.tau_xy, Cmp::greater}}});
    rules.push_back({RelationKind::right_of, {{-dx, th.tau_xy, Cmp::greater}}});
    rules.push_back({RelationKind::above, {{dy, th.tau_xy, Cmp::greater}}});
    rules.push_back({RelationKind::below, {{-dy, th.tau_xy, Cmp::greater}}});

    const double da = stored_depth(a.depth_value);
    const double db = stored_depth(b.depth_value);
    const bool degenerate = hi - lo < DepthRange::kDegenerateSpan;
    const double dz = degenerate ? 0.0 : (db - da) / (hi - lo);

    const AnalyticBox ba = box_of(a), bb = box_of(b);
    const double gx = std::max({0.0, bb.x0 - ba.x1, ba.x0 - bb.x1});
    const double gy = std::max({0.0, bb.y0 - ba.y1, ba.y0 - bb.y1});
    rules.push_back({RelationKind::beside,
                     {{std::max(gx, gy), th.beside_gap, Cmp::less_eq}, {std::abs(dz), th.tau_z_frac, Cmp::less_eq}}});

    if (!degenerate) {
        rules.push_back({RelationKind::in_front_of, {{dz, th.tau_z_frac, Cmp::greater}}});
        rules.push_back({RelationKind::behind, {{-dz, th.tau_z_frac, Cmp::greater}}});

        const double za = (da - lo) / (hi - lo), zb = (db - lo) / (hi - lo);
        const double d3 = std::sqrt(dx * dx + dy * dy + (zb - za) * (zb - za));
        rules.push_back({RelationKind::near, {{d3, th.near_dist, Cmp::less_eq}}});
        rules.push_back({RelationKind::far, {{d3, th.far_dist, Cmp::greater_eq}}});

        const double iw = std::min(ba.x1, bb.x1) - std::max(ba.x0, bb.x0);
        const double ih = std::min(ba.y1, bb.y1) - std::max(ba.y0, bb.y0);
        const double inter = iw > 0 && ih > 0 ? iw * ih : 0.0;
        const double area_a = (ba.x1 - ba.x0) * (ba.y1 - ba.y0), area_b = (bb.x1 - bb.x0) * (bb.y1 - bb.y0);
        const double iou = inter / (area_a + area_b - inter);
        rules.push_back({RelationKind::occludes,
                         {{iou, th.occlusion_overlap, Cmp::greater_eq}, {dz, th.tau_z_frac, Cmp::greater}}});
        rules.push_back({RelationKind::occluded_by,
                         {{iou, th.occlusion_overlap, Cmp::greater_eq}, {-dz, th.tau_z_frac, Cmp::greater}}});
    }
    return rules;
}

std::pair<double, double> depth_bounds(std::span<const ShapeSpec> specs) {
    double lo = stored_depth(specs.front().depth_value), hi = lo;
    for (const auto& s : specs) {
        lo = std::min(lo, stored_depth(s.depth_value));
        hi = std::max(hi, stored_depth(s.depth_value));
    }
    return {lo, hi};
}

void check_spec(const ShapeSpec& s, std::size_t index) {
    const std::string tag = "shape " + std::to_string(index) + " (" + s.class_label + ")";
    if (!(s.half_extents.x > 0 && s.half_extents.y > 0)) {
        throw GenerationError(tag + ": half extents must be positive");
    }
    const AnalyticBox b = box_of(s);
    if (b.x0 < 0 || b.y0 < 0 || b.x1 > 1 || b.y1 > 1) {
        throw GenerationError(tag + ": shape extends outside the image");
    }
    if (!is_palette_color(s.color)) {
        throw GenerationError(tag + ": color \"" + s.color + "\" is not a palette name");
    }
    if (!std::isfinite(s.depth_value)) {
        throw GenerationError(tag + ": non-finite depth");
    }
}

}  // namespace

std::set<TruthRelation> analytic_relations(std::span<const ShapeSpec> specs, const Thresholds& th) {
    std::set<TruthRelation> out;
    if (specs.size() < 2) return out;
    const auto [lo, hi] = depth_bounds(specs);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t j = 0; j < specs.size(); ++j) {
            if (i == j) continue;
            for (const Rule& r : pair_rules(specs[i], specs[j], lo, hi, th)) {
                if (r.fires()) {
                    out.insert({static_cast<std::int64_t>(i), r.kind, static_cast<std::int64_t>(j)});
                }
            }
        }
    }
    return out;
}

std::optional<std::string> margin_violation(std::span<const ShapeSpec> specs, const Thresholds& th,
                                            double margin_factor) {
    if (specs.size() < 2) return std::nullopt;
    const auto [lo, hi] = depth_bounds(specs);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t j = 0; j < specs.size(); ++j) {
            if (i == j) continue;
            for (const Rule& r : pair_rules(specs[i], specs[j], lo, hi, th)) {
                if (!r.clear(margin_factor)) {
                    return "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") " +
                           std::string(kind_name(r.kind)) + " decision too close to its threshold";
                }
            }
        }
    }
    return std::nullopt;
}

SynthScene render(std::span<const ShapeSpec> specs, ImageDims dims, const RenderOptions& opts) {
    if (dims.width < 16 || dims.height < 16) {
        throw GenerationError("image dims must be at least 16x16");
    }
    for (std::size_t i = 0; i < specs.size(); ++i) check_spec(specs[i], i);

    const std::uint32_t w = dims.width, h = dims.height;
    const double sx = w - 1.0, sy = h - 1.0;

    std::vector<std::size_t> order(specs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return specs[a].z_order < specs[b].z_order; });

    // label[p] = index + 1 of the visible shape, 0 for background.
    std::vector<std::size_t> label(std::size_t{w} * h, 0);
    for (std::uint32_t r = 0; r < h; ++r) {
        for (std::uint32_t c = 0; c < w; ++c) {
            const double u = c / sx, v = r / sy;
            std::size_t& px = label[std::size_t{r} * w + c];
            for (std::size_t idx : order) {
                if (!covers(specs[idx], u, v)) continue;
                if (px != 0 && specs[px - 1].z_order == specs[idx].z_order) {
                    throw GenerationError("shapes " + std::to_string(px - 1) + " and " + std::to_string(idx) +
                                          " overlap with equal z_order");
                }
                px = idx + 1;
            }
        }
    }

    SynthScene out;
    out.specs.assign(specs.begin(), specs.end());
    SceneInput& scene = out.scene;
    scene.width = w;
    scene.height = h;
    scene.source_prompt = opts.prompt;

    double max_depth = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        max_depth = i == 0 ? specs[i].depth_value : std::max(max_depth, specs[i].depth_value);
    }
    const float background_depth = static_cast<float>(max_depth + 1.0);

    scene.depth.width = w;
    scene.depth.height = h;
    scene.depth.values.resize(label.size());
    RgbImage rgb{w, h, std::vector<Rgb>(label.size(), kBackground)};
    SplitMix64 noise(opts.seed);
    auto jitter = [&](std::uint8_t v) -> std::uint8_t {
        if (opts.rgb_noise <= 0) return v;
        const auto span = static_cast<std::uint64_t>(2 * opts.rgb_noise + 1);
        const int delta = static_cast<int>(noise.below(span)) - opts.rgb_noise;
        return static_cast<std::uint8_t>(std::clamp(int{v} + delta, 0, 255));
    };
    for (std::size_t p = 0; p < label.size(); ++p) {
        if (label[p] == 0) {
            scene.depth.values[p] = background_depth;
            continue;
        }
        const ShapeSpec& s = specs[label[p] - 1];
        scene.depth.values[p] = static_cast<float>(s.depth_value);
        const Rgb base = palette_rgb(s.color);
        rgb.pixels[p] = Rgb{jitter(base.r), jitter(base.g), jitter(base.b)};
    }
    scene.rgb = std::move(rgb);

    for (std::size_t i = 0; i < specs.size(); ++i) {
        BitGrid mask(h, w);
        InstanceTruth t;
        t.id = static_cast<std::int64_t>(i);
        t.class_label = specs[i].class_label;
        t.color = specs[i].color;
        t.pixel_box = PixelBox{w, h, 0, 0};
        std::uint64_t sum_c = 0, sum_r = 0;
        for (std::uint32_t r = 0; r < h; ++r) {
            for (std::uint32_t c = 0; c < w; ++c) {
                if (label[std::size_t{r} * w + c] != i + 1) continue;
                mask.set(r, c);
                ++t.area_px;
                sum_c += c;
                sum_r += r;
                t.pixel_box.col_min = std::min(t.pixel_box.col_min, c);
                t.pixel_box.col_max = std::max(t.pixel_box.col_max, c);
                t.pixel_box.row_min = std::min(t.pixel_box.row_min, r);
                t.pixel_box.row_max = std::max(t.pixel_box.row_max, r);
            }
        }
        if (t.area_px == 0) {
            throw GenerationError("shape " + std::to_string(i) + " (" + specs[i].class_label +
                                  ") has no visible pixels");
        }
        t.centroid = Point2{static_cast<double>(sum_c) / static_cast<double>(t.area_px) / sx,
                            static_cast<double>(sum_r) / static_cast<double>(t.area_px) / sy};
        scene.instances.push_back(InstanceRecord{t.id, specs[i].class_label, std::nullopt, rle_encode(mask)});
        ++out.truth.census[{specs[i].class_label, specs[i].color}];
        out.truth.instances.push_back(std::move(t));
    }

    out.truth.relations = analytic_relations(specs, opts.thresholds);
    validate_scene(scene);
    return out;
}

SynthScene random_scene(std::uint64_t seed, int n_shapes, double margin_factor, ImageDims dims,
                        const Thresholds& th) {
    if (n_shapes < 1 || n_shapes > 12) {
        throw GenerationError("n_shapes must lie in [1, 12]");
    }
    if (!(margin_factor >= 1.0)) {
        throw GenerationError("margin_factor must be >= 1");
    }
    static constexpr const char* kClasses[] = {"dog", "cat", "box", "ball", "toy", "cup"};
    static constexpr double kSlot[2] = {0.15, 0.85};
    constexpr int kMaxPerCluster = 3;
    constexpr double kMinExtent = 0.02;

    SplitMix64 rng(seed);
    const std::size_t n = static_cast<std::size_t>(n_shapes);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const std::size_t min_clusters = (n + kMaxPerCluster - 1) / kMaxPerCluster;
        const std::size_t max_clusters = std::min<std::size_t>(n, 4);
        const std::size_t k = min_clusters + rng.below(max_clusters - min_clusters + 1);

        std::vector<std::size_t> sizes(k, 1);
        for (std::size_t extra = n - k; extra > 0;) {
            const std::size_t g = rng.below(k);
            if (sizes[g] < kMaxPerCluster) {
                ++sizes[g];
                --extra;
            }
        }

        // Quadrant slots; clusters sharing a column share x exactly (same for rows).
        std::vector<int> slots{0, 1, 2, 3};
        for (std::size_t i = slots.size() - 1; i > 0; --i) std::swap(slots[i], slots[rng.below(i + 1)]);
        const auto snap = [](double v, double extent) { return std::round(v * extent) / extent; };
        const double col_x[2] = {snap(kSlot[0] + rng.uniform(-0.02, 0.02), dims.width - 1.0),
                                 snap(kSlot[1] + rng.uniform(-0.02, 0.02), dims.width - 1.0)};
        const double row_y[2] = {snap(kSlot[0] + rng.uniform(-0.02, 0.02), dims.height - 1.0),
                                 snap(kSlot[1] + rng.uniform(-0.02, 0.02), dims.height - 1.0)};

        const bool shared_depth = rng.uniform() < 0.2;
        const double common_depth = rng.uniform(1.0, 10.0);

        std::vector<ShapeSpec> specs;
        bool ok = true;
        for (std::size_t g = 0; g < k && ok; ++g) {
            const Point2 center{col_x[slots[g] % 2], row_y[slots[g] / 2]};
            double depth = common_depth;
            if (!shared_depth) depth = rng.uniform() < 0.5 ? rng.uniform(1.0, 2.5) : rng.uniform(7.0, 10.0);
            depth = stored_depth(depth);

            Point2 half{rng.uniform(0.07, 0.12), rng.uniform(0.07, 0.12)};
            for (std::size_t m = 0; m < sizes[g]; ++m) {
                if (m > 0) {
                    half = Point2{half.x * rng.uniform(0.45, 0.6), half.y * rng.uniform(0.45, 0.6)};
                }
                if (half.x < kMinExtent || half.y < kMinExtent) {
                    ok = false;
                    break;
                }
                ShapeSpec s;
                s.shape = rng.uniform() < 0.5 ? ShapeKind::rect : ShapeKind::ellipse;
                s.class_label = kClasses[rng.below(std::size(kClasses))];
                s.color = std::string(kColorPalette[rng.below(kColorPalette.size())].name);
                s.center = center;
                s.half_extents = half;
                s.depth_value = depth;
                s.z_order = static_cast<int>(m);
                specs.push_back(std::move(s));
            }
        }
        if (!ok || margin_violation(specs, th, margin_factor)) continue;

        RenderOptions opts;
        opts.seed = seed;
        opts.rgb_noise = 8;
        opts.thresholds = th;
        try {
            return render(specs, dims, opts);
        } catch (const GenerationError&) {
            continue;
        }
    }
    throw GenerationError("random_scene: placement failed after 1000 attempts for seed " + std::to_string(seed));
}

SynthScene fixture_three_shape() {
    const std::vector<ShapeSpec> specs{
        {ShapeKind::rect, "toy", {0.25, 0.65}, {0.12, 0.2}, 2.0, "green", 1},
        {ShapeKind::rect, "box", {0.55, 0.55}, {0.2, 0.25}, 6.0, "white", 0},
        {ShapeKind::ellipse, "ball", {0.85, 0.17}, {0.1, 0.1}, 4.0, "blue", 0},
    };
    RenderOptions opts;
    opts.prompt = "toy, box, ball";
    return render(specs, {160, 120}, opts);
}

SynthScene fixture_dogs() {
    const std::vector<ShapeSpec> specs{
        {ShapeKind::rect, "dog", {0.2, 0.7}, {0.1, 0.12}, 2.0, "white", 0},
        {ShapeKind::ellipse, "dog", {0.5, 0.72}, {0.08, 0.1}, 2.5, "white", 0},
        {ShapeKind::rect, "dog", {0.8, 0.7}, {0.1, 0.12}, 3.0, "brown", 0},
        {ShapeKind::rect, "box", {0.5, 0.25}, {0.15, 0.12}, 8.0, "white", 0},
    };
    RenderOptions opts;
    opts.prompt = "dog, box";
    return render(specs, {160, 120}, opts);
}

std::string write_truth_json(const GroundTruth& truth) {
    nlohmann::ordered_json root;
    root["census"] = nlohmann::ordered_json::array();
    for (const auto& [key, count] : truth.census) {
        root["census"].push_back({{"class", key.first}, {"color", key.second}, {"count", count}});
    }
    root["relations"] = nlohmann::ordered_json::array();
    for (const auto& r : truth.relations) {
        root["relations"].push_back(
            {{"subject_id", r.subject_id}, {"kind", std::string(kind_name(r.kind))}, {"object_id", r.object_id}});
    }
    root["instances"] = nlohmann::ordered_json::array();
    for (const auto& t : truth.instances) {
        root["instances"].push_back({{"id", t.id},
                                     {"class", t.class_label},
                                     {"color", t.color},
                                     {"area_px", t.area_px},
                                     {"bbox_px",
                                      {t.pixel_box.col_min, t.pixel_box.row_min, t.pixel_box.col_max,
                                       t.pixel_box.row_max}},
                                     {"centroid", {t.centroid.x, t.centroid.y}}});
    }
    return root.dump(2) + "\n";
}

std::set<TruthRelation> edge_set(const SceneGraph& graph) {
    std::set<TruthRelation> out;
    for (const auto& e : graph.relations) out.insert({e.subject_id, e.kind, e.object_id});
    return out;
}

}  // namespace symscene
