#include "symscene/relation_engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "symscene/errors.hpp"

namespace symscene {

namespace {

struct KindInfo {
    RelationKind kind;
    std::string_view name;
    std::string_view phrase;
    RelationKind converse;
};

constexpr std::array<KindInfo, 14> kKindTable{{
    {RelationKind::left_of, "LEFT_OF", "to the left of", RelationKind::right_of},
    {RelationKind::right_of, "RIGHT_OF", "to the right of", RelationKind::left_of},
    {RelationKind::above, "ABOVE", "at the top of", RelationKind::below},
    {RelationKind::below, "BELOW", "at the bottom of", RelationKind::above},
    {RelationKind::in_front_of, "IN_FRONT_OF", "in front of", RelationKind::behind},
    {RelationKind::behind, "BEHIND", "behind", RelationKind::in_front_of},
    {RelationKind::near, "NEAR", "near", RelationKind::near},
    {RelationKind::far, "FAR", "far from", RelationKind::far},
    {RelationKind::inside, "INSIDE", "inside", RelationKind::contains},
    {RelationKind::contains, "CONTAINS", "contains", RelationKind::inside},
    {RelationKind::beside, "BESIDE", "beside", RelationKind::beside},
    {RelationKind::overlaps, "OVERLAPS", "overlaps", RelationKind::overlaps},
    {RelationKind::occludes, "OCCLUDES", "occludes", RelationKind::occluded_by},
    {RelationKind::occluded_by, "OCCLUDED_BY", "occluded by", RelationKind::occludes},
}};

const KindInfo& info(RelationKind k) noexcept { return kKindTable[static_cast<std::size_t>(k)]; }

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

// Strength for a rule of the form value > threshold.
double exceed_strength(double value, double threshold) noexcept { return clamp01(value / threshold - 1.0); }

// Strength for a rule of the form value <= threshold.
double within_strength(double value, double threshold) noexcept {
    if (value <= 0) return 1.0;
    return clamp01(threshold / value - 1.0);
}

std::uint64_t mask_intersection(const AnalyzedInstance& a, const AnalyzedInstance& b) {
    const PixelBox& pa = a.pixel_box;
    const PixelBox& pb = b.pixel_box;
    const std::uint32_t c0 = std::max(pa.col_min, pb.col_min);
    const std::uint32_t c1 = std::min(pa.col_max, pb.col_max);
    const std::uint32_t r0 = std::max(pa.row_min, pb.row_min);
    const std::uint32_t r1 = std::min(pa.row_max, pb.row_max);
    if (c0 > c1 || r0 > r1) return 0;
    std::uint64_t n = 0;
    for (std::uint32_t r = r0; r <= r1; ++r) {
        for (std::uint32_t c = c0; c <= c1; ++c) {
            n += (a.mask.at(r, c) && b.mask.at(r, c)) ? 1 : 0;
        }
    }
    return n;
}

// IoU of inclusive pixel boxes.
double pixel_box_iou(const PixelBox& a, const PixelBox& b) noexcept {
    auto area = [](const PixelBox& p) {
        return static_cast<double>(p.col_max - p.col_min + 1) * static_cast<double>(p.row_max - p.row_min + 1);
    };
    const std::int64_t iw = std::int64_t{std::min(a.col_max, b.col_max)} - std::max(a.col_min, b.col_min) + 1;
    const std::int64_t ih = std::int64_t{std::min(a.row_max, b.row_max)} - std::max(a.row_min, b.row_min) + 1;
    if (iw <= 0 || ih <= 0) return 0.0;
    const double inter = static_cast<double>(iw) * static_cast<double>(ih);
    return inter / (area(a) + area(b) - inter);
}

// Chebyshev gap between two normalized boxes; 0 when they intersect.
double bbox_gap(const BBox& a, const BBox& b) noexcept {
    const double gx = std::max({0.0, b.x_min - a.x_max, a.x_min - b.x_max});
    const double gy = std::max({0.0, b.y_min - a.y_max, a.y_min - b.y_max});
    return std::max(gx, gy);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view kind_name(RelationKind kind) noexcept { return info(kind).name; }

std::optional<RelationKind> parse_kind(std::string_view name) noexcept {
    for (const auto& k : kKindTable) {
        if (k.name == name) return k.kind;
    }
    return std::nullopt;
}

std::string_view kind_phrase(RelationKind kind) noexcept { return info(kind).phrase; }

RelationKind converse(RelationKind kind) noexcept { return info(kind).converse; }

bool is_self_converse(RelationKind kind) noexcept { return converse(kind) == kind; }

void Thresholds::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"tau_xy", tau_xy},         {"tau_z_frac", tau_z_frac}, {"inside_containment", inside_containment},
        {"beside_gap", beside_gap}, {"near_dist", near_dist},   {"far_dist", far_dist},
        {"occlusion_overlap", occlusion_overlap},
    };
    for (const auto& [name, v] : fields) {
        if (!(v > 0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be a positive finite number", name);
        }
    }
    if (!(near_dist < far_dist)) {
        throw ConfigError("near_dist must be smaller than far_dist", "near_dist");
    }
    if (!(inside_containment > 0.5 && inside_containment <= 1.0)) {
        throw ConfigError("inside_containment must lie in (0.5, 1]", "inside_containment");
    }
}

DepthRange scene_depth_range(std::span<const InstanceKnowledge> knowledge) {
    if (knowledge.empty()) {
        throw InvariantError("scene_depth_range needs at least one instance");
    }
    DepthRange r{knowledge.front().depth_p05, knowledge.front().depth_p95};
    for (const auto& k : knowledge) {
        r.lo = std::min(r.lo, k.depth_p05);
        r.hi = std::max(r.hi, k.depth_p95);
    }
    return r;
}

std::vector<RelationEdge> classify_pair(const AnalyzedInstance& ai, const AnalyzedInstance& bi,
                                        const DepthRange& range, const Thresholds& th) {
    const InstanceKnowledge& a = ai.knowledge;
    const InstanceKnowledge& b = bi.knowledge;
    if (a.id == b.id) {
        throw InvariantError("classify_pair called with identical ids " + std::to_string(a.id));
    }

    std::vector<RelationEdge> edges;
    auto emit = [&](RelationKind kind, double strength) {
        edges.push_back(RelationEdge{a.id, b.id, kind, strength, std::string(kind_phrase(kind))});
    };

    const bool depth_ok = !range.degenerate();
    const double dx = b.centroid.x - a.centroid.x;
    const double dy = b.centroid.y - a.centroid.y;
    const double dz = depth_ok ? (b.mean_depth - a.mean_depth) / range.span() : 0.0;

    // Spatial-X / Spatial-Y (image y grows downward).
    if (dx > th.tau_xy) emit(RelationKind::left_of, exceed_strength(dx, th.tau_xy));
    if (-dx > th.tau_xy) emit(RelationKind::right_of, exceed_strength(-dx, th.tau_xy));
    if (dy > th.tau_xy) emit(RelationKind::above, exceed_strength(dy, th.tau_xy));
    if (-dy > th.tau_xy) emit(RelationKind::below, exceed_strength(-dy, th.tau_xy));

    // Spatial-Z and 3D distance.
    if (depth_ok) {
        if (dz > th.tau_z_frac) emit(RelationKind::in_front_of, exceed_strength(dz, th.tau_z_frac));
        if (-dz > th.tau_z_frac) emit(RelationKind::behind, exceed_strength(-dz, th.tau_z_frac));

        const double za = (a.mean_depth - range.lo) / range.span();
        const double zb = (b.mean_depth - range.lo) / range.span();
        const double d3 = std::sqrt(dx * dx + dy * dy + (zb - za) * (zb - za));
        if (d3 <= th.near_dist) emit(RelationKind::near, within_strength(d3, th.near_dist));
        if (d3 >= th.far_dist) emit(RelationKind::far, exceed_strength(d3, th.far_dist));
    }

    // Pixel-level interactions.
    const std::uint64_t inter = mask_intersection(ai, bi);
    const bool overlaps = inter >= 1;
    const double cont_a = static_cast<double>(inter) / static_cast<double>(a.area_px);
    const double cont_b = static_cast<double>(inter) / static_cast<double>(b.area_px);
    const bool inside = cont_a >= th.inside_containment && a.area_px < b.area_px;
    const bool contains = cont_b >= th.inside_containment && b.area_px < a.area_px;
    if (inside) emit(RelationKind::inside, exceed_strength(cont_a, th.inside_containment));
    if (contains) emit(RelationKind::contains, exceed_strength(cont_b, th.inside_containment));

    if (!overlaps && bbox_gap(a.bbox, b.bbox) <= th.beside_gap && std::abs(dz) <= th.tau_z_frac) {
        emit(RelationKind::beside, within_strength(bbox_gap(a.bbox, b.bbox), th.beside_gap));
    }
    if (overlaps) {
        emit(RelationKind::overlaps,
             static_cast<double>(inter) / static_cast<double>(std::min(a.area_px, b.area_px)));
    }

    if (depth_ok && !inside && !contains && pixel_box_iou(ai.pixel_box, bi.pixel_box) >= th.occlusion_overlap) {
        if (dz > th.tau_z_frac) emit(RelationKind::occludes, exceed_strength(dz, th.tau_z_frac));
        if (-dz > th.tau_z_frac) emit(RelationKind::occluded_by, exceed_strength(-dz, th.tau_z_frac));
    }

    std::sort(edges.begin(), edges.end(), [](const RelationEdge& x, const RelationEdge& y) {
        return std::tie(x.kind, x.object_id) < std::tie(y.kind, y.object_id);
    });
    return edges;
}

std::vector<std::string> prompt_classes(std::string_view prompt) {
    std::string normalized = lower(prompt);
    for (char& c : normalized) {
        if (c == ',' || c == ';' || c == '\n' || c == '.') c = '|';
    }
    for (std::size_t pos; (pos = normalized.find(" and ")) != std::string::npos;) {
        normalized.replace(pos, 5, "|");
    }
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= normalized.size()) {
        const std::size_t end = std::min(normalized.find('|', start), normalized.size());
        std::string token = trim(std::string_view(normalized).substr(start, end - start));
        if (!token.empty() && std::find(out.begin(), out.end(), token) == out.end()) {
            out.push_back(std::move(token));
        }
        start = end + 1;
    }
    return out;
}

SceneGraph compose_scene(const SceneInput& scene, const ComposeOptions& opts) {
    opts.thresholds.validate();

    SceneGraph graph;
    graph.meta.image_width = scene.width;
    graph.meta.image_height = scene.height;
    graph.meta.source_prompt = scene.source_prompt;
    graph.meta.depth_stat = opts.analysis.depth_stat;
    graph.meta.thresholds = opts.thresholds;

    std::vector<AnalyzedInstance> analyzed = analyze_scene_with_masks(scene, opts.analysis);
    for (const auto& a : analyzed) graph.instances.push_back(a.knowledge);
    if (analyzed.empty()) {
        return graph;
    }
    const DepthRange range = scene_depth_range(graph.instances);
    graph.meta.depth_range = range;

    std::vector<bool> selected(analyzed.size(), true);
    if (opts.restrict_to_prompt && scene.source_prompt) {
        const auto classes = prompt_classes(*scene.source_prompt);
        for (std::size_t i = 0; i < analyzed.size(); ++i) {
            const std::string cls = lower(analyzed[i].knowledge.class_label);
            selected[i] = std::find(classes.begin(), classes.end(), cls) != classes.end();
        }
    }

    for (std::size_t i = 0; i < analyzed.size(); ++i) {
        if (!selected[i]) continue;
        for (std::size_t j = 0; j < analyzed.size(); ++j) {
            if (i == j || !selected[j]) continue;
            auto edges = classify_pair(analyzed[i], analyzed[j], range, opts.thresholds);
            graph.relations.insert(graph.relations.end(), std::make_move_iterator(edges.begin()),
                                   std::make_move_iterator(edges.end()));
        }
    }
    std::sort(graph.relations.begin(), graph.relations.end(), [](const RelationEdge& x, const RelationEdge& y) {
        return std::tie(x.subject_id, x.kind, x.object_id) < std::tie(y.subject_id, y.kind, y.object_id);
    });
    return graph;
}

std::vector<std::string> check_graph_invariants(const SceneGraph& graph) {
    std::vector<std::string> problems;
    std::set<std::int64_t> ids;
    for (const auto& k : graph.instances) ids.insert(k.id);

    std::map<std::tuple<std::int64_t, RelationKind, std::int64_t>, double> index;
    for (const auto& e : graph.relations) {
        const std::string tag = "#" + std::to_string(e.subject_id) + " " + std::string(kind_name(e.kind)) + " #" +
                                std::to_string(e.object_id);
        if (e.subject_id == e.object_id) problems.push_back(tag + ": self edge");
        if (!ids.count(e.subject_id) || !ids.count(e.object_id)) problems.push_back(tag + ": unknown instance");
        if (e.phrase != kind_phrase(e.kind)) problems.push_back(tag + ": phrase \"" + e.phrase + "\" mismatch");
        if (!(e.strength >= 0.0 && e.strength <= 1.0)) problems.push_back(tag + ": strength outside [0,1]");
        if (!index.emplace(std::make_tuple(e.subject_id, e.kind, e.object_id), e.strength).second) {
            problems.push_back(tag + ": duplicate edge");
        }
    }

    constexpr std::pair<RelationKind, RelationKind> exclusive[] = {
        {RelationKind::left_of, RelationKind::right_of},    {RelationKind::above, RelationKind::below},
        {RelationKind::in_front_of, RelationKind::behind},  {RelationKind::near, RelationKind::far},
        {RelationKind::inside, RelationKind::contains},
    };
    for (const auto& [key, strength] : index) {
        const auto& [s, kind, o] = key;
        const std::string tag =
            "#" + std::to_string(s) + " " + std::string(kind_name(kind)) + " #" + std::to_string(o);
        auto it = index.find({o, converse(kind), s});
        if (it == index.end()) {
            problems.push_back(tag + ": missing converse " + std::string(kind_name(converse(kind))));
        } else if (std::abs(it->second - strength) > 1e-9) {
            problems.push_back(tag + ": converse strength differs");
        }
        for (const auto& [x, y] : exclusive) {
            if (kind == x && index.count({s, y, o})) {
                problems.push_back(tag + ": co-emitted with " + std::string(kind_name(y)));
            }
        }
    }
    return problems;
}

}  // namespace symscene
