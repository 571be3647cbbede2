#include "symscene/scene_graph.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "symscene/errors.hpp"

namespace symscene {

namespace {

using nlohmann::json;

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

std::string real_array(std::initializer_list<double> vs) {
    std::string out = "[";
    bool first = true;
    for (double v : vs) {
        if (!first) out += ", ";
        out += format_real(v);
        first = false;
    }
    return out + "]";
}

std::string instance_line(const InstanceKnowledge& k) {
    std::string s = "{";
    s += "\"id\": " + std::to_string(k.id);
    s += ", \"class_label\": " + quote(k.class_label);
    s += ", \"bbox\": " + real_array({k.bbox.x_min, k.bbox.y_min, k.bbox.x_max, k.bbox.y_max});
    s += ", \"centroid\": " + real_array({k.centroid.x, k.centroid.y});
    s += ", \"area_px\": " + std::to_string(k.area_px);
    s += ", \"area_frac\": " + format_real(k.area_frac);
    s += ", \"mean_depth\": " + format_real(k.mean_depth);
    s += ", \"depth_p05\": " + format_real(k.depth_p05);
    s += ", \"depth_p95\": " + format_real(k.depth_p95);
    s += ", \"color_name\": " + quote(k.color_name);
    return s + "}";
}

std::string edge_line(const RelationEdge& e) {
    std::string s = "{";
    s += "\"subject_id\": " + std::to_string(e.subject_id);
    s += ", \"object_id\": " + std::to_string(e.object_id);
    s += ", \"kind\": " + quote(kind_name(e.kind));
    s += ", \"strength\": " + format_real(e.strength);
    s += ", \"phrase\": " + quote(e.phrase);
    return s + "}";
}

template <typename T, typename F>
std::string line_array(const std::vector<T>& items, F&& render) {
    if (items.empty()) return "[]";
    std::string out = "[\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += "    " + render(items[i]);
        out += i + 1 < items.size() ? ",\n" : "\n";
    }
    return out + "  ]";
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw FormatError("expected an object", path);
    auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(std::string("missing key \"") + key + "\"", path);
    return *it;
}

double real(const json& v, const std::string& path) {
    if (!v.is_number()) throw FormatError("expected a number", path);
    return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw FormatError("expected an integer", path);
    return v.get<std::int64_t>();
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) throw FormatError("expected a string", path);
    return v.get<std::string>();
}

std::vector<double> reals(const json& v, std::size_t n, const std::string& path) {
    if (!v.is_array() || v.size() != n) {
        throw FormatError("expected an array of " + std::to_string(n) + " numbers", path);
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(real(v[i], path + "/" + std::to_string(i)));
    return out;
}

}  // namespace

std::string format_real(double v) {
    if (v == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const InstanceKnowledge* SceneGraph::find(std::int64_t id) const noexcept {
    for (const auto& k : instances) {
        if (k.id == id) return &k;
    }
    return nullptr;
}

std::string write_scene_graph(const SceneGraph& g) {
    const Thresholds& th = g.meta.thresholds;
    std::string out = "{\n";
    out += "  \"instances\": " + line_array(g.instances, instance_line) + ",\n";
    out += "  \"relations\": " + line_array(g.relations, edge_line) + ",\n";
    out += "  \"meta\": {\n";
    out += "    \"format\": " + quote(kSceneGraphFormat) + ",\n";
    out += "    \"image\": {\"width\": " + std::to_string(g.meta.image_width) +
           ", \"height\": " + std::to_string(g.meta.image_height) + "},\n";
    out += "    \"source_prompt\": " + (g.meta.source_prompt ? quote(*g.meta.source_prompt) : "null") + ",\n";
    out += "    \"depth_stat\": " + quote(depth_stat_name(g.meta.depth_stat)) + ",\n";
    out += "    \"depth_range\": {\"lo\": " + format_real(g.meta.depth_range.lo) +
           ", \"hi\": " + format_real(g.meta.depth_range.hi) +
           ", \"degenerate\": " + (g.meta.depth_range.degenerate() ? "true" : "false") + "},\n";
    out += "    \"thresholds\": {\"tau_xy\": " + format_real(th.tau_xy) +
           ", \"tau_z_frac\": " + format_real(th.tau_z_frac) +
           ", \"inside_containment\": " + format_real(th.inside_containment) +
           ", \"beside_gap\": " + format_real(th.beside_gap) + ", \"near_dist\": " + format_real(th.near_dist) +
           ", \"far_dist\": " + format_real(th.far_dist) +
           ", \"occlusion_overlap\": " + format_real(th.occlusion_overlap) + "}\n";
    out += "  }\n}\n";
    return out;
}

SceneGraph read_scene_graph(std::string_view doc) {
    json root;
    try {
        root = json::parse(doc.begin(), doc.end());
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
    }

    SceneGraph g;
    const json& instances = field(root, "instances", "");
    if (!instances.is_array()) throw FormatError("instances must be an array", "/instances");
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const std::string p = "/instances/" + std::to_string(i);
        const json& j = instances[i];
        InstanceKnowledge k;
        k.id = integer(field(j, "id", p), p + "/id");
        k.class_label = text(field(j, "class_label", p), p + "/class_label");
        const auto bb = reals(field(j, "bbox", p), 4, p + "/bbox");
        k.bbox = BBox{bb[0], bb[1], bb[2], bb[3]};
        const auto c = reals(field(j, "centroid", p), 2, p + "/centroid");
        k.centroid = Point2{c[0], c[1]};
        const std::int64_t area = integer(field(j, "area_px", p), p + "/area_px");
        if (area < 1) throw ValidationError("area_px must be >= 1", p + "/area_px");
        k.area_px = static_cast<std::uint64_t>(area);
        k.area_frac = real(field(j, "area_frac", p), p + "/area_frac");
        k.mean_depth = real(field(j, "mean_depth", p), p + "/mean_depth");
        k.depth_p05 = real(field(j, "depth_p05", p), p + "/depth_p05");
        k.depth_p95 = real(field(j, "depth_p95", p), p + "/depth_p95");
        k.color_name = text(field(j, "color_name", p), p + "/color_name");
        if (g.find(k.id)) throw ValidationError("duplicate instance id " + std::to_string(k.id), p + "/id");
        g.instances.push_back(std::move(k));
    }

    const json& relations = field(root, "relations", "");
    if (!relations.is_array()) throw FormatError("relations must be an array", "/relations");
    for (std::size_t i = 0; i < relations.size(); ++i) {
        const std::string p = "/relations/" + std::to_string(i);
        const json& j = relations[i];
        RelationEdge e;
        e.subject_id = integer(field(j, "subject_id", p), p + "/subject_id");
        e.object_id = integer(field(j, "object_id", p), p + "/object_id");
        const std::string kind = text(field(j, "kind", p), p + "/kind");
        const auto parsed = parse_kind(kind);
        if (!parsed) throw ValidationError("unknown relation kind \"" + kind + "\"", p + "/kind");
        e.kind = *parsed;
        e.strength = real(field(j, "strength", p), p + "/strength");
        e.phrase = text(field(j, "phrase", p), p + "/phrase");
        if (e.phrase != kind_phrase(e.kind)) throw ValidationError("phrase does not match kind", p + "/phrase");
        if (!g.find(e.subject_id) || !g.find(e.object_id)) {
            throw ValidationError("edge references an unknown instance", p);
        }
        g.relations.push_back(std::move(e));
    }

    const json& meta = field(root, "meta", "");
    const std::string format = text(field(meta, "format", "/meta"), "/meta/format");
    if (format != kSceneGraphFormat) {
        throw ValidationError("unsupported graph format \"" + format + "\"", "/meta/format");
    }
    const json& image = field(meta, "image", "/meta");
    g.meta.image_width = static_cast<std::uint32_t>(integer(field(image, "width", "/meta/image"), "/meta/image/width"));
    g.meta.image_height =
        static_cast<std::uint32_t>(integer(field(image, "height", "/meta/image"), "/meta/image/height"));
    const json& prompt = field(meta, "source_prompt", "/meta");
    if (!prompt.is_null()) g.meta.source_prompt = text(prompt, "/meta/source_prompt");
    try {
        g.meta.depth_stat = parse_depth_stat(text(field(meta, "depth_stat", "/meta"), "/meta/depth_stat"));
    } catch (const ConfigError& e) {
        throw ValidationError(e.what(), "/meta/depth_stat");
    }
    const json& range = field(meta, "depth_range", "/meta");
    g.meta.depth_range.lo = real(field(range, "lo", "/meta/depth_range"), "/meta/depth_range/lo");
    g.meta.depth_range.hi = real(field(range, "hi", "/meta/depth_range"), "/meta/depth_range/hi");
    const json& th = field(meta, "thresholds", "/meta");
    const std::string tp = "/meta/thresholds";
    Thresholds& t = g.meta.thresholds;
    t.tau_xy = real(field(th, "tau_xy", tp), tp + "/tau_xy");
    t.tau_z_frac = real(field(th, "tau_z_frac", tp), tp + "/tau_z_frac");
    t.inside_containment = real(field(th, "inside_containment", tp), tp + "/inside_containment");
    t.beside_gap = real(field(th, "beside_gap", tp), tp + "/beside_gap");
    t.near_dist = real(field(th, "near_dist", tp), tp + "/near_dist");
    t.far_dist = real(field(th, "far_dist", tp), tp + "/far_dist");
    t.occlusion_overlap = real(field(th, "occlusion_overlap", tp), tp + "/occlusion_overlap");
    return g;
}

}  // namespace symscene
