#include "symscene/instance_analysis.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <thread>

#include "symscene/errors.hpp"

namespace symscene {

std::string_view depth_stat_name(DepthStat s) noexcept {
    return s == DepthStat::median ? "median" : "mean";
}

DepthStat parse_depth_stat(std::string_view name) {
    if (name == "mean") return DepthStat::mean;
    if (name == "median") return DepthStat::median;
    throw ConfigError("depth_stat must be \"mean\" or \"median\", got \"" + std::string(name) + "\"", "depth_stat");
}

Rgb palette_rgb(std::string_view name) {
    for (const auto& a : kColorPalette) {
        if (a.name == name) return a.rgb;
    }
    throw ConfigError("unknown palette color \"" + std::string(name) + "\"");
}

bool is_palette_color(std::string_view name) noexcept {
    return std::any_of(kColorPalette.begin(), kColorPalette.end(),
                       [&](const ColorAnchor& a) { return a.name == name; });
}

std::string classify_color(std::span<const Rgb> pixels) {
    if (pixels.empty()) {
        return std::string(kUnknownColor);
    }
    // Histogram medians: exact and independent of pixel order.
    std::array<std::array<std::uint64_t, 256>, 3> hist{};
    for (const Rgb& p : pixels) {
        ++hist[0][p.r];
        ++hist[1][p.g];
        ++hist[2][p.b];
    }
    const std::uint64_t rank = (pixels.size() - 1) / 2;  // lower median
    std::array<int, 3> median{};
    for (int ch = 0; ch < 3; ++ch) {
        std::uint64_t seen = 0;
        for (int v = 0; v < 256; ++v) {
            seen += hist[ch][v];
            if (seen > rank) {
                median[ch] = v;
                break;
            }
        }
    }

    std::string_view best;
    long best_dist = std::numeric_limits<long>::max();
    for (const auto& a : kColorPalette) {
        const long dr = median[0] - a.rgb.r;
        const long dg = median[1] - a.rgb.g;
        const long db = median[2] - a.rgb.b;
        const long d = dr * dr + dg * dg + db * db;
        if (d < best_dist) {
            best_dist = d;
            best = a.name;
        }
    }
    return std::string(best);
}

double nearest_rank_percentile(std::vector<double> values, int p) {
    if (values.empty() || p <= 0 || p > 100) {
        throw InvariantError("nearest_rank_percentile: empty sample or p outside (0,100]");
    }
    const std::size_t n = values.size();
    // rank = ceil(p/100 * n), computed in integers.
    const std::size_t rank = (static_cast<std::size_t>(p) * n + 99) / 100;
    const std::size_t idx = rank == 0 ? 0 : rank - 1;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
    return values[idx];
}

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) {
        return *mid;
    }
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return lo + (hi - lo) / 2;
}

}  // namespace

AnalyzedInstance analyze_mask(std::int64_t id, const std::string& class_label, BitGrid mask,
                              const DepthMap& depth, const RgbImage* rgb, const AnalysisOptions& opts) {
    const std::uint32_t h = mask.height();
    const std::uint32_t w = mask.width();
    if (depth.width != w || depth.height != h) {
        throw InvariantError("instance " + std::to_string(id) + ": mask dims do not match depth dims");
    }

    AnalyzedInstance out;
    InstanceKnowledge& k = out.knowledge;
    k.id = id;
    k.class_label = class_label;

    std::uint64_t n = 0, sum_col = 0, sum_row = 0;
    PixelBox box{w, h, 0, 0};
    double depth_sum = 0;
    std::vector<double> depths;
    std::vector<Rgb> colors;
    for (std::uint32_t r = 0; r < h; ++r) {
        for (std::uint32_t c = 0; c < w; ++c) {
            if (!mask.at(r, c)) continue;
            ++n;
            sum_col += c;
            sum_row += r;
            box.col_min = std::min(box.col_min, c);
            box.col_max = std::max(box.col_max, c);
            box.row_min = std::min(box.row_min, r);
            box.row_max = std::max(box.row_max, r);
            const double d = depth.at(r, c);
            depth_sum += d;
            depths.push_back(d);
            if (rgb) colors.push_back(rgb->at(r, c));
        }
    }
    if (n == 0) {
        throw InvariantError("instance " + std::to_string(id) + ": empty mask reached analysis");
    }

    const double dx = w > 1 ? static_cast<double>(w - 1) : 1.0;
    const double dy = h > 1 ? static_cast<double>(h - 1) : 1.0;
    k.bbox = BBox{box.col_min / dx, box.row_min / dy, box.col_max / dx, box.row_max / dy};
    k.centroid = Point2{static_cast<double>(sum_col) / static_cast<double>(n) / dx,
                        static_cast<double>(sum_row) / static_cast<double>(n) / dy};
    k.area_px = n;
    k.area_frac = static_cast<double>(n) / (static_cast<double>(w) * h);
    k.mean_depth = opts.depth_stat == DepthStat::median ? median_of(depths) : depth_sum / static_cast<double>(n);
    k.depth_p05 = nearest_rank_percentile(depths, 5);
    k.depth_p95 = nearest_rank_percentile(std::move(depths), 95);
    k.color_name = rgb ? classify_color(colors) : std::string(kUnknownColor);

    out.mask = std::move(mask);
    out.pixel_box = box;
    return out;
}

InstanceKnowledge analyze_instance(const InstanceRecord& rec, const DepthMap& depth, const RgbImage* rgb,
                                   const AnalysisOptions& opts) {
    return analyze_mask(rec.id, rec.class_label, rle_decode(rec.rle, rec.id), depth, rgb, opts).knowledge;
}

std::vector<AnalyzedInstance> analyze_scene_with_masks(const SceneInput& scene, const AnalysisOptions& opts) {
    std::vector<const InstanceRecord*> order;
    order.reserve(scene.instances.size());
    for (const auto& rec : scene.instances) order.push_back(&rec);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->id < b->id; });

    const RgbImage* rgb = scene.rgb ? &*scene.rgb : nullptr;
    std::vector<AnalyzedInstance> out(order.size());
    auto work = [&](std::size_t i) {
        const InstanceRecord& rec = *order[i];
        out[i] = analyze_mask(rec.id, rec.class_label, rle_decode(rec.rle, rec.id), scene.depth, rgb, opts);
    };

    // Each task writes only its own slot, so results are already id-ordered.
    const std::size_t workers = std::min<std::size_t>(order.size(), std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < order.size(); ++i) work(i);
        return out;
    }
    std::vector<std::future<void>> tasks;
    for (std::size_t t = 0; t < workers; ++t) {
        tasks.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < order.size(); i += workers) work(i);
        }));
    }
    for (auto& f : tasks) f.get();
    return out;
}

std::vector<InstanceKnowledge> analyze_scene(const SceneInput& scene, const AnalysisOptions& opts) {
    std::vector<InstanceKnowledge> out;
    for (auto& a : analyze_scene_with_masks(scene, opts)) {
        out.push_back(std::move(a.knowledge));
    }
    return out;
}

}  // namespace symscene
