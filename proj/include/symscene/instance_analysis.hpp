#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symscene/interchange.hpp"
#include "symscene/rle.hpp"

namespace symscene {

enum class DepthStat { mean, median };

std::string_view depth_stat_name(DepthStat s) noexcept;
DepthStat parse_depth_stat(std::string_view name);  // throws ConfigError

struct AnalysisOptions {
    DepthStat depth_stat = DepthStat::mean;
};

// Normalized [0,1] image coordinates; x/y divided by (W-1)/(H-1).
struct BBox {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    bool operator==(const BBox&) const = default;
};

struct Point2 {
    double x = 0, y = 0;
    bool operator==(const Point2&) const = default;
};

struct InstanceKnowledge {
    std::int64_t id = 0;
    std::string class_label;
    BBox bbox;
    Point2 centroid;
    std::uint64_t area_px = 0;
    double area_frac = 0;
    double mean_depth = 0;
    double depth_p05 = 0;
    double depth_p95 = 0;
    std::string color_name;

    bool operator==(const InstanceKnowledge&) const = default;
};

// Inclusive pixel-space bounds of a mask.
struct PixelBox {
    std::uint32_t col_min = 0, row_min = 0, col_max = 0, row_max = 0;
};

// Knowledge plus the decoded mask, which the relation engine needs for
// pixel-level overlap tests.
struct AnalyzedInstance {
    InstanceKnowledge knowledge;
    BitGrid mask;
    PixelBox pixel_box;
};

struct ColorAnchor {
    std::string_view name;
    Rgb rgb;
};

// Tie-break order is the array order.
inline constexpr std::array<ColorAnchor, 11> kColorPalette{{
    {"white", {255, 255, 255}},
    {"black", {0, 0, 0}},
    {"gray", {128, 128, 128}},
    {"red", {220, 40, 40}},
    {"orange", {245, 140, 30}},
    {"yellow", {245, 220, 40}},
    {"green", {60, 160, 60}},
    {"blue", {50, 90, 220}},
    {"purple", {130, 60, 180}},
    {"pink", {240, 150, 190}},
    {"brown", {140, 90, 50}},
}};

inline constexpr std::string_view kUnknownColor = "unknown";

// Throws ConfigError for names outside the palette.
Rgb palette_rgb(std::string_view name);
bool is_palette_color(std::string_view name) noexcept;

// Channel-wise (lower) median, then the nearest palette anchor by squared
// RGB distance. Returns "unknown" for an empty pixel set.
std::string classify_color(std::span<const Rgb> pixels);

// Nearest-rank percentile over an unsorted sample; p in (0, 100].
double nearest_rank_percentile(std::vector<double> values, int p);

AnalyzedInstance analyze_mask(std::int64_t id, const std::string& class_label, BitGrid mask,
                              const DepthMap& depth, const RgbImage* rgb, const AnalysisOptions& opts = {});

InstanceKnowledge analyze_instance(const InstanceRecord& rec, const DepthMap& depth, const RgbImage* rgb,
                                   const AnalysisOptions& opts = {});

// One entry per instance ordered by id.
std::vector<AnalyzedInstance> analyze_scene_with_masks(const SceneInput& scene, const AnalysisOptions& opts = {});
std::vector<InstanceKnowledge> analyze_scene(const SceneInput& scene, const AnalysisOptions& opts = {});

}  // namespace symscene
