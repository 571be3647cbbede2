#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symscene/instance_analysis.hpp"
#include "symscene/interchange.hpp"
#include "symscene/relation_types.hpp"
#include "symscene/scene_graph.hpp"

namespace symscene {

// splitmix64 (Steele, Lea & Flood); increment 0x9E3779B97F4A7C15.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    // [0, n)
    std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

private:
    std::uint64_t state_;
};

enum class ShapeKind { rect, ellipse };

// Geometry in normalized image coordinates (pixel / (dim - 1)).
struct ShapeSpec {
    ShapeKind shape = ShapeKind::rect;
    std::string class_label;
    Point2 center;
    Point2 half_extents;
    double depth_value = 1.0;
    std::string color = "white";
    // Painter's order: higher is drawn later (in front).
    int z_order = 0;
};

struct ImageDims {
    std::uint32_t width = 256;
    std::uint32_t height = 256;
};

struct RenderOptions {
    // Seeds the per-pixel RGB noise.
    std::uint64_t seed = 0;
    // Uniform integer noise in [-rgb_noise, rgb_noise] per channel.
    int rgb_noise = 0;
    std::optional<std::string> prompt;
    Thresholds thresholds;
};

// Per-instance stats measured on the rendered visible mask.
struct InstanceTruth {
    std::int64_t id = 0;
    std::string class_label;
    std::string color;
    std::uint64_t area_px = 0;
    PixelBox pixel_box;
    Point2 centroid;  // normalized
};

struct TruthRelation {
    std::int64_t subject_id = 0;
    RelationKind kind = RelationKind::left_of;
    std::int64_t object_id = 0;

    auto operator<=>(const TruthRelation&) const = default;
};

struct GroundTruth {
    std::map<std::pair<std::string, std::string>, std::size_t> census;  // (class, color) -> count
    std::set<TruthRelation> relations;
    std::vector<InstanceTruth> instances;
};

struct SynthScene {
    SceneInput scene;
    GroundTruth truth;
    std::vector<ShapeSpec> specs;
};

// Rasterizes back to front; each pixel belongs to the front-most covering
// shape. Instance ids are spec indices. Relations in the ground truth come
// from the spec geometry: centers, analytic boxes and depth values. Throws
// GenerationError for shapes outside the image, equal-z_order overlaps or
// fully occluded shapes.
SynthScene render(std::span<const ShapeSpec> specs, ImageDims dims, const RenderOptions& opts = {});

// Relations implied by spec geometry alone (no pixels involved).
std::set<TruthRelation> analytic_relations(std::span<const ShapeSpec> specs, const Thresholds& th);

// Describes the first relation decision whose value lies within a factor
// margin_factor of its threshold, or nullopt when every decision is clear.
std::optional<std::string> margin_violation(std::span<const ShapeSpec> specs, const Thresholds& th,
                                            double margin_factor);

// Shapes are placed in up to four well separated clusters of concentric,
// nested shapes sharing one depth, and the placement is resampled until
// margin_violation() reports nothing. Throws GenerationError after 1000
// failed attempts.
SynthScene random_scene(std::uint64_t seed, int n_shapes, double margin_factor, ImageDims dims = {},
                        const Thresholds& th = {});

// Frozen fixtures used by the golden tests.
SynthScene fixture_three_shape();
// Two white dogs, one brown dog and a white box.
SynthScene fixture_dogs();

std::string write_truth_json(const GroundTruth& truth);

std::set<TruthRelation> edge_set(const SceneGraph& graph);

}  // namespace symscene
