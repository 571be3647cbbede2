#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symscene/instance_analysis.hpp"
#include "symscene/relation_types.hpp"

namespace symscene {

inline constexpr std::string_view kSceneGraphFormat = "symscene-graph/1";

struct GraphMeta {
    std::uint32_t image_width = 0;
    std::uint32_t image_height = 0;
    std::optional<std::string> source_prompt;
    DepthStat depth_stat = DepthStat::mean;
    DepthRange depth_range;
    Thresholds thresholds;

    bool operator==(const GraphMeta& o) const {
        return image_width == o.image_width && image_height == o.image_height &&
               source_prompt == o.source_prompt && depth_stat == o.depth_stat &&
               depth_range.lo == o.depth_range.lo && depth_range.hi == o.depth_range.hi &&
               thresholds == o.thresholds;
    }
};

// Nodes ordered by id; edges ordered by (subject, kind, object).
struct SceneGraph {
    std::vector<InstanceKnowledge> instances;
    std::vector<RelationEdge> relations;
    GraphMeta meta;

    const InstanceKnowledge* find(std::int64_t id) const noexcept;

    bool operator==(const SceneGraph&) const = default;
};

// Stable key order, two-space indentation, every real printed with 6
// significant digits. Output is a pure function of the graph value.
std::string write_scene_graph(const SceneGraph& graph);

// Inverse of write_scene_graph. Throws FormatError / ValidationError.
SceneGraph read_scene_graph(std::string_view doc);

// Formats a real the way write_scene_graph does ("%.6g", no negative zero).
std::string format_real(double v);

}  // namespace symscene
