#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symscene/instance_analysis.hpp"
#include "symscene/interchange.hpp"
#include "symscene/relation_types.hpp"
#include "symscene/scene_graph.hpp"

namespace symscene {

// lo = min depth_p05, hi = max depth_p95 over all instances.
DepthRange scene_depth_range(std::span<const InstanceKnowledge> knowledge);

// Edges with a as subject, sorted by kind then object id. Depth-based kinds
// (IN_FRONT_OF, BEHIND, NEAR, FAR, OCCLUDES, OCCLUDED_BY) are suppressed when
// the range is degenerate.
std::vector<RelationEdge> classify_pair(const AnalyzedInstance& a, const AnalyzedInstance& b,
                                        const DepthRange& range, const Thresholds& th);

struct ComposeOptions {
    Thresholds thresholds;
    AnalysisOptions analysis;
    // Only classify pairs whose classes are both named in the scene's source prompt.
    bool restrict_to_prompt = false;
};

SceneGraph compose_scene(const SceneInput& scene, const ComposeOptions& opts = {});

// Lower-cased class names from a prompt such as "dog, white box; toy".
std::vector<std::string> prompt_classes(std::string_view prompt);

// Returns one message per violated converse / mutual-exclusion / phrase
// invariant; empty when the graph is consistent.
std::vector<std::string> check_graph_invariants(const SceneGraph& graph);

}  // namespace symscene
