#pragma once

#include "symscene/interchange.hpp"
#include "symscene/scene_graph.hpp"

namespace symscene {

// Draws, on a copy of the image: one arrow per related instance pair
// (lower id -> higher id) between centroids, bbox outlines, and each id in a
// 5x7 bitmap font at the box's top-left corner. A graph without instances
// returns the image unchanged.
RgbImage render_overlay(const RgbImage& image, const SceneGraph& graph);

}  // namespace symscene
