#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symscene/query.hpp"
#include "symscene/scene_graph.hpp"

namespace symscene {

inline constexpr std::string_view kPromptTemplateId = "symscene-prompt/v1";

// Question plus the symbolic knowledge injected into the LLM prompt.
struct PromptBundle {
    std::string question;
    std::vector<std::string> intrinsic_facts;
    std::vector<std::string> extrinsic_facts;
    std::string rendered;
};

// An instance is relevant when it passes the query's class/color filters
// and, if the query names selectors, its class matches one of them. With no
// query every instance is relevant. Edges are kept when both ends are
// relevant.
PromptBundle build_prompt(const SceneGraph& graph, std::string_view question,
                          const std::optional<SymbolicQuery>& query = std::nullopt);

// "#3 white dog, area 12.50%, depth 2.000"
std::string intrinsic_line(const InstanceKnowledge& k);
// "#3 at the top of #5"
std::string extrinsic_line(const RelationEdge& e);

}  // namespace symscene
