#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "symscene/scene_graph.hpp"

namespace symscene {

enum class QueryKind { count, relation, attribute };

std::string_view query_kind_name(QueryKind kind) noexcept;

// Picks the ordinal-th instance of a class, instances ranked by
// (area_px desc, id asc).
struct InstanceSelector {
    std::string class_label;
    std::size_t ordinal = 0;

    // "dog" or "dog:1". Throws ConfigError on a malformed ordinal.
    static InstanceSelector parse(std::string_view text);
};

struct SymbolicQuery {
    QueryKind kind = QueryKind::count;
    std::optional<std::string> class_filter;
    std::optional<std::string> color_filter;
    std::optional<InstanceSelector> subject;
    std::optional<InstanceSelector> object;
    // InstanceKnowledge field name for ATTRIBUTE queries (e.g. "color_name").
    std::optional<std::string> attribute;

    // Throws ConfigError when the kind's required fields are missing.
    void validate() const;
};

// Case-insensitive exact class match. Throws SelectorError.
std::int64_t resolve_selector(const SceneGraph& graph, const InstanceSelector& sel);

// True when the instance passes the query's class/color filters.
bool passes_filters(const InstanceKnowledge& k, const SymbolicQuery& q);

struct QueryAnswer {
    QueryKind kind = QueryKind::count;
    std::variant<std::size_t, std::vector<RelationEdge>, nlohmann::json> result;

    // {"kind": "COUNT", "result": ...}
    nlohmann::ordered_json to_json() const;
};

QueryAnswer answer_query(const SceneGraph& graph, const SymbolicQuery& q);

// JSON value of a named InstanceKnowledge field. Throws ConfigError.
nlohmann::json instance_attribute(const InstanceKnowledge& k, std::string_view name);

nlohmann::ordered_json edge_to_json(const RelationEdge& e);

}  // namespace symscene
