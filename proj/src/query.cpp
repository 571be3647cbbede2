#include "symscene/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "symscene/errors.hpp"

namespace symscene {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

}  // namespace

std::string_view query_kind_name(QueryKind kind) noexcept {
    switch (kind) {
        case QueryKind::count: return "COUNT";
        case QueryKind::relation: return "RELATION";
        case QueryKind::attribute: return "ATTRIBUTE";
    }
    return "COUNT";
}

InstanceSelector InstanceSelector::parse(std::string_view text) {
    InstanceSelector sel;
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) {
        sel.class_label = std::string(text);
    } else {
        sel.class_label = std::string(text.substr(0, colon));
        const std::string_view num = text.substr(colon + 1);
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), sel.ordinal);
        if (ec != std::errc() || ptr != num.data() + num.size() || num.empty()) {
            throw ConfigError("bad selector \"" + std::string(text) + "\": expected CLASS or CLASS:ORDINAL");
        }
    }
    if (sel.class_label.empty()) {
        throw ConfigError("bad selector \"" + std::string(text) + "\": empty class");
    }
    return sel;
}

void SymbolicQuery::validate() const {
    switch (kind) {
        case QueryKind::count:
            if (!class_filter && !color_filter) {
                throw ConfigError("COUNT queries need a class or color filter");
            }
            break;
        case QueryKind::relation:
            if (!subject || !object) {
                throw ConfigError("RELATION queries need both a subject and an object selector");
            }
            break;
        case QueryKind::attribute:
            if (!subject || !attribute) {
                throw ConfigError("ATTRIBUTE queries need a subject selector and an attribute name");
            }
            break;
    }
}

std::int64_t resolve_selector(const SceneGraph& graph, const InstanceSelector& sel) {
    std::vector<const InstanceKnowledge*> matches;
    for (const auto& k : graph.instances) {
        if (iequals(k.class_label, sel.class_label)) matches.push_back(&k);
    }
    if (matches.empty()) {
        std::set<std::string> classes;
        for (const auto& k : graph.instances) classes.insert(k.class_label);
        std::string list;
        for (const auto& c : classes) list += (list.empty() ? "" : ", ") + c;
        throw SelectorError("no such instance: class \"" + sel.class_label + "\"; available classes: {" + list + "}");
    }
    std::sort(matches.begin(), matches.end(), [](const auto* a, const auto* b) {
        if (a->area_px != b->area_px) return a->area_px > b->area_px;
        return a->id < b->id;
    });
    if (sel.ordinal >= matches.size()) {
        throw SelectorError("ordinal " + std::to_string(sel.ordinal) + " out of range: only " +
                            std::to_string(matches.size()) + " instance(s) of class \"" + sel.class_label + "\"");
    }
    return matches[sel.ordinal]->id;
}

bool passes_filters(const InstanceKnowledge& k, const SymbolicQuery& q) {
    if (q.class_filter && !iequals(k.class_label, *q.class_filter)) return false;
    if (q.color_filter && !iequals(k.color_name, *q.color_filter)) return false;
    return true;
}

nlohmann::json instance_attribute(const InstanceKnowledge& k, std::string_view name) {
    if (name == "id") return k.id;
    if (name == "class_label") return k.class_label;
    if (name == "bbox") return {k.bbox.x_min, k.bbox.y_min, k.bbox.x_max, k.bbox.y_max};
    if (name == "centroid") return {k.centroid.x, k.centroid.y};
    if (name == "area_px") return k.area_px;
    if (name == "area_frac") return k.area_frac;
    if (name == "mean_depth") return k.mean_depth;
    if (name == "depth_p05") return k.depth_p05;
    if (name == "depth_p95") return k.depth_p95;
    if (name == "color_name") return k.color_name;
    throw ConfigError("unknown attribute \"" + std::string(name) + "\"");
}

nlohmann::ordered_json edge_to_json(const RelationEdge& e) {
    nlohmann::ordered_json j;
    j["subject_id"] = e.subject_id;
    j["object_id"] = e.object_id;
    j["kind"] = std::string(kind_name(e.kind));
    j["strength"] = e.strength;
    j["phrase"] = e.phrase;
    return j;
}

nlohmann::ordered_json QueryAnswer::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = std::string(query_kind_name(kind));
    if (const auto* n = std::get_if<std::size_t>(&result)) {
        j["result"] = *n;
    } else if (const auto* edges = std::get_if<std::vector<RelationEdge>>(&result)) {
        j["result"] = nlohmann::ordered_json::array();
        for (const auto& e : *edges) j["result"].push_back(edge_to_json(e));
    } else {
        j["result"] = std::get<nlohmann::json>(result);
    }
    return j;
}

QueryAnswer answer_query(const SceneGraph& graph, const SymbolicQuery& q) {
    q.validate();
    QueryAnswer ans;
    ans.kind = q.kind;
    switch (q.kind) {
        case QueryKind::count: {
            ans.result = static_cast<std::size_t>(std::count_if(
                graph.instances.begin(), graph.instances.end(),
                [&](const InstanceKnowledge& k) { return passes_filters(k, q); }));
            break;
        }
        case QueryKind::relation: {
            const auto s = resolve_selector(graph, *q.subject);
            const auto o = resolve_selector(graph, *q.object);
            std::vector<RelationEdge> edges;
            for (const auto& e : graph.relations) {
                if (e.subject_id == s && e.object_id == o) edges.push_back(e);
            }
            ans.result = std::move(edges);
            break;
        }
        case QueryKind::attribute: {
            const auto id = resolve_selector(graph, *q.subject);
            ans.result = instance_attribute(*graph.find(id), *q.attribute);
            break;
        }
    }
    return ans;
}

}  // namespace symscene
