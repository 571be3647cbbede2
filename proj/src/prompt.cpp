#include "symscene/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

namespace symscene {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

bool relevant(const InstanceKnowledge& k, const std::optional<SymbolicQuery>& q) {
    if (!q) return true;
    if (!passes_filters(k, *q)) return false;
    if (!q->subject && !q->object) return true;
    return (q->subject && iequals(k.class_label, q->subject->class_label)) ||
           (q->object && iequals(k.class_label, q->object->class_label));
}

void append_section(std::string& out, std::string_view title, const std::vector<std::string>& lines) {
    out += title;
    out += '\n';
    if (lines.empty()) {
        out += "(none)\n";
        return;
    }
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
}

}  // namespace

std::string intrinsic_line(const InstanceKnowledge& k) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ", area %.2f%%, depth %.3f", k.area_frac * 100.0, k.mean_depth);
    return "#" + std::to_string(k.id) + " " + k.color_name + " " + k.class_label + buf;
}

std::string extrinsic_line(const RelationEdge& e) {
    return "#" + std::to_string(e.subject_id) + " " + e.phrase + " #" + std::to_string(e.object_id);
}

PromptBundle build_prompt(const SceneGraph& graph, std::string_view question,
                          const std::optional<SymbolicQuery>& query) {
    PromptBundle b;
    b.question = std::string(question);

    std::set<std::int64_t> ids;
    for (const auto& k : graph.instances) {
        if (!relevant(k, query)) continue;
        ids.insert(k.id);
        b.intrinsic_facts.push_back(intrinsic_line(k));
    }
    for (const auto& e : graph.relations) {
        if (ids.count(e.subject_id) && ids.count(e.object_id)) {
            b.extrinsic_facts.push_back(extrinsic_line(e));
        }
    }

    std::string& r = b.rendered;
    r += "[";
    r += kPromptTemplateId;
    r += "] Symbolic knowledge extracted from an image, seen from the camera.\n";
    r += "Question: " + b.question + "\n";
    append_section(r, "Intrinsic knowledge:", b.intrinsic_facts);
    append_section(r, "Extrinsic knowledge:", b.extrinsic_facts);
    r += "Answer the question using only the knowledge stated above.\n";
    return b;
}

}  // namespace symscene
