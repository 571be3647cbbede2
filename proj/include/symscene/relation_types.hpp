#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace symscene {

// Declaration order is the canonical edge order.
enum class RelationKind : std::uint8_t {
    // fundamental
    left_of,
    right_of,
    above,
    below,
    in_front_of,
    behind,
    near,
    far,
    // complex interactions
    inside,
    contains,
    beside,
    overlaps,
    occludes,
    occluded_by,
};

inline constexpr std::array<RelationKind, 14> kAllRelationKinds{
    RelationKind::left_of,  RelationKind::right_of,  RelationKind::above,    RelationKind::below,
    RelationKind::in_front_of, RelationKind::behind, RelationKind::near,     RelationKind::far,
    RelationKind::inside,   RelationKind::contains,  RelationKind::beside,   RelationKind::overlaps,
    RelationKind::occludes, RelationKind::occluded_by,
};

// "LEFT_OF", "OCCLUDED_BY", ...
std::string_view kind_name(RelationKind kind) noexcept;
std::optional<RelationKind> parse_kind(std::string_view name) noexcept;

// Surface text used in prompts, e.g. ABOVE -> "at the top of".
std::string_view kind_phrase(RelationKind kind) noexcept;

RelationKind converse(RelationKind kind) noexcept;
bool is_self_converse(RelationKind kind) noexcept;

struct RelationEdge {
    std::int64_t subject_id = 0;
    std::int64_t object_id = 0;
    RelationKind kind = RelationKind::left_of;
    double strength = 0;
    std::string phrase;

    bool operator==(const RelationEdge&) const = default;
};

struct Thresholds {
    double tau_xy = 0.05;
    double tau_z_frac = 0.10;
    double inside_containment = 0.95;
    double beside_gap = 0.10;
    double near_dist = 0.15;
    double far_dist = 0.50;
    double occlusion_overlap = 0.01;

    // Throws ConfigError naming the offending field.
    void validate() const;

    bool operator==(const Thresholds&) const = default;
};

struct DepthRange {
    double lo = 0;
    double hi = 0;

    static constexpr double kDegenerateSpan = 1e-9;
    bool degenerate() const noexcept { return hi - lo < kDegenerateSpan; }
    double span() const noexcept { return hi - lo; }
};

}  // namespace symscene
