#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace reflectrag {

// The four reflection-token groups. Retrieve gates retrieval; the other
// three (the critique groups) grade relevance, support, and utility.
enum class ReflectionGroup { Retrieve, IsRel, IsSup, IsUse };

enum class RetrieveValue { Yes = 0, No = 1, Continue = 2 };
enum class IsRelValue { Relevant = 0, Irrelevant = 1 };
enum class IsSupValue { FullySupported = 0, PartiallySupported = 1, NoSupport = 2 };
// IsUse members are the utility ranks 1..5, stored as ordinals 0..4.

constexpr std::size_t group_size(ReflectionGroup group) {
    switch (group) {
        case ReflectionGroup::Retrieve: return 3;
        case ReflectionGroup::IsRel: return 2;
        case ReflectionGroup::IsSup: return 3;
        case ReflectionGroup::IsUse: return 5;
    }
    return 0;
}

std::string_view group_name(ReflectionGroup group);
ReflectionGroup parse_group_name(std::string_view name);

// Member name as it appears inside the canonical bracketed surface,
// e.g. "Yes", "Fully Supported", "3".
std::string_view member_name(ReflectionGroup group, std::size_t ordinal);
std::size_t parse_member_name(ReflectionGroup group, std::string_view name);

// One reflection token: a (group, member) pair with a canonical surface.
//
// Canonical surfaces:
//   [Retrieve=Yes] [Retrieve=No] [Retrieve=Continue]
//   [IsRel=Relevant] [IsRel=Irrelevant]
//   [IsSup=Fully Supported] [IsSup=Partially Supported] [IsSup=No Support]
//   [Utility:1] .. [Utility:5]
//
// Parsing is exact: surface -> token is a bijection over the 13 tokens.
class ReflectionToken {
public:
    static ReflectionToken retrieve(RetrieveValue value) {
        return {ReflectionGroup::Retrieve, static_cast<std::size_t>(value)};
    }
    static ReflectionToken is_rel(IsRelValue value) {
        return {ReflectionGroup::IsRel, static_cast<std::size_t>(value)};
    }
    static ReflectionToken is_sup(IsSupValue value) {
        return {ReflectionGroup::IsSup, static_cast<std::size_t>(value)};
    }
    static ReflectionToken utility(int rank);  // rank in 1..5
    static ReflectionToken from_ordinal(ReflectionGroup group, std::size_t ordinal);

    ReflectionGroup group() const { return group_; }
    std::size_t ordinal() const { return ordinal_; }

    RetrieveValue retrieve_value() const;
    IsRelValue is_rel_value() const;
    IsSupValue is_sup_value() const;
    int utility_rank() const;  // 1..5

    std::string surface() const;

    auto operator<=>(const ReflectionToken&) const = default;

private:
    ReflectionToken(ReflectionGroup group, std::size_t ordinal)
        : group_(group), ordinal_(ordinal) {}

    ReflectionGroup group_;
    std::size_t ordinal_;
};

// Exact-match parse of a canonical surface. Throws UnknownTokenError for
// anything that is not one of the 13 canonical forms.
ReflectionToken parse_reflection_token(std::string_view surface);

// All 13 tokens in canonical order (Retrieve, IsRel, IsSup, IsUse; members
// in declaration order).
const std::vector<ReflectionToken>& all_reflection_tokens();

}  // namespace reflectrag
