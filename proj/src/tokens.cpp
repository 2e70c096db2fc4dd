#include "reflectrag/tokens.hpp"

#include <map>

#include "reflectrag/errors.hpp"

namespace reflectrag {

namespace {

constexpr std::array<std::string_view, 4> kGroupNames = {"Retrieve", "IsRel", "IsSup", "IsUse"};

constexpr std::array<std::string_view, 3> kRetrieveMembers = {"Yes", "No", "Continue"};
constexpr std::array<std::string_view, 2> kIsRelMembers = {"Relevant", "Irrelevant"};
constexpr std::array<std::string_view, 3> kIsSupMembers = {"Fully Supported", "Partially Supported",
                                                           "No Support"};
constexpr std::array<std::string_view, 5> kIsUseMembers = {"1", "2", "3", "4", "5"};

const std::map<std::string, ReflectionToken, std::less<>>& surface_table() {
    static const std::map<std::string, ReflectionToken, std::less<>> table = [] {
        std::map<std::string, ReflectionToken, std::less<>> t;
        for (const auto& token : all_reflection_tokens()) {
            t.emplace(token.surface(), token);
        }
        return t;
    }();
    return table;
}

}  // namespace

std::string_view group_name(ReflectionGroup group) {
    return kGroupNames[static_cast<std::size_t>(group)];
}

ReflectionGroup parse_group_name(std::string_view name) {
    for (std::size_t i = 0; i < kGroupNames.size(); ++i) {
        if (kGroupNames[i] == name) {
            return static_cast<ReflectionGroup>(i);
        }
    }
    throw UnknownTokenError("unknown reflection group '" + std::string(name) + "'");
}

std::string_view member_name(ReflectionGroup group, std::size_t ordinal) {
    if (ordinal >= group_size(group)) {
        throw InvalidArgumentError("member ordinal out of range for group " +
                                   std::string(group_name(group)));
    }
    switch (group) {
        case ReflectionGroup::Retrieve: return kRetrieveMembers[ordinal];
        case ReflectionGroup::IsRel: return kIsRelMembers[ordinal];
        case ReflectionGroup::IsSup: return kIsSupMembers[ordinal];
        case ReflectionGroup::IsUse: return kIsUseMembers[ordinal];
    }
    throw InvalidArgumentError("invalid reflection group");
}

std::size_t parse_member_name(ReflectionGroup group, std::string_view name) {
    for (std::size_t i = 0; i < group_size(group); ++i) {
        if (member_name(group, i) == name) {
            return i;
        }
    }
    throw UnknownTokenError("'" + std::string(name) + "' is not a member of group " +
                            std::string(group_name(group)));
}

ReflectionToken ReflectionToken::utility(int rank) {
    if (rank < 1 || rank > 5) {
        throw InvalidArgumentError("utility rank must be in 1..5");
    }
    return {ReflectionGroup::IsUse, static_cast<std::size_t>(rank - 1)};
}

ReflectionToken ReflectionToken::from_ordinal(ReflectionGroup group, std::size_t ordinal) {
    if (ordinal >= group_size(group)) {
        throw InvalidArgumentError("token ordinal out of range for group " +
                                   std::string(group_name(group)));
    }
    return {group, ordinal};
}

RetrieveValue ReflectionToken::retrieve_value() const {
    if (group_ != ReflectionGroup::Retrieve) {
        throw InvalidArgumentError("token is not a Retrieve token");
    }
    return static_cast<RetrieveValue>(ordinal_);
}

IsRelValue ReflectionToken::is_rel_value() const {
    if (group_ != ReflectionGroup::IsRel) {
        throw InvalidArgumentError("token is not an IsRel token");
    }
    return static_cast<IsRelValue>(ordinal_);
}

IsSupValue ReflectionToken::is_sup_value() const {
    if (group_ != ReflectionGroup::IsSup) {
        throw InvalidArgumentError("token is not an IsSup token");
    }
    return static_cast<IsSupValue>(ordinal_);
}

int ReflectionToken::utility_rank() const {
    if (group_ != ReflectionGroup::IsUse) {
        throw InvalidArgumentError("token is not an IsUse token");
    }
    return static_cast<int>(ordinal_) + 1;
}

std::string ReflectionToken::surface() const {
    if (group_ == ReflectionGroup::IsUse) {
        return "[Utility:" + std::string(member_name(group_, ordinal_)) + "]";
    }
    return "[" + std::string(group_name(group_)) + "=" +
           std::string(member_name(group_, ordinal_)) + "]";
}

ReflectionToken parse_reflection_token(std::string_view surface) {
    const auto& table = surface_table();
    auto it = table.find(surface);
    if (it == table.end()) {
        throw UnknownTokenError("'" + std::string(surface) + "' is not a canonical token surface");
    }
    return it->second;
}

const std::vector<ReflectionToken>& all_reflection_tokens() {
    static const std::vector<ReflectionToken> tokens = [] {
        std::vector<ReflectionToken> t;
        for (auto group : {ReflectionGroup::Retrieve, ReflectionGroup::IsRel,
                           ReflectionGroup::IsSup, ReflectionGroup::IsUse}) {
            for (std::size_t i = 0; i < group_size(group); ++i) {
                t.push_back(ReflectionToken::from_ordinal(group, i));
            }
        }
        return t;
    }();
    return tokens;
}

}  // namespace reflectrag
