#pragma once

#include <map>
#include <string>
#include <vector>

#include "reflectrag/tokens.hpp"

namespace reflectrag {

// A (possibly unnormalized) probability vector over one reflection-token
// group. Every member is present; entries are finite and non-negative.
class GroupDistribution {
public:
    GroupDistribution(ReflectionGroup group, std::vector<double> probs);
    static GroupDistribution from_map(ReflectionGroup group,
                                      const std::map<std::string, double>& probs);
    static GroupDistribution uniform(ReflectionGroup group);

    ReflectionGroup group() const { return group_; }
    const std::vector<double>& probs() const { return probs_; }
    double prob(std::size_t ordinal) const;
    double prob(std::string_view member) const;

    double mass() const;

    // Divides by the total mass. Throws ZeroMassError when all entries are 0.
    GroupDistribution normalized() const;

    // Member with the highest probability; ties resolve to the lowest
    // ordinal in canonical member order.
    ReflectionToken argmax() const;

    std::map<std::string, double> to_map() const;

    bool operator==(const GroupDistribution&) const = default;

private:
    ReflectionGroup group_;
    std::vector<double> probs_;
};

// Per-group weights for the aggregate critique score. Defaults follow the
// standard inference configuration.
struct CritiqueWeights {
    double is_rel = 1.0;
    double is_sup = 1.0;
    double is_use = 0.5;
};

// Fixed per-rank weights for the utility score, ranks 1..5.
inline constexpr std::array<double, 5> kUtilityWeights = {-1.0, -0.5, 0.0, 0.5, 1.0};

// p(Relevant) / (p(Relevant) + p(Irrelevant)); result in [0, 1].
double score_isrel(const GroupDistribution& dist);

// (p(Fully) + 0.5 * p(Partially)) / total mass; NoSupport contributes 0.
double score_issup(const GroupDistribution& dist);

// Weighted mean of rank weights (-1, -0.5, 0, 0.5, 1); result in [-1, 1].
double score_isuse(const GroupDistribution& dist);

// Weighted sum of the three critique scores.
double critique_score(const GroupDistribution& isrel, const GroupDistribution& issup,
                      const GroupDistribution& isuse, const CritiqueWeights& weights);

// Segment score: mean per-token log-probability plus the critique score.
double segment_score(double lm_logprob_mean, double critique);

// Adaptive retrieval: true iff p(Yes) / (p(Yes) + p(No)) strictly exceeds
// the threshold. Continue mass is excluded from the ratio. Throws
// ZeroMassError when p(Yes) + p(No) == 0.
bool should_retrieve(const GroupDistribution& retrieve_dist, double threshold);

// Argmax over option scores; ties break to the lexicographically smallest
// option label. Throws EmptyOptionsError on an empty map and NonFiniteError
// on non-finite scores.
std::string aggregate_closed_set(const std::map<std::string, double>& option_scores);

}  // namespace reflectrag
