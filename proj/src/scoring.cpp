#include "reflectrag/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reflectrag/errors.hpp"

namespace reflectrag {

GroupDistribution::GroupDistribution(ReflectionGroup group, std::vector<double> probs)
    : group_(group), probs_(std::move(probs)) {
    if (probs_.size() != group_size(group_)) {
        throw InvalidArgumentError("distribution over " + std::string(group_name(group_)) +
                                   " must have " + std::to_string(group_size(group_)) +
                                   " entries");
    }
    for (double p : probs_) {
        if (!std::isfinite(p)) {
            throw NonFiniteError("distribution probabilities must be finite");
        }
        if (p < 0.0) {
            throw InvalidArgumentError("distribution probabilities must be non-negative");
        }
    }
}

GroupDistribution GroupDistribution::from_map(ReflectionGroup group,
                                              const std::map<std::string, double>& probs) {
    std::vector<double> values(group_size(group), 0.0);
    std::size_t seen = 0;
    for (std::size_t i = 0; i < group_size(group); ++i) {
        auto it = probs.find(std::string(member_name(group, i)));
        if (it == probs.end()) {
            throw InvalidArgumentError("missing member '" + std::string(member_name(group, i)) +
                                       "' for group " + std::string(group_name(group)));
        }
        values[i] = it->second;
        ++seen;
    }
    if (probs.size() != seen) {
        throw InvalidArgumentError("unexpected member in distribution over group " +
                                   std::string(group_name(group)));
    }
    return {group, std::move(values)};
}

GroupDistribution GroupDistribution::uniform(ReflectionGroup group) {
    return {group, std::vector<double>(group_size(group), 1.0 / group_size(group))};
}

double GroupDistribution::prob(std::size_t ordinal) const {
    if (ordinal >= probs_.size()) {
        throw InvalidArgumentError("ordinal out of range");
    }
    return probs_[ordinal];
}

double GroupDistribution::prob(std::string_view member) const {
    return probs_[parse_member_name(group_, member)];
}

double GroupDistribution::mass() const {
    return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

GroupDistribution GroupDistribution::normalized() const {
    double total = mass();
    if (total <= 0.0) {
        throw ZeroMassError("cannot normalize a distribution with zero mass");
    }
    std::vector<double> values(probs_.size());
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        values[i] = probs_[i] / total;
    }
    return {group_, std::move(values)};
}

ReflectionToken GroupDistribution::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs_.size(); ++i) {
        if (probs_[i] > probs_[best]) {
            best = i;
        }
    }
    return ReflectionToken::from_ordinal(group_, best);
}

std::map<std::string, double> GroupDistribution::to_map() const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        out[std::string(member_name(group_, i))] = probs_[i];
    }
    return out;
}

namespace {

void require_group(const GroupDistribution& dist, ReflectionGroup expected) {
    if (dist.group() != expected) {
        throw InvalidArgumentError("expected a distribution over group " +
                                   std::string(group_name(expected)));
    }
}

double nonzero_mass(const GroupDistribution& dist) {
    double total = dist.mass();
    if (total <= 0.0) {
        throw ZeroMassError("distribution over " + std::string(group_name(dist.group())) +
                            " has zero mass");
    }
    return total;
}

}  // namespace

double score_isrel(const GroupDistribution& dist) {
    require_group(dist, ReflectionGroup::IsRel);
    double total = nonzero_mass(dist);
    return dist.prob(static_cast<std::size_t>(IsRelValue::Relevant)) / total;
}

double score_issup(const GroupDistribution& dist) {
    require_group(dist, ReflectionGroup::IsSup);
    double total = nonzero_mass(dist);
    double fully = dist.prob(static_cast<std::size_t>(IsSupValue::FullySupported));
    double partially = dist.prob(static_cast<std::size_t>(IsSupValue::PartiallySupported));
    return fully / total + 0.5 * (partially / total);
}

double score_isuse(const GroupDistribution& dist) {
    require_group(dist, ReflectionGroup::IsUse);
    double total = nonzero_mass(dist);
    double score = 0.0;
    for (std::size_t i = 0; i < kUtilityWeights.size(); ++i) {
        score += kUtilityWeights[i] * (dist.prob(i) / total);
    }
    return score;
}

double critique_score(const GroupDistribution& isrel, const GroupDistribution& issup,
                      const GroupDistribution& isuse, const CritiqueWeights& weights) {
    if (!std::isfinite(weights.is_rel) || !std::isfinite(weights.is_sup) ||
        !std::isfinite(weights.is_use)) {
        throw NonFiniteError("critique weights must be finite");
    }
    return weights.is_rel * score_isrel(isrel) + weights.is_sup * score_issup(issup) +
           weights.is_use * score_isuse(isuse);
}

double segment_score(double lm_logprob_mean, double critique) {
    if (!std::isfinite(lm_logprob_mean) || !std::isfinite(critique)) {
        throw NonFiniteError("segment score inputs must be finite");
    }
    return lm_logprob_mean + critique;
}

bool should_retrieve(const GroupDistribution& retrieve_dist, double threshold) {
    require_group(retrieve_dist, ReflectionGroup::Retrieve);
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw InvalidArgumentError("retrieval threshold must be in [0, 1]");
    }
    double yes = retrieve_dist.prob(static_cast<std::size_t>(RetrieveValue::Yes));
    double no = retrieve_dist.prob(static_cast<std::size_t>(RetrieveValue::No));
    if (yes + no <= 0.0) {
        throw ZeroMassError("retrieve distribution has zero Yes+No mass");
    }
    return yes / (yes + no) > threshold;
}

std::string aggregate_closed_set(const std::map<std::string, double>& option_scores) {
    if (option_scores.empty()) {
        throw EmptyOptionsError("no options to aggregate");
    }
    const std::string* best_label = nullptr;
    double best_score = 0.0;
    for (const auto& [label, score] : option_scores) {
        if (!std::isfinite(score)) {
            throw NonFiniteError("option score for '" + label + "' is not finite");
        }
        // Map iteration is in label order, so on ties the lexicographically
        // smallest label wins.
        if (best_label == nullptr || score > best_score) {
            best_label = &label;
            best_score = score;
        }
    }
    return *best_label;
}

}  // namespace reflectrag
