#include "reflectrag/lm.hpp"

#include <numeric>

namespace reflectrag {

double lm_logprob_mean(const SegmentGeneration& generation) {
    if (generation.token_logprobs.empty()) {
        return 0.0;
    }
    double sum = std::accumulate(generation.token_logprobs.begin(),
                                 generation.token_logprobs.end(), 0.0);
    return sum / static_cast<double>(generation.token_logprobs.size());
}

std::string context_fingerprint(const GenerationContext& ctx, std::string_view kind) {
    std::string key = ctx.instruction;
    if (!ctx.preceding_segments.empty()) {
        key += "|y:";
        key += join_segments(ctx.preceding_segments);
    }
    key += "|";
    key += kind;
    if (ctx.passage.has_value()) {
        key += "|";
        key += ctx.passage->id;
    }
    return key;
}

std::string reflection_fingerprint(const GenerationContext& ctx, ReflectionGroup group) {
    return context_fingerprint(ctx, group_name(group));
}

std::string generation_fingerprint(const GenerationContext& ctx) {
    return context_fingerprint(ctx, "gen");
}

}  // namespace reflectrag
