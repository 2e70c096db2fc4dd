#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reflectrag/passage.hpp"
#include "reflectrag/scoring.hpp"
#include "reflectrag/segment.hpp"
#include "reflectrag/tokens.hpp"

namespace reflectrag {

// Conditioning context for one backend query.
//
// Convention: for IsSup and IsUse queries the candidate segment under
// critique is the LAST element of `preceding_segments` (IsSup additionally
// carries the passage, IsUse does not). Retrieve and generation queries use
// `preceding_segments` as the output prefix generated so far.
struct GenerationContext {
    std::string instruction;
    std::vector<Segment> preceding_segments;
    std::optional<Passage> passage;
};

// One segment continuation with per-token log-probabilities. An empty text
// with finished=true is the terminal marker: the output is complete and no
// further segment is produced.
struct SegmentGeneration {
    std::string text;
    std::vector<double> token_logprobs;
    bool finished = false;
};

// Arithmetic mean of the per-token log-probabilities (0 for an empty list).
double lm_logprob_mean(const SegmentGeneration& generation);

// Stable context fingerprint used to key scripted fixtures:
//
//   instruction ["|y:" space-joined preceding segments] "|" kind ["|" passage id]
//
// where kind is one of Retrieve, IsRel, IsSup, IsUse, or "gen". Examples:
// "q1|Retrieve", "q1|gen|d1", "q1|y:A. B.|IsSup|d2".
std::string context_fingerprint(const GenerationContext& ctx, std::string_view kind);
std::string reflection_fingerprint(const GenerationContext& ctx, ReflectionGroup group);
std::string generation_fingerprint(const GenerationContext& ctx);

// Generator/critic model contract. Implementations must tolerate concurrent
// in-flight calls.
class LmBackend {
public:
    virtual ~LmBackend() = default;

    // Full distribution over the requested reflection group. Implementations
    // guarantee nonzero mass.
    virtual GroupDistribution predict_reflection(const GenerationContext& ctx,
                                                 ReflectionGroup group) = 0;

    // One segment continuation. Deterministic for the scripted backend; the
    // remote backend requests greedy (temperature 0) decoding.
    virtual SegmentGeneration generate_segment(const GenerationContext& ctx) = 0;
};

}  // namespace reflectrag
