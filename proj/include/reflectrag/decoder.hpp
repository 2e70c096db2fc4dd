#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "reflectrag/lm.hpp"
#include "reflectrag/retrieval.hpp"
#include "reflectrag/scoring.hpp"

namespace reflectrag {

enum class ConstraintMode { Soft, Hard };
enum class Accumulate { SumPerStep, PerStepOnly };

struct DecodeConfig {
    std::size_t beam_width = 2;          // B
    std::size_t top_k = 5;               // K passages per retrieval
    double threshold = 0.2;              // delta for adaptive retrieval
    CritiqueWeights weights;             // (1.0, 1.0, 0.5)
    ConstraintMode mode = ConstraintMode::Soft;
    std::set<ReflectionToken> hard_filters = default_hard_filters();
    std::size_t max_segments = 10;
    Accumulate accumulate = Accumulate::SumPerStep;

    static std::set<ReflectionToken> default_hard_filters() {
        return {ReflectionToken::is_sup(IsSupValue::NoSupport),
                ReflectionToken::is_rel(IsRelValue::Irrelevant)};
    }

    void validate() const;
};

// One passage-conditioned (or passage-free) continuation with its critique
// distributions and combined score. isrel/issup are present iff the
// candidate is passage-conditioned; f_score is recomputable from the parts.
struct SegmentCandidate {
    Segment segment;
    std::optional<Passage> passage;
    double lm_logprob_mean = 0.0;
    std::optional<GroupDistribution> isrel;
    std::optional<GroupDistribution> issup;
    GroupDistribution isuse = GroupDistribution::uniform(ReflectionGroup::IsUse);
    double f_score = 0.0;
    bool finished = false;
    // Set when the passage was carried over from a previous segment rather
    // than newly retrieved; rendering skips the passage insertion.
    bool continued_evidence = false;
    // Ids of every passage retrieved in the step that produced this
    // candidate; copied onto the hypothesis as a retrieval event.
    std::vector<std::string> step_retrieved_ids;
};

struct RetrievalEvent {
    std::size_t segment_index = 0;
    std::vector<std::string> passage_ids;
};

struct BeamHypothesis {
    std::string instruction;
    std::vector<SegmentCandidate> chosen;
    double cumulative_score = 0.0;
    std::vector<RetrievalEvent> retrieval_events;
    bool finished = false;

    std::vector<Segment> segments() const;
};

enum class RetrievalDecision { Retrieve, NoRetrieve, ContinueEvidence };

// Per-step audit record: every candidate evaluated appears exactly once.
struct TraceCandidate {
    std::size_t beam = 0;
    std::optional<std::string> passage_id;
    std::string text;
    double lm_logprob_mean = 0.0;
    std::optional<double> s_isrel;
    std::optional<double> s_issup;
    double s_isuse = 0.0;
    double f_score = 0.0;
    bool filtered = false;
    bool selected = false;
};

struct TraceBeamDecision {
    std::size_t beam = 0;
    std::map<std::string, double> retrieve_probs;
    std::string decision;  // "retrieve" | "no_retrieve" | "continue_evidence"
    std::vector<std::string> retrieved_ids;
};

struct TraceStep {
    std::size_t step = 0;
    std::vector<TraceBeamDecision> decisions;
    std::vector<TraceCandidate> candidates;
    bool hard_filter_fallback = false;
};

struct DecodeTrace {
    std::vector<TraceStep> steps;
    bool max_segments_exceeded = false;

    std::size_t retrieval_decisions() const;
    nlohmann::json to_json() const;
};

struct InferenceResult {
    BeamHypothesis best;
    std::string output;  // rendered with reflection tokens and citations
    DecodeTrace trace;
};

// Retrieve-token decision for one hypothesis. Queries the backend for the
// Retrieve distribution over (instruction, preceding segments); argmax
// Continue with reusable prior evidence yields ContinueEvidence, otherwise
// the thresholded Yes/No ratio decides.
RetrievalDecision decide_retrieval(const GenerationContext& ctx, const DecodeConfig& cfg,
                                   LmBackend& backend, bool prior_evidence,
                                   GroupDistribution* out_dist = nullptr);

// Expands one hypothesis against a set of passages: one candidate per
// passage, each carrying the generated continuation, IsRel over (x, d),
// IsSup over (x, d, y_t), IsUse over (x, y_t), and the combined score.
// Passages yielding backend errors are skipped; AllCandidatesFailedError if
// every passage fails.
std::vector<SegmentCandidate> expand_step(const BeamHypothesis& hyp,
                                          const std::vector<Passage>& passages,
                                          const DecodeConfig& cfg, LmBackend& backend);

// Passage-free expansion: the continuation carries IsUse only and scores
// lm mean + w_isuse * s_isuse.
SegmentCandidate expand_no_retrieval(const BeamHypothesis& hyp, const DecodeConfig& cfg,
                                     LmBackend& backend);

// True when the candidate's argmax token for any of its critique groups is
// in `filters`.
bool hard_filtered(const SegmentCandidate& candidate, const std::set<ReflectionToken>& filters);

// Hard-constraint filter: drops candidates whose argmax token for any
// filtered group is in `filters`. When every candidate would be dropped the
// full list is returned and *fallback is set.
std::vector<SegmentCandidate> apply_hard_constraints(
    const std::vector<SegmentCandidate>& candidates, const std::set<ReflectionToken>& filters,
    bool* fallback = nullptr);

// Ranks all (beam x candidate) extensions by cumulative score (per the
// accumulate mode) and keeps the top B. Ties break by higher passage
// retrieval score, then passage id, then beam order. Finished hypotheses in
// `beams` compete unchanged. Throws NoCandidatesError when there is nothing
// to rank.
std::vector<BeamHypothesis> beam_step(
    const std::vector<BeamHypothesis>& beams,
    const std::vector<std::vector<SegmentCandidate>>& per_beam_candidates,
    const DecodeConfig& cfg);

// Renders a hypothesis as output text interleaved with reflection tokens,
// passage insertions, and [cite:<passage id>] markers; the utility token of
// the final segment closes the output.
std::string render_output(const BeamHypothesis& hyp);

// Full decoding loop: adaptive retrieval, parallel candidate expansion,
// critique scoring, and segment-level beam search.
InferenceResult run_inference(const std::string& instruction, const DecodeConfig& cfg,
                              LmBackend& backend, const Retriever& retriever);

}  // namespace reflectrag
