#include "reflectrag/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reflectrag/errors.hpp"

namespace reflectrag {

using json = nlohmann::json;

void DecodeConfig::validate() const {
    if (beam_width < 1) {
        throw ConfigError("beam_width must be at least 1");
    }
    if (top_k < 1) {
        throw ConfigError("top_k must be at least 1");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ConfigError("threshold must be in [0, 1]");
    }
    if (max_segments < 1) {
        throw ConfigError("max_segments must be at least 1");
    }
    if (!std::isfinite(weights.is_rel) || !std::isfinite(weights.is_sup) ||
        !std::isfinite(weights.is_use)) {
        throw ConfigError("critique weights must be finite");
    }
}

std::vector<Segment> BeamHypothesis::segments() const {
    std::vector<Segment> out;
    out.reserve(chosen.size());
    for (const auto& cand : chosen) {
        out.push_back(cand.segment);
    }
    return out;
}

std::size_t DecodeTrace::retrieval_decisions() const {
    std::size_t count = 0;
    for (const auto& step : steps) {
        for (const auto& decision : step.decisions) {
            if (decision.decision == "retrieve") {
                ++count;
            }
        }
    }
    return count;
}

json DecodeTrace::to_json() const {
    json steps_json = json::array();
    for (const auto& step : steps) {
        json decisions = json::array();
        for (const auto& d : step.decisions) {
            decisions.push_back({{"beam", d.beam},
                                 {"retrieve_probs", d.retrieve_probs},
                                 {"decision", d.decision},
                                 {"retrieved_ids", d.retrieved_ids}});
        }
        json candidates = json::array();
        for (const auto& c : step.candidates) {
            json entry = {{"beam", c.beam},
                          {"text", c.text},
                          {"lm_logprob_mean", c.lm_logprob_mean},
                          {"s_isuse", c.s_isuse},
                          {"f_score", c.f_score},
                          {"filtered", c.filtered},
                          {"selected", c.selected}};
            if (c.passage_id) {
                entry["passage_id"] = *c.passage_id;
            }
            if (c.s_isrel) {
                entry["s_isrel"] = *c.s_isrel;
            }
            if (c.s_issup) {
                entry["s_issup"] = *c.s_issup;
            }
            candidates.push_back(std::move(entry));
        }
        steps_json.push_back({{"step", step.step},
                              {"decisions", std::move(decisions)},
                              {"candidates", std::move(candidates)},
                              {"hard_filter_fallback", step.hard_filter_fallback}});
    }
    return {{"steps", std::move(steps_json)}, {"max_segments_exceeded", max_segments_exceeded}};
}

RetrievalDecision decide_retrieval(const GenerationContext& ctx, const DecodeConfig& cfg,
                                   LmBackend& backend, bool prior_evidence,
                                   GroupDistribution* out_dist) {
    GroupDistribution dist = backend.predict_reflection(ctx, ReflectionGroup::Retrieve);
    if (out_dist != nullptr) {
        *out_dist = dist;
    }
    if (dist.argmax().retrieve_value() == RetrieveValue::Continue && prior_evidence) {
        return RetrievalDecision::ContinueEvidence;
    }
    return should_retrieve(dist, cfg.threshold) ? RetrievalDecision::Retrieve
                                                : RetrievalDecision::NoRetrieve;
}

namespace {

bool is_terminal_marker(const SegmentGeneration& generation) {
    return generation.finished && generation.text.empty();
}

// Critique contexts: IsRel conditions on (x, d), IsSup on (x, d, y_t), and
// IsUse on (x, y_t), with the candidate segment as the sole preceding
// element for the latter two.
SegmentCandidate make_passage_candidate(const BeamHypothesis& hyp, const Passage& passage,
                                        const SegmentGeneration& generation,
                                        const DecodeConfig& cfg, LmBackend& backend) {
    SegmentCandidate cand;
    cand.segment = {generation.text, hyp.chosen.size()};
    cand.passage = passage;
    cand.lm_logprob_mean = lm_logprob_mean(generation);
    cand.finished = generation.finished;

    Segment candidate_segment{generation.text, 0};
    GenerationContext isrel_ctx{hyp.instruction, {}, passage};
    GenerationContext issup_ctx{hyp.instruction, {candidate_segment}, passage};
    GenerationContext isuse_ctx{hyp.instruction, {candidate_segment}, std::nullopt};

    cand.isrel = backend.predict_reflection(isrel_ctx, ReflectionGroup::IsRel);
    cand.issup = backend.predict_reflection(issup_ctx, ReflectionGroup::IsSup);
    cand.isuse = backend.predict_reflection(isuse_ctx, ReflectionGroup::IsUse);
    cand.f_score = segment_score(
        cand.lm_logprob_mean, critique_score(*cand.isrel, *cand.issup, cand.isuse, cfg.weights));
    return cand;
}

}  // namespace

std::vector<SegmentCandidate> expand_step(const BeamHypothesis& hyp,
                                          const std::vector<Passage>& passages,
                                          const DecodeConfig& cfg, LmBackend& backend) {
    if (passages.empty() || passages.size() > cfg.top_k) {
        throw InvalidArgumentError("expand_step requires between 1 and top_k passages");
    }
    std::vector<SegmentCandidate> candidates;
    std::string first_error;
    std::size_t failures = 0;
    for (const auto& passage : passages) {
        try {
            GenerationContext gen_ctx{hyp.instruction, hyp.segments(), passage};
            SegmentGeneration generation = backend.generate_segment(gen_ctx);
            if (is_terminal_marker(generation)) {
                continue;
            }
            candidates.push_back(make_passage_candidate(hyp, passage, generation, cfg, backend));
        } catch (const Error& e) {
            ++failures;
            if (first_error.empty()) {
                first_error = e.what();
            }
        }
    }
    if (candidates.empty() && failures == passages.size() && failures > 0) {
        throw AllCandidatesFailedError("every passage expansion failed; first error: " +
                                       first_error);
    }
    return candidates;
}

SegmentCandidate expand_no_retrieval(const BeamHypothesis& hyp, const DecodeConfig& cfg,
                                     LmBackend& backend) {
    GenerationContext gen_ctx{hyp.instruction, hyp.segments(), std::nullopt};
    SegmentGeneration generation = backend.generate_segment(gen_ctx);

    SegmentCandidate cand;
    cand.segment = {generation.text, hyp.chosen.size()};
    cand.lm_logprob_mean = lm_logprob_mean(generation);
    cand.finished = generation.finished;
    if (is_terminal_marker(generation)) {
        return cand;
    }

    Segment candidate_segment{generation.text, 0};
    GenerationContext isuse_ctx{hyp.instruction, {candidate_segment}, std::nullopt};
    cand.isuse = backend.predict_reflection(isuse_ctx, ReflectionGroup::IsUse);
    cand.f_score = cand.lm_logprob_mean + cfg.weights.is_use * score_isuse(cand.isuse);
    return cand;
}

bool hard_filtered(const SegmentCandidate& candidate, const std::set<ReflectionToken>& filters) {
    if (candidate.isrel && filters.count(candidate.isrel->argmax()) > 0) {
        return true;
    }
    if (candidate.issup && filters.count(candidate.issup->argmax()) > 0) {
        return true;
    }
    return filters.count(candidate.isuse.argmax()) > 0;
}

std::vector<SegmentCandidate> apply_hard_constraints(
    const std::vector<SegmentCandidate>& candidates, const std::set<ReflectionToken>& filters,
    bool* fallback) {
    if (fallback != nullptr) {
        *fallback = false;
    }
    if (filters.empty()) {
        return candidates;
    }
    std::vector<SegmentCandidate> kept;
    for (const auto& cand : candidates) {
        if (!hard_filtered(cand, filters)) {
            kept.push_back(cand);
        }
    }
    if (kept.empty() && !candidates.empty()) {
        if (fallback != nullptr) {
            *fallback = true;
        }
        return candidates;
    }
    return kept;
}

namespace {

struct Extension {
    std::size_t beam = 0;
    const SegmentCandidate* candidate = nullptr;  // null: pass-through finished beam
    double cumulative = 0.0;
    std::size_t order = 0;
};

double tie_retrieval_score(const Extension& ext) {
    if (ext.candidate == nullptr || !ext.candidate->passage) {
        return -std::numeric_limits<double>::infinity();
    }
    return ext.candidate->passage->retrieval_score;
}

std::string tie_passage_id(const Extension& ext) {
    if (ext.candidate == nullptr || !ext.candidate->passage) {
        return {};
    }
    return ext.candidate->passage->id;
}

}  // namespace

std::vector<BeamHypothesis> beam_step(
    const std::vector<BeamHypothesis>& beams,
    const std::vector<std::vector<SegmentCandidate>>& per_beam_candidates,
    const DecodeConfig& cfg) {
    if (beams.size() > cfg.beam_width) {
        throw InvalidArgumentError("more beams than beam_width");
    }
    if (per_beam_candidates.size() != beams.size()) {
        throw InvalidArgumentError("per-beam candidate list count must match beam count");
    }

    std::vector<Extension> extensions;
    std::size_t order = 0;
    for (std::size_t b = 0; b < beams.size(); ++b) {
        if (beams[b].finished) {
            extensions.push_back({b, nullptr, beams[b].cumulative_score, order++});
            continue;
        }
        for (const auto& cand : per_beam_candidates[b]) {
            double cumulative = cfg.accumulate == Accumulate::SumPerStep
                                    ? beams[b].cumulative_score + cand.f_score
                                    : cand.f_score;
            extensions.push_back({b, &cand, cumulative, order++});
        }
    }
    if (extensions.empty()) {
        throw NoCandidatesError("no extensions to rank");
    }

    std::stable_sort(extensions.begin(), extensions.end(),
                     [](const Extension& a, const Extension& b) {
                         if (a.cumulative != b.cumulative) {
                             return a.cumulative > b.cumulative;
                         }
                         double rs_a = tie_retrieval_score(a);
                         double rs_b = tie_retrieval_score(b);
                         if (rs_a != rs_b) {
                             return rs_a > rs_b;
                         }
                         std::string id_a = tie_passage_id(a);
                         std::string id_b = tie_passage_id(b);
                         if (id_a != id_b) {
                             return id_a < id_b;
                         }
                         if (a.beam != b.beam) {
                             return a.beam < b.beam;
                         }
                         return a.order < b.order;
                     });
    if (extensions.size() > cfg.beam_width) {
        extensions.resize(cfg.beam_width);
    }

    std::vector<BeamHypothesis> next;
    next.reserve(extensions.size());
    for (const auto& ext : extensions) {
        const BeamHypothesis& parent = beams[ext.beam];
        if (ext.candidate == nullptr) {
            next.push_back(parent);
            continue;
        }
        BeamHypothesis hyp = parent;
        const SegmentCandidate& cand = *ext.candidate;
        if (cand.segment.text.empty() && cand.finished) {
            hyp.finished = true;  // terminal marker: no segment appended, score unchanged
            next.push_back(std::move(hyp));
            continue;
        }
        hyp.cumulative_score = ext.cumulative;
        if (!cand.step_retrieved_ids.empty()) {
            hyp.retrieval_events.push_back({parent.chosen.size(), cand.step_retrieved_ids});
        }
        hyp.chosen.push_back(cand);
        hyp.finished = cand.finished;
        next.push_back(std::move(hyp));
    }
    return next;
}

std::string render_output(const BeamHypothesis& hyp) {
    std::string out;
    auto emit_marker = [&out](const std::string& marker) {
        if (!out.empty() && out.back() != ']' && out.back() != '>') {
            out.push_back(' ');
        }
        out += marker;
    };

    for (const auto& cand : hyp.chosen) {
        if (cand.passage && !cand.continued_evidence) {
            emit_marker(ReflectionToken::retrieve(RetrieveValue::Yes).surface());
            std::string body = cand.passage->title.empty()
                                   ? cand.passage->text
                                   : cand.passage->title + " -- " + cand.passage->text;
            out += "<p>" + body + "</p>";
            emit_marker(cand.isrel->argmax().surface());
        } else if (cand.passage) {
            emit_marker(ReflectionToken::retrieve(RetrieveValue::Continue).surface());
        } else {
            emit_marker(ReflectionToken::retrieve(RetrieveValue::No).surface());
        }
        out += cand.segment.text;
        if (cand.passage) {
            emit_marker(cand.issup->argmax().surface());
            emit_marker("[cite:" + cand.passage->id + "]");
        }
    }
    if (!hyp.chosen.empty()) {
        emit_marker(hyp.chosen.back().isuse.argmax().surface());
    }
    return out;
}

InferenceResult run_inference(const std::string& instruction, const DecodeConfig& cfg,
                              LmBackend& backend, const Retriever& retriever) {
    cfg.validate();

    BeamHypothesis root;
    root.instruction = instruction;
    std::vector<BeamHypothesis> beams{root};
    DecodeTrace trace;

    // Most recent passage of the current best hypothesis, falling back to
    // the deciding hypothesis, for Retrieve=Continue reuse.
    auto reusable_passage = [&beams](const BeamHypothesis& hyp) -> std::optional<Passage> {
        const BeamHypothesis* best = &beams.front();
        for (const auto& beam : beams) {
            if (beam.cumulative_score > best->cumulative_score) {
                best = &beam;
            }
        }
        for (const BeamHypothesis* source : {best, &hyp}) {
            for (auto it = source->chosen.rbegin(); it != source->chosen.rend(); ++it) {
                if (it->passage) {
                    return it->passage;
                }
            }
        }
        return std::nullopt;
    };

    for (std::size_t step = 0; step < cfg.max_segments; ++step) {
        bool all_finished = true;
        for (const auto& beam : beams) {
            all_finished = all_finished && beam.finished;
        }
        if (all_finished) {
            break;
        }

        TraceStep step_trace;
        step_trace.step = step;
        std::vector<std::vector<SegmentCandidate>> per_beam(beams.size());

        for (std::size_t b = 0; b < beams.size(); ++b) {
            BeamHypothesis& hyp = beams[b];
            if (hyp.finished) {
                continue;
            }
            GenerationContext retrieve_ctx{instruction, hyp.segments(), std::nullopt};
            std::optional<Passage> reuse = reusable_passage(hyp);
            GroupDistribution retrieve_dist =
                GroupDistribution::uniform(ReflectionGroup::Retrieve);
            RetrievalDecision decision = decide_retrieval(retrieve_ctx, cfg, backend,
                                                          reuse.has_value(), &retrieve_dist);

            TraceBeamDecision decision_trace;
            decision_trace.beam = b;
            decision_trace.retrieve_probs = retrieve_dist.to_map();

            if (decision == RetrievalDecision::Retrieve) {
                decision_trace.decision = "retrieve";
                // Retrieval query: the instruction plus the latest segment.
                std::string query = instruction;
                if (!hyp.chosen.empty()) {
                    query += " " + hyp.chosen.back().segment.text;
                }
                std::vector<Passage> passages = retriever.retrieve(query, cfg.top_k);
                for (const auto& passage : passages) {
                    decision_trace.retrieved_ids.push_back(passage.id);
                }
                if (passages.empty()) {
                    // Nothing lexically related: degrade to a plain segment.
                    per_beam[b].push_back(expand_no_retrieval(hyp, cfg, backend));
                } else {
                    per_beam[b] = expand_step(hyp, passages, cfg, backend);
                    for (auto& cand : per_beam[b]) {
                        cand.step_retrieved_ids = decision_trace.retrieved_ids;
                    }
                }
            } else if (decision == RetrievalDecision::ContinueEvidence) {
                decision_trace.decision = "continue_evidence";
                per_beam[b] = expand_step(hyp, {*reuse}, cfg, backend);
                for (auto& cand : per_beam[b]) {
                    cand.continued_evidence = true;
                }
            } else {
                decision_trace.decision = "no_retrieve";
                per_beam[b].push_back(expand_no_retrieval(hyp, cfg, backend));
            }
            step_trace.decisions.push_back(std::move(decision_trace));

            // A beam whose every expansion came back as a terminal marker is
            // done; drop the markers so ranking only sees real candidates.
            bool any_real = false;
            for (const auto& cand : per_beam[b]) {
                any_real = any_real || !(cand.finished && cand.segment.text.empty());
            }
            if (!any_real) {
                hyp.finished = true;
                per_beam[b].clear();
            }
        }

        // Hard constraints act on the pooled step candidates so the filter
        // sees every alternative the ranking step sees.
        bool fallback = false;
        if (cfg.mode == ConstraintMode::Hard && !cfg.hard_filters.empty()) {
            std::size_t pooled = 0;
            std::size_t dropped = 0;
            for (const auto& list : per_beam) {
                for (const auto& cand : list) {
                    ++pooled;
                    if (hard_filtered(cand, cfg.hard_filters)) {
                        ++dropped;
                    }
                }
            }
            fallback = pooled > 0 && dropped == pooled;
            step_trace.hard_filter_fallback = fallback;
        }

        std::vector<std::vector<SegmentCandidate>> per_beam_kept(per_beam.size());
        for (std::size_t b = 0; b < per_beam.size(); ++b) {
            for (const auto& cand : per_beam[b]) {
                bool filtered = cfg.mode == ConstraintMode::Hard &&
                                hard_filtered(cand, cfg.hard_filters);
                TraceCandidate record;
                record.beam = b;
                if (cand.passage) {
                    record.passage_id = cand.passage->id;
                }
                record.text = cand.segment.text;
                record.lm_logprob_mean = cand.lm_logprob_mean;
                if (cand.isrel) {
                    record.s_isrel = score_isrel(*cand.isrel);
                }
                if (cand.issup) {
                    record.s_issup = score_issup(*cand.issup);
                }
                record.s_isuse = score_isuse(cand.isuse);
                record.f_score = cand.f_score;
                record.filtered = filtered;
                step_trace.candidates.push_back(std::move(record));
                if (!filtered || fallback) {
                    per_beam_kept[b].push_back(cand);
                }
            }
        }

        beams = beam_step(beams, per_beam_kept, cfg);

        // Mark the candidates that survived into the new beam set.
        for (const auto& beam : beams) {
            if (beam.chosen.empty()) {
                continue;
            }
            const SegmentCandidate& latest = beam.chosen.back();
            if (latest.segment.index != step) {
                continue;
            }
            std::optional<std::string> latest_pid =
                latest.passage ? std::optional<std::string>(latest.passage->id) : std::nullopt;
            for (auto& record : step_trace.candidates) {
                if (!record.selected && record.text == latest.segment.text &&
                    record.passage_id == latest_pid && record.f_score == latest.f_score) {
                    record.selected = true;
                    break;
                }
            }
        }
        trace.steps.push_back(std::move(step_trace));
    }

    for (const auto& beam : beams) {
        if (!beam.finished) {
            trace.max_segments_exceeded = true;
            break;
        }
    }

    const BeamHypothesis* best = &beams.front();
    for (const auto& beam : beams) {
        if (beam.cumulative_score > best->cumulative_score) {
            best = &beam;
        }
    }

    return {*best, render_output(*best), std::move(trace)};
}

}  // namespace reflectrag
