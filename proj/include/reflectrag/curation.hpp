#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reflectrag/lm.hpp"
#include "reflectrag/retrieval.hpp"
#include "reflectrag/rng.hpp"
#include "reflectrag/tokens.hpp"

namespace reflectrag {

// ---------------------------------------------------------------------------
// Judge prompts
// ---------------------------------------------------------------------------

// The five judge prompt templates. Retrieve has two variants: the
// input-only judgment and the three-way continuation judgment over
// preceding sentences plus evidence.
enum class JudgeTemplateId { RetrieveInput, RetrieveContinuation, IsRel, IsSup, IsUse };

std::string_view judge_template_filename(JudgeTemplateId id);
ReflectionGroup judge_template_aspect(JudgeTemplateId id);

// One judge call: a template plus slot values ({instruction}, {output},
// {evidence}, {preceding_sentences} as the template requires).
struct JudgeRequest {
    JudgeTemplateId template_id = JudgeTemplateId::RetrieveInput;
    std::map<std::string, std::string> slots;
};

// Loads the prompt template files from a directory and renders requests.
// Rendering fails with InvalidArgumentError when a slot required by the
// template is missing.
class PromptLibrary {
public:
    static PromptLibrary load(const std::string& directory);
    static PromptLibrary from_strings(std::map<JudgeTemplateId, std::string> templates);

    const std::string& raw(JudgeTemplateId id) const;
    std::string render(const JudgeRequest& request) const;

private:
    std::map<JudgeTemplateId, std::string> templates_;
};

struct JudgeReply {
    std::optional<ReflectionToken> label;
    std::string explanation;
};

// Parses a free-text judge answer into a reflection label. Returns an empty
// label when the reply does not follow the designated output format (such
// replies are discarded by the pipeline, never defaulted).
JudgeReply parse_judge_reply(JudgeTemplateId template_id, const std::string& reply);

// Any endpoint that answers judge prompts. The scripted implementation keys
// on the request; the backend implementation sends the rendered prompt to
// an LmBackend as a generation instruction.
class JudgeClient {
public:
    virtual ~JudgeClient() = default;
    virtual std::string respond(const JudgeRequest& request,
                                const std::string& rendered_prompt) = 0;
};

class ScriptedJudge : public JudgeClient {
public:
    static std::string key(const JudgeRequest& request);

    ScriptedJudge& add(const JudgeRequest& request, std::string reply);
    std::string respond(const JudgeRequest& request, const std::string& rendered_prompt) override;

private:
    std::map<std::string, std::string> replies_;
};

class BackendJudge : public JudgeClient {
public:
    explicit BackendJudge(LmBackend& backend) : backend_(backend) {}
    std::string respond(const JudgeRequest& request, const std::string& rendered_prompt) override;

private:
    LmBackend& backend_;
};

// ---------------------------------------------------------------------------
// Critic-training data collection
// ---------------------------------------------------------------------------

// Input pair for the collection pipeline. Evidence and preceding sentences
// are optional; aspects whose template requires evidence skip pairs that
// lack it.
struct CriticPair {
    std::string x;
    std::string y;
    std::optional<std::string> evidence;
    std::optional<std::string> preceding;
};

struct CriticRecord {
    std::string x;
    std::string y;
    ReflectionGroup aspect = ReflectionGroup::Retrieve;
    ReflectionToken label = ReflectionToken::retrieve(RetrieveValue::No);
    std::string explanation;
};

struct CollectConfig {
    // Per-aspect sample counts. Defaults are the full-scale reference
    // magnitudes (12594 / 19317 / 11181 / 3831) scaled down by 100.
    std::map<ReflectionGroup, std::size_t> sample_counts = {
        {ReflectionGroup::Retrieve, 126},
        {ReflectionGroup::IsRel, 193},
        {ReflectionGroup::IsSup, 112},
        {ReflectionGroup::IsUse, 38},
    };
    std::uint64_t seed = 0;
};

struct CollectStats {
    std::size_t sampled = 0;
    std::size_t kept = 0;
    std::size_t discarded = 0;  // format violations
    std::size_t skipped = 0;    // pairs lacking a required slot
};

struct CollectResult {
    std::vector<CriticRecord> records;
    std::map<ReflectionGroup, CollectStats> stats;
};

// Samples pairs per aspect, renders the matching template, queries the
// judge, and keeps replies that parse into a valid label. Judge transport
// failures (JudgeUnavailable) abort; format violations only count.
CollectResult collect_critic_data(const std::vector<CriticPair>& pairs,
                                  const PromptLibrary& prompts, JudgeClient& judge,
                                  const CollectConfig& config);

void write_critic_records(const std::vector<CriticRecord>& records, const std::string& path);

// ---------------------------------------------------------------------------
// Generator-training data creation
// ---------------------------------------------------------------------------

struct PassageInsertion {
    std::string content;  // body between the <p> ... </p> markers
    bool operator==(const PassageInsertion&) const = default;
};

struct TextSpan {
    std::string text;  // trimmed, non-empty
    bool operator==(const TextSpan&) const = default;
};

using AugmentedItem = std::variant<ReflectionToken, PassageInsertion, TextSpan>;

// Byte range [begin, end) over the serialized output string.
struct MaskSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool operator==(const MaskSpan&) const = default;
};

// One generator-training example: the input, the augmented output as an
// item sequence, and the loss-mask byte spans covering every passage
// insertion (markers included) in the serialized output.
struct AugmentedExample {
    std::string input;
    std::vector<AugmentedItem> items;
    std::vector<MaskSpan> mask_spans;

    bool operator==(const AugmentedExample&) const = default;
};

// Serialization grammar: items are concatenated; a single space precedes an
// item only when the previous item was a text span. Text spans are stored
// trimmed, so parse(serialize(items)) == items.
std::string serialize_augmented_output(const std::vector<AugmentedItem>& items);
std::vector<AugmentedItem> parse_augmented_output(const std::string& output);

// Mask spans recomputed by scanning the serialized string for <p>...</p>.
std::vector<MaskSpan> compute_mask_spans(const std::string& serialized_output);

// Builds the example from items: serializes and computes mask spans.
AugmentedExample make_augmented_example(std::string input, std::vector<AugmentedItem> items);

// Structural invariants; returns human-readable violations (empty == valid):
//   - passage insertions only immediately after [Retrieve=Yes]
//   - every IsRel immediately after an insertion
//   - every IsSup after a text span that follows an IsRel-tagged insertion
//   - stored mask spans equal the recomputed ones
//   - items survive a serialize/parse round-trip
std::vector<std::string> validate_augmented_example(const AugmentedExample& example);

// Concatenation of the example's text spans (the original output with all
// augmentation stripped).
std::string strip_augmentation(const AugmentedExample& example);

// Rendered body of a passage insertion ("<title> -- <text>", or the text
// alone when there is no title).
std::string passage_insertion_body(const Passage& passage);

struct GeneratorDataConfig {
    std::size_t top_k = 5;       // K passages per retrieval
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    SegmenterOptions segmenter;
};

struct GeneratorDataResult {
    std::vector<AugmentedExample> examples;
    std::vector<std::string> skipped;  // "<index>: <reason>" per failed pair
};

// Augments each (x, y) pair with reflection tokens and passage insertions,
// mimicking the inference-time process: a whole-output Retrieve decision,
// then per-segment decisions against the initially retrieved passage,
// per-passage IsRel/IsSup annotation, passage selection, and a final
// utility token. Failed pairs are skipped with a log entry. Output order
// follows input order regardless of worker count.
GeneratorDataResult create_generator_data(
    const std::vector<std::pair<std::string, std::string>>& pairs, LmBackend& critic,
    const Retriever& retriever, const GeneratorDataConfig& config);

struct AnnotatedPassage {
    Passage passage;
    IsRelValue isrel = IsRelValue::Irrelevant;
    IsSupValue issup = IsSupValue::NoSupport;
};

// Selection rule for the continuation passage: among passages labeled
// Relevant with Fully/Partially supported output, the highest retrieval
// score wins (ties by id); if none qualify, a uniform seeded draw.
Passage select_passage(const std::vector<AnnotatedPassage>& annotated, DeterministicRng& rng);

// Corpus JSON-lines: {"input": ..., "output": <serialized>, "mask_spans":
// [[begin, end], ...]} per line. read_corpus revalidates each line (mask
// spans must match the recomputed ones) and raises SchemaViolation naming
// the line number otherwise.
std::size_t write_corpus(const std::vector<AugmentedExample>& examples, const std::string& path);
std::vector<AugmentedExample> read_corpus(const std::string& path);

}  // namespace reflectrag
