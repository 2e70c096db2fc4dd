#include "reflectrag/curation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "reflectrag/errors.hpp"
#include "reflectrag/jsonl.hpp"
#include "reflectrag/segment.hpp"

namespace reflectrag {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Judge prompts
// ---------------------------------------------------------------------------

std::string_view judge_template_filename(JudgeTemplateId id) {
    switch (id) {
        case JudgeTemplateId::RetrieveInput: return "retrieve_input.txt";
        case JudgeTemplateId::RetrieveContinuation: return "retrieve_continuation.txt";
        case JudgeTemplateId::IsRel: return "isrel.txt";
        case JudgeTemplateId::IsSup: return "issup.txt";
        case JudgeTemplateId::IsUse: return "isuse.txt";
    }
    throw InvalidArgumentError("invalid template id");
}

ReflectionGroup judge_template_aspect(JudgeTemplateId id) {
    switch (id) {
        case JudgeTemplateId::RetrieveInput:
        case JudgeTemplateId::RetrieveContinuation: return ReflectionGroup::Retrieve;
        case JudgeTemplateId::IsRel: return ReflectionGroup::IsRel;
        case JudgeTemplateId::IsSup: return ReflectionGroup::IsSup;
        case JudgeTemplateId::IsUse: return ReflectionGroup::IsUse;
    }
    throw InvalidArgumentError("invalid template id");
}

namespace {

constexpr std::array<JudgeTemplateId, 5> kAllTemplates = {
    JudgeTemplateId::RetrieveInput, JudgeTemplateId::RetrieveContinuation,
    JudgeTemplateId::IsRel, JudgeTemplateId::IsSup, JudgeTemplateId::IsUse};

}  // namespace

PromptLibrary PromptLibrary::load(const std::string& directory) {
    std::map<JudgeTemplateId, std::string> templates;
    for (JudgeTemplateId id : kAllTemplates) {
        std::string path = directory + "/" + std::string(judge_template_filename(id));
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open prompt template '" + path + "'");
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        templates[id] = buffer.str();
    }
    return from_strings(std::move(templates));
}

PromptLibrary PromptLibrary::from_strings(std::map<JudgeTemplateId, std::string> templates) {
    PromptLibrary library;
    library.templates_ = std::move(templates);
    return library;
}

const std::string& PromptLibrary::raw(JudgeTemplateId id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) {
        throw InvalidArgumentError("prompt template not loaded");
    }
    return it->second;
}

std::string PromptLibrary::render(const JudgeRequest& request) const {
    const std::string& raw_template = raw(request.template_id);
    std::string out;
    out.reserve(raw_template.size());
    std::size_t pos = 0;
    while (pos < raw_template.size()) {
        std::size_t open = raw_template.find('{', pos);
        if (open == std::string::npos) {
            out.append(raw_template, pos, std::string::npos);
            break;
        }
        std::size_t close = raw_template.find('}', open);
        if (close == std::string::npos) {
            out.append(raw_template, pos, std::string::npos);
            break;
        }
        out.append(raw_template, pos, open - pos);
        std::string name = raw_template.substr(open + 1, close - open - 1);
        auto it = request.slots.find(name);
        if (it == request.slots.end()) {
            throw InvalidArgumentError("missing slot '" + name + "' for template " +
                                       std::string(judge_template_filename(request.template_id)));
        }
        out += it->second;
        pos = close + 1;
    }
    return out;
}

namespace {

std::optional<std::size_t> earliest_match(const std::string& reply,
                                          const std::vector<std::string>& labels) {
    std::optional<std::size_t> best;
    std::size_t best_pos = std::string::npos;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t pos = reply.find(labels[i]);
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = i;
        }
    }
    return best;
}

std::string extract_explanation(const std::string& reply) {
    std::size_t pos = reply.find("Explanation");
    if (pos == std::string::npos) {
        return {};
    }
    pos += std::string("Explanation").size();
    while (pos < reply.size() && (reply[pos] == ':' || reply[pos] == ' ' || reply[pos] == '\n')) {
        ++pos;
    }
    std::string text = reply.substr(pos);
    while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) {
        text.pop_back();
    }
    return text;
}

}  // namespace

JudgeReply parse_judge_reply(JudgeTemplateId template_id, const std::string& reply) {
    JudgeReply parsed;
    parsed.explanation = extract_explanation(reply);
    switch (template_id) {
        case JudgeTemplateId::RetrieveInput: {
            auto hit = earliest_match(reply, {"[Yes]", "[No]"});
            if (hit) {
                parsed.label = ReflectionToken::retrieve(*hit == 0 ? RetrieveValue::Yes
                                                                   : RetrieveValue::No);
            }
            break;
        }
        case JudgeTemplateId::RetrieveContinuation: {
            auto hit = earliest_match(
                reply, {"[Retrieval]", "[No Retrieval]", "[Continue to Use Evidence]"});
            if (hit) {
                static constexpr std::array<RetrieveValue, 3> values = {
                    RetrieveValue::Yes, RetrieveValue::No, RetrieveValue::Continue};
                parsed.label = ReflectionToken::retrieve(values[*hit]);
            }
            break;
        }
        case JudgeTemplateId::IsRel: {
            auto hit = earliest_match(reply, {"[Relevant]", "[Irrelevant]"});
            if (hit) {
                parsed.label = ReflectionToken::is_rel(*hit == 0 ? IsRelValue::Relevant
                                                                 : IsRelValue::Irrelevant);
            }
            break;
        }
        case JudgeTemplateId::IsSup: {
            auto hit = earliest_match(reply, {"[Fully supported]", "[Partially supported]",
                                              "[No support / Contradictory]"});
            if (hit) {
                static constexpr std::array<IsSupValue, 3> values = {
                    IsSupValue::FullySupported, IsSupValue::PartiallySupported,
                    IsSupValue::NoSupport};
                parsed.label = ReflectionToken::is_sup(values[*hit]);
            }
            break;
        }
        case JudgeTemplateId::IsUse: {
            for (std::size_t i = 0; i < reply.size(); ++i) {
                char c = reply[i];
                if (c < '1' || c > '5') {
                    continue;
                }
                bool prev_digit = i > 0 && std::isdigit(static_cast<unsigned char>(reply[i - 1]));
                bool next_digit = i + 1 < reply.size() &&
                                  std::isdigit(static_cast<unsigned char>(reply[i + 1]));
                if (!prev_digit && !next_digit) {
                    parsed.label = ReflectionToken::utility(c - '0');
                    break;
                }
            }
            break;
        }
    }
    return parsed;
}

std::string ScriptedJudge::key(const JudgeRequest& request) {
    std::string out = std::string(judge_template_filename(request.template_id));
    for (const auto& [name, value] : request.slots) {
        out += "|" + name + "=" + value;
    }
    return out;
}

ScriptedJudge& ScriptedJudge::add(const JudgeRequest& request, std::string reply) {
    replies_[key(request)] = std::move(reply);
    return *this;
}

std::string ScriptedJudge::respond(const JudgeRequest& request, const std::string&) {
    auto it = replies_.find(key(request));
    if (it == replies_.end()) {
        throw ScriptMissError("no scripted judge reply for '" + key(request) + "'");
    }
    return it->second;
}

std::string BackendJudge::respond(const JudgeRequest&, const std::string& rendered_prompt) {
    try {
        GenerationContext ctx;
        ctx.instruction = rendered_prompt;
        return backend_.generate_segment(ctx).text;
    } catch (const Error& e) {
        throw JudgeUnavailableError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Critic-training data collection
// ---------------------------------------------------------------------------

namespace {

JudgeTemplateId aspect_template(ReflectionGroup aspect) {
    switch (aspect) {
        case ReflectionGroup::Retrieve: return JudgeTemplateId::RetrieveInput;
        case ReflectionGroup::IsRel: return JudgeTemplateId::IsRel;
        case ReflectionGroup::IsSup: return JudgeTemplateId::IsSup;
        case ReflectionGroup::IsUse: return JudgeTemplateId::IsUse;
    }
    throw InvalidArgumentError("invalid aspect");
}

bool aspect_needs_evidence(ReflectionGroup aspect) {
    return aspect == ReflectionGroup::IsRel || aspect == ReflectionGroup::IsSup;
}

JudgeRequest build_request(ReflectionGroup aspect, const CriticPair& pair) {
    JudgeRequest request;
    request.template_id = aspect_template(aspect);
    switch (aspect) {
        case ReflectionGroup::Retrieve:
            request.slots = {{"instruction", pair.x}};
            break;
        case ReflectionGroup::IsRel:
            request.slots = {{"instruction", pair.x}, {"evidence", pair.evidence.value_or("")}};
            break;
        case ReflectionGroup::IsSup:
            request.slots = {{"instruction", pair.x},
                             {"output", pair.y},
                             {"evidence", pair.evidence.value_or("")},
                             {"preceding_sentences", pair.preceding.value_or("")}};
            break;
        case ReflectionGroup::IsUse:
            request.slots = {{"instruction", pair.x}, {"output", pair.y}};
            break;
    }
    return request;
}

}  // namespace

CollectResult collect_critic_data(const std::vector<CriticPair>& pairs,
                                  const PromptLibrary& prompts, JudgeClient& judge,
                                  const CollectConfig& config) {
    CollectResult result;
    constexpr std::array<ReflectionGroup, 4> aspects = {
        ReflectionGroup::Retrieve, ReflectionGroup::IsRel, ReflectionGroup::IsSup,
        ReflectionGroup::IsUse};

    for (std::size_t a = 0; a < aspects.size(); ++a) {
        ReflectionGroup aspect = aspects[a];
        CollectStats stats;

        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (aspect_needs_evidence(aspect) && !pairs[i].evidence.has_value()) {
                continue;
            }
            eligible.push_back(i);
        }
        stats.skipped = pairs.size() - eligible.size();

        // Seeded Fisher-Yates, one stream per aspect.
        DeterministicRng rng(config.seed, a);
        for (std::size_t i = eligible.size(); i > 1; --i) {
            std::size_t j = rng.uniform_below(i);
            std::swap(eligible[i - 1], eligible[j]);
        }
        std::size_t requested = 0;
        auto it = config.sample_counts.find(aspect);
        if (it != config.sample_counts.end()) {
            requested = it->second;
        }
        if (eligible.size() > requested) {
            eligible.resize(requested);
        }
        stats.sampled = eligible.size();

        for (std::size_t index : eligible) {
            const CriticPair& pair = pairs[index];
            JudgeRequest request = build_request(aspect, pair);
            std::string prompt = prompts.render(request);
            std::string reply = judge.respond(request, prompt);
            JudgeReply parsed = parse_judge_reply(request.template_id, reply);
            if (!parsed.label.has_value()) {
                ++stats.discarded;
                continue;
            }
            ++stats.kept;
            result.records.push_back(
                {pair.x, pair.y, aspect, *parsed.label, parsed.explanation});
        }
        result.stats[aspect] = stats;
    }
    return result;
}

void write_critic_records(const std::vector<CriticRecord>& records, const std::string& path) {
    JsonlWriter writer(path);
    for (const auto& record : records) {
        writer.write({{"x", record.x},
                      {"y", record.y},
                      {"aspect", std::string(group_name(record.aspect))},
                      {"label", record.label.surface()},
                      {"explanation", record.explanation}});
    }
}

// ---------------------------------------------------------------------------
// Augmented-output serialization
// ---------------------------------------------------------------------------

std::string serialize_augmented_output(const std::vector<AugmentedItem>& items) {
    std::string out;
    bool previous_was_text = false;
    for (const auto& item : items) {
        if (previous_was_text) {
            out.push_back(' ');
        }
        if (const auto* token = std::get_if<ReflectionToken>(&item)) {
            out += token->surface();
            previous_was_text = false;
        } else if (const auto* insertion = std::get_if<PassageInsertion>(&item)) {
            out += "<p>" + insertion->content + "</p>";
            previous_was_text = false;
        } else {
            out += std::get<TextSpan>(item).text;
            previous_was_text = true;
        }
    }
    return out;
}

namespace {

std::string trim(const std::string& text) {
    std::size_t begin = text.find_first_not_of(" \t\n\r");
    if (begin == std::string::npos) {
        return {};
    }
    std::size_t end = text.find_last_not_of(" \t\n\r");
    return text.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<AugmentedItem> parse_augmented_output(const std::string& output) {
    std::vector<AugmentedItem> items;
    std::string pending_text;
    auto flush_text = [&] {
        std::string text = trim(pending_text);
        pending_text.clear();
        if (!text.empty()) {
            items.emplace_back(TextSpan{std::move(text)});
        }
    };

    std::size_t pos = 0;
    while (pos < output.size()) {
        if (output.compare(pos, 3, "<p>") == 0) {
            std::size_t close = output.find("</p>", pos + 3);
            if (close == std::string::npos) {
                throw SchemaViolationError("unterminated passage insertion in augmented output");
            }
            flush_text();
            items.emplace_back(PassageInsertion{output.substr(pos + 3, close - pos - 3)});
            pos = close + 4;
            continue;
        }
        if (output[pos] == '[') {
            bool matched = false;
            for (const auto& token : all_reflection_tokens()) {
                const std::string surface = token.surface();
                if (output.compare(pos, surface.size(), surface) == 0) {
                    flush_text();
                    items.emplace_back(token);
                    pos += surface.size();
                    matched = true;
                    break;
                }
            }
            if (matched) {
                continue;
            }
        }
        pending_text.push_back(output[pos]);
        ++pos;
    }
    flush_text();
    return items;
}

std::vector<MaskSpan> compute_mask_spans(const std::string& serialized_output) {
    std::vector<MaskSpan> spans;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = serialized_output.find("<p>", pos);
        if (open == std::string::npos) {
            break;
        }
        std::size_t close = serialized_output.find("</p>", open + 3);
        if (close == std::string::npos) {
            throw SchemaViolationError("unterminated passage insertion while computing masks");
        }
        spans.push_back({open, close + 4});
        pos = close + 4;
    }
    return spans;
}

AugmentedExample make_augmented_example(std::string input, std::vector<AugmentedItem> items) {
    AugmentedExample example;
    example.input = std::move(input);
    example.items = std::move(items);
    example.mask_spans = compute_mask_spans(serialize_augmented_output(example.items));
    return example;
}

std::vector<std::string> validate_augmented_example(const AugmentedExample& example) {
    std::vector<std::string> violations;
    const auto& items = example.items;

    auto is_token = [&](std::size_t i, ReflectionGroup group) {
        const auto* token = std::get_if<ReflectionToken>(&items[i]);
        return token != nullptr && token->group() == group;
    };

    for (std::size_t i = 0; i < items.size(); ++i) {
        if (std::holds_alternative<PassageInsertion>(items[i])) {
            bool ok = i > 0;
            if (ok) {
                const auto* token = std::get_if<ReflectionToken>(&items[i - 1]);
                ok = token != nullptr && *token == ReflectionToken::retrieve(RetrieveValue::Yes);
            }
            if (!ok) {
                violations.push_back("passage insertion at item " + std::to_string(i) +
                                     " does not immediately follow [Retrieve=Yes]");
            }
        }
        if (is_token(i, ReflectionGroup::IsRel)) {
            if (i == 0 || !std::holds_alternative<PassageInsertion>(items[i - 1])) {
                violations.push_back("IsRel token at item " + std::to_string(i) +
                                     " does not follow a passage insertion");
            }
        }
        if (is_token(i, ReflectionGroup::IsSup)) {
            bool ok = i >= 3 && std::holds_alternative<TextSpan>(items[i - 1]) &&
                      is_token(i - 2, ReflectionGroup::IsRel) &&
                      std::holds_alternative<PassageInsertion>(items[i - 3]);
            if (!ok) {
                violations.push_back("IsSup token at item " + std::to_string(i) +
                                     " does not follow passage-grounded text");
            }
        }
        if (const auto* span = std::get_if<TextSpan>(&items[i])) {
            if (span->text.empty() || span->text != trim(span->text)) {
                violations.push_back("text span at item " + std::to_string(i) +
                                     " is empty or untrimmed");
            }
        }
    }

    std::string serialized = serialize_augmented_output(items);
    try {
        if (compute_mask_spans(serialized) != example.mask_spans) {
            violations.push_back("stored mask spans do not match the recomputed spans");
        }
        if (parse_augmented_output(serialized) != items) {
            violations.push_back("items do not survive a serialize/parse round-trip");
        }
    } catch (const Error& e) {
        violations.push_back(e.what());
    }
    return violations;
}

std::string strip_augmentation(const AugmentedExample& example) {
    std::string out;
    for (const auto& item : example.items) {
        if (const auto* span = std::get_if<TextSpan>(&item)) {
            if (!out.empty()) {
                out.push_back(' ');
            }
            out += span->text;
        }
    }
    return out;
}

std::string passage_insertion_body(const Passage& passage) {
    if (passage.title.empty()) {
        return passage.text;
    }
    return passage.title + " -- " + passage.text;
}

// ---------------------------------------------------------------------------
// Generator-training data creation
// ---------------------------------------------------------------------------

Passage select_passage(const std::vector<AnnotatedPassage>& annotated, DeterministicRng& rng) {
    if (annotated.empty()) {
        throw EmptyCandidatesError("no annotated passages to select from");
    }
    const AnnotatedPassage* best = nullptr;
    for (const auto& entry : annotated) {
        if (entry.isrel != IsRelValue::Relevant || entry.issup == IsSupValue::NoSupport) {
            continue;
        }
        if (best == nullptr ||
            entry.passage.retrieval_score > best->passage.retrieval_score ||
            (entry.passage.retrieval_score == best->passage.retrieval_score &&
             entry.passage.id < best->passage.id)) {
            best = &entry;
        }
    }
    if (best != nullptr) {
        return best->passage;
    }
    return annotated[rng.uniform_below(annotated.size())].passage;
}

namespace {

struct PairResult {
    std::optional<AugmentedExample> example;
    std::optional<std::string> error;
};

bool wants_retrieval(const GroupDistribution& dist) {
    // Whole-output and per-segment curation decisions are a binary argmax
    // over Yes and No; ties go to Yes (canonical member order).
    double yes = dist.prob(static_cast<std::size_t>(RetrieveValue::Yes));
    double no = dist.prob(static_cast<std::size_t>(RetrieveValue::No));
    return yes >= no;
}

PairResult augment_pair(const std::string& x, const std::string& y, LmBackend& critic,
                        const Retriever& retriever, const GeneratorDataConfig& config,
                        std::uint64_t pair_index) {
    PairResult result;
    try {
        DeterministicRng rng(config.seed, pair_index);
        std::vector<AugmentedItem> items;

        Segment whole_output{y, 0};
        GenerationContext whole_ctx{x, {whole_output}, std::nullopt};
        bool wants = wants_retrieval(critic.predict_reflection(whole_ctx,
                                                               ReflectionGroup::Retrieve));
        std::vector<Segment> segments = split_segments(y, config.segmenter);

        std::optional<Passage> initial;
        if (wants) {
            auto top = retriever.retrieve(x + " " + y, config.top_k);
            if (top.empty()) {
                wants = false;  // nothing lexically related in the store
            } else {
                initial = top.front();
            }
        }

        if (!wants) {
            for (const auto& segment : segments) {
                items.emplace_back(ReflectionToken::retrieve(RetrieveValue::No));
                items.emplace_back(TextSpan{segment.text});
            }
        } else {
            for (std::size_t t = 0; t < segments.size(); ++t) {
                std::vector<Segment> preceding(segments.begin(), segments.begin() + t);
                GenerationContext segment_ctx{x, preceding, initial};
                bool segment_wants = wants_retrieval(
                    critic.predict_reflection(segment_ctx, ReflectionGroup::Retrieve));

                std::vector<AnnotatedPassage> annotated;
                if (segment_wants) {
                    auto passages = retriever.retrieve(x + " " + segments[t].text, config.top_k);
                    for (const auto& passage : passages) {
                        GenerationContext isrel_ctx{x, {}, passage};
                        GenerationContext issup_ctx{x, {Segment{segments[t].text, 0}}, passage};
                        AnnotatedPassage entry;
                        entry.passage = passage;
                        entry.isrel = critic.predict_reflection(isrel_ctx, ReflectionGroup::IsRel)
                                          .argmax()
                                          .is_rel_value();
                        entry.issup = critic.predict_reflection(issup_ctx, ReflectionGroup::IsSup)
                                          .argmax()
                                          .is_sup_value();
                        annotated.push_back(std::move(entry));
                    }
                }

                if (annotated.empty()) {
                    items.emplace_back(ReflectionToken::retrieve(RetrieveValue::No));
                    items.emplace_back(TextSpan{segments[t].text});
                    continue;
                }

                Passage selected = select_passage(annotated, rng);
                const AnnotatedPassage* labels = nullptr;
                for (const auto& entry : annotated) {
                    if (entry.passage.id == selected.id) {
                        labels = &entry;
                        break;
                    }
                }
                items.emplace_back(ReflectionToken::retrieve(RetrieveValue::Yes));
                items.emplace_back(PassageInsertion{passage_insertion_body(selected)});
                items.emplace_back(ReflectionToken::is_rel(labels->isrel));
                items.emplace_back(TextSpan{segments[t].text});
                items.emplace_back(ReflectionToken::is_sup(labels->issup));
            }
        }

        GenerationContext utility_ctx{x, {whole_output}, std::nullopt};
        ReflectionToken utility =
            critic.predict_reflection(utility_ctx, ReflectionGroup::IsUse).argmax();
        items.emplace_back(utility);

        result.example = make_augmented_example(x, std::move(items));
    } catch (const Error& e) {
        result.error = e.what();
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    return result;
}

}  // namespace

GeneratorDataResult create_generator_data(
    const std::vector<std::pair<std::string, std::string>>& pairs, LmBackend& critic,
    const Retriever& retriever, const GeneratorDataConfig& config) {
    std::vector<PairResult> results(pairs.size());

    auto process = [&](std::size_t i) {
        results[i] = augment_pair(pairs[i].first, pairs[i].second, critic, retriever, config, i);
    };

    std::size_t workers = std::max<std::size_t>(config.workers, 1);
    if (workers <= 1 || pairs.size() <= 1) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            process(i);
        }
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < std::min(workers, pairs.size()); ++w) {
            threads.emplace_back([&, w] {
                for (std::size_t i = w; i < pairs.size(); i += workers) {
                    process(i);
                }
            });
        }
        for (auto& thread : threads) {
            thread.join();
        }
    }

    GeneratorDataResult out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].example) {
            out.examples.push_back(std::move(*results[i].example));
        } else {
            out.skipped.push_back(std::to_string(i) + ": " +
                                  results[i].error.value_or("unknown error"));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corpus I/O
// ---------------------------------------------------------------------------

std::size_t write_corpus(const std::vector<AugmentedExample>& examples, const std::string& path) {
    JsonlWriter writer(path);
    for (const auto& example : examples) {
        json spans = json::array();
        for (const auto& span : example.mask_spans) {
            spans.push_back({span.begin, span.end});
        }
        writer.write({{"input", example.input},
                      {"output", serialize_augmented_output(example.items)},
                      {"mask_spans", std::move(spans)}});
    }
    return examples.size();
}

std::vector<AugmentedExample> read_corpus(const std::string& path) {
    std::vector<AugmentedExample> examples;
    for_each_jsonl(path, [&](std::size_t line, const json& value) {
        AugmentedExample example;
        std::string output;
        try {
            example.input = value.at("input").get<std::string>();
            output = value.at("output").get<std::string>();
            for (const auto& span : value.at("mask_spans")) {
                example.mask_spans.push_back(
                    {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()});
            }
        } catch (const json::exception& e) {
            throw SchemaViolationError(path + ":" + std::to_string(line) + ": " + e.what());
        }
        try {
            example.items = parse_augmented_output(output);
            if (compute_mask_spans(output) != example.mask_spans) {
                throw SchemaViolationError("stored mask spans do not match the output");
            }
        } catch (const Error& e) {
            throw SchemaViolationError(path + ":" + std::to_string(line) + ": " + e.what());
        }
        examples.push_back(std::move(example));
    });
    return examples;
}

}  // namespace reflectrag
