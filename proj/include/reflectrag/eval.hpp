#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reflectrag/decoder.hpp"

namespace reflectrag {

enum class TaskKind { ShortForm, ClosedSet };

struct EvalItem {
    std::string query_id;
    std::string instruction;
    std::vector<std::string> gold_answers;  // short-form
    std::vector<std::string> options;       // closed-set
    std::string gold_option;                // closed-set
    TaskKind task_kind = TaskKind::ShortForm;
};

// Items JSON-lines: {"query_id", "instruction", "gold_answers": [...]} or
// {"query_id", "instruction", "options": [...], "gold": "..."}.
std::vector<EvalItem> load_eval_items(const std::string& path);

// Removes reflection tokens, <p>...</p> insertions, and [cite:...] markers,
// then normalizes whitespace. Retrieved passage text never earns match
// credit.
std::string strip_markup(const std::string& output);

// True iff any gold answer is a case-insensitive substring of the stripped
// output. Throws InvalidArgumentError when golds is empty.
bool match_accuracy(const std::string& output, const std::vector<std::string>& golds);

struct EvalConfig {
    DecodeConfig decode;
    // Optional task instruction prepended to each item's instruction.
    std::optional<std::string> task_instruction;
    std::size_t workers = 1;
};

struct EvalItemRecord {
    std::string query_id;
    bool correct = false;
    std::string predicted;
    std::size_t retrieval_decisions = 0;
    std::optional<std::string> error;
};

struct EvalReport {
    double accuracy = 0.0;
    double retrieval_frequency = 0.0;  // mean Retrieve decisions per item
    std::vector<EvalItemRecord> items;

    nlohmann::json to_json() const;
    std::string summary_text() const;
};

// Retriever per query id (constant for a shared store, per-item for
// pre-retrieved passages).
using RetrieverProvider = std::function<std::shared_ptr<const Retriever>(const std::string&)>;

// Runs the decoder per item. Closed-set items are decoded for a single
// segment; every unfiltered trace candidate whose text matches an option
// label (case-insensitive, whitespace-normalized) contributes its f score
// to that option, and the aggregated argmax is the prediction. Per-item
// failures are recorded as incorrect with an error note. Records are
// ordered by query_id.
EvalReport run_eval(const std::vector<EvalItem>& items, const EvalConfig& config,
                    LmBackend& backend, const RetrieverProvider& retriever_for);
EvalReport run_eval(const std::vector<EvalItem>& items, const EvalConfig& config,
                    LmBackend& backend, const Retriever& retriever);

struct SweepSpec {
    std::string axis;            // "delta", "w_isrel", "w_issup", "w_isuse"
    std::vector<double> values;
};

// "delta=0:1:0.2" (begin:end:step, endpoint included) or
// "delta=0,0.2,0.5". Throws ConfigError on malformed specs.
SweepSpec parse_sweep_spec(const std::string& spec);

struct SweepPoint {
    double value = 0.0;
    double accuracy = 0.0;
    double retrieval_frequency = 0.0;
};

std::vector<SweepPoint> run_sweep(const std::vector<EvalItem>& items, const EvalConfig& config,
                                  LmBackend& backend, const RetrieverProvider& retriever_for,
                                  const SweepSpec& spec);

// CSV rows "axis,accuracy,retrieval_frequency" with a header line.
std::string sweep_csv(const SweepSpec& spec, const std::vector<SweepPoint>& points);

}  // namespace reflectrag
