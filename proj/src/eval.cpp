#include "reflectrag/eval.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <thread>

#include "reflectrag/errors.hpp"
#include "reflectrag/jsonl.hpp"

namespace reflectrag {

using json = nlohmann::json;

std::vector<EvalItem> load_eval_items(const std::string& path) {
    std::vector<EvalItem> items;
    for_each_jsonl(path, [&](std::size_t line, const json& value) {
        EvalItem item;
        try {
            item.query_id = value.at("query_id").get<std::string>();
            item.instruction = value.at("instruction").get<std::string>();
            if (value.contains("options")) {
                item.task_kind = TaskKind::ClosedSet;
                item.options = value.at("options").get<std::vector<std::string>>();
                item.gold_option = value.at("gold").get<std::string>();
                if (item.options.size() < 2) {
                    throw SchemaViolationError("closed-set item needs at least 2 options");
                }
            } else {
                item.task_kind = TaskKind::ShortForm;
                item.gold_answers = value.at("gold_answers").get<std::vector<std::string>>();
                if (item.gold_answers.empty()) {
                    throw SchemaViolationError("short-form item needs at least 1 gold answer");
                }
            }
        } catch (const json::exception& e) {
            throw SchemaViolationError(path + ":" + std::to_string(line) + ": " + e.what());
        }
        items.push_back(std::move(item));
    });
    return items;
}

namespace {

std::string lowercase(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

}  // namespace

std::string strip_markup(const std::string& output) {
    std::string out;
    out.reserve(output.size());
    std::size_t pos = 0;
    while (pos < output.size()) {
        if (output.compare(pos, 3, "<p>") == 0) {
            std::size_t close = output.find("</p>", pos + 3);
            if (close != std::string::npos) {
                pos = close + 4;
                continue;
            }
        }
        if (output[pos] == '[') {
            bool matched = false;
            for (const auto& token : all_reflection_tokens()) {
                const std::string surface = token.surface();
                if (output.compare(pos, surface.size(), surface) == 0) {
                    pos += surface.size();
                    matched = true;
                    break;
                }
            }
            if (matched) {
                continue;
            }
            if (output.compare(pos, 6, "[cite:") == 0) {
                std::size_t close = output.find(']', pos);
                if (close != std::string::npos) {
                    pos = close + 1;
                    continue;
                }
            }
        }
        out.push_back(output[pos]);
        ++pos;
    }
    return normalize_whitespace(out);
}

bool match_accuracy(const std::string& output, const std::vector<std::string>& golds) {
    if (golds.empty()) {
        throw InvalidArgumentError("gold answer list must not be empty");
    }
    std::string haystack = lowercase(strip_markup(output));
    for (const auto& gold : golds) {
        if (haystack.find(lowercase(gold)) != std::string::npos) {
            return true;
        }
    }
    return false;
}

json EvalReport::to_json() const {
    json records = json::array();
    for (const auto& item : items) {
        json entry = {{"query_id", item.query_id},
                      {"correct", item.correct},
                      {"predicted", item.predicted},
                      {"retrieval_decisions", item.retrieval_decisions}};
        if (item.error) {
            entry["error"] = *item.error;
        }
        records.push_back(std::move(entry));
    }
    return {{"accuracy", accuracy},
            {"retrieval_frequency", retrieval_frequency},
            {"items", std::move(records)}};
}

std::string EvalReport::summary_text() const {
    std::ostringstream out;
    std::size_t correct = 0;
    for (const auto& item : items) {
        correct += item.correct ? 1 : 0;
    }
    out << "items: " << items.size() << "\n";
    out << "correct: " << correct << "\n";
    out << "accuracy: " << accuracy << "\n";
    out << "retrieval_frequency: " << retrieval_frequency << "\n";
    return out.str();
}

namespace {

std::string full_instruction(const EvalConfig& config, const EvalItem& item) {
    if (config.task_instruction && !config.task_instruction->empty()) {
        return *config.task_instruction + "\n" + item.instruction;
    }
    return item.instruction;
}

EvalItemRecord eval_one(const EvalItem& item, const EvalConfig& config, LmBackend& backend,
                        const Retriever& retriever) {
    EvalItemRecord record;
    record.query_id = item.query_id;
    try {
        DecodeConfig decode = config.decode;
        if (item.task_kind == TaskKind::ClosedSet) {
            decode.max_segments = 1;  // options are single segments
        }
        InferenceResult result =
            run_inference(full_instruction(config, item), decode, backend, retriever);
        record.retrieval_decisions = result.trace.retrieval_decisions();

        if (item.task_kind == TaskKind::ShortForm) {
            record.predicted = result.output;
            record.correct = match_accuracy(result.output, item.gold_answers);
            return record;
        }

        // Closed set: aggregate candidate scores per option label.
        std::map<std::string, std::string> normalized_options;
        for (const auto& option : item.options) {
            normalized_options[lowercase(normalize_whitespace(option))] = option;
        }
        std::map<std::string, double> option_scores;
        for (const auto& step : result.trace.steps) {
            for (const auto& candidate : step.candidates) {
                if (candidate.filtered) {
                    continue;
                }
                auto it = normalized_options.find(lowercase(normalize_whitespace(candidate.text)));
                if (it == normalized_options.end()) {
                    continue;
                }
                option_scores[it->second] += candidate.f_score;
            }
        }
        if (option_scores.empty()) {
            record.correct = false;
            record.error = "no candidate matched an option label";
            return record;
        }
        record.predicted = aggregate_closed_set(option_scores);
        record.correct = record.predicted == item.gold_option;
    } catch (const std::exception& e) {
        record.correct = false;
        record.error = e.what();
    }
    return record;
}

}  // namespace

EvalReport run_eval(const std::vector<EvalItem>& items, const EvalConfig& config,
                    LmBackend& backend, const RetrieverProvider& retriever_for) {
    std::vector<EvalItemRecord> records(items.size());

    auto process = [&](std::size_t i) {
        try {
            std::shared_ptr<const Retriever> retriever = retriever_for(items[i].query_id);
            if (!retriever) {
                throw EmptyStoreError("no retriever for query id '" + items[i].query_id + "'");
            }
            records[i] = eval_one(items[i], config, backend, *retriever);
        } catch (const std::exception& e) {
            records[i].query_id = items[i].query_id;
            records[i].correct = false;
            records[i].error = e.what();
        }
    };

    std::size_t workers = std::max<std::size_t>(config.workers, 1);
    if (workers <= 1 || items.size() <= 1) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            process(i);
        }
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < std::min(workers, items.size()); ++w) {
            threads.emplace_back([&, w] {
                for (std::size_t i = w; i < items.size(); i += workers) {
                    process(i);
                }
            });
        }
        for (auto& thread : threads) {
            thread.join();
        }
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const EvalItemRecord& a, const EvalItemRecord& b) {
                         return a.query_id < b.query_id;
                     });

    EvalReport report;
    report.items = std::move(records);
    std::size_t correct = 0;
    std::size_t retrievals = 0;
    for (const auto& record : report.items) {
        correct += record.correct ? 1 : 0;
        retrievals += record.retrieval_decisions;
    }
    if (!report.items.empty()) {
        report.accuracy = static_cast<double>(correct) / static_cast<double>(report.items.size());
        report.retrieval_frequency =
            static_cast<double>(retrievals) / static_cast<double>(report.items.size());
    }
    return report;
}

EvalReport run_eval(const std::vector<EvalItem>& items, const EvalConfig& config,
                    LmBackend& backend, const Retriever& retriever) {
    return run_eval(items, config, backend,
                    [&retriever](const std::string&) {
                        return std::shared_ptr<const Retriever>(&retriever,
                                                                [](const Retriever*) {});
                    });
}

SweepSpec parse_sweep_spec(const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("sweep spec must be axis=values (got '" + spec + "')");
    }
    SweepSpec out;
    out.axis = spec.substr(0, eq);
    if (out.axis != "delta" && out.axis != "w_isrel" && out.axis != "w_issup" &&
        out.axis != "w_isuse") {
        throw ConfigError("unknown sweep axis '" + out.axis + "'");
    }
    std::string values = spec.substr(eq + 1);
    if (values.empty()) {
        throw ConfigError("sweep spec has no values: '" + spec + "'");
    }
    try {
        if (values.find(':') != std::string::npos) {
            std::istringstream stream(values);
            std::string part;
            std::vector<double> parts;
            while (std::getline(stream, part, ':')) {
                parts.push_back(std::stod(part));
            }
            if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0]) {
                throw ConfigError("range sweep must be begin:end:step with step > 0");
            }
            // Endpoint included up to a half-step tolerance.
            for (double v = parts[0]; v <= parts[1] + parts[2] * 0.5; v += parts[2]) {
                out.values.push_back(std::min(v, parts[1]));
            }
        } else {
            std::istringstream stream(values);
            std::string part;
            while (std::getline(stream, part, ',')) {
                out.values.push_back(std::stod(part));
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse sweep values from '" + spec + "'");
    }
    if (out.values.empty()) {
        throw ConfigError("sweep spec has no values: '" + spec + "'");
    }
    return out;
}

std::vector<SweepPoint> run_sweep(const std::vector<EvalItem>& items, const EvalConfig& config,
                                  LmBackend& backend, const RetrieverProvider& retriever_for,
                                  const SweepSpec& spec) {
    std::vector<SweepPoint> points;
    for (double value : spec.values) {
        EvalConfig point_config = config;
        if (spec.axis == "delta") {
            point_config.decode.threshold = value;
        } else if (spec.axis == "w_isrel") {
            point_config.decode.weights.is_rel = value;
        } else if (spec.axis == "w_issup") {
            point_config.decode.weights.is_sup = value;
        } else {
            point_config.decode.weights.is_use = value;
        }
        EvalReport report = run_eval(items, point_config, backend, retriever_for);
        points.push_back({value, report.accuracy, report.retrieval_frequency});
    }
    return points;
}

std::string sweep_csv(const SweepSpec& spec, const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << spec.axis << ",accuracy,retrieval_frequency\n";
    for (const auto& point : points) {
        out << point.value << "," << point.accuracy << "," << point.retrieval_frequency << "\n";
    }
    return out.str();
}

}  // namespace reflectrag
