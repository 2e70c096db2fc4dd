#include "reflectrag/config.hpp"

#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "reflectrag/errors.hpp"

namespace reflectrag {

using json = nlohmann::json;

namespace {

[[noreturn]] void missing_key(const std::string& key) {
    throw ConfigError("missing config key '" + key + "'");
}

ConstraintMode parse_mode(const std::string& mode) {
    if (mode == "soft") {
        return ConstraintMode::Soft;
    }
    if (mode == "hard") {
        return ConstraintMode::Hard;
    }
    throw ConfigError("decode.mode must be 'soft' or 'hard' (got '" + mode + "')");
}

Accumulate parse_accumulate(const std::string& accumulate) {
    if (accumulate == "sum") {
        return Accumulate::SumPerStep;
    }
    if (accumulate == "per_step") {
        return Accumulate::PerStepOnly;
    }
    throw ConfigError("decode.accumulate must be 'sum' or 'per_step' (got '" + accumulate +
                      "')");
}

BackendConfig parse_backend(const json& value, const std::string& prefix) {
    BackendConfig config;
    if (value.contains("scripted")) {
        config.scripted_path = value["scripted"].get<std::string>();
    }
    if (value.contains("remote")) {
        const json& remote = value["remote"];
        RemoteBackendConfig remote_config;
        if (!remote.contains("url")) {
            missing_key(prefix + ".remote.url");
        }
        remote_config.base_url = remote["url"].get<std::string>();
        remote_config.timeout_ms = remote.value("timeout_ms", remote_config.timeout_ms);
        remote_config.retries = remote.value("retries", remote_config.retries);
        remote_config.max_tokens = remote.value("max_tokens", remote_config.max_tokens);
        config.remote = std::move(remote_config);
    }
    if (config.scripted_path && config.remote) {
        throw ConfigError("'" + prefix + "' must name exactly one of scripted | remote");
    }
    return config;
}

DecodeConfig parse_decode(const json& value) {
    DecodeConfig decode;
    decode.beam_width = value.value("beam_width", decode.beam_width);
    decode.top_k = value.value("top_k", decode.top_k);
    decode.threshold = value.value("threshold", decode.threshold);
    decode.weights.is_rel = value.value("w_isrel", decode.weights.is_rel);
    decode.weights.is_sup = value.value("w_issup", decode.weights.is_sup);
    decode.weights.is_use = value.value("w_isuse", decode.weights.is_use);
    decode.max_segments = value.value("max_segments", decode.max_segments);
    if (value.contains("mode")) {
        decode.mode = parse_mode(value["mode"].get<std::string>());
    }
    if (value.contains("accumulate")) {
        decode.accumulate = parse_accumulate(value["accumulate"].get<std::string>());
    }
    if (value.contains("hard_filters")) {
        decode.hard_filters.clear();
        for (const auto& surface : value["hard_filters"]) {
            try {
                decode.hard_filters.insert(parse_reflection_token(surface.get<std::string>()));
            } catch (const UnknownTokenError& e) {
                throw ConfigError(std::string("decode.hard_filters: ") + e.what());
            }
        }
    }
    decode.validate();
    return decode;
}

}  // namespace

AppConfig load_app_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }

    AppConfig config;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "backend") {
                config.backend = parse_backend(value, "backend");
            } else if (key == "retriever") {
                if (value.contains("store")) {
                    config.retriever.store_path = value["store"].get<std::string>();
                }
                if (value.contains("pre_retrieved")) {
                    config.retriever.pre_retrieved_path =
                        value["pre_retrieved"].get<std::string>();
                }
                if (config.retriever.store_path && config.retriever.pre_retrieved_path) {
                    throw ConfigError(
                        "'retriever' must name exactly one of store | pre_retrieved");
                }
                config.retriever.ingest.window_terms =
                    value.value("window_terms", config.retriever.ingest.window_terms);
                config.retriever.ingest.window_overlap =
                    value.value("window_overlap", config.retriever.ingest.window_overlap);
            } else if (key == "decode") {
                config.decode = parse_decode(value);
            } else if (key == "curation") {
                config.curation.seed = value.value("seed", config.curation.seed);
                config.curation.top_k = value.value("k", config.curation.top_k);
                config.curation.workers = value.value("workers", config.curation.workers);
                config.curation.prompts_dir =
                    value.value("prompts_dir", config.curation.prompts_dir);
                if (value.contains("sample_counts")) {
                    for (const auto& [group, count] : value["sample_counts"].items()) {
                        config.curation.sample_counts[parse_group_name(group)] =
                            count.get<std::size_t>();
                    }
                }
                if (value.contains("judge")) {
                    config.curation.judge = parse_backend(value["judge"], "curation.judge");
                }
            } else if (key == "eval") {
                if (value.contains("task")) {
                    config.task = value["task"].get<std::string>();
                }
                config.eval_workers = value.value("workers", config.eval_workers);
                config.task_instructions_path =
                    value.value("task_instructions", config.task_instructions_path);
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return config;
}

std::unique_ptr<LmBackend> make_backend(const BackendConfig& config) {
    if (config.scripted_path) {
        return std::make_unique<ScriptedBackend>(BackendScript::load(*config.scripted_path));
    }
    if (config.remote) {
        RemoteBackendConfig remote = *config.remote;
        // Credentials come from the environment only.
        if (const char* key = std::getenv("REFLECTRAG_API_KEY")) {
            remote.api_key = key;
        }
        return std::make_unique<RemoteBackend>(std::move(remote));
    }
    missing_key("backend.scripted | backend.remote");
}

std::string task_instruction_for(const std::string& path, const std::string& task) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open task instruction file '" + path + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("task instruction file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.contains(task)) {
        throw ConfigError("task '" + task + "' not found in '" + path + "'");
    }
    return doc[task].get<std::string>();
}

}  // namespace reflectrag
