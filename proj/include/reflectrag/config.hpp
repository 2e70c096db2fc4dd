#pragma once

#include <memory>
#include <optional>
#include <string>

#include "reflectrag/curation.hpp"
#include "reflectrag/decoder.hpp"
#include "reflectrag/eval.hpp"
#include "reflectrag/remote_backend.hpp"
#include "reflectrag/scripted_backend.hpp"

namespace reflectrag {

struct BackendConfig {
    std::optional<std::string> scripted_path;
    std::optional<RemoteBackendConfig> remote;
};

struct RetrieverConfig {
    std::optional<std::string> store_path;          // passages JSON-lines
    std::optional<std::string> pre_retrieved_path;  // per-query passages
    IngestOptions ingest;
};

struct CurationConfig {
    std::uint64_t seed = 0;
    std::size_t top_k = 5;
    std::size_t workers = 1;
    std::map<ReflectionGroup, std::size_t> sample_counts;  // empty: defaults
    std::string prompts_dir = "data/prompts";
    BackendConfig judge;  // falls back to the main backend when unset
};

struct AppConfig {
    BackendConfig backend;
    RetrieverConfig retriever;
    DecodeConfig decode;
    CurationConfig curation;
    std::optional<std::string> task;  // key into the task instruction file
    std::string task_instructions_path = "data/task_instructions.json";
    std::size_t eval_workers = 1;
};

// Reads the JSON config file. Missing file or malformed keys raise
// ConfigError naming the offending key; unknown keys are rejected at the
// top level only.
AppConfig load_app_config(const std::string& path);

// Materialized runtime pieces built from a validated config.
std::unique_ptr<LmBackend> make_backend(const BackendConfig& config);
std::string task_instruction_for(const std::string& path, const std::string& task);

}  // namespace reflectrag
