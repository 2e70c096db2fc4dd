#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "json.hpp"
#include "reflectrag/config.hpp"
#include "reflectrag/curation.hpp"
#include "reflectrag/decoder.hpp"
#include "reflectrag/errors.hpp"
#include "reflectrag/eval.hpp"
#include "reflectrag/jsonl.hpp"
#include "reflectrag/retrieval.hpp"

namespace rr = reflectrag;
using json = nlohmann::json;

namespace {

struct CliOverrides {
    std::string config_path;
    std::string backend_url;
    std::string scripted_path;
    int beam = -1;
    int topk = -1;
    double threshold = -1.0;
    double w_isrel = std::numeric_limits<double>::quiet_NaN();
    double w_issup = std::numeric_limits<double>::quiet_NaN();
    double w_isuse = std::numeric_limits<double>::quiet_NaN();
    std::string mode;
    long long seed = -1;
    std::string sweep;
};

rr::AppConfig resolve_config(const CliOverrides& overrides) {
    rr::AppConfig config;
    if (!overrides.config_path.empty()) {
        config = rr::load_app_config(overrides.config_path);
    }
    if (!overrides.backend_url.empty()) {
        config.backend = {};
        rr::RemoteBackendConfig remote;
        remote.base_url = overrides.backend_url;
        config.backend.remote = std::move(remote);
    }
    if (!overrides.scripted_path.empty()) {
        config.backend = {};
        config.backend.scripted_path = overrides.scripted_path;
    }
    if (overrides.beam >= 0) {
        config.decode.beam_width = static_cast<std::size_t>(overrides.beam);
    }
    if (overrides.topk >= 0) {
        config.decode.top_k = static_cast<std::size_t>(overrides.topk);
    }
    if (overrides.threshold >= 0.0) {
        config.decode.threshold = overrides.threshold;
    }
    if (!std::isnan(overrides.w_isrel)) {
        config.decode.weights.is_rel = overrides.w_isrel;
    }
    if (!std::isnan(overrides.w_issup)) {
        config.decode.weights.is_sup = overrides.w_issup;
    }
    if (!std::isnan(overrides.w_isuse)) {
        config.decode.weights.is_use = overrides.w_isuse;
    }
    if (!overrides.mode.empty()) {
        if (overrides.mode == "soft") {
            config.decode.mode = rr::ConstraintMode::Soft;
        } else if (overrides.mode == "hard") {
            config.decode.mode = rr::ConstraintMode::Hard;
        } else {
            throw rr::ConfigError("--mode must be soft or hard");
        }
    }
    if (overrides.seed >= 0) {
        config.curation.seed = static_cast<std::uint64_t>(overrides.seed);
    }
    config.decode.validate();
    return config;
}

std::shared_ptr<const rr::Retriever> require_store_retriever(const rr::AppConfig& config) {
    if (!config.retriever.store_path) {
        throw rr::ConfigError("missing config key 'retriever.store'");
    }
    return std::make_shared<rr::PassageStore>(
        rr::PassageStore::ingest_file(*config.retriever.store_path, config.retriever.ingest));
}

rr::RetrieverProvider make_retriever_provider(const rr::AppConfig& config) {
    if (config.retriever.pre_retrieved_path) {
        auto store = std::make_shared<rr::PreRetrievedStore>(
            rr::PreRetrievedStore::load(*config.retriever.pre_retrieved_path));
        return [store](const std::string& query_id) {
            return std::shared_ptr<const rr::Retriever>(store->retriever_for(query_id));
        };
    }
    auto store = require_store_retriever(config);
    return [store](const std::string&) { return store; };
}

int cmd_ingest(const std::string& docs_path, const std::string& out_path,
               const CliOverrides& overrides) {
    rr::AppConfig config = resolve_config(overrides);
    rr::PassageStore store = rr::PassageStore::ingest_file(docs_path, config.retriever.ingest);
    store.save(out_path);
    json summary = {{"documents_file", docs_path},
                    {"passages", store.size()},
                    {"terms", store.term_count()},
                    {"store", out_path}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_infer(const std::string& prompts_path, const std::string& outputs_path,
              const std::string& traces_path, const CliOverrides& overrides) {
    rr::AppConfig config = resolve_config(overrides);
    std::unique_ptr<rr::LmBackend> backend = rr::make_backend(config.backend);
    rr::RetrieverProvider retriever_for = make_retriever_provider(config);

    struct Prompt {
        std::string query_id;
        std::string instruction;
    };
    std::vector<Prompt> prompts;
    rr::for_each_jsonl(prompts_path, [&](std::size_t line, const json& value) {
        try {
            prompts.push_back({value.at("query_id").get<std::string>(),
                               value.at("instruction").get<std::string>()});
        } catch (const json::exception& e) {
            throw rr::SchemaViolationError(prompts_path + ":" + std::to_string(line) + ": " +
                                           e.what());
        }
    });

    rr::JsonlWriter outputs(outputs_path);
    rr::JsonlWriter traces(traces_path);
    for (const auto& prompt : prompts) {
        auto retriever = retriever_for(prompt.query_id);
        rr::InferenceResult result =
            rr::run_inference(prompt.instruction, config.decode, *backend, *retriever);
        outputs.write({{"query_id", prompt.query_id},
                       {"output", result.output},
                       {"score", result.best.cumulative_score}});
        traces.write({{"query_id", prompt.query_id}, {"trace", result.trace.to_json()}});
    }
    std::cout << json{{"prompts", prompts.size()},
                      {"outputs", outputs_path},
                      {"traces", traces_path}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_curate_critic(const std::string& pairs_path, const std::string& out_path,
                      const CliOverrides& overrides) {
    rr::AppConfig config = resolve_config(overrides);

    std::vector<rr::CriticPair> pairs;
    rr::for_each_jsonl(pairs_path, [&](std::size_t line, const json& value) {
        try {
            rr::CriticPair pair;
            pair.x = value.at("x").get<std::string>();
            pair.y = value.at("y").get<std::string>();
            if (value.contains("evidence")) {
                pair.evidence = value["evidence"].get<std::string>();
            }
            if (value.contains("preceding")) {
                pair.preceding = value["preceding"].get<std::string>();
            }
            pairs.push_back(std::move(pair));
        } catch (const json::exception& e) {
            throw rr::SchemaViolationError(pairs_path + ":" + std::to_string(line) + ": " +
                                           e.what());
        }
    });

    rr::PromptLibrary prompts = rr::PromptLibrary::load(config.curation.prompts_dir);
    const rr::BackendConfig& judge_config =
        (config.curation.judge.scripted_path || config.curation.judge.remote)
            ? config.curation.judge
            : config.backend;
    std::unique_ptr<rr::LmBackend> judge_backend = rr::make_backend(judge_config);
    rr::BackendJudge judge(*judge_backend);

    rr::CollectConfig collect_config;
    collect_config.seed = config.curation.seed;
    if (!config.curation.sample_counts.empty()) {
        collect_config.sample_counts = config.curation.sample_counts;
    }

    rr::CollectResult result = rr::collect_critic_data(pairs, prompts, judge, collect_config);
    rr::write_critic_records(result.records, out_path);

    json stats = json::object();
    for (const auto& [aspect, aspect_stats] : result.stats) {
        stats[std::string(rr::group_name(aspect))] = {{"sampled", aspect_stats.sampled},
                                                      {"kept", aspect_stats.kept},
                                                      {"discarded", aspect_stats.discarded},
                                                      {"skipped", aspect_stats.skipped}};
    }
    std::cout << json{{"records", result.records.size()}, {"stats", stats}, {"out", out_path}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_curate_generator(const std::string& pairs_path, const std::string& out_path,
                         const CliOverrides& overrides) {
    rr::AppConfig config = resolve_config(overrides);
    std::unique_ptr<rr::LmBackend> critic = rr::make_backend(config.backend);
    auto store = require_store_retriever(config);

    std::vector<std::pair<std::string, std::string>> pairs;
    rr::for_each_jsonl(pairs_path, [&](std::size_t line, const json& value) {
        try {
            pairs.emplace_back(value.at("x").get<std::string>(),
                               value.at("y").get<std::string>());
        } catch (const json::exception& e) {
            throw rr::SchemaViolationError(pairs_path + ":" + std::to_string(line) + ": " +
                                           e.what());
        }
    });

    rr::GeneratorDataConfig data_config;
    data_config.seed = config.curation.seed;
    data_config.top_k = config.curation.top_k;
    data_config.workers = config.curation.workers;

    rr::GeneratorDataResult result =
        rr::create_generator_data(pairs, *critic, *store, data_config);
    rr::write_corpus(result.examples, out_path);

    std::size_t valid = 0;
    for (const auto& example : result.examples) {
        if (rr::validate_augmented_example(example).empty()) {
            ++valid;
        }
    }
    std::cout << json{{"pairs", pairs.size()},
                      {"examples", result.examples.size()},
                      {"structurally_valid", valid},
                      {"skipped", result.skipped},
                      {"out", out_path}}
                     .dump()
              << "\n";
    return result.examples.size() == valid ? 0 : 5;
}

int cmd_eval(const std::string& items_path, const std::string& report_path,
             const CliOverrides& overrides) {
    rr::AppConfig config = resolve_config(overrides);
    std::unique_ptr<rr::LmBackend> backend = rr::make_backend(config.backend);
    rr::RetrieverProvider retriever_for = make_retriever_provider(config);
    std::vector<rr::EvalItem> items = rr::load_eval_items(items_path);

    rr::EvalConfig eval_config;
    eval_config.decode = config.decode;
    eval_config.workers = config.eval_workers;
    if (config.task) {
        eval_config.task_instruction =
            rr::task_instruction_for(config.task_instructions_path, *config.task);
    }

    if (!overrides.sweep.empty()) {
        rr::SweepSpec spec = rr::parse_sweep_spec(overrides.sweep);
        std::vector<rr::SweepPoint> points =
            rr::run_sweep(items, eval_config, *backend, retriever_for, spec);
        std::string csv_path = report_path + ".csv";
        std::ofstream csv(csv_path);
        if (!csv) {
            throw rr::IoError("cannot write '" + csv_path + "'");
        }
        csv << rr::sweep_csv(spec, points);
        std::cout << json{{"sweep", spec.axis},
                          {"points", points.size()},
                          {"csv", csv_path}}
                         .dump()
                  << "\n";
        return 0;
    }

    rr::EvalReport report = rr::run_eval(items, eval_config, *backend, retriever_for);
    std::ofstream report_json(report_path + ".json");
    if (!report_json) {
        throw rr::IoError("cannot write '" + report_path + ".json'");
    }
    report_json << report.to_json().dump(2) << "\n";
    std::ofstream report_txt(report_path + ".txt");
    if (!report_txt) {
        throw rr::IoError("cannot write '" + report_path + ".txt'");
    }
    report_txt << report.summary_text();
    std::cout << json{{"items", items.size()},
                      {"accuracy", report.accuracy},
                      {"retrieval_frequency", report.retrieval_frequency},
                      {"report", report_path + ".json"}}
                     .dump()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflection-token guided retrieval-augmented generation"};
    app.require_subcommand(1);

    CliOverrides overrides;
    app.add_option("--config", overrides.config_path, "JSON config file");
    app.add_option("--backend-url", overrides.backend_url, "remote backend base url");
    app.add_option("--scripted", overrides.scripted_path, "scripted backend file");
    app.add_option("--beam", overrides.beam, "beam width");
    app.add_option("--topk", overrides.topk, "passages per retrieval");
    app.add_option("--threshold", overrides.threshold, "adaptive retrieval threshold");
    app.add_option("--w-isrel", overrides.w_isrel, "relevance weight");
    app.add_option("--w-issup", overrides.w_issup, "support weight");
    app.add_option("--w-isuse", overrides.w_isuse, "utility weight");
    app.add_option("--mode", overrides.mode, "constraint mode: soft | hard");
    app.add_option("--seed", overrides.seed, "curation seed");
    app.add_option("--sweep", overrides.sweep, "sweep spec, e.g. delta=0:1:0.2");

    std::string docs_path, out_path, prompts_path, outputs_path, traces_path, pairs_path,
        items_path, report_path;

    CLI::App* ingest = app.add_subcommand("ingest", "build a passage store from documents");
    ingest->add_option("--docs", docs_path, "documents JSON-lines file")->required();
    ingest->add_option("--out", out_path, "output passage store")->required();

    CLI::App* infer = app.add_subcommand("infer", "decode prompts");
    infer->add_option("--prompts", prompts_path, "prompts JSON-lines file")->required();
    infer->add_option("--outputs", outputs_path, "outputs JSON-lines file")->required();
    infer->add_option("--traces", traces_path, "traces JSON-lines file")->required();

    CLI::App* curate_critic = app.add_subcommand("curate-critic", "collect critic records");
    curate_critic->add_option("--pairs", pairs_path, "pairs JSON-lines file")->required();
    curate_critic->add_option("--out", out_path, "records JSON-lines file")->required();

    CLI::App* curate_generator =
        app.add_subcommand("curate-generator", "build the generator corpus");
    curate_generator->add_option("--pairs", pairs_path, "pairs JSON-lines file")->required();
    curate_generator->add_option("--out", out_path, "corpus JSON-lines file")->required();

    CLI::App* eval = app.add_subcommand("eval", "run the evaluation harness");
    eval->add_option("--items", items_path, "items JSON-lines file")->required();
    eval->add_option("--report", report_path, "report path prefix")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            return cmd_ingest(docs_path, out_path, overrides);
        }
        if (infer->parsed()) {
            return cmd_infer(prompts_path, outputs_path, traces_path, overrides);
        }
        if (curate_critic->parsed()) {
            return cmd_curate_critic(pairs_path, out_path, overrides);
        }
        if (curate_generator->parsed()) {
            return cmd_curate_generator(pairs_path, out_path, overrides);
        }
        if (eval->parsed()) {
            return cmd_eval(items_path, report_path, overrides);
        }
    } catch (const rr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
