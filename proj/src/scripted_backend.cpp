#include "reflectrag/scripted_backend.hpp"

#include <fstream>

#include "json.hpp"
#include "reflectrag/errors.hpp"

namespace reflectrag {

using json = nlohmann::json;

BackendScript& BackendScript::add_reflection(std::string fingerprint, GroupDistribution dist) {
    entries_.insert_or_assign(std::move(fingerprint), Entry(std::move(dist)));
    return *this;
}

BackendScript& BackendScript::add_generation(std::string fingerprint,
                                             SegmentGeneration generation) {
    entries_.insert_or_assign(std::move(fingerprint), Entry(std::move(generation)));
    return *this;
}

const BackendScript::Entry& BackendScript::lookup(const std::string& fingerprint) const {
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) {
        throw ScriptMissError("no scripted entry for '" + fingerprint + "'");
    }
    return it->second;
}

bool BackendScript::contains(const std::string& fingerprint) const {
    return entries_.count(fingerprint) > 0;
}

BackendScript BackendScript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open script file '" + path + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaViolationError("script file '" + path + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw SchemaViolationError("script file '" + path + "' must contain an 'entries' array");
    }
    BackendScript script;
    for (const auto& entry : doc["entries"]) {
        if (!entry.contains("key") || !entry["key"].is_string()) {
            throw SchemaViolationError("script entry missing string 'key'");
        }
        std::string key = entry["key"].get<std::string>();
        try {
            if (entry.contains("probs")) {
                ReflectionGroup group = parse_group_name(entry.at("group").get<std::string>());
                auto probs = entry["probs"].get<std::map<std::string, double>>();
                script.add_reflection(std::move(key),
                                      GroupDistribution::from_map(group, probs));
            } else if (entry.contains("text")) {
                SegmentGeneration gen;
                gen.text = entry["text"].get<std::string>();
                if (entry.contains("token_logprobs")) {
                    gen.token_logprobs = entry["token_logprobs"].get<std::vector<double>>();
                }
                gen.finished = entry.value("finished", false);
                script.add_generation(std::move(key), std::move(gen));
            } else {
                throw SchemaViolationError("script entry '" + key +
                                           "' has neither 'probs' nor 'text'");
            }
        } catch (const json::exception& e) {
            throw SchemaViolationError("script entry '" + key + "': " + e.what());
        }
    }
    return script;
}

void BackendScript::save(const std::string& path) const {
    json entries = json::array();
    for (const auto& [key, entry] : entries_) {
        json item;
        item["key"] = key;
        if (const auto* dist = std::get_if<GroupDistribution>(&entry)) {
            item["group"] = std::string(group_name(dist->group()));
            item["probs"] = dist->to_map();
        } else {
            const auto& gen = std::get<SegmentGeneration>(entry);
            item["text"] = gen.text;
            item["token_logprobs"] = gen.token_logprobs;
            item["finished"] = gen.finished;
        }
        entries.push_back(std::move(item));
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write script file '" + path + "'");
    }
    out << json{{"entries", std::move(entries)}}.dump(2) << "\n";
}

GroupDistribution ScriptedBackend::predict_reflection(const GenerationContext& ctx,
                                                      ReflectionGroup group) {
    const auto& entry = script_.lookup(reflection_fingerprint(ctx, group));
    const auto* dist = std::get_if<GroupDistribution>(&entry);
    if (dist == nullptr) {
        throw ScriptMissError("scripted entry for '" + reflection_fingerprint(ctx, group) +
                              "' is not a distribution");
    }
    if (dist->group() != group) {
        throw ScriptMissError("scripted distribution group mismatch for '" +
                              reflection_fingerprint(ctx, group) + "'");
    }
    return *dist;
}

SegmentGeneration ScriptedBackend::generate_segment(const GenerationContext& ctx) {
    const auto& entry = script_.lookup(generation_fingerprint(ctx));
    const auto* gen = std::get_if<SegmentGeneration>(&entry);
    if (gen == nullptr) {
        throw ScriptMissError("scripted entry for '" + generation_fingerprint(ctx) +
                              "' is not a generation");
    }
    return *gen;
}

}  // namespace reflectrag
