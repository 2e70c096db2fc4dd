#pragma once

#include <map>
#include <string>
#include <variant>

#include "reflectrag/lm.hpp"

namespace reflectrag {

// Canned responses keyed by context fingerprint. Every lookup during a
// scripted run must hit; a miss raises ScriptMissError, never a default.
class BackendScript {
public:
    using Entry = std::variant<GroupDistribution, SegmentGeneration>;

    BackendScript& add_reflection(std::string fingerprint, GroupDistribution dist);
    BackendScript& add_generation(std::string fingerprint, SegmentGeneration generation);

    const Entry& lookup(const std::string& fingerprint) const;
    bool contains(const std::string& fingerprint) const;
    std::size_t size() const { return entries_.size(); }

    // File format: {"entries": [{"key": ..., "group": ..., "probs": {...}} |
    //                           {"key": ..., "text": ..., "token_logprobs": [...],
    //                            "finished": bool}]}
    static BackendScript load(const std::string& path);
    void save(const std::string& path) const;

private:
    std::map<std::string, Entry> entries_;
};

// Deterministic test backend: immutable after construction, referentially
// transparent, safe to share across threads.
class ScriptedBackend : public LmBackend {
public:
    explicit ScriptedBackend(BackendScript script) : script_(std::move(script)) {}

    GroupDistribution predict_reflection(const GenerationContext& ctx,
                                         ReflectionGroup group) override;
    SegmentGeneration generate_segment(const GenerationContext& ctx) override;

    const BackendScript& script() const { return script_; }

private:
    BackendScript script_;
};

}  // namespace reflectrag
