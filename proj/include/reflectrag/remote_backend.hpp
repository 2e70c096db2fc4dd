#pragma once

#include <string>

#include "reflectrag/lm.hpp"

namespace reflectrag {

struct RemoteBackendConfig {
    std::string base_url;       // e.g. "http://127.0.0.1:8080"
    int timeout_ms = 30000;
    int retries = 2;            // additional attempts after the first
    int max_tokens = 200;
    std::string api_key;        // optional bearer token
};

// JSON-over-HTTP client for any logprob-serving model.
//
// POST /v1/reflection {"version": 1, "context": {...}, "group": "IsRel"}
//   -> {"probs": {"Relevant": 0.8, "Irrelevant": 0.2}}
// POST /v1/generate {"version": 1, "context": {...}, "max_tokens": N,
//                    "temperature": 0.0}
//   -> {"text": "...", "token_logprobs": [...], "finished": false}
//
// The context object is {"instruction": ..., "preceding_segments": [...],
// "passage": {"id","title","text"}?}. Unknown response fields are ignored;
// a response missing any group member is MalformedResponse, never an
// assumed zero. Connection failures exhaust `retries` before raising
// BackendUnavailable.
class RemoteBackend : public LmBackend {
public:
    explicit RemoteBackend(RemoteBackendConfig config);

    GroupDistribution predict_reflection(const GenerationContext& ctx,
                                         ReflectionGroup group) override;
    SegmentGeneration generate_segment(const GenerationContext& ctx) override;

private:
    std::string post_json(const std::string& path, const std::string& body);

    RemoteBackendConfig config_;
    std::string host_;
    int port_ = 80;
};

}  // namespace reflectrag
