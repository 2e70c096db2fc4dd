#include "reflectrag/remote_backend.hpp"

#include "httplib.h"
#include "json.hpp"
#include "reflectrag/errors.hpp"

namespace reflectrag {

using json = nlohmann::json;

namespace {

json context_to_json(const GenerationContext& ctx) {
    json segments = json::array();
    for (const auto& segment : ctx.preceding_segments) {
        segments.push_back(segment.text);
    }
    json out = {{"instruction", ctx.instruction}, {"preceding_segments", std::move(segments)}};
    if (ctx.passage) {
        out["passage"] = {{"id", ctx.passage->id},
                          {"title", ctx.passage->title},
                          {"text", ctx.passage->text}};
    }
    return out;
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
    std::string url = config_.base_url;
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw ConfigError("backend url must start with http:// (got '" + url + "')");
    }
    url = url.substr(scheme.size());
    while (!url.empty() && url.back() == '/') {
        url.pop_back();
    }
    auto colon = url.find(':');
    if (colon == std::string::npos) {
        host_ = url;
        port_ = 80;
    } else {
        host_ = url.substr(0, colon);
        try {
            port_ = std::stoi(url.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("invalid port in backend url '" + config_.base_url + "'");
        }
    }
    if (host_.empty()) {
        throw ConfigError("backend url has no host: '" + config_.base_url + "'");
    }
}

std::string RemoteBackend::post_json(const std::string& path, const std::string& body) {
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        httplib::Client client(host_, port_);
        client.set_connection_timeout(config_.timeout_ms / 1000,
                                      (config_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        if (!config_.api_key.empty()) {
            client.set_bearer_token_auth(config_.api_key);
        }
        auto result = client.Post(path, body, "application/json");
        if (!result) {
            last_error = httplib::to_string(result.error());
            continue;
        }
        if (result->status != 200) {
            throw MalformedResponseError("backend returned HTTP " +
                                         std::to_string(result->status) + " for " + path);
        }
        return result->body;
    }
    throw BackendUnavailableError("cannot reach " + config_.base_url + path + ": " + last_error);
}

GroupDistribution RemoteBackend::predict_reflection(const GenerationContext& ctx,
                                                    ReflectionGroup group) {
    json request = {{"version", 1},
                    {"context", context_to_json(ctx)},
                    {"group", std::string(group_name(group))}};
    std::string body = post_json("/v1/reflection", request.dump());

    json response;
    try {
        response = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponseError(std::string("reflection response is not JSON: ") + e.what());
    }
    if (!response.contains("probs") || !response["probs"].is_object()) {
        throw MalformedResponseError("reflection response missing 'probs' object");
    }
    std::map<std::string, double> probs;
    for (const auto& [key, value] : response["probs"].items()) {
        if (!value.is_number()) {
            throw MalformedResponseError("probability for '" + key + "' is not a number");
        }
        probs[key] = value.get<double>();
    }
    // Every member must be present explicitly; nothing is assumed zero.
    for (std::size_t i = 0; i < group_size(group); ++i) {
        if (probs.count(std::string(member_name(group, i))) == 0) {
            throw MalformedResponseError("reflection response missing member '" +
                                         std::string(member_name(group, i)) + "' of group " +
                                         std::string(group_name(group)));
        }
    }
    GroupDistribution dist = GroupDistribution::from_map(group, probs);
    if (dist.mass() <= 0.0) {
        throw MalformedResponseError("reflection response has zero total mass");
    }
    return dist;
}

SegmentGeneration RemoteBackend::generate_segment(const GenerationContext& ctx) {
    json request = {{"version", 1},
                    {"context", context_to_json(ctx)},
                    {"max_tokens", config_.max_tokens},
                    {"temperature", 0.0}};
    std::string body = post_json("/v1/generate", request.dump());

    json response;
    try {
        response = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponseError(std::string("generate response is not JSON: ") + e.what());
    }
    SegmentGeneration generation;
    try {
        generation.text = response.at("text").get<std::string>();
        generation.token_logprobs = response.at("token_logprobs").get<std::vector<double>>();
        generation.finished = response.at("finished").get<bool>();
    } catch (const json::exception& e) {
        throw MalformedResponseError(std::string("generate response malformed: ") + e.what());
    }
    for (double logprob : generation.token_logprobs) {
        if (!(logprob <= 0.0)) {
            throw MalformedResponseError("token_logprobs must be finite and <= 0");
        }
    }
    if (generation.text.empty() && !generation.finished) {
        throw MalformedResponseError("empty text without finished flag");
    }
    return generation;
}

}  // namespace reflectrag
