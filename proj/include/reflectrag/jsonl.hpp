#pragma once

#include <functional>
#include <string>

#include "json.hpp"
#include "reflectrag/errors.hpp"

namespace reflectrag {

// Streams a JSON-lines file, invoking fn(line_number, parsed) per non-empty
// line. Line numbers are 1-based. Parse failures raise SchemaViolationError
// naming the line; a missing file raises IoError.
void for_each_jsonl(const std::string& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn);

// Line-buffered JSON-lines writer; one compact object per line.
class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path);
    ~JsonlWriter();

    JsonlWriter(const JsonlWriter&) = delete;
    JsonlWriter& operator=(const JsonlWriter&) = delete;

    void write(const nlohmann::json& value);
    std::size_t count() const { return count_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t count_ = 0;
};

}  // namespace reflectrag
