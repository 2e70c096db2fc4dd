#include "reflectrag/jsonl.hpp"

#include <fstream>
#include <memory>

namespace reflectrag {

using json = nlohmann::json;

void for_each_jsonl(const std::string& path,
                    const std::function<void(std::size_t, const json&)>& fn) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json parsed;
        try {
            parsed = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaViolationError(path + ":" + std::to_string(line_number) + ": " +
                                       e.what());
        }
        fn(line_number, parsed);
    }
}

struct JsonlWriter::Impl {
    std::ofstream out;
    std::string path;
};

JsonlWriter::JsonlWriter(const std::string& path) : impl_(std::make_unique<Impl>()) {
    impl_->out.open(path, std::ios::trunc);
    impl_->path = path;
    if (!impl_->out) {
        throw IoError("cannot write '" + path + "'");
    }
}

JsonlWriter::~JsonlWriter() = default;

void JsonlWriter::write(const json& value) {
    impl_->out << value.dump() << "\n";
    if (!impl_->out) {
        throw IoError("write failed for '" + impl_->path + "'");
    }
    ++count_;
}

}  // namespace reflectrag
