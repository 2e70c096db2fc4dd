#include "reflectrag/segment.hpp"

#include <cctype>

#include "reflectrag/errors.hpp"

namespace reflectrag {

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool starts_sentence(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isupper(u) != 0 || std::isdigit(u) != 0 || c == '"' || c == '\'' || c == '(' ||
           c == '[';
}

// Word ending at position `end` (exclusive), including the terminal dot.
std::string trailing_word(const std::string& text, std::size_t end) {
    std::size_t begin = end;
    while (begin > 0 && !is_space(text[begin - 1])) {
        --begin;
    }
    return text.substr(begin, end - begin);
}

}  // namespace

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.push_back(c);
        }
    }
    return out;
}

std::string join_segments(const std::vector<Segment>& segments) {
    std::string out;
    for (const auto& segment : segments) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += segment.text;
    }
    return out;
}

std::vector<Segment> split_segments(const std::string& output, const SegmenterOptions& options) {
    const std::string text = normalize_whitespace(output);
    if (text.empty()) {
        throw EmptyInputError("cannot segment empty output");
    }

    std::vector<Segment> segments;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_terminal(text[i])) {
            continue;
        }
        // Consume a run of terminals ("?!", "...") as one boundary.
        std::size_t end = i + 1;
        while (end < text.size() && is_terminal(text[end])) {
            ++end;
        }
        bool at_text_end = end == text.size();
        bool boundary = at_text_end;
        if (!boundary && is_space(text[end])) {
            std::size_t next = end;
            while (next < text.size() && is_space(text[next])) {
                ++next;
            }
            boundary = next == text.size() || starts_sentence(text[next]);
        }
        if (boundary && text[i] == '.' && end == i + 1 &&
            options.abbreviations.count(trailing_word(text, end)) > 0) {
            boundary = false;
        }
        if (boundary) {
            std::string piece = text.substr(start, end - start);
            piece = normalize_whitespace(piece);
            if (!piece.empty()) {
                segments.push_back({std::move(piece), segments.size()});
            }
            start = end;
        }
        i = end - 1;
    }
    if (start < text.size()) {
        std::string piece = normalize_whitespace(text.substr(start));
        if (!piece.empty()) {
            segments.push_back({std::move(piece), segments.size()});
        }
    }
    return segments;
}

}  // namespace reflectrag
