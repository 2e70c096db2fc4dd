#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace reflectrag {

// One unit of output between reflection decisions (a sentence).
struct Segment {
    std::string text;
    std::size_t index = 0;

    bool operator==(const Segment&) const = default;
};

struct SegmenterOptions {
    // Trailing words that end with '.' but do not terminate a sentence.
    // Compared case-sensitively against the word including its dot.
    std::set<std::string> abbreviations = {
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Jr.", "Sr.",
        "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "No.", "Fig.",
    };
};

// Deterministic rule-based sentence splitter.
//
// A '.', '!' or '?' terminates a segment when it is followed by whitespace
// and the next non-whitespace character starts a new sentence (uppercase
// letter, digit, or an opening quote/bracket), or when it ends the text.
// Abbreviations from the option list never terminate. Segments are trimmed
// and indexed 0..n-1; joining them with single spaces reproduces the input
// up to whitespace normalization.
//
// Throws EmptyInputError when the input is empty or whitespace-only.
std::vector<Segment> split_segments(const std::string& output,
                                    const SegmenterOptions& options = {});

// Collapses runs of whitespace to single spaces and trims the ends.
std::string normalize_whitespace(const std::string& text);

// Space-joins segment texts in index order.
std::string join_segments(const std::vector<Segment>& segments);

}  // namespace reflectrag
