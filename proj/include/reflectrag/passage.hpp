#pragma once

#include <string>

namespace reflectrag {

// One retrievable evidence unit. `retrieval_score` is set per query by the
// retriever that produced the passage.
struct Passage {
    std::string id;
    std::string title;
    std::string text;
    double retrieval_score = 0.0;

    bool operator==(const Passage&) const = default;
};

}  // namespace reflectrag
