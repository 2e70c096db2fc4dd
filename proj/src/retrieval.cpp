#include "reflectrag/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "reflectrag/errors.hpp"
#include "reflectrag/jsonl.hpp"

namespace reflectrag {

using json = nlohmann::json;

namespace {

constexpr double kBm25K1 = 1.2;
constexpr double kBm25B = 0.75;

std::vector<std::string> whitespace_terms(const std::string& text) {
    std::vector<std::string> terms;
    std::istringstream stream(text);
    std::string term;
    while (stream >> term) {
        terms.push_back(term);
    }
    return terms;
}

std::string join_terms(const std::vector<std::string>& terms, std::size_t begin,
                       std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += terms[i];
    }
    return out;
}

}  // namespace

std::vector<std::string> tokenize_terms(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

void PassageStore::insert_passage(Passage passage) {
    passages_.push_back(std::move(passage));
}

void PassageStore::build_index() {
    index_.clear();
    lengths_.assign(passages_.size(), 0);
    std::size_t total_length = 0;
    for (std::size_t p = 0; p < passages_.size(); ++p) {
        auto tokens = tokenize_terms(passages_[p].title + " " + passages_[p].text);
        lengths_[p] = tokens.size();
        total_length += tokens.size();
        std::map<std::string, std::size_t> frequencies;
        for (auto& token : tokens) {
            ++frequencies[token];
        }
        for (auto& [term, tf] : frequencies) {
            index_[term].push_back({p, tf});
        }
    }
    avg_length_ = passages_.empty() ? 0.0
                                    : static_cast<double>(total_length) /
                                          static_cast<double>(passages_.size());
}

PassageStore PassageStore::ingest(const std::vector<DocumentInput>& documents,
                                  const IngestOptions& options) {
    if (documents.empty()) {
        throw EmptyCollectionError("no documents to ingest");
    }
    if (options.window_terms == 0 || options.window_overlap >= options.window_terms) {
        throw ConfigError("window_terms must be positive and exceed window_overlap");
    }

    PassageStore store;
    std::set<std::string> seen_ids;
    auto check_unique = [&](const std::string& id) {
        if (!seen_ids.insert(id).second) {
            throw DuplicateDocIdError("duplicate passage id '" + id + "'");
        }
    };

    for (const auto& doc : documents) {
        if (doc.id.empty()) {
            throw SchemaViolationError("document with empty id");
        }
        auto terms = whitespace_terms(doc.text);
        if (terms.empty()) {
            throw SchemaViolationError("document '" + doc.id + "' has empty text");
        }
        if (terms.size() <= options.window_terms) {
            check_unique(doc.id);
            store.insert_passage({doc.id, doc.title, join_terms(terms, 0, terms.size())});
            continue;
        }
        const std::size_t stride = options.window_terms - options.window_overlap;
        std::size_t window = 0;
        for (std::size_t start = 0; start < terms.size(); start += stride, ++window) {
            std::size_t end = std::min(start + options.window_terms, terms.size());
            std::string id = doc.id + "#" + std::to_string(window);
            check_unique(id);
            store.insert_passage({std::move(id), doc.title, join_terms(terms, start, end)});
        }
    }
    store.build_index();
    return store;
}

PassageStore PassageStore::ingest_file(const std::string& path, const IngestOptions& options) {
    std::vector<DocumentInput> documents;
    for_each_jsonl(path, [&](std::size_t line, const json& value) {
        try {
            documents.push_back({value.at("id").get<std::string>(),
                                 value.value("title", std::string{}),
                                 value.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw SchemaViolationError(path + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return ingest(documents, options);
}

std::vector<Passage> PassageStore::retrieve(const std::string& query, std::size_t k) const {
    if (passages_.empty()) {
        throw EmptyStoreError("passage store is empty");
    }
    if (k == 0) {
        throw InvalidArgumentError("k must be at least 1");
    }

    // Distinct query terms; repeated terms do not count twice.
    std::set<std::string> terms;
    for (auto& term : tokenize_terms(query)) {
        terms.insert(std::move(term));
    }

    std::unordered_map<std::size_t, double> scores;
    const double n_docs = static_cast<double>(passages_.size());
    for (const auto& term : terms) {
        auto it = index_.find(term);
        if (it == index_.end()) {
            continue;
        }
        const auto& postings = it->second;
        const double df = static_cast<double>(postings.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& posting : postings) {
            const double tf = static_cast<double>(posting.term_frequency);
            const double norm =
                1.0 - kBm25B + kBm25B * (static_cast<double>(lengths_[posting.passage]) /
                                         (avg_length_ > 0.0 ? avg_length_ : 1.0));
            scores[posting.passage] += idf * (tf * (kBm25K1 + 1.0)) / (tf + kBm25K1 * norm);
        }
    }

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(scores.size());
    for (const auto& [passage, score] : scores) {
        if (score > 0.0) {
            ranked.emplace_back(score, passage);
        }
    }
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return passages_[a.second].id < passages_[b.second].id;
    });
    if (ranked.size() > k) {
        ranked.resize(k);
    }

    std::vector<Passage> results;
    results.reserve(ranked.size());
    for (const auto& [score, passage] : ranked) {
        Passage out = passages_[passage];
        out.retrieval_score = score;
        results.push_back(std::move(out));
    }
    return results;
}

void PassageStore::save(const std::string& path) const {
    JsonlWriter writer(path);
    for (const auto& passage : passages_) {
        writer.write({{"id", passage.id}, {"title", passage.title}, {"text", passage.text}});
    }
}

PreRetrievedStore PreRetrievedStore::load(const std::string& path) {
    PreRetrievedStore store;
    for_each_jsonl(path, [&](std::size_t line, const json& value) {
        try {
            std::string query_id = value.at("query_id").get<std::string>();
            std::vector<Passage> passages;
            for (const auto& entry : value.at("passages")) {
                passages.push_back({entry.at("id").get<std::string>(),
                                    entry.value("title", std::string{}),
                                    entry.at("text").get<std::string>(),
                                    entry.value("score", 0.0)});
            }
            std::stable_sort(passages.begin(), passages.end(),
                             [](const Passage& a, const Passage& b) {
                                 if (a.retrieval_score != b.retrieval_score) {
                                     return a.retrieval_score > b.retrieval_score;
                                 }
                                 return a.id < b.id;
                             });
            store.by_query_[std::move(query_id)] = std::move(passages);
        } catch (const json::exception& e) {
            throw SchemaViolationError(path + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return store;
}

bool PreRetrievedStore::contains(const std::string& query_id) const {
    return by_query_.count(query_id) > 0;
}

std::shared_ptr<Retriever> PreRetrievedStore::retriever_for(const std::string& query_id) const {
    auto it = by_query_.find(query_id);
    if (it == by_query_.end()) {
        throw EmptyStoreError("no pre-retrieved passages for query id '" + query_id + "'");
    }
    return std::make_shared<FixedRetriever>(it->second);
}

std::vector<Passage> FixedRetriever::retrieve(const std::string& query, std::size_t k) const {
    (void)query;
    if (k == 0) {
        throw InvalidArgumentError("k must be at least 1");
    }
    std::vector<Passage> out = passages_;
    if (out.size() > k) {
        out.resize(k);
    }
    return out;
}

}  // namespace reflectrag
