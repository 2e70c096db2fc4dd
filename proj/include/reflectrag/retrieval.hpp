#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "reflectrag/passage.hpp"

namespace reflectrag {

// Retriever contract: top-k passages for a query, best first, with
// retrieval_score populated. Implementations may return fewer than k.
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual std::vector<Passage> retrieve(const std::string& query, std::size_t k) const = 0;
};

struct DocumentInput {
    std::string id;
    std::string title;
    std::string text;
};

struct IngestOptions {
    std::size_t window_terms = 100;   // W: max terms per passage window
    std::size_t window_overlap = 20;  // O: terms shared between adjacent windows
};

// Immutable passage store with an inverted term index and BM25 scoring
// (k1 = 1.2, b = 0.75, idf = ln(1 + (N - df + 0.5) / (df + 0.5))). Each
// distinct query term contributes idf * tf * (k1 + 1) / (tf + k1 * (1 - b +
// b * len / avg_len)); passages sharing no term with the query score zero
// and are never returned.
class PassageStore : public Retriever {
public:
    // Splits oversized documents into windows of `window_terms` terms with
    // `window_overlap` terms of overlap (stride W - O). Passage ids are the
    // document id for single-window documents and "<doc id>#<window index>"
    // otherwise. Throws EmptyCollectionError / DuplicateDocIdError.
    static PassageStore ingest(const std::vector<DocumentInput>& documents,
                               const IngestOptions& options = {});

    // Loads documents from a JSON-lines file ({"id","title","text"} per
    // line) and ingests them.
    static PassageStore ingest_file(const std::string& path, const IngestOptions& options = {});

    // Top-k by lexical score, descending; ties break by passage id. Throws
    // EmptyStoreError when the store holds no passages, InvalidArgumentError
    // when k == 0.
    std::vector<Passage> retrieve(const std::string& query, std::size_t k) const override;

    std::size_t size() const { return passages_.size(); }
    std::size_t term_count() const { return index_.size(); }
    const std::vector<Passage>& passages() const { return passages_; }

    // Writes the store back out as passages JSON-lines (the ingest output
    // format used by the CLI).
    void save(const std::string& path) const;

private:
    struct Posting {
        std::size_t passage = 0;
        std::size_t term_frequency = 0;
    };

    void insert_passage(Passage passage);
    void build_index();

    std::vector<Passage> passages_;
    std::vector<std::size_t> lengths_;
    std::unordered_map<std::string, std::vector<Posting>> index_;
    double avg_length_ = 0.0;
};

// Lowercased alphanumeric terms; everything else separates.
std::vector<std::string> tokenize_terms(const std::string& text);

// Passages supplied per query id by an external retriever, e.g. exported
// scores from a dense system. File format: one JSON object per line,
// {"query_id": ..., "passages": [{"id","title","text","score"}, ...]}.
class PreRetrievedStore {
public:
    static PreRetrievedStore load(const std::string& path);

    bool contains(const std::string& query_id) const;

    // Retriever view for one query id: returns the stored passages (top-k
    // prefix, already sorted by descending score) regardless of the query
    // string. Throws EmptyStoreError for unknown query ids.
    std::shared_ptr<Retriever> retriever_for(const std::string& query_id) const;

private:
    std::map<std::string, std::vector<Passage>> by_query_;
};

// Fixed passage list returned for every query; used by PreRetrievedStore
// and by scripted tests.
class FixedRetriever : public Retriever {
public:
    explicit FixedRetriever(std::vector<Passage> passages) : passages_(std::move(passages)) {}
    std::vector<Passage> retrieve(const std::string& query, std::size_t k) const override;

private:
    std::vector<Passage> passages_;
};

}  // namespace reflectrag
