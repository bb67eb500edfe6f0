#include "facteval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "facteval/errors.hpp"
#include "facteval/text.hpp"

namespace facteval {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'I', 'X'};
constexpr std::uint8_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

std::uint32_t read_u32(std::istream& in) {
    char b[4];
    in.read(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in) {
    std::uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

}  // namespace

Index Index::build(const DocumentStore& store, Bm25Params params) {
    if (store.empty()) throw DataError("cannot build index over an empty store");
    Index idx;
    idx.params_ = params;
    idx.max_tokens_ = store.max_tokens();
    for (const std::string& title : store.titles()) {
        idx.titles_.push_back(title);
        auto& ids = idx.page_ids_[title];
        for (const Passage& p : store.get_passages(title)) {
            ids.push_back(idx.passages_.size());
            idx.passages_.push_back(p);
        }
        idx.page_passages_[title] = store.get_passages(title);
    }
    idx.finalize_statistics();
    return idx;
}

void Index::finalize_statistics() {
    term_counts_.clear();
    lengths_.clear();
    doc_freq_.clear();
    corpus_term_counts_.clear();
    total_tokens_ = 0;
    term_counts_.reserve(passages_.size());
    lengths_.reserve(passages_.size());
    for (const Passage& p : passages_) {
        std::unordered_map<std::string, int> counts;
        int length = 0;
        for (const std::string& t : text::match_tokens(p.text)) {
            ++counts[t];
            ++length;
        }
        for (const auto& [term, n] : counts) {
            ++doc_freq_[term];
            corpus_term_counts_[term] += n;
        }
        total_tokens_ += length;
        lengths_.push_back(length);
        term_counts_.push_back(std::move(counts));
    }
    avg_length_ = static_cast<double>(total_tokens_) / static_cast<double>(passages_.size());
}

bool Index::has_title(const std::string& title) const {
    return page_ids_.count(title) > 0;
}

const std::vector<Passage>& Index::page_passages(const std::string& title) const {
    auto it = page_passages_.find(title);
    if (it == page_passages_.end()) throw TitleNotFound(title);
    return it->second;
}

int Index::document_frequency(const std::string& term) const {
    auto it = doc_freq_.find(term);
    return it == doc_freq_.end() ? 0 : it->second;
}

long long Index::corpus_term_count(const std::string& term) const {
    auto it = corpus_term_counts_.find(term);
    return it == corpus_term_counts_.end() ? 0 : it->second;
}

std::vector<ScoredPassage> Index::retrieve(const std::string& title,
                                           const std::string& query, int k) const {
    if (k < 1) throw DataError("retrieve: k must be >= 1");
    auto it = page_ids_.find(title);
    if (it == page_ids_.end()) throw TitleNotFound(title);
    const auto& ids = it->second;
    std::size_t take = std::min<std::size_t>(k, ids.size());

    std::vector<std::string> query_tokens = text::match_tokens(query);
    std::vector<ScoredPassage> scored;
    scored.reserve(ids.size());
    if (query_tokens.empty()) {
        // Documented fallback: first k passages of the page, score 0.
        for (std::size_t i = 0; i < take; ++i) {
            scored.push_back({passages_[ids[i]], 0.0});
        }
        return scored;
    }

    const double n_passages = static_cast<double>(passages_.size());
    for (std::size_t id : ids) {
        const auto& counts = term_counts_[id];
        const double dl = static_cast<double>(lengths_[id]);
        double score = 0.0;
        for (const std::string& q : query_tokens) {
            auto cit = counts.find(q);
            if (cit == counts.end()) continue;
            const double tf = static_cast<double>(cit->second);
            const double df = static_cast<double>(document_frequency(q));
            const double idf = std::log(1.0 + (n_passages - df + 0.5) / (df + 0.5));
            const double norm = tf + params_.k1 * (1.0 - params_.b + params_.b * (dl / avg_length_));
            score += idf * ((tf * (params_.k1 + 1.0)) / norm);
        }
        scored.push_back({passages_[id], score});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredPassage& a, const ScoredPassage& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.passage.index < b.passage.index;
    });
    scored.resize(take);
    return scored;
}

void Index::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open index file for writing: " + path);
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    write_u32(out, static_cast<std::uint32_t>(max_tokens_));
    write_u32(out, static_cast<std::uint32_t>(passages_.size()));
    for (const Passage& p : passages_) {
        write_str(out, p.doc_title);
        write_u32(out, static_cast<std::uint32_t>(p.index));
        write_str(out, p.text);
    }
    if (!out) throw DataError("failed writing index file: " + path);
}

Index Index::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open index file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("not an index file (bad magic): " + path);
    }
    int version = in.get();
    if (version != kVersion) {
        throw DataError("unsupported index version " + std::to_string(version) + ": " + path);
    }
    Index idx;
    idx.max_tokens_ = static_cast<int>(read_u32(in));
    std::uint32_t count = read_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        Passage p;
        p.doc_title = read_str(in);
        p.index = static_cast<int>(read_u32(in));
        p.text = read_str(in);
        p.token_count = static_cast<int>(text::count_whitespace_tokens(p.text));
        if (!in) throw DataError("truncated index file: " + path);
        if (idx.page_ids_.count(p.doc_title) == 0) idx.titles_.push_back(p.doc_title);
        idx.page_ids_[p.doc_title].push_back(idx.passages_.size());
        idx.page_passages_[p.doc_title].push_back(p);
        idx.passages_.push_back(std::move(p));
    }
    if (idx.passages_.empty()) throw DataError("index file has no passages: " + path);
    idx.finalize_statistics();
    return idx;
}

}  // namespace facteval
