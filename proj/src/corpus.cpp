#include "facteval/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "facteval/errors.hpp"
#include "facteval/text.hpp"

namespace facteval {

namespace {

void append_passage(std::vector<Passage>& out, const std::string& title,
                    std::vector<std::string>&& tokens) {
    if (tokens.empty()) return;
    Passage p;
    p.doc_title = title;
    p.index = static_cast<int>(out.size());
    p.token_count = static_cast<int>(tokens.size());
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) joined.push_back(' ');
        joined += tokens[i];
    }
    p.text = std::move(joined);
    out.push_back(std::move(p));
}

}  // namespace

std::vector<Passage> chunk_document(const Document& doc, int max_tokens) {
    if (max_tokens < 1) throw DataError("chunk_document: max_tokens must be >= 1");
    std::vector<Passage> out;
    std::vector<std::string> current;
    for (const std::string& sentence : text::split_sentences(doc.text)) {
        std::vector<std::string> sent_tokens = text::whitespace_tokens(sentence);
        if (sent_tokens.empty()) continue;
        if (static_cast<int>(sent_tokens.size()) > max_tokens) {
            // Oversized sentence: flush, then split it at token boundaries.
            append_passage(out, doc.title, std::move(current));
            current.clear();
            std::size_t pos = 0;
            while (pos < sent_tokens.size()) {
                std::size_t take = std::min<std::size_t>(max_tokens, sent_tokens.size() - pos);
                std::vector<std::string> piece(sent_tokens.begin() + pos,
                                               sent_tokens.begin() + pos + take);
                append_passage(out, doc.title, std::move(piece));
                pos += take;
            }
            continue;
        }
        if (!current.empty() &&
            static_cast<int>(current.size() + sent_tokens.size()) > max_tokens) {
            append_passage(out, doc.title, std::move(current));
            current.clear();
        }
        for (auto& t : sent_tokens) current.push_back(std::move(t));
    }
    append_passage(out, doc.title, std::move(current));
    return out;
}

DocumentStore::DocumentStore(int max_tokens) : max_tokens_(max_tokens) {
    if (max_tokens < 1) throw DataError("DocumentStore: max_tokens must be >= 1");
}

void DocumentStore::add_document(Document doc) {
    if (doc.title.empty()) throw DataError("document title is empty");
    if (passages_by_title_.count(doc.title) > 0) {
        throw DataError("duplicate title: " + doc.title);
    }
    if (text::normalize_whitespace(doc.text).empty()) {
        throw DataError("document text is empty after whitespace normalization: " + doc.title);
    }
    auto passages = chunk_document(doc, max_tokens_);
    titles_.push_back(doc.title);
    passages_by_title_.emplace(std::move(doc.title), std::move(passages));
}

bool DocumentStore::has_title(const std::string& title) const {
    return passages_by_title_.count(title) > 0;
}

const std::vector<Passage>& DocumentStore::get_passages(const std::string& title) const {
    auto it = passages_by_title_.find(title);
    if (it == passages_by_title_.end()) throw TitleNotFound(title);
    return it->second;
}

DocumentStore load_corpus(const std::string& path, int max_tokens) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    DocumentStore store(max_tokens);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": malformed record: " + e.what());
        }
        if (!rec.is_object() || !rec.contains("title") || !rec.contains("text") ||
            !rec["title"].is_string() || !rec["text"].is_string()) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": record must have string fields 'title' and 'text'");
        }
        try {
            store.add_document({rec["title"].get<std::string>(),
                                rec["text"].get<std::string>()});
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (store.empty()) throw DataError("corpus file has no records: " + path);
    return store;
}

}  // namespace facteval
