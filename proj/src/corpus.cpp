#include "csr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "csr/error.hpp"

namespace csr {

const char* lang_name(Lang l) { return l == Lang::L1 ? "L1" : "L2"; }

Lang lang_from_name(const std::string& s) {
    if (s == "L1") return Lang::L1;
    if (s == "L2") return Lang::L2;
    throw DataError("unknown language tag: " + s);
}

std::vector<std::string> TaggedSentence::words() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.word);
    return out;
}

std::string TaggedSentence::text() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i].word;
    }
    return out;
}

std::string TaggedSentence::mono_text() const {
    std::string out;
    for (std::size_t i = 0; i < mono_ref.size(); ++i) {
        if (i) out += ' ';
        out += mono_ref[i];
    }
    return out;
}

std::string sentence_to_json(const TaggedSentence& s) {
    nlohmann::ordered_json j;
    j["tokens"] = nlohmann::ordered_json::array();
    j["langs"] = nlohmann::ordered_json::array();
    j["mono"] = nlohmann::ordered_json::array();
    for (const auto& t : s.tokens) {
        j["tokens"].push_back(t.word);
        j["langs"].push_back(lang_name(t.lang));
    }
    for (const auto& w : s.mono_ref) j["mono"].push_back(w);
    return j.dump();
}

TaggedSentence sentence_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad corpus line: ") + e.what());
    }
    TaggedSentence s;
    const auto& toks = j.at("tokens");
    const auto& langs = j.at("langs");
    if (toks.size() != langs.size()) throw DataError("tokens/langs length mismatch");
    for (std::size_t i = 0; i < toks.size(); ++i)
        s.tokens.push_back(
            {toks[i].get<std::string>(), lang_from_name(langs[i].get<std::string>())});
    if (j.contains("mono"))
        for (const auto& w : j["mono"]) s.mono_ref.push_back(w.get<std::string>());
    if (s.tokens.empty()) throw DataError("empty sentence in corpus");
    return s;
}

void write_corpus_jsonl(const std::string& path, const std::vector<TaggedSentence>& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& s : corpus) out << sentence_to_json(s) << "\n";
}

std::vector<TaggedSentence> read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::vector<TaggedSentence> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(sentence_from_json(line));
    }
    return out;
}

std::string casefold(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void WordVocab::push(const std::string& w) {
    to_id_[w] = static_cast<int>(words_.size());
    words_.push_back(w);
}

WordVocab WordVocab::build(const std::vector<std::vector<std::string>>& sentences,
                           std::size_t max_words) {
    std::map<std::string, std::size_t> freq;
    for (const auto& sent : sentences)
        for (const auto& w : sent) ++freq[casefold(w)];
    std::vector<std::pair<std::string, std::size_t>> order(freq.begin(), freq.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    WordVocab v;
    for (const char* r : {"<PAD>", "<BOS>", "<EOS>", "<UNK>"}) v.push(r);
    for (const auto& [w, f] : order) {
        if (max_words && v.size() >= max_words) break;
        v.push(w);
    }
    return v;
}

WordVocab WordVocab::from_words(const std::vector<std::string>& words) {
    WordVocab v;
    for (const char* r : {"<PAD>", "<BOS>", "<EOS>", "<UNK>"}) v.push(r);
    for (const auto& w : words)
        if (!v.to_id_.count(casefold(w))) v.push(casefold(w));
    return v;
}

int WordVocab::id(const std::string& word) const {
    auto it = to_id_.find(word);  // reserved tokens match verbatim
    if (it == to_id_.end()) it = to_id_.find(casefold(word));
    return it == to_id_.end() ? kUnk : it->second;
}

const std::string& WordVocab::word(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= words_.size())
        throw DataError("word id out of range: " + std::to_string(id));
    return words_[static_cast<std::size_t>(id)];
}

std::vector<int> WordVocab::encode(const std::vector<std::string>& words) const {
    std::vector<int> out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(id(w));
    return out;
}

std::vector<std::string> WordVocab::decode(const std::vector<int>& ids) const {
    std::vector<std::string> out;
    for (int i : ids)
        if (i > kUnk) out.push_back(word(i));
    return out;
}

}  // namespace csr
