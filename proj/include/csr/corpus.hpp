#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace csr {

enum class Lang { L1, L2 };

const char* lang_name(Lang l);
Lang lang_from_name(const std::string& s);

struct TaggedToken {
    std::string word;
    Lang lang = Lang::L1;
};

// The unit of every CS corpus: a tagged word sequence plus an optional
// monolingual reference translation.
struct TaggedSentence {
    std::vector<TaggedToken> tokens;
    std::vector<std::string> mono_ref;  // empty when absent

    bool has_mono() const { return !mono_ref.empty(); }
    std::vector<std::string> words() const;
    std::string text() const;       // words joined by single spaces
    std::string mono_text() const;  // mono_ref joined by single spaces
};

// JSON-lines: {"tokens": [...], "langs": [...], "mono": [...]} per sentence.
std::string sentence_to_json(const TaggedSentence& s);
TaggedSentence sentence_from_json(const std::string& line);
void write_corpus_jsonl(const std::string& path, const std::vector<TaggedSentence>& corpus);
std::vector<TaggedSentence> read_corpus_jsonl(const std::string& path);

// ASCII casefolding; corpora here are romanized.
std::string casefold(const std::string& s);

// Word-level vocabulary for the seq2seq models (NMT, VAE). Reserved ids:
// 0=PAD, 1=BOS, 2=EOS, 3=UNK; then words by (frequency desc, lex asc).
class WordVocab {
public:
    static constexpr int kPad = 0, kBos = 1, kEos = 2, kUnk = 3;

    static WordVocab build(const std::vector<std::vector<std::string>>& sentences,
                           std::size_t max_words = 0);
    static WordVocab from_words(const std::vector<std::string>& words);

    int id(const std::string& word) const;  // kUnk when absent
    const std::string& word(int id) const;
    std::size_t size() const { return words_.size(); }

    std::vector<int> encode(const std::vector<std::string>& words) const;
    std::vector<std::string> decode(const std::vector<int>& ids) const;  // skips reserved

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> to_id_;
    void push(const std::string& w);
};

}  // namespace csr
