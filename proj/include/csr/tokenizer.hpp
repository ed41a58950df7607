#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "csr/corpus.hpp"

namespace csr {

// Word-piece vocabulary. Reserved ids never move: 0=PAD, 1=MASK, 2=BOS,
// 3=EOS, 4=UNK. Continuation pieces carry a "##" prefix.
class Vocab {
public:
    static constexpr int kPad = 0, kMask = 1, kBos = 2, kEos = 3, kUnk = 4;
    static constexpr int kReservedCount = 5;

    Vocab();

    static Vocab from_pieces(const std::vector<std::string>& pieces);

    bool contains(const std::string& piece) const;
    int id(const std::string& piece) const;  // kUnk when absent
    const std::string& piece(int id) const;
    std::size_t size() const { return pieces_.size(); }

    // "piece<TAB>id" lines, lexicographically sorted by piece, UTF-8.
    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

private:
    std::vector<std::string> pieces_;
    std::unordered_map<std::string, int> to_id_;
    void push(const std::string& p);
    friend Vocab build_vocab(const std::vector<TaggedSentence>&, std::size_t);
};

// Whole words by frequency first, then "##"-style sub-word pieces harvested
// greedily from the character spans of words that did not fit, until
// max_pieces entries (reserved ids included). Ties break lexicographically.
// Counts CS tokens and mono_ref words alike.
Vocab build_vocab(const std::vector<TaggedSentence>& corpus, std::size_t max_pieces);

// Greedy longest-match-first segmentation of one casefolded word. Characters
// with no matching piece map to UNK one at a time. Never empty for non-empty
// input.
std::vector<int> tokenize(const std::string& word, const Vocab& v);

// Joins pieces, stripping the "##" continuation marker; PAD is dropped.
// Inverse of tokenize whenever no UNK was emitted.
std::string detokenize(const std::vector<int>& ids, const Vocab& v);

}  // namespace csr
