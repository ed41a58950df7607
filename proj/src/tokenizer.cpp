#include "csr/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "csr/error.hpp"

namespace csr {

namespace {

const char* kReserved[Vocab::kReservedCount] = {"<PAD>", "<MASK>", "<BOS>", "<EOS>", "<UNK>"};

}  // namespace

Vocab::Vocab() {
    for (const char* r : kReserved) push(r);
}

void Vocab::push(const std::string& p) {
    to_id_[p] = static_cast<int>(pieces_.size());
    pieces_.push_back(p);
}

Vocab Vocab::from_pieces(const std::vector<std::string>& pieces) {
    Vocab v;
    for (const auto& p : pieces) {
        if (p.empty()) throw DataError("vocab: empty piece");
        if (!v.to_id_.count(p)) v.push(p);
    }
    return v;
}

bool Vocab::contains(const std::string& piece) const { return to_id_.count(piece) > 0; }

int Vocab::id(const std::string& piece) const {
    auto it = to_id_.find(piece);
    return it == to_id_.end() ? kUnk : it->second;
}

const std::string& Vocab::piece(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= pieces_.size())
        throw DataError("piece id out of range: " + std::to_string(id));
    return pieces_[static_cast<std::size_t>(id)];
}

void Vocab::save(const std::string& path) const {
    std::vector<std::pair<std::string, int>> rows;
    rows.reserve(pieces_.size());
    for (std::size_t i = 0; i < pieces_.size(); ++i) rows.emplace_back(pieces_[i], int(i));
    std::sort(rows.begin(), rows.end());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocab to " + path);
    for (const auto& [p, id] : rows) out << p << "\t" << id << "\n";
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read vocab from " + path);
    std::map<int, std::string> by_id;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("vocab line without tab: " + line);
        std::string piece = line.substr(0, tab);
        int id = std::stoi(line.substr(tab + 1));
        if (!by_id.emplace(id, piece).second) throw DataError("duplicate vocab id");
    }
    Vocab v;
    for (const auto& [id, piece] : by_id) {
        if (id < kReservedCount) {
            if (piece != kReserved[id]) throw DataError("reserved vocab id reassigned: " + piece);
            continue;
        }
        if (id != static_cast<int>(v.pieces_.size()))
            throw DataError("vocab ids not contiguous at " + std::to_string(id));
        if (v.to_id_.count(piece)) throw DataError("duplicate vocab piece: " + piece);
        v.push(piece);
    }
    return v;
}

Vocab build_vocab(const std::vector<TaggedSentence>& corpus, std::size_t max_pieces) {
    if (corpus.empty()) throw DataError("build_vocab: empty corpus");
    if (max_pieces <= Vocab::kReservedCount)
        throw DataError("build_vocab: max_pieces must exceed the reserved count");

    std::map<std::string, std::size_t> freq;
    for (const auto& s : corpus) {
        for (const auto& t : s.tokens) ++freq[casefold(t.word)];
        for (const auto& w : s.mono_ref) ++freq[casefold(w)];
    }
    std::vector<std::pair<std::string, std::size_t>> order(freq.begin(), freq.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocab v;
    std::size_t next = 0;
    while (next < order.size() && v.size() < max_pieces) v.push(order[next++].first);

    if (v.size() < max_pieces && next < order.size()) {
        // Harvest sub-word spans of the words that did not fit. A span
        // starting at 0 keeps the bare surface form; any later start gets the
        // "##" continuation prefix.
        std::map<std::string, std::size_t> span_freq;
        for (std::size_t k = next; k < order.size(); ++k) {
            const std::string& w = order[k].first;
            std::size_t f = order[k].second;
            for (std::size_t start = 0; start < w.size(); ++start) {
                for (std::size_t len = 1; start + len <= w.size(); ++len) {
                    if (start == 0 && len == w.size()) continue;  // the word itself
                    std::string piece = start == 0 ? w.substr(0, len)
                                                   : "##" + w.substr(start, len);
                    span_freq[piece] += f;
                }
            }
        }
        std::vector<std::pair<std::string, std::size_t>> spans;
        spans.reserve(span_freq.size());
        for (const auto& [p, f] : span_freq)
            if (!v.contains(p)) spans.emplace_back(p, f);
        std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [p, f] : spans) {
            if (v.size() >= max_pieces) break;
            v.push(p);
        }
    }
    return v;
}

std::vector<int> tokenize(const std::string& word, const Vocab& v) {
    if (word.empty()) throw DataError("tokenize: empty word");
    std::string w = casefold(word);
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < w.size()) {
        std::size_t best_len = 0;
        int best_id = -1;
        for (std::size_t len = w.size() - pos; len >= 1; --len) {
            std::string cand =
                pos == 0 ? w.substr(0, len) : "##" + w.substr(pos, len);
            auto id = v.contains(cand) ? v.id(cand) : -1;
            if (id >= 0) {
                best_len = len;
                best_id = id;
                break;
            }
        }
        if (best_id < 0) {
            out.push_back(Vocab::kUnk);
            ++pos;
        } else {
            out.push_back(best_id);
            pos += best_len;
        }
    }
    return out;
}

std::string detokenize(const std::vector<int>& ids, const Vocab& v) {
    std::string out;
    for (int id : ids) {
        if (id == Vocab::kPad) continue;
        const std::string& p = v.piece(id);
        if (p.rfind("##", 0) == 0)
            out += p.substr(2);
        else
            out += p;
    }
    return out;
}

}  // namespace csr
