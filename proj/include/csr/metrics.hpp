#pragma once

#include <string>
#include <vector>

namespace csr {

struct EditOps {
    std::size_t subs = 0;
    std::size_t dels = 0;
    std::size_t ins = 0;

    std::size_t total() const { return subs + dels + ins; }
};

struct WerResult {
    double percent = 0.0;
    EditOps ops;
};

// Word-level Levenshtein with unit costs; percent = 100 * (S+D+I) / len(ref).
WerResult wer(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

// Pools edit counts over pooled reference length.
WerResult corpus_wer(const std::vector<std::vector<std::string>>& hyps,
                     const std::vector<std::vector<std::string>>& refs);

// Whitespace split after casefolding; PAD tokens stripped.
std::vector<std::string> wer_tokenize(const std::string& text);

// exp(-(1/N) sum ln p). Natural log; any p == 0 yields +Inf.
double perplexity(const std::vector<double>& token_log_probs);

// Corpus BLEU in [0, 1]: geometric mean of clipped n-gram precisions
// (orders with no hyp n-grams are skipped) times the brevity penalty
// exp(min(0, 1 - |ref|/|hyp|)). When any included order has a zero count,
// counts for n >= 2 get add-one smoothing.
double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs, std::size_t max_n = 4);

struct EvalReport {
    std::string system;
    double wer_percent = 0.0;
    double ppl = 0.0;
    double bleu_score = 0.0;
    std::size_t n_sentences = 0;
    std::vector<EditOps> per_sentence;

    std::string csv_row() const;  // "system,wer,ppl,bleu,n"
    static std::string csv_header();
    std::string to_json() const;  // pretty, includes per-sentence ops
};

}  // namespace csr
