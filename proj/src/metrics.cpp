#include "csr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "csr/corpus.hpp"
#include "csr/error.hpp"
#include "csr/log.hpp"

namespace csr {

WerResult wer(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
    if (ref.empty()) throw DataError("wer: empty reference");
    std::size_t n = hyp.size(), m = ref.size();
    // dist[i][j]: edits to turn hyp[0..i) into ref[0..j).
    std::vector<std::vector<std::size_t>> dist(n + 1, std::vector<std::size_t>(m + 1));
    for (std::size_t i = 0; i <= n; ++i) dist[i][0] = i;  // delete hyp words (insertions wrt ref)
    for (std::size_t j = 0; j <= m; ++j) dist[0][j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = dist[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
            std::size_t ins = dist[i - 1][j] + 1;  // extra hyp word
            std::size_t del = dist[i][j - 1] + 1;  // missing ref word
            dist[i][j] = std::min({sub, ins, del});
        }
    }
    // Backtrace for S/D/I counts; prefer diagonal moves on ties.
    WerResult out;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 &&
            dist[i][j] == dist[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1)) {
            if (hyp[i - 1] != ref[j - 1]) ++out.ops.subs;
            --i;
            --j;
        } else if (i > 0 && dist[i][j] == dist[i - 1][j] + 1) {
            ++out.ops.ins;
            --i;
        } else {
            ++out.ops.dels;
            --j;
        }
    }
    out.percent = 100.0 * static_cast<double>(out.ops.total()) / static_cast<double>(m);
    return out;
}

WerResult corpus_wer(const std::vector<std::vector<std::string>>& hyps,
                     const std::vector<std::vector<std::string>>& refs) {
    if (hyps.size() != refs.size()) throw DataError("corpus_wer: size mismatch");
    WerResult out;
    std::size_t ref_len = 0;
    for (std::size_t k = 0; k < hyps.size(); ++k) {
        WerResult r = wer(hyps[k], refs[k]);
        out.ops.subs += r.ops.subs;
        out.ops.dels += r.ops.dels;
        out.ops.ins += r.ops.ins;
        ref_len += refs[k].size();
    }
    out.percent = 100.0 * static_cast<double>(out.ops.total()) / static_cast<double>(ref_len);
    return out;
}

std::vector<std::string> wer_tokenize(const std::string& text) {
    std::istringstream in(casefold(text));
    std::vector<std::string> out;
    std::string w;
    while (in >> w)
        if (w != "<pad>") out.push_back(w);
    return out;
}

double perplexity(const std::vector<double>& token_log_probs) {
    if (token_log_probs.empty()) throw DataError("perplexity: no tokens");
    double mean = 0.0;
    for (double lp : token_log_probs) {
        if (lp == -std::numeric_limits<double>::infinity()) {
            log_info("perplexity: zero-probability token, PPL is +Inf");
            return std::numeric_limits<double>::infinity();
        }
        mean += lp;
    }
    mean /= static_cast<double>(token_log_probs.size());
    return std::exp(-mean);
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& words, std::size_t n) {
    std::map<Ngram, std::size_t> out;
    if (words.size() < n) return out;
    for (std::size_t i = 0; i + n <= words.size(); ++i)
        ++out[Ngram(words.begin() + i, words.begin() + i + n)];
    return out;
}

}  // namespace

double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs, std::size_t max_n) {
    if (hyps.size() != refs.size()) throw DataError("bleu: size mismatch");
    if (hyps.empty()) throw DataError("bleu: empty corpus");
    for (const auto& r : refs)
        if (r.empty()) throw DataError("bleu: empty reference");

    std::vector<double> clipped(max_n, 0.0), totals(max_n, 0.0);
    std::size_t hyp_len = 0, ref_len = 0;
    for (std::size_t k = 0; k < hyps.size(); ++k) {
        hyp_len += hyps[k].size();
        ref_len += refs[k].size();
        for (std::size_t n = 1; n <= max_n; ++n) {
            auto hc = ngram_counts(hyps[k], n);
            auto rc = ngram_counts(refs[k], n);
            for (const auto& [g, c] : hc) {
                auto it = rc.find(g);
                clipped[n - 1] +=
                    static_cast<double>(std::min(c, it == rc.end() ? 0 : it->second));
                totals[n - 1] += static_cast<double>(c);
            }
        }
    }
    if (hyp_len == 0 || totals[0] == 0.0 || clipped[0] == 0.0) return 0.0;

    bool any_zero = false;
    for (std::size_t n = 0; n < max_n; ++n)
        if (totals[n] > 0.0 && clipped[n] == 0.0) any_zero = true;

    double log_sum = 0.0;
    std::size_t included = 0;
    for (std::size_t n = 0; n < max_n; ++n) {
        if (totals[n] == 0.0) continue;  // hyp corpus has no n-grams of this order
        double c = clipped[n], t = totals[n];
        if (any_zero && n >= 1) {
            c += 1.0;
            t += 1.0;
        }
        if (c == 0.0) return 0.0;  // unsmoothed unigram zero already handled above
        log_sum += std::log(c / t);
        ++included;
    }
    double geo = std::exp(log_sum / static_cast<double>(included));
    double bp = std::exp(std::min(
        0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)));
    return bp * geo;
}

std::string EvalReport::csv_header() { return "system,wer,ppl,bleu,n"; }

std::string EvalReport::csv_row() const {
    char buf[256];
    if (std::isfinite(ppl))
        std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.6f,%zu", system.c_str(), wer_percent, ppl,
                      bleu_score, n_sentences);
    else
        std::snprintf(buf, sizeof(buf), "%s,%.4f,inf,%.6f,%zu", system.c_str(), wer_percent,
                      bleu_score, n_sentences);
    return buf;
}

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["system"] = system;
    j["wer"] = wer_percent;
    if (std::isfinite(ppl))
        j["ppl"] = ppl;
    else
        j["ppl"] = "inf";
    j["bleu"] = bleu_score;
    j["n"] = n_sentences;
    j["per_sentence"] = nlohmann::ordered_json::array();
    for (const auto& ops : per_sentence) {
        nlohmann::ordered_json o;
        o["S"] = ops.subs;
        o["D"] = ops.dels;
        o["I"] = ops.ins;
        j["per_sentence"].push_back(o);
    }
    return j.dump(2);
}

}  // namespace csr
