#include "emrseg/vocab.hpp"

#include <algorithm>

#include "emrseg/errors.hpp"

namespace emrseg {

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t i = 0; i < words.size(); ++i) {
        mix(words[i]);
        mix("\t");
        mix(std::to_string(counts[i]));
        mix("\n");
    }
    return h;
}

Vocabulary build_vocabulary_serial(const std::vector<LabeledNote>& corpus) {
    if (corpus.empty()) throw Error("cannot build vocabulary from an empty corpus");
    Vocabulary v;
    for (const LabeledNote& note : corpus) {
        for (const LabeledSentence& s : note.sentences) {
            for (const std::string& tok : s.tokens) {
                auto [it, inserted] = v.index.try_emplace(
                    tok, static_cast<std::int32_t>(v.words.size()));
                if (inserted) {
                    v.words.push_back(tok);
                    v.counts.push_back(0);
                }
                ++v.counts[static_cast<std::size_t>(it->second)];
                ++v.total;
            }
        }
    }
    if (v.total == 0) throw Error("corpus has no tokens");
    return v;
}

Vocabulary build_vocabulary(const std::vector<LabeledNote>& corpus,
                            const RunContext& ctx) {
    if (corpus.empty()) throw Error("cannot build vocabulary from an empty corpus");
    int threads = effective_threads(ctx);
    if (threads <= 1 || corpus.size() < 64) return build_vocabulary_serial(corpus);

    // Absolute token positions let the merge reproduce first-occurrence ids.
    std::vector<std::int64_t> note_offset(corpus.size() + 1, 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        std::int64_t n = 0;
        for (const LabeledSentence& s : corpus[i].sentences) {
            n += static_cast<std::int64_t>(s.tokens.size());
        }
        note_offset[i + 1] = note_offset[i] + n;
    }

    struct Partial {
        std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> map;  // count, first pos
    };
    std::vector<Partial> partials(static_cast<std::size_t>(threads));

#pragma omp parallel num_threads(threads)
    {
#ifdef _OPENMP
        int tid = omp_get_thread_num();
#else
        int tid = 0;
#endif
        Partial& local = partials[static_cast<std::size_t>(tid)];
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.size()); ++i) {
            std::int64_t pos = note_offset[static_cast<std::size_t>(i)];
            for (const LabeledSentence& s : corpus[static_cast<std::size_t>(i)].sentences) {
                for (const std::string& tok : s.tokens) {
                    auto [it, inserted] = local.map.try_emplace(tok, 0, pos);
                    ++it->second.first;
                    it->second.second = std::min(it->second.second, pos);
                    ++pos;
                }
            }
        }
    }

    std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> merged;
    for (Partial& p : partials) {
        for (auto& [tok, cp] : p.map) {
            auto [it, inserted] = merged.try_emplace(tok, cp);
            if (!inserted) {
                it->second.first += cp.first;
                it->second.second = std::min(it->second.second, cp.second);
            }
        }
    }

    std::vector<std::pair<std::int64_t, const std::string*>> order;
    order.reserve(merged.size());
    for (const auto& [tok, cp] : merged) order.emplace_back(cp.second, &tok);
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    Vocabulary v;
    v.words.reserve(order.size());
    v.counts.reserve(order.size());
    for (const auto& [pos, tok] : order) {
        v.index.emplace(*tok, static_cast<std::int32_t>(v.words.size()));
        v.words.push_back(*tok);
        std::int64_t count = merged.at(*tok).first;
        v.counts.push_back(count);
        v.total += count;
    }
    if (v.total == 0) throw Error("corpus has no tokens");
    return v;
}

}  // namespace emrseg
