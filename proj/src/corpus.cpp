#include "emrseg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "emrseg/errors.hpp"
#include "emrseg/rng.hpp"

namespace emrseg {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

struct Line {
    std::size_t begin;
    std::size_t end;  // exclusive, without the newline
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            lines.push_back({begin, i});
            begin = i + 1;
        }
    }
    return lines;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        bool ws = is_space(c);
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

bool all_uppercase(std::string_view s) {
    bool has_upper = false;
    for (char c : s) {
        if (c >= 'a' && c <= 'z') return false;
        if (c >= 'A' && c <= 'Z') has_upper = true;
    }
    return has_upper;
}

}  // namespace

std::string_view sample_type_text(SampleType t) {
    switch (t) {
        case SampleType::Type1: return "type1";
        case SampleType::Type2: return "type2";
        case SampleType::Type3: return "type3";
        case SampleType::Type4: return "type4";
    }
    return "type2";
}

std::optional<SampleType> sample_type_from_text(std::string_view s) {
    if (s == "type1") return SampleType::Type1;
    if (s == "type2") return SampleType::Type2;
    if (s == "type3") return SampleType::Type3;
    if (s == "type4") return SampleType::Type4;
    return std::nullopt;
}

std::string_view corpus_kind_text(CorpusKind k) {
    switch (k) {
        case CorpusKind::HeadingsOnly: return "headings-only";
        case CorpusKind::NoHeadings: return "no-headings";
        case CorpusKind::Mixed: return "mixed";
    }
    return "mixed";
}

std::optional<CorpusKind> corpus_kind_from_text(std::string_view s) {
    if (s == "headings-only") return CorpusKind::HeadingsOnly;
    if (s == "no-headings") return CorpusKind::NoHeadings;
    if (s == "mixed") return CorpusKind::Mixed;
    return std::nullopt;
}

std::vector<HeadingHit> detect_headings(const RawNote& note) {
    std::vector<HeadingHit> hits;
    auto lines = split_lines(note.text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line =
            trim(std::string_view(note.text).substr(lines[i].begin, lines[i].end - lines[i].begin));
        if (line.empty()) continue;
        if (word_count(line) > 8) continue;
        if (line.back() == ':' || all_uppercase(line)) {
            hits.push_back({i, std::string(line)});
        }
    }
    return hits;
}

std::optional<SectionLabel> match_heading(std::string_view heading_text,
                                          const NormalizerTables& tables) {
    std::string_view stripped = trim(heading_text);
    while (!stripped.empty() && stripped.back() == ':') {
        stripped.remove_suffix(1);
        stripped = trim(stripped);
    }
    std::string heading = normalize_text(stripped, tables);
    if (heading.empty()) return std::nullopt;

    std::optional<SectionLabel> best;
    std::size_t best_len = 0;
    for (SectionLabel label : all_labels()) {
        const auto& toks = label_tokens(label);
        std::string canon;
        for (const auto& t : toks) {
            if (!canon.empty()) canon += ' ';
            canon += t;
        }
        bool matched = heading.find(canon) != std::string::npos ||
                       canon.find(heading) != std::string::npos;
        if (matched && canon.size() > best_len) {
            best = label;
            best_len = canon.size();
        }
    }
    return best;
}

LabeledNote assign_labels(const RawNote& note, const NormalizerTables& tables,
                          std::size_t max_tokens) {
    auto lines = split_lines(note.text);
    auto headings = detect_headings(note);

    // line index -> position in `headings`, for heading lines only
    std::vector<std::ptrdiff_t> heading_at(lines.size(), -1);
    for (std::size_t h = 0; h < headings.size(); ++h) {
        heading_at[headings[h].line_index] = static_cast<std::ptrdiff_t>(h);
    }

    std::vector<std::optional<SectionLabel>> heading_label(headings.size());
    bool any_match = false;
    for (std::size_t h = 0; h < headings.size(); ++h) {
        heading_label[h] = match_heading(headings[h].text, tables);
        any_match = any_match || heading_label[h].has_value();
    }
    if (!any_match) {
        throw NoAnchorSectionError("note " + note.note_id + " has no heading matching any label");
    }

    LabeledNote out;
    out.note_id = note.note_id;
    out.sample_type = SampleType::Type2;

    std::optional<SectionLabel> current;  // unset until the first matched heading
    for (std::size_t i = 0; i < lines.size(); ++i) {
        bool line_is_heading = heading_at[i] >= 0;
        if (line_is_heading) {
            const auto& matched = heading_label[static_cast<std::size_t>(heading_at[i])];
            if (matched.has_value()) {
                current = matched;  // Rule 1
            }
            // Rule 2: an unmatched heading keeps the section ahead.
        }
        if (!current.has_value()) continue;  // before the first matched heading

        std::string_view line_text =
            std::string_view(note.text).substr(lines[i].begin, lines[i].end - lines[i].begin);
        for (Sentence& s : split_text(line_text, lines[i].begin, tables, max_tokens)) {
            LabeledSentence ls;
            ls.tokens = std::move(s.tokens);
            ls.label = *current;
            ls.heading = line_is_heading;
            out.sentences.push_back(std::move(ls));
        }
    }

    if (out.sentences.empty()) {
        throw EmptyNoteError("note " + note.note_id + " has no sentences after labeling");
    }
    return out;
}

std::string open_tag_token(SectionLabel label) {
    std::string s(label_text(label));
    std::replace(s.begin(), s.end(), ' ', '_');
    return "<" + s + ">";
}

std::string close_tag_token(SectionLabel label) {
    std::string s(label_text(label));
    std::replace(s.begin(), s.end(), ' ', '_');
    return "</" + s + ">";
}

LabeledNote make_sample(const LabeledNote& type2, SampleType type) {
    LabeledNote out;
    out.note_id = type2.note_id;
    out.sample_type = type;

    switch (type) {
        case SampleType::Type1:
            for (const auto& s : type2.sentences) {
                if (!s.heading) out.sentences.push_back(s);
            }
            break;
        case SampleType::Type2:
            out.sentences = type2.sentences;
            break;
        case SampleType::Type3:
            for (const auto& s : type2.sentences) {
                LabeledSentence copy = s;
                if (copy.heading) copy.tokens = label_tokens(copy.label);
                out.sentences.push_back(std::move(copy));
            }
            break;
        case SampleType::Type4: {
            // One open/close tag pair per contiguous label run; both tags
            // carry the run's label.
            std::size_t i = 0;
            while (i < type2.sentences.size()) {
                SectionLabel run_label = type2.sentences[i].label;
                std::size_t j = i;
                while (j < type2.sentences.size() && type2.sentences[j].label == run_label) ++j;
                LabeledSentence open;
                open.tokens = {open_tag_token(run_label)};
                open.label = run_label;
                open.heading = true;
                out.sentences.push_back(std::move(open));
                for (std::size_t k = i; k < j; ++k) out.sentences.push_back(type2.sentences[k]);
                LabeledSentence close;
                close.tokens = {close_tag_token(run_label)};
                close.label = run_label;
                close.heading = true;
                out.sentences.push_back(std::move(close));
                i = j;
            }
            break;
        }
    }
    return out;
}

BuildStats build_corpus(const std::vector<RawNote>& notes, CorpusKind kind,
                        std::uint64_t seed, const NormalizerTables& tables,
                        std::vector<LabeledNote>* out, std::size_t max_tokens) {
    BuildStats stats;
    Rng rng(seed);
    out->clear();
    out->reserve(notes.size());
    for (const RawNote& note : notes) {
        LabeledNote base;
        try {
            base = assign_labels(note, tables, max_tokens);
        } catch (const NoAnchorSectionError&) {
            ++stats.skipped;
            continue;
        } catch (const EmptyNoteError&) {
            ++stats.skipped;
            continue;
        }
        SampleType type = SampleType::Type2;
        switch (kind) {
            case CorpusKind::HeadingsOnly: type = SampleType::Type2; break;
            case CorpusKind::NoHeadings: type = SampleType::Type1; break;
            case CorpusKind::Mixed:
                type = static_cast<SampleType>(rng.below(4));
                break;
        }
        out->push_back(make_sample(base, type));
        ++stats.written;
    }
    return stats;
}

template <class NoteT>
std::pair<std::vector<NoteT>, std::vector<NoteT>> split_train_test(
    const std::vector<NoteT>& notes, double train_fraction, std::uint64_t seed) {
    if (notes.size() < 2) throw Error("split requires at least 2 notes");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error("train fraction must be in (0, 1)");
    }
    std::size_t n = notes.size();
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

    std::pair<std::vector<NoteT>, std::vector<NoteT>> result;
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? result.first : result.second).push_back(notes[i]);
    }
    return result;
}

template std::pair<std::vector<RawNote>, std::vector<RawNote>> split_train_test(
    const std::vector<RawNote>&, double, std::uint64_t);
template std::pair<std::vector<LabeledNote>, std::vector<LabeledNote>> split_train_test(
    const std::vector<LabeledNote>&, double, std::uint64_t);

void write_corpus_jsonl(std::ostream& out, const std::vector<LabeledNote>& notes) {
    for (const LabeledNote& note : notes) {
        nlohmann::ordered_json j;
        j["note_id"] = note.note_id;
        j["sample_type"] = sample_type_text(note.sample_type);
        nlohmann::ordered_json sentences = nlohmann::ordered_json::array();
        for (const LabeledSentence& s : note.sentences) {
            nlohmann::ordered_json js;
            js["tokens"] = s.tokens;
            js["label"] = label_text(s.label);
            if (s.heading) js["heading"] = true;
            sentences.push_back(std::move(js));
        }
        j["sentences"] = std::move(sentences);
        out << j.dump() << '\n';
    }
}

void write_corpus_jsonl(const std::string& path, const std::vector<LabeledNote>& notes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus: " + path);
    write_corpus_jsonl(out, notes);
}

std::vector<LabeledNote> read_corpus_jsonl(std::istream& in) {
    std::vector<LabeledNote> notes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(sv);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("corpus line " + std::to_string(lineno) + ": " + e.what());
        }
        LabeledNote note;
        note.note_id = j.at("note_id").get<std::string>();
        auto st = sample_type_from_text(j.at("sample_type").get<std::string>());
        if (!st) throw FormatError("corpus line " + std::to_string(lineno) + ": bad sample_type");
        note.sample_type = *st;
        for (const auto& js : j.at("sentences")) {
            LabeledSentence s;
            s.tokens = js.at("tokens").get<std::vector<std::string>>();
            auto label = label_from_text(js.at("label").get<std::string>());
            if (!label) {
                throw FormatError("corpus line " + std::to_string(lineno) + ": unknown label " +
                                  js.at("label").get<std::string>());
            }
            s.label = *label;
            s.heading = js.value("heading", false);
            note.sentences.push_back(std::move(s));
        }
        if (note.sentences.empty()) {
            throw FormatError("corpus line " + std::to_string(lineno) + ": empty note");
        }
        notes.push_back(std::move(note));
    }
    return notes;
}

std::vector<LabeledNote> read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus: " + path);
    return read_corpus_jsonl(in);
}

}  // namespace emrseg
