#include "emrseg/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "emrseg/errors.hpp"

namespace emrseg {

namespace {

const std::array<std::string_view, 7> kMaskSet = {
    kMaskDate, kMaskName, kMaskLocation, kMaskPhone, kMaskId, kMaskNum, kMaskUnit};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void check_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t follow;
        if (c < 0x80) follow = 0;
        else if ((c & 0xE0) == 0xC0) follow = 1;
        else if ((c & 0xF0) == 0xE0) follow = 2;
        else if ((c & 0xF8) == 0xF0) follow = 3;
        else throw FormatError("invalid UTF-8 byte at offset " + std::to_string(i));
        if (i + follow >= s.size() && follow > 0)
            throw FormatError("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k <= follow; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80)
                throw FormatError("invalid UTF-8 continuation at offset " + std::to_string(i + k));
        }
        i += follow + 1;
    }
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// True when `s` starting at `i` spells a known mask token "[word]".
bool match_mask_token(std::string_view s, std::size_t i, std::size_t* len) {
    for (std::string_view m : kMaskSet) {
        if (s.compare(i, m.size(), m) == 0) {
            *len = m.size();
            return true;
        }
    }
    return false;
}

}  // namespace

bool is_mask_token(std::string_view token) {
    return std::find(kMaskSet.begin(), kMaskSet.end(), token) != kMaskSet.end();
}

NormalizerTables NormalizerTables::defaults() {
    NormalizerTables t;
    t.units = {"mg", "mcg", "g", "kg", "ml", "l", "mmhg", "bpm",
               "meq", "units", "mm", "cm", "percent"};
    t.cues = {
        {kMaskDate, "date"},       {kMaskDate, "month"},
        {kMaskDate, "year"},       {kMaskDate, "day"},
        {kMaskDate, "holiday"},
        {kMaskName, "name"},       {kMaskName, "lastname"},
        {kMaskName, "firstname"},  {kMaskName, "doctor"},
        {kMaskName, "initial"},    {kMaskName, "dictator"},
        {kMaskName, "attending"},
        {kMaskLocation, "hospital"},  {kMaskLocation, "location"},
        {kMaskLocation, "address"},   {kMaskLocation, "street"},
        {kMaskLocation, "city"},      {kMaskLocation, "state"},
        {kMaskLocation, "country"},   {kMaskLocation, "university"},
        {kMaskLocation, "company"},   {kMaskLocation, "clinic"},
        {kMaskLocation, "ward"},
        {kMaskPhone, "telephone"},  {kMaskPhone, "phone"},
        {kMaskPhone, "pager"},      {kMaskPhone, "fax"},
    };
    return t;
}

void NormalizerTables::load_units(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open unit lexicon: " + path);
    units.clear();
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || is_space(line.back()))) line.pop_back();
        if (!line.empty()) units.push_back(to_lower(line));
    }
}

void NormalizerTables::load_cues(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cue table: " + path);
    cues.clear();
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string category, cue;
        if (!(ls >> category >> cue)) continue;
        std::string mask = "[" + to_lower(category) + "]";
        if (!is_mask_token(mask)) throw FormatError("unknown mask category in cue table: " + category);
        cues.emplace_back(mask, to_lower(cue));
    }
}

std::string classify_privacy_mask(std::string_view mask_body,
                                  const NormalizerTables& tables) {
    std::string body = to_lower(mask_body);

    // Numeric bodies with date separators, e.g. "2118-6-7".
    bool any_digit = false;
    bool date_shape = !body.empty();
    for (char c : body) {
        if (is_digit(c)) any_digit = true;
        else if (c != '-' && c != '/' && c != '.' && !is_space(c)) date_shape = false;
    }
    if (any_digit && date_shape) return kMaskDate;

    for (const auto& [mask, cue] : tables.cues) {
        if (body.find(cue) != std::string::npos) return mask;
    }
    return kMaskId;
}

std::string normalize_text(std::string_view raw, const NormalizerTables& tables) {
    check_utf8(raw);

    // Pass 1: masks, case folding, digit runs, symbol removal.
    std::string mid;
    mid.reserve(raw.size() + 8);
    std::size_t i = 0;
    while (i < raw.size()) {
        char c = raw[i];
        if (c == '[' && raw.compare(i, 3, "[**") == 0) {
            std::size_t close = raw.find("**]", i + 3);
            std::size_t body_end = (close == std::string_view::npos) ? raw.size() : close;
            std::string_view body = raw.substr(i + 3, body_end - (i + 3));
            mid += ' ';
            mid += classify_privacy_mask(body, tables);
            mid += ' ';
            i = (close == std::string_view::npos) ? raw.size() : close + 3;
        } else if (c == '[') {
            std::size_t len = 0;
            if (match_mask_token(raw, i, &len)) {
                mid += ' ';
                mid.append(raw.substr(i, len));
                mid += ' ';
                i += len;
            } else {
                mid += ' ';
                ++i;
            }
        } else if (is_digit(c)) {
            std::size_t j = i;
            while (j < raw.size()) {
                if (is_digit(raw[j])) { ++j; continue; }
                // A period is part of the run only when flanked by digits.
                if (raw[j] == '.' && j + 1 < raw.size() && is_digit(raw[j + 1])) { ++j; continue; }
                break;
            }
            mid += ' ';
            mid += kMaskNum;
            mid += ' ';
            i = j;
        } else if (is_upper(c)) {
            mid += static_cast<char>(c - 'A' + 'a');
            ++i;
        } else if (is_lower(c) || static_cast<unsigned char>(c) >= 0x80) {
            mid += c;
            ++i;
        } else {
            // whitespace and every remaining ASCII symbol become a space
            mid += ' ';
            ++i;
        }
    }

    // Pass 2: unit lexicon on whole tokens, single-space join.
    std::string out;
    out.reserve(mid.size());
    std::size_t p = 0;
    while (p < mid.size()) {
        while (p < mid.size() && mid[p] == ' ') ++p;
        if (p >= mid.size()) break;
        std::size_t q = p;
        while (q < mid.size() && mid[q] != ' ') ++q;
        std::string_view tok = std::string_view(mid).substr(p, q - p);
        if (!out.empty()) out += ' ';
        if (std::find(tables.units.begin(), tables.units.end(), tok) != tables.units.end()) {
            out += kMaskUnit;
        } else {
            out += tok;
        }
        p = q;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view normalized) {
    std::vector<std::string> tokens;
    std::size_t p = 0;
    while (p < normalized.size()) {
        while (p < normalized.size() && is_space(normalized[p])) ++p;
        if (p >= normalized.size()) break;
        std::size_t q = p;
        while (q < normalized.size() && !is_space(normalized[q])) ++q;
        tokens.emplace_back(normalized.substr(p, q - p));
        p = q;
    }
    return tokens;
}

namespace {

// Raw chunk boundaries: newlines first, then .!? followed by whitespace.
// Privacy spans are opaque so a period inside [**...**] never splits.
std::vector<std::pair<std::size_t, std::size_t>> chunk_spans(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t begin = 0;
    std::size_t i = 0;
    auto flush = [&](std::size_t end) {
        if (end > begin) spans.emplace_back(begin, end);
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '[' && text.compare(i, 3, "[**") == 0) {
            std::size_t close = text.find("**]", i + 3);
            i = (close == std::string_view::npos) ? text.size() : close + 3;
            continue;
        }
        if (c == '\n') {
            flush(i);
            ++i;
            begin = i;
            continue;
        }
        if ((c == '.' || c == '!' || c == '?') &&
            (i + 1 >= text.size() || is_space(text[i + 1]))) {
            flush(i + 1);
            ++i;
            begin = i;
            continue;
        }
        ++i;
    }
    flush(text.size());
    return spans;
}

}  // namespace

std::vector<Sentence> split_text(std::string_view text, std::size_t base_offset,
                                 const NormalizerTables& tables,
                                 std::size_t max_tokens) {
    std::vector<Sentence> sentences;
    for (auto [begin, end] : chunk_spans(text)) {
        std::string norm = normalize_text(text.substr(begin, end - begin), tables);
        std::vector<std::string> tokens = tokenize(norm);
        if (tokens.empty()) continue;
        for (std::size_t off = 0; off < tokens.size(); off += max_tokens) {
            Sentence s;
            std::size_t n = std::min(max_tokens, tokens.size() - off);
            s.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(off),
                            tokens.begin() + static_cast<std::ptrdiff_t>(off + n));
            s.span_begin = base_offset + begin;
            s.span_end = base_offset + end;
            sentences.push_back(std::move(s));
        }
    }
    return sentences;
}

std::vector<Sentence> split_sentences(const RawNote& note,
                                      const NormalizerTables& tables,
                                      std::size_t max_tokens) {
    std::vector<Sentence> sentences = split_text(note.text, 0, tables, max_tokens);
    if (sentences.empty()) {
        throw EmptyNoteError("note " + note.note_id + " has no sentences");
    }
    return sentences;
}

}  // namespace emrseg
