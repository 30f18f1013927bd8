#include "emrseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "emrseg/errors.hpp"
#include "emrseg/rng.hpp"

namespace emrseg {

namespace {

using L = SectionLabel;

SectionSpec words_section(L label, double presence, int s_min, int s_max,
                          std::vector<std::string> headings,
                          std::vector<std::string> pool) {
    SectionSpec s;
    s.label = label;
    s.presence = presence;
    s.min_sentences = s_min;
    s.max_sentences = s_max;
    s.min_tokens = 8;
    s.max_tokens = 16;
    s.headings = std::move(headings);
    s.pool = std::move(pool);
    return s;
}

SectionSpec mask_section(L label, double presence, MaskKind kind,
                         std::vector<std::string> headings) {
    SectionSpec s;
    s.label = label;
    s.presence = presence;
    s.min_sentences = 1;
    s.max_sentences = 1;
    s.min_tokens = 1;
    s.max_tokens = 1;
    s.headings = std::move(headings);
    s.mask_rate = 1.0;
    s.mask_kind = kind;
    s.shared_rate = 0.0;
    return s;
}

SectionSpec phrase_section(L label, double presence,
                           std::vector<std::string> headings,
                           std::vector<std::string> pool, int t_min = 1,
                           int t_max = 2) {
    SectionSpec s;
    s.label = label;
    s.presence = presence;
    s.min_sentences = 1;
    s.max_sentences = 1;
    s.min_tokens = t_min;
    s.max_tokens = t_max;
    s.headings = std::move(headings);
    s.pool = std::move(pool);
    s.shared_rate = 0.0;
    return s;
}

}  // namespace

SectionGrammar SectionGrammar::defaults() {
    SectionGrammar g;

    g.shared_pool = {
        "the", "and", "was", "of", "to", "on", "with", "for", "is", "no",
        "patient", "he", "she", "denies", "reports", "noted", "normal",
        "continued", "daily", "as", "needed", "mild", "acute", "chronic",
        "left", "right", "without", "history", "status", "post", "this",
        "that", "were", "been", "also", "given", "well", "at", "in", "by",
        "or", "not", "but", "after", "prior", "during", "stable", "home",
        "care", "significant", "which", "than", "over", "into", "while",
        "again", "following", "per", "via", "any"};
    g.shared_weights.resize(g.shared_pool.size());
    for (std::size_t i = 0; i < g.shared_weights.size(); ++i) {
        g.shared_weights[i] = std::pow(static_cast<double>(i + 1), -1.3);
    }
    g.shared_rate = 0.62;

    g.style_pool = {
        "overall",      "generally",    "slightly",     "markedly",
        "gradually",    "steadily",     "subsequently", "accordingly",
        "currently",    "previously",   "recently",     "initially",
        "notably",      "clinically",   "routinely",    "approximately",
        "adequately",   "appropriately","consistently", "essentially",
        "favorably",    "frequently",   "furthermore",  "additionally",
        "meanwhile",    "moreover",     "otherwise",    "particularly",
        "persistently", "predominantly","presently",    "primarily",
        "promptly",     "relatively",   "remarkably",   "repeatedly",
        "respectively", "severely",     "shortly",      "similarly",
        "slowly",       "smoothly",     "somewhat",     "specifically",
        "spontaneously","substantially","sufficiently", "typically",
        "ultimately",   "uneventfully", "variably",     "vaguely",
        "actively",     "acutely",      "briefly",      "broadly",
        "carefully",    "cautiously",   "certainly",    "closely",
        "comfortably",  "completely",   "considerably", "continually",
        "conversely",   "diffusely",    "directly",     "distally",
        "early",        "effectively",  "elsewhere",    "evenly",
        "eventually",   "exactly",      "extensively",  "intermittently",
        "internally",   "laterally",    "likewise",     "locally",
        "loosely",      "medially",     "minimally",    "moderately",
        "mostly",       "nearly",       "nightly",      "nominally",
        "objectively",  "occasionally", "outwardly",    "partially",
        "partly",       "peripherally", "possibly",     "potentially",
        "presumably",   "probably",     "progressively","proximally",
        "quickly",      "quietly",      "rapidly",      "rarely",
        "readily",      "reasonably",   "reliably",     "reportedly",
        "roughly",      "safely",       "seemingly",    "selectively",
        "separately",   "seriously",    "sharply",      "simply",
        "softly",       "soundly",      "sparingly",    "strictly",
        "strongly",     "suddenly",     "superficially","surprisingly"};
    g.style_min_words = 3;
    g.style_max_words = 6;
    g.style_rate = 0.10;
    g.filler_rate = 0.18;
    g.theme_min_labels = 2;
    g.theme_max_labels = 3;
    g.theme_rate = 0.12;
    g.cross_noise = 0.02;

    g.sections.push_back(mask_section(L::AdmissionDate, 1.0, MaskKind::Date,
                                      {"Admission Date:"}));
    g.sections.back().mandatory = true;
    g.sections.push_back(mask_section(L::DischargeDate, 0.9, MaskKind::Date,
                                      {"Discharge Date:"}));
    g.sections.push_back(mask_section(L::DateOfBirth, 0.8, MaskKind::Date,
                                      {"Date of Birth:", "Birth:"}));

    g.sections.push_back(phrase_section(L::Sex, 1.0, {"Sex:"}, {"male", "female"}, 1, 1));
    g.sections.back().mandatory = true;

    g.sections.push_back(phrase_section(
        L::Service, 1.0, {"Service:"},
        {"medicine", "surgery", "cardiology", "neurology", "orthopaedics",
         "urology", "neurosurgery", "oncology", "trauma", "psychiatry"},
        1, 1));
    g.sections.back().mandatory = true;

    g.sections.push_back(phrase_section(
        L::Allergies, 0.9, {"Allergies:"},
        {"penicillins", "sulfa", "codeine", "latex", "iodine", "shellfish",
         "morphine", "adhesive", "nkda", "lisinopril"},
        1, 3));

    g.sections.push_back(mask_section(L::Attending, 0.7, MaskKind::Name,
                                      {"Attending:"}));

    g.sections.push_back(words_section(
        L::ChiefComplaint, 0.95, 1, 2, {"Chief Complaint:", "Complaint:"},
        {"chest", "pain", "shortness", "breath", "fever", "syncope", "nausea",
         "vomiting", "weakness", "dizziness", "fall", "palpitations",
         "headache", "confusion", "dyspnea", "melena"}));
    g.sections.back().min_tokens = 2;
    g.sections.back().max_tokens = 6;
    g.sections.back().shared_rate = 0.25;

    g.sections.push_back(words_section(
        L::MajorSurgicalOrInvasiveProcedure, 0.7, 1, 2,
        {"Major Surgical or Invasive Procedure:", "Invasive Procedure:"},
        {"cardiac", "catheterization", "appendectomy", "intubation",
         "endoscopy", "stent", "placement", "biopsy", "repair", "drainage",
         "central", "line", "none"}));
    g.sections.back().min_tokens = 2;
    g.sections.back().max_tokens = 6;
    g.sections.back().shared_rate = 0.3;

    g.sections.push_back(words_section(
        L::HistoryOfPresentIllness, 0.95, 2, 4,
        {"History of Present Illness:", "Present Illness:", "HISTORY OF PRESENT ILLNESS"},
        {"presented", "emergency", "department", "complaining", "onset",
         "worsening", "symptoms", "substernal", "radiating", "exertion",
         "relieved", "rest", "associated", "diaphoresis", "episode",
         "progressive", "developed", "found"}));
    g.sections.back().number_rate = 0.04;

    g.sections.push_back(words_section(
        L::ReviewOfSystem, 0.4, 1, 3, {"Review of System:", "Review of Systems:"},
        {"positive", "negative", "cough", "chills", "sweats", "weight",
         "loss", "appetite", "constipation", "diarrhea", "dysuria", "rash",
         "otherwise", "unremarkable"}));

    g.sections.push_back(words_section(
        L::PastMedicalHistory, 0.9, 1, 3,
        {"Past Medical History:", "PAST MEDICAL HISTORY"},
        {"hypertension", "diabetes", "mellitus", "hyperlipidemia", "asthma",
         "copd", "cad", "chf", "stroke", "arthritis", "cancer", "gerd",
         "anemia", "obesity", "hypothyroidism"}));

    g.sections.push_back(words_section(
        L::SocialHistory, 0.85, 1, 3, {"Social History:", "Social:"},
        {"lives", "alone", "wife", "husband", "tobacco", "smoking", "alcohol",
         "drinks", "retired", "works", "quit", "packs", "occasional",
         "former", "smoker"}));

    g.sections.push_back(words_section(
        L::FamilyHistory, 0.8, 1, 2, {"Family History:"},
        {"father", "mother", "brother", "sister", "died", "cancer", "cardiac",
         "disease", "noncontributory", "early", "premature", "dementia"}));

    g.sections.push_back(words_section(
        L::PhysicalExam, 0.95, 2, 5,
        {"Physical Exam:", "Physical Examination:", "PHYSICAL EXAM", "Exam:"},
        {"vitals", "afebrile", "lungs", "clear", "auscultation", "heart",
         "regular", "rate", "rhythm", "abdomen", "soft", "nontender",
         "nondistended", "extremities", "edema", "alert", "oriented",
         "pupils", "reactive", "murmur", "bilaterally", "intact"}));
    g.sections.back().number_rate = 0.12;

    g.sections.push_back(words_section(
        L::PertinentResult, 0.85, 2, 4,
        {"Pertinent Result:", "Pertinent Results:"},
        {"labs", "wbc", "hgb", "plt", "sodium", "potassium", "creatinine",
         "glucose", "troponin", "xray", "ekg", "sinus", "imaging", "ct",
         "unremarkable", "elevated", "culture", "pending"}));
    g.sections.back().number_rate = 0.15;

    g.sections.push_back(words_section(
        L::HospitalCourse, 0.95, 2, 5,
        {"Hospital Course:", "Brief Hospital Course:", "HOSPITAL COURSE"},
        {"admitted", "started", "transferred", "improved", "monitored",
         "floor", "unit", "treated", "course", "uncomplicated", "tolerated",
         "diet", "ambulating", "discharged", "remained", "overnight",
         "resolved", "serial"}));
    g.sections.back().number_rate = 0.03;

    g.sections.push_back(words_section(
        L::MedicationOnAdmission, 0.8, 1, 3, {"Medication on Admission:"},
        {"aspirin", "metoprolol", "lisinopril", "atorvastatin", "metformin",
         "amlodipine", "simvastatin", "outpatient", "oral", "nightly",
         "prn", "held"}));
    g.sections.back().number_rate = 0.10;

    g.sections.push_back(words_section(
        L::DischargeMedications, 0.9, 1, 4,
        {"Discharge Medications:", "Medications:"},
        {"insulin", "furosemide", "warfarin", "omeprazole", "albuterol",
         "pantoprazole", "clopidogrel", "capsule", "mouth", "refills",
         "disp", "sig", "tablet"}));
    g.sections.back().number_rate = 0.10;

    g.sections.push_back(phrase_section(
        L::DischargeDisposition, 0.9, {"Discharge Disposition:", "Disposition:"},
        {"home", "with", "service", "extended", "care", "facility",
         "rehabilitation", "hospice", "expired"},
        1, 3));

    g.sections.push_back(mask_section(L::Facility, 0.4, MaskKind::Location,
                                      {"Facility:"}));
    g.sections.back().mask_rate = 0.5;
    g.sections.back().max_tokens = 3;
    g.sections.back().max_sentences = 2;
    g.sections.back().pool = {"rehabilitation", "nursing", "center", "campus"};

    g.sections.push_back(words_section(
        L::DischargeDiagnosis, 0.9, 1, 2,
        {"Discharge Diagnosis:", "Diagnosis:"},
        {"myocardial", "infarction", "pneumonia", "exacerbation", "failure",
         "primary", "secondary", "sepsis", "fracture", "cellulitis",
         "pancreatitis", "embolism"}));
    g.sections.back().min_tokens = 2;
    g.sections.back().max_tokens = 6;

    g.sections.push_back(phrase_section(
        L::DischargeCondition, 0.85, {"Discharge Condition:", "Condition:"},
        {"stable", "good", "fair", "guarded", "improved", "ambulatory",
         "tolerating", "mental", "baseline", "clear", "coherent"},
        1, 3));

    g.sections.push_back(words_section(
        L::DischargeInstruction, 0.9, 1, 3,
        {"Discharge Instruction:", "Discharge Instructions:"},
        {"please", "take", "medications", "prescribed", "call", "doctor",
         "if", "you", "experience", "worsening", "return", "room", "weigh",
         "yourself", "avoid", "lifting", "resume", "activity", "shower"}));

    g.sections.push_back(words_section(
        L::FollowUpInstruction, 0.85, 1, 2,
        {"Follow-up Instruction:", "Follow-up Instructions:", "Follow-up:"},
        {"appointment", "clinic", "weeks", "provider", "schedule", "primary",
         "cardiology", "office", "days", "arranged"}));
    g.sections.back().mask_rate = 0.1;
    g.sections.back().mask_kind = MaskKind::Phone;

    g.unmatched = {
        {L::PhysicalExam, "LAB", 1, 3},
        {L::PhysicalExam, "VITAL SIGNS", 1, 2},
        {L::PertinentResult, "IMAGING", 1, 3},
        {L::PertinentResult, "MICRO", 1, 2},
        {L::PertinentResult, "EKG", 1, 2},
        {L::HospitalCourse, "CODE STATUS", 1, 1},
    };
    return g;
}

void SectionGrammar::validate(const NormalizerTables& tables) const {
    if (sections.empty()) throw FormatError("grammar has no sections");
    if (shared_pool.size() != shared_weights.size()) {
        throw FormatError("grammar shared pool/weights length mismatch");
    }
    std::ptrdiff_t prev = -1;
    for (const SectionSpec& s : sections) {
        auto idx = static_cast<std::ptrdiff_t>(s.label);
        if (idx <= prev) throw FormatError("grammar sections out of template order");
        prev = idx;
        if (s.presence < 0.0 || s.presence > 1.0) {
            throw FormatError("presence out of [0,1] for " + std::string(label_text(s.label)));
        }
        if (s.min_sentences < 1 || s.max_sentences < s.min_sentences ||
            s.min_tokens < 1 || s.max_tokens < s.min_tokens) {
            throw FormatError("bad sentence/token ranges for " + std::string(label_text(s.label)));
        }
        if (s.headings.empty()) {
            throw FormatError("no headings for " + std::string(label_text(s.label)));
        }
        for (const std::string& h : s.headings) {
            auto m = match_heading(h, tables);
            if (!m || *m != s.label) {
                throw FormatError("heading '" + h + "' does not resolve to " +
                                  std::string(label_text(s.label)));
            }
        }
        if (s.pool.empty() && s.mask_rate <= 0.0 && s.number_rate <= 0.0) {
            throw FormatError("empty pool for " + std::string(label_text(s.label)));
        }
    }
    for (const UnmatchedAliasSpec& u : unmatched) {
        if (match_heading(u.heading, tables).has_value()) {
            throw FormatError("alias '" + u.heading + "' unexpectedly matches a label");
        }
        bool anchored = false;
        for (const SectionSpec& s : sections) anchored = anchored || s.label == u.anchor;
        if (!anchored) throw FormatError("unmatched alias anchor missing: " + u.heading);
    }
    if (style_rate < 0.0 || style_rate > 1.0) throw FormatError("style_rate out of [0,1]");
    if (style_rate > 0.0) {
        if (style_pool.empty()) throw FormatError("style_rate set but style pool empty");
        if (style_min_words < 1 || style_max_words < style_min_words) {
            throw FormatError("bad style word range");
        }
    }
}

namespace {

std::size_t weighted_pick(Rng& rng, const std::vector<double>& w, double total) {
    double x = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (x < acc) return i;
    }
    return w.size() - 1;
}

std::string render_mask(Rng& rng, MaskKind kind) {
    switch (kind) {
        case MaskKind::Date: {
            int y = static_cast<int>(rng.range(2100, 2199));
            int m = static_cast<int>(rng.range(1, 12));
            int d = static_cast<int>(rng.range(1, 28));
            return "[**" + std::to_string(y) + "-" + std::to_string(m) + "-" +
                   std::to_string(d) + "**]";
        }
        case MaskKind::Name:
            return "[**Known lastname " + std::to_string(rng.range(1, 9999)) + "**]";
        case MaskKind::Location:
            return "[**Hospital " + std::to_string(rng.range(1, 99)) + "**]";
        case MaskKind::Phone:
            return "[**Telephone/Fax (1) " + std::to_string(rng.range(1000, 9999)) + "**]";
        case MaskKind::None:
            break;
    }
    return "[**0**]";
}

std::string render_number(Rng& rng) {
    switch (rng.below(4)) {
        case 0: return std::to_string(rng.range(1, 999));
        case 1: {  // decimal
            return std::to_string(rng.range(1, 120)) + "." + std::to_string(rng.range(0, 9));
        }
        case 2: {  // blood-pressure style pair
            return std::to_string(rng.range(80, 180)) + "/" + std::to_string(rng.range(40, 110));
        }
        default: {  // dose with unit
            static const char* kUnits[] = {"mg", "ml", "mcg", "units", "mmHg", "g"};
            return std::to_string(rng.range(1, 500)) + " " +
                   kUnits[rng.below(6)];
        }
    }
}

// The per-note lexical context every content sentence draws from.
struct NoteFlavor {
    std::vector<std::string> style;                      // recurring filler words
    std::vector<const std::vector<std::string>*> themes; // other sections' pools
};

std::string render_sentence(Rng& rng, const SectionGrammar& g, const SectionSpec& s,
                            const std::vector<std::string>* override_pool,
                            const NoteFlavor& flavor) {
    const std::vector<std::string>& pool = override_pool ? *override_pool : s.pool;
    double shared_rate = s.shared_rate >= 0.0 ? s.shared_rate : g.shared_rate;
    // sections that opt out of filler (shared_rate 0) opt out of note flavor too
    double style_rate = (shared_rate == 0.0 || flavor.style.empty()) ? 0.0 : g.style_rate;
    double theme_rate = (shared_rate == 0.0 || flavor.themes.empty()) ? 0.0 : g.theme_rate;
    // a filler sentence has no label-specific token at all
    bool filler = shared_rate > 0.0 && g.filler_rate > 0.0 && rng.chance(g.filler_rate);
    double total = 0.0;
    for (double w : g.shared_weights) total += w;

    int n = static_cast<int>(rng.range(s.min_tokens, s.max_tokens));
    std::vector<std::string> words;
    words.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (filler) {
            if (style_rate > 0.0 && rng.chance(style_rate)) {
                words.push_back(flavor.style[rng.below(flavor.style.size())]);
            } else {
                words.push_back(g.shared_pool[weighted_pick(rng, g.shared_weights, total)]);
            }
            continue;
        }
        if (s.mask_rate > 0.0 && rng.chance(s.mask_rate)) {
            words.push_back(render_mask(rng, s.mask_kind));
            continue;
        }
        if (s.number_rate > 0.0 && rng.chance(s.number_rate)) {
            words.push_back(render_number(rng));
            continue;
        }
        if (style_rate > 0.0 && rng.chance(style_rate)) {
            words.push_back(flavor.style[rng.below(flavor.style.size())]);
            continue;
        }
        if (theme_rate > 0.0 && rng.chance(theme_rate)) {
            const auto& theme_pool = *flavor.themes[rng.below(flavor.themes.size())];
            words.push_back(theme_pool[rng.below(theme_pool.size())]);
            continue;
        }
        if (!g.shared_pool.empty() && rng.chance(shared_rate)) {
            words.push_back(g.shared_pool[weighted_pick(rng, g.shared_weights, total)]);
            continue;
        }
        if (g.cross_noise > 0.0 && rng.chance(g.cross_noise)) {
            const SectionSpec& other =
                g.sections[rng.below(g.sections.size())];
            if (!other.pool.empty()) {
                words.push_back(other.pool[rng.below(other.pool.size())]);
                continue;
            }
        }
        if (!pool.empty()) {
            words.push_back(pool[rng.below(pool.size())]);
        } else {
            words.push_back(g.shared_pool[weighted_pick(rng, g.shared_weights, total)]);
        }
    }

    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    // Capitalize the first letter so lines look like prose; masks stay as-is.
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') {
        out[0] = static_cast<char>(out[0] - 'a' + 'A');
    }
    if (rng.chance(0.85)) out += '.';
    return out;
}

void append_section_body(Rng& rng, const SectionGrammar& g, const SectionSpec& s,
                         int n_sentences, const std::vector<std::string>* pool,
                         const NoteFlavor& flavor, std::string* text) {
    int emitted = 0;
    while (emitted < n_sentences) {
        std::string line = render_sentence(rng, g, s, pool, flavor);
        ++emitted;
        // Occasionally pack two sentences into one line to exercise the
        // punctuation splitter.
        if (emitted < n_sentences && line.back() == '.' &&
            rng.chance(g.multi_sentence_line_rate)) {
            line += ' ';
            line += render_sentence(rng, g, s, pool, flavor);
            ++emitted;
        }
        *text += line;
        *text += '\n';
    }
}

}  // namespace

RawNote generate_synthetic_note(const SectionGrammar& grammar, std::uint64_t seed,
                                std::string note_id) {
    Rng rng(seed);
    RawNote note;
    note.note_id = std::move(note_id);

    bool want_unmatched = grammar.unmatched_note_rate > 0.0 &&
                          rng.chance(grammar.unmatched_note_rate);
    std::size_t unmatched_pick =
        grammar.unmatched.empty() ? 0 : rng.below(grammar.unmatched.size());

    NoteFlavor flavor;
    // recurring style words, drawn once without replacement
    if (grammar.style_rate > 0.0 && !grammar.style_pool.empty()) {
        int want = static_cast<int>(
            rng.range(grammar.style_min_words, grammar.style_max_words));
        std::vector<std::size_t> order(grammar.style_pool.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (int i = 0; i < want && i < static_cast<int>(order.size()); ++i) {
            flavor.style.push_back(grammar.style_pool[order[static_cast<std::size_t>(i)]]);
        }
    }
    // the note's topical theme: a few sections whose vocabulary recurs
    if (grammar.theme_rate > 0.0) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < grammar.sections.size(); ++i) {
            const SectionSpec& s = grammar.sections[i];
            if (!s.pool.empty() && s.shared_rate != 0.0) candidates.push_back(i);
        }
        rng.shuffle(candidates);
        int want = static_cast<int>(
            rng.range(grammar.theme_min_labels, grammar.theme_max_labels));
        for (int i = 0; i < want && i < static_cast<int>(candidates.size()); ++i) {
            flavor.themes.push_back(&grammar.sections[candidates[static_cast<std::size_t>(i)]].pool);
        }
    }

    for (const SectionSpec& s : grammar.sections) {
        bool present = s.mandatory || rng.chance(s.presence);
        if (!present) continue;

        const std::string& heading = s.headings[rng.below(s.headings.size())];
        note.text += heading;
        note.text += '\n';

        int n = static_cast<int>(rng.range(s.min_sentences, s.max_sentences));
        append_section_body(rng, grammar, s, n, nullptr, flavor, &note.text);

        if (want_unmatched && !grammar.unmatched.empty() &&
            grammar.unmatched[unmatched_pick].anchor == s.label) {
            const UnmatchedAliasSpec& u = grammar.unmatched[unmatched_pick];
            note.text += u.heading;
            note.text += '\n';
            int un = static_cast<int>(rng.range(u.min_sentences, u.max_sentences));
            append_section_body(rng, grammar, s, un, nullptr, flavor, &note.text);
        }
        note.text += '\n';
    }
    return note;
}

std::vector<RawNote> generate_notes(const SectionGrammar& grammar, std::size_t n,
                                    std::uint64_t seed, const std::string& prefix) {
    Rng master(seed);
    std::vector<RawNote> notes;
    notes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t note_seed = master.next_u64();
        char id[32];
        std::snprintf(id, sizeof(id), "%s-%06zu", prefix.c_str(), i + 1);
        notes.push_back(generate_synthetic_note(grammar, note_seed, id));
    }
    return notes;
}

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

std::vector<std::string> split_pipe(const std::string& s) {
    std::vector<std::string> out;
    std::size_t p = 0;
    while (p <= s.size()) {
        std::size_t q = s.find('|', p);
        if (q == std::string::npos) q = s.size();
        std::string piece = trim_copy(s.substr(p, q - p));
        if (!piece.empty()) out.push_back(piece);
        p = q + 1;
    }
    return out;
}

MaskKind mask_kind_from(const std::string& s) {
    if (s == "date") return MaskKind::Date;
    if (s == "name") return MaskKind::Name;
    if (s == "location") return MaskKind::Location;
    if (s == "phone") return MaskKind::Phone;
    if (s == "none") return MaskKind::None;
    throw FormatError("unknown mask kind: " + s);
}

}  // namespace

// Grammar files are key = value sections:
//   [global]            shared_rate, cross_noise, unmatched_note_rate,
//                       multi_sentence_line_rate, shared_pool (word:weight...)
//   [section <label>]   presence, mandatory, sentences "<min> <max>",
//                       tokens "<min> <max>", headings "A: | B:", pool,
//                       shared_rate, number_rate, mask_rate, mask_kind
//   [unmatched <HEAD>]  anchor, sentences "<min> <max>"
// Sections not mentioned keep their defaults; listing a label resets its
// fields to the file's values only where given.
SectionGrammar SectionGrammar::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grammar: " + path);

    SectionGrammar g = SectionGrammar::defaults();
    SectionSpec* cur_section = nullptr;
    UnmatchedAliasSpec* cur_unmatched = nullptr;
    bool in_global = false;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim_copy(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            std::string head = trim_copy(t.substr(1, t.size() - 2));
            cur_section = nullptr;
            cur_unmatched = nullptr;
            in_global = false;
            if (head == "global") {
                in_global = true;
            } else if (head.rfind("section ", 0) == 0) {
                auto label = label_from_text(trim_copy(head.substr(8)));
                if (!label) throw FormatError("grammar line " + std::to_string(lineno) +
                                              ": unknown label");
                for (SectionSpec& s : g.sections) {
                    if (s.label == *label) cur_section = &s;
                }
                if (!cur_section) throw FormatError("grammar line " + std::to_string(lineno) +
                                                    ": label not in template");
            } else if (head.rfind("unmatched ", 0) == 0) {
                g.unmatched.push_back({});
                cur_unmatched = &g.unmatched.back();
                cur_unmatched->heading = trim_copy(head.substr(10));
            } else {
                throw FormatError("grammar line " + std::to_string(lineno) + ": bad section");
            }
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw FormatError("grammar line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim_copy(t.substr(0, eq));
        std::string value = trim_copy(t.substr(eq + 1));

        auto as_double = [&] { return std::stod(value); };
        auto as_range = [&](int* lo, int* hi) {
            auto parts = split_ws(value);
            if (parts.size() != 2) throw FormatError("grammar line " + std::to_string(lineno) +
                                                     ": expected two integers");
            *lo = std::stoi(parts[0]);
            *hi = std::stoi(parts[1]);
        };

        if (in_global) {
            if (key == "shared_rate") g.shared_rate = as_double();
            else if (key == "cross_noise") g.cross_noise = as_double();
            else if (key == "unmatched_note_rate") g.unmatched_note_rate = as_double();
            else if (key == "multi_sentence_line_rate") g.multi_sentence_line_rate = as_double();
            else if (key == "style_rate") g.style_rate = as_double();
            else if (key == "filler_rate") g.filler_rate = as_double();
            else if (key == "theme_rate") g.theme_rate = as_double();
            else if (key == "theme_labels") as_range(&g.theme_min_labels, &g.theme_max_labels);
            else if (key == "style_words") {
                as_range(&g.style_min_words, &g.style_max_words);
            } else if (key == "style_pool") {
                g.style_pool = split_ws(value);
            } else if (key == "shared_pool") {
                g.shared_pool.clear();
                g.shared_weights.clear();
                for (const std::string& entry : split_ws(value)) {
                    std::size_t colon = entry.find(':');
                    if (colon == std::string::npos) {
                        g.shared_pool.push_back(entry);
                        g.shared_weights.push_back(1.0);
                    } else {
                        g.shared_pool.push_back(entry.substr(0, colon));
                        g.shared_weights.push_back(std::stod(entry.substr(colon + 1)));
                    }
                }
            } else {
                throw FormatError("grammar line " + std::to_string(lineno) + ": unknown global key " + key);
            }
        } else if (cur_section) {
            SectionSpec& s = *cur_section;
            if (key == "presence") s.presence = as_double();
            else if (key == "mandatory") s.mandatory = (value == "true" || value == "1");
            else if (key == "sentences") as_range(&s.min_sentences, &s.max_sentences);
            else if (key == "tokens") as_range(&s.min_tokens, &s.max_tokens);
            else if (key == "headings") s.headings = split_pipe(value);
            else if (key == "pool") s.pool = split_ws(value);
            else if (key == "shared_rate") s.shared_rate = as_double();
            else if (key == "number_rate") s.number_rate = as_double();
            else if (key == "mask_rate") s.mask_rate = as_double();
            else if (key == "mask_kind") s.mask_kind = mask_kind_from(value);
            else throw FormatError("grammar line " + std::to_string(lineno) + ": unknown section key " + key);
        } else if (cur_unmatched) {
            UnmatchedAliasSpec& u = *cur_unmatched;
            if (key == "anchor") {
                auto label = label_from_text(value);
                if (!label) throw FormatError("grammar line " + std::to_string(lineno) + ": unknown anchor");
                u.anchor = *label;
            } else if (key == "sentences") {
                as_range(&u.min_sentences, &u.max_sentences);
            } else {
                throw FormatError("grammar line " + std::to_string(lineno) + ": unknown unmatched key " + key);
            }
        } else {
            throw FormatError("grammar line " + std::to_string(lineno) + ": key outside any section");
        }
    }

    g.validate(NormalizerTables::defaults());
    return g;
}

}  // namespace emrseg
