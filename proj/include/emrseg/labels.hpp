#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emrseg {

// The 25 canonical discharge-note sections, in canonical clinical order.
enum class SectionLabel : std::uint8_t {
    AdmissionDate = 0,
    DischargeDate,
    DateOfBirth,
    Sex,
    Service,
    Allergies,
    Attending,
    ChiefComplaint,
    MajorSurgicalOrInvasiveProcedure,
    HistoryOfPresentIllness,
    ReviewOfSystem,
    PastMedicalHistory,
    SocialHistory,
    FamilyHistory,
    PhysicalExam,
    PertinentResult,
    HospitalCourse,
    MedicationOnAdmission,
    DischargeMedications,
    DischargeDisposition,
    Facility,
    DischargeDiagnosis,
    DischargeCondition,
    DischargeInstruction,
    FollowUpInstruction,
};

inline constexpr std::size_t kNumLabels = 25;

// Fixed lowercase string form, e.g. "history of present illness".
std::string_view label_text(SectionLabel label);

// Parses the canonical string form; nullopt for anything else.
std::optional<SectionLabel> label_from_text(std::string_view text);

// Canonical form run through text normalization and split into tokens
// ("follow-up instruction" -> {follow, up, instruction}).
const std::vector<std::string>& label_tokens(SectionLabel label);

const std::array<SectionLabel, kNumLabels>& all_labels();

}  // namespace emrseg
