#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dropout/records.hpp"

namespace dropout {

inline constexpr const char* kStudentsFile = "students.csv";
inline constexpr const char* kTranscriptsFile = "transcripts.csv";
inline constexpr const char* kDegreesFile = "degrees.csv";

/// Loads and validates registrar files. Records come back in students-file
/// order with canonically sorted transcripts and a derived first term.
/// Throws DataError on any malformed or inconsistent row.
std::vector<StudentRecord> load_students(
    const std::filesystem::path& students_file, const std::filesystem::path& transcripts_file,
    const std::optional<std::filesystem::path>& degrees_file = std::nullopt,
    const ResidencyLabels& residency_labels = default_residency_labels());

/// load_students over <dir>/students.csv, transcripts.csv and degrees.csv
/// (the last one optional).
std::vector<StudentRecord> load_directory(
    const std::filesystem::path& dir,
    const ResidencyLabels& residency_labels = default_residency_labels());

/// Writes the three registrar files into `dir`, creating it if needed.
void write_students(const std::filesystem::path& dir, std::span<const StudentRecord> records,
                    const ResidencyLabels& residency_labels = default_residency_labels());

}  // namespace dropout
