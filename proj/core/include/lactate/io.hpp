#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lactate/model.hpp"
#include "lactate/precision.hpp"
#include "lactate/stats.hpp"

namespace lactate::io {

/// Long-format test CSV, one row per lactate point. PTS is repeated on every
/// row so the file is self-contained.
inline constexpr std::string_view kCsvHeader = "athlete_id,stage_speed_kmh,lactate_mmol_per_l,pts_kmh";

struct ParseResult {
    std::vector<AthleteTest> tests;            // grouped by athlete, file order
    std::vector<ValidationFinding> findings;   // empty iff every test is valid
};

/// Parse the long-format CSV. Structural problems (wrong header, wrong column
/// count, unparseable numbers) throw FormatError; invariant violations and
/// inconsistent per-athlete PTS become findings.
ParseResult parse_csv_text(std::string_view text, const TestProtocol& protocol = {});
ParseResult parse_csv_file(const std::filesystem::path& path, const TestProtocol& protocol = {});

std::string to_csv(std::span<const AthleteTest> tests);

std::string residuals_csv(std::span<const ResidualRecord> residuals);
std::string error_samples_csv(std::span<const PrecisionErrorSample> samples);

void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal representation that round-trips the double exactly.
std::string format_number(double value);

/// Human pace rendering, e.g. 4.4444 min/km -> "4:26.7".
std::string format_pace_clock(double min_per_km);

}  // namespace lactate::io
