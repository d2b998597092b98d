#pragma once

#include <span>
#include <string>
#include <vector>

#include "sojourn/berman.hpp"
#include "sojourn/mc.hpp"

namespace sojourn {

inline constexpr const char* kSchemaVersion = "sojourn-lab/1";

enum class ReportFormat { csv, json };

// Serializers; JSON documents carry the schema version field, floats
// round-trip exactly (17 significant digits in CSV, shortest round-trip in
// JSON).
std::string to_json_string(std::span<const TailEstimate> records);
std::string to_json_string(std::span<const ConvergenceRow> records);
std::string to_json_string(std::span<const BermanEstimate> records);
std::string to_json_string(const PassageLawEstimate& record);
std::string to_json_string(const AsymptoticResult& record);

std::string to_csv_string(std::span<const TailEstimate> records);
std::string to_csv_string(std::span<const ConvergenceRow> records);
std::string to_csv_string(std::span<const BermanEstimate> records);

/// Round-trip parser for persisted tail estimates.
std::vector<TailEstimate> parse_tail_estimates(const std::string& json_text);

/// Loads constants persisted by the berman estimators into the lookup map
/// consumed by evaluate_asymptotic (keyed by constant_key).
BermanValues parse_berman_values(const std::string& json_text);

void write_report(std::span<const TailEstimate> records, const std::string& path,
                  ReportFormat format);
void write_report(std::span<const ConvergenceRow> records, const std::string& path,
                  ReportFormat format);
void write_report(std::span<const BermanEstimate> records, const std::string& path,
                  ReportFormat format);

}  // namespace sojourn
