#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "nesgd/optimizer.hpp"

namespace nesgd {

// Fixed column order of trajectory CSV files.
inline constexpr const char* kTrajectoryColumns[] = {
    "k", "f", "f_gap", "criterion", "R_x", "momentum_err", "step_norm"};

/// Header comment lines "# key=value" (config_hash, seed, then schedule
/// constants in key order), a header row, then one row per record entry.
/// Reals use 17 significant digits so a load reproduces the record exactly.
void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out);
void write_trajectory_csv(const TrajectoryRecord& record, const std::filesystem::path& path);

/// Throws FormatError (naming the missing column when the header is short).
TrajectoryRecord read_trajectory_csv(std::istream& in);
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path);

/// Pretty-printed JSON with a trailing newline; byte-stable for equal input.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

std::string format_real(double value);

}  // namespace nesgd
