#pragma once

// Versioned record files (JSON) and the flat CSV emitted for plotting.
// Primary outputs are byte-deterministic given (config, seed): nothing
// wall-clock dependent is serialized here.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "coordsim/sim.hpp"

namespace coordsim {

inline constexpr int kRecordVersion = 1;

nlohmann::json indexset_to_json(const IndexSet& s);
IndexSet indexset_from_json(const nlohmann::json& j);

nlohmann::json spectrum_to_json(const PolarSpectrum& spec);
PolarSpectrum spectrum_from_json(const nlohmann::json& j);

nlohmann::json family_to_json(const SetFamily& fam);
SetFamily family_from_json(const nlohmann::json& j);

nlohmann::json layout_to_json(const ChainLayout& layout);
ChainLayout layout_from_json(const nlohmann::json& j);

nlohmann::json artifacts_to_json(const BuildArtifacts& art, uint64_t cache_key);
BuildArtifacts artifacts_from_json(const nlohmann::json& j);

// Simulation report without runtime metadata (deterministic content only).
nlohmann::json report_to_json(const SimReport& rep);

// Frozen CSV schema; the header carries the schema version for
// plotting-script stability.
std::string report_csv_header();
std::string report_csv_row(const ExperimentConfig& cfg, const SimReport& rep);
// Same schema for set-construction-only runs: tv/kl columns are "nan".
std::string rates_csv_row(const ExperimentConfig& cfg, const CodeRates& rates,
                          const RegionReport& region);

// One hex digit per symbol (alphabets here never exceed 16).
std::string hex_pack(const std::vector<uint8_t>& symbols);

// Line-delimited block trace record: hex-packed words plus metadata.
nlohmann::json block_trace_to_json(const BlockTrace& trace, int trial, int block);

// Write-to-temp then atomic rename; no partial files on failure.
void atomic_write(const std::filesystem::path& path, const std::string& content);

uint64_t fnv1a64(const std::string& s);

}  // namespace coordsim
