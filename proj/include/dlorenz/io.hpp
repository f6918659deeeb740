#pragma once
// Serialization helpers shared by the CLI and the chart exporter. All numeric
// text output uses %.17g so emitted doubles round-trip exactly and reruns with
// identical inputs produce byte-identical files.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dlorenz/spectral.hpp"

namespace dlorenz {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string g17(double v);

void write_orbit_csv(std::ostream& os, std::span<const State> points);
void write_records_csv(std::ostream& os, std::span<const EquilibriumRecord> recs);

void write_ppm(const std::filesystem::path& file, int width, int height,
               std::span<const unsigned char> rgb);

// FNV-1a 64-bit; integrity bookkeeping for run manifests, not cryptography.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::filesystem::path& file);
std::string hex64(std::uint64_t v);

std::string iso8601_utc_now();

// Line-oriented config files:
//   # comment
//   [section]            <- section names mirror CLI subcommands; "" = global
//   key = value          <- keys mirror long option names
// Parsing keeps line numbers so unknown keys can be rejected with a location.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};
struct ConfigSection {
  std::string name;  // empty for the leading unnamed section
  std::vector<ConfigEntry> entries;
};
struct ConfigFile {
  std::filesystem::path source;
  std::string text;  // verbatim snapshot for manifests
  std::vector<ConfigSection> sections;

  static ConfigFile parse_file(const std::filesystem::path& file);
  static ConfigFile parse_string(std::string_view text, std::string source_name);
};

}  // namespace dlorenz
