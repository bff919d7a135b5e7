#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cropyield/domain.hpp"

namespace cropyield {

inline constexpr std::string_view kSoilHeader =
    "zone_id,test_year,p_mg_l,k_mg_l,mg_mg_l,ph,soil_type,stone_content,organic_matter,caco3";
inline constexpr std::string_view kWeatherHeader =
    "zone_id,date,t_min_c,t_max_c,precip_mm,solar_mj_m2,humidity_pct";
inline constexpr std::string_view kCropHeader =
    "zone_id,year,crop,sowing_date,harvest_date,yield_t_ha";
inline constexpr std::string_view kRejectionHeader = "source,line,reason";

struct LogEntry {
  std::string source;
  std::size_t line = 0;  // 1-based file line; the header is line 1
  std::string reason;

  bool operator==(const LogEntry&) const = default;
};

/// Every input line that did not become a record, with the reason. Reasons
/// start with "rejected:", "duplicate:" or "filtered:".
struct RejectionLog {
  std::vector<LogEntry> entries;

  void add(std::string source, std::size_t line, std::string reason);
  void append(const RejectionLog& other);
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::size_t count_prefix(std::string_view prefix) const;
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

  bool operator==(const RejectionLog&) const = default;
};

template <typename Record>
struct Parsed {
  std::vector<Record> records;
  RejectionLog log;
};

/// Missing file or a header that is not exactly the documented one is fatal
/// (throws Error). Malformed or invalid rows are logged and skipped; later
/// rows with an already-seen key are logged as duplicates (keep-first).
Parsed<SoilRecord> parse_soil(const std::filesystem::path& path, const ValidationConfig& cfg = {});
Parsed<WeatherDaily> parse_weather(const std::filesystem::path& path,
                                   const ValidationConfig& cfg = {});
/// Only rows whose crop is winter_wheat (case-insensitive) become records;
/// other crops are logged as filtered.
Parsed<CropRecord> parse_crop(const std::filesystem::path& path, const ValidationConfig& cfg = {});

/// Stream variants; `source` names the input in log entries.
Parsed<SoilRecord> parse_soil(std::istream& in, std::string source, const ValidationConfig& cfg = {});
Parsed<WeatherDaily> parse_weather(std::istream& in, std::string source,
                                   const ValidationConfig& cfg = {});
Parsed<CropRecord> parse_crop(std::istream& in, std::string source, const ValidationConfig& cfg = {});

/// Most recent soil test for `zone_id` taken in `year` or earlier.
std::optional<SoilRecord> carry_forward_soil(std::span<const SoilRecord> records,
                                             std::string_view zone_id, int year);

/// Per-zone soil history sorted by test year, for repeated carry-forward
/// lookups over a whole dataset.
class SoilIndex {
 public:
  explicit SoilIndex(std::span<const SoilRecord> records);
  const SoilRecord* lookup(std::string_view zone_id, int year) const;

 private:
  std::unordered_map<std::string, std::vector<SoilRecord>> by_zone_;
};

void write_soil_csv(std::ostream& out, std::span<const SoilRecord> records);
void write_weather_csv(std::ostream& out, std::span<const WeatherDaily> records);
/// Crop rows are written with crop = winter_wheat.
void write_crop_csv(std::ostream& out, std::span<const CropRecord> records);

struct IngestResult {
  Dataset data;
  RejectionLog log;
};

/// Parses the three inputs (concurrently when OpenMP is enabled).
IngestResult ingest_files(const std::filesystem::path& soil, const std::filesystem::path& weather,
                          const std::filesystem::path& crop, const ValidationConfig& cfg = {});

}  // namespace cropyield
