#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cropyield {

/// Fatal error for structural problems (bad files, bad config, contract
/// violations). Row-level data problems are reported as rejections instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Returns nullopt on any
/// syntax error or impossible date.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);
int days_between(Date from, Date to);
Date add_days(Date d, int n);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

enum class OrdinalField { soil_type, stone_content, organic_matter, caco3 };

inline constexpr std::array<OrdinalField, 4> kOrdinalFields = {
    OrdinalField::soil_type, OrdinalField::stone_content,
    OrdinalField::organic_matter, OrdinalField::caco3};

std::string_view ordinal_field_name(OrdinalField f);

/// Declared category order per ordinal soil field; the code of a label is its
/// 0-based position. Overridable from the run config.
struct OrdinalOrders {
  std::array<std::vector<std::string>, 4> labels;

  static OrdinalOrders defaults();

  const std::vector<std::string>& of(OrdinalField f) const {
    return labels[static_cast<std::size_t>(f)];
  }
  std::vector<std::string>& of(OrdinalField f) {
    return labels[static_cast<std::size_t>(f)];
  }
  bool contains(OrdinalField f, std::string_view label) const;
  /// Throws Error naming the field and the label when the label is unknown.
  int encode(OrdinalField f, std::string_view label) const;
  const std::string& decode(OrdinalField f, int code) const;
};

/// Encodes with the default orders.
int encode_ordinal(OrdinalField f, std::string_view label);

struct SoilRecord {
  std::string zone_id;
  int test_year = 0;
  double p = 0;   // mg/l
  double k = 0;   // mg/l
  double mg = 0;  // mg/l
  double ph = 0;
  std::string soil_type;
  std::string stone_content;
  std::string organic_matter;
  std::string caco3;

  const std::string& ordinal(OrdinalField f) const;
  bool operator==(const SoilRecord&) const = default;
};

struct WeatherDaily {
  std::string zone_id;
  Date date;
  double t_min = 0;     // degC
  double t_max = 0;     // degC
  double precip = 0;    // mm
  double solar = 0;     // MJ/m2
  double humidity = 0;  // percent

  double daily_mean() const { return (t_max + t_min) / 2.0; }
  bool operator==(const WeatherDaily&) const = default;
};

struct CropRecord {
  std::string zone_id;
  int year = 0;
  Date sowing_date;
  Date harvest_date;
  double yield_t_ha = 0;

  bool operator==(const CropRecord&) const = default;
};

/// The three cleaned record sets that make up one experiment's input.
struct Dataset {
  std::vector<SoilRecord> soil;
  std::vector<WeatherDaily> weather;
  std::vector<CropRecord> crop;
};

struct Range {
  double lo;
  double hi;
};

/// Plausibility bounds applied on top of the type invariants.
struct ValidationConfig {
  Range p{0, 1000};
  Range k{0, 3000};
  Range mg{0, 2000};
  Range ph{0, 14};
  Range temperature{-50, 50};
  Range precip{0, 500};
  Range solar{0, 60};
  Range humidity{0, 100};
  Range yield{1, 18};
  OrdinalOrders ordinals = OrdinalOrders::defaults();
};

struct Rejection {
  std::string field;
  std::string value;
  std::string bound;  // e.g. "upper 100", "category", "t_min <= t_max"

  std::string message() const;
  bool operator==(const Rejection&) const = default;
};

std::optional<Rejection> validate(const SoilRecord& r, const ValidationConfig& cfg);
std::optional<Rejection> validate(const WeatherDaily& r, const ValidationConfig& cfg);
std::optional<Rejection> validate(const CropRecord& r, const ValidationConfig& cfg);

}  // namespace cropyield
