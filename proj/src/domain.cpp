#include "cropyield/domain.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>

namespace cropyield {

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    auto first = text.data() + pos;
    auto last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
  };
  int y = 0, m = 0, d = 0;
  if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(Date d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

int days_between(Date from, Date to) {
  return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

Date add_days(Date d, int n) { return Date{std::chrono::sys_days{d} + std::chrono::days{n}}; }

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, ptr);
}

std::string_view ordinal_field_name(OrdinalField f) {
  switch (f) {
    case OrdinalField::soil_type: return "soil_type";
    case OrdinalField::stone_content: return "stone_content";
    case OrdinalField::organic_matter: return "organic_matter";
    case OrdinalField::caco3: return "caco3";
  }
  return "?";
}

OrdinalOrders OrdinalOrders::defaults() {
  OrdinalOrders o;
  o.of(OrdinalField::soil_type) = {"shallow", "medium", "deep clay", "deep fertile"};
  o.of(OrdinalField::stone_content) = {"stoneless", "low", "moderate", "high", "gravel"};
  o.of(OrdinalField::organic_matter) = {"low", "moderate", "very high"};
  o.of(OrdinalField::caco3) = {"potentially acidic", "slightly calc", "calc", "extremely calc"};
  return o;
}

bool OrdinalOrders::contains(OrdinalField f, std::string_view label) const {
  for (const auto& l : of(f))
    if (l == label) return true;
  return false;
}

int OrdinalOrders::encode(OrdinalField f, std::string_view label) const {
  const auto& ls = of(f);
  for (std::size_t i = 0; i < ls.size(); ++i)
    if (ls[i] == label) return static_cast<int>(i);
  throw Error(fmt::format("unknown {} category '{}'", ordinal_field_name(f), label));
}

const std::string& OrdinalOrders::decode(OrdinalField f, int code) const {
  const auto& ls = of(f);
  if (code < 0 || static_cast<std::size_t>(code) >= ls.size())
    throw Error(fmt::format("{} code {} out of range", ordinal_field_name(f), code));
  return ls[static_cast<std::size_t>(code)];
}

int encode_ordinal(OrdinalField f, std::string_view label) {
  static const OrdinalOrders orders = OrdinalOrders::defaults();
  return orders.encode(f, label);
}

const std::string& SoilRecord::ordinal(OrdinalField f) const {
  switch (f) {
    case OrdinalField::soil_type: return soil_type;
    case OrdinalField::stone_content: return stone_content;
    case OrdinalField::organic_matter: return organic_matter;
    case OrdinalField::caco3: return caco3;
  }
  return soil_type;
}

std::string Rejection::message() const {
  return fmt::format("{}={} violates {}", field, value, bound);
}

namespace {

std::optional<Rejection> check(std::string_view field, double v, Range r) {
  if (!std::isfinite(v)) return Rejection{std::string(field), format_number(v), "finite"};
  if (v < r.lo) return Rejection{std::string(field), format_number(v), "lower " + format_number(r.lo)};
  if (v > r.hi) return Rejection{std::string(field), format_number(v), "upper " + format_number(r.hi)};
  return std::nullopt;
}

// Configured range intersected with the hard type invariant.
Range clamp_range(Range configured, Range invariant) {
  return {std::max(configured.lo, invariant.lo), std::min(configured.hi, invariant.hi)};
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::optional<Rejection> validate(const SoilRecord& r, const ValidationConfig& cfg) {
  if (r.zone_id.empty()) return Rejection{"zone_id", "", "non-empty"};
  if (auto e = check("p", r.p, clamp_range(cfg.p, {0, kInf}))) return e;
  if (auto e = check("k", r.k, clamp_range(cfg.k, {0, kInf}))) return e;
  if (auto e = check("mg", r.mg, clamp_range(cfg.mg, {0, kInf}))) return e;
  if (auto e = check("ph", r.ph, clamp_range(cfg.ph, {0, 14}))) return e;
  for (auto f : kOrdinalFields) {
    if (!cfg.ordinals.contains(f, r.ordinal(f)))
      return Rejection{std::string(ordinal_field_name(f)), r.ordinal(f), "category"};
  }
  return std::nullopt;
}

std::optional<Rejection> validate(const WeatherDaily& r, const ValidationConfig& cfg) {
  if (r.zone_id.empty()) return Rejection{"zone_id", "", "non-empty"};
  if (!r.date.ok()) return Rejection{"date", format_date(r.date), "valid date"};
  if (auto e = check("t_min", r.t_min, cfg.temperature)) return e;
  if (auto e = check("t_max", r.t_max, cfg.temperature)) return e;
  if (r.t_min > r.t_max)
    return Rejection{"t_min", format_number(r.t_min), "t_min <= t_max " + format_number(r.t_max)};
  if (auto e = check("precip", r.precip, clamp_range(cfg.precip, {0, kInf}))) return e;
  if (auto e = check("solar", r.solar, clamp_range(cfg.solar, {0, kInf}))) return e;
  if (auto e = check("humidity", r.humidity, clamp_range(cfg.humidity, {0, 100}))) return e;
  return std::nullopt;
}

std::optional<Rejection> validate(const CropRecord& r, const ValidationConfig& cfg) {
  if (r.zone_id.empty()) return Rejection{"zone_id", "", "non-empty"};
  if (!r.sowing_date.ok()) return Rejection{"sowing_date", format_date(r.sowing_date), "valid date"};
  if (!r.harvest_date.ok())
    return Rejection{"harvest_date", format_date(r.harvest_date), "valid date"};
  if (!(r.sowing_date < r.harvest_date))
    return Rejection{"harvest_date", format_date(r.harvest_date),
                     "after sowing_date " + format_date(r.sowing_date)};
  if (auto e = check("yield_t_ha", r.yield_t_ha, cfg.yield)) return e;
  return std::nullopt;
}

}  // namespace cropyield
