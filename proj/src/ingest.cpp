#include "cropyield/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>

namespace cropyield {

void RejectionLog::add(std::string source, std::size_t line, std::string reason) {
  entries.push_back({std::move(source), line, std::move(reason)});
}

void RejectionLog::append(const RejectionLog& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

std::size_t RejectionLog::count_prefix(std::string_view prefix) const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [&](const LogEntry& e) {
    return std::string_view(e.reason).substr(0, prefix.size()) == prefix;
  }));
}

void RejectionLog::write_csv(std::ostream& out) const {
  out << kRejectionHeader << '\n';
  for (const auto& e : entries) {
    // reasons may contain commas; they are the last column, so quote them
    std::string reason = e.reason;
    std::replace(reason.begin(), reason.end(), '"', '\'');
    out << e.source << ',' << e.line << ",\"" << reason << "\"\n";
  }
}

void RejectionLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

struct RowError {
  std::string what;
};

double to_double(std::string_view s, std::string_view column) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw RowError{fmt::format("bad number in {} '{}'", column, s)};
  return v;
}

int to_int(std::string_view s, std::string_view column) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw RowError{fmt::format("bad integer in {} '{}'", column, s)};
  return v;
}

Date to_date(std::string_view s, std::string_view column) {
  auto d = parse_date(s);
  if (!d) throw RowError{fmt::format("bad date in {} '{}'", column, s)};
  return *d;
}

// Drives one CSV file: header check, line numbering, field-count check.
// `row` returns the parsed fields or throws RowError.
template <typename Fn>
void for_each_row(std::istream& in, const std::string& source, std::string_view header,
                  RejectionLog& log, Fn&& row) {
  const auto expected = split(header);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (!have_header) {
      if (lineno == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
      if (split(view) != expected)
        throw Error(fmt::format("{}: unexpected header '{}' (expected '{}')", source, view, header));
      have_header = true;
      continue;
    }
    if (trim(view).empty()) continue;
    auto fields = split(view);
    if (fields.size() != expected.size()) {
      log.add(source, lineno,
              fmt::format("rejected: expected {} fields, got {}", expected.size(), fields.size()));
      continue;
    }
    try {
      row(fields, lineno);
    } catch (const RowError& e) {
      log.add(source, lineno, "rejected: " + e.what);
    }
  }
  if (!have_header) throw Error(source + ": missing header");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

Parsed<SoilRecord> parse_soil(std::istream& in, std::string source, const ValidationConfig& cfg) {
  Parsed<SoilRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_row(in, source, kSoilHeader, out.log, [&](const auto& f, std::size_t lineno) {
    SoilRecord r;
    r.zone_id = std::string(f[0]);
    r.test_year = to_int(f[1], "test_year");
    r.p = to_double(f[2], "p_mg_l");
    r.k = to_double(f[3], "k_mg_l");
    r.mg = to_double(f[4], "mg_mg_l");
    r.ph = to_double(f[5], "ph");
    r.soil_type = std::string(f[6]);
    r.stone_content = std::string(f[7]);
    r.organic_matter = std::string(f[8]);
    r.caco3 = std::string(f[9]);
    if (auto rej = validate(r, cfg)) throw RowError{rej->message()};
    auto key = r.zone_id + '|' + std::to_string(r.test_year);
    if (auto it = seen.find(key); it != seen.end()) {
      out.log.add(source, lineno,
                  fmt::format("duplicate: zone {} test_year {} first seen at line {}", r.zone_id,
                              r.test_year, it->second));
      return;
    }
    seen.emplace(std::move(key), lineno);
    out.records.push_back(std::move(r));
  });
  return out;
}

Parsed<WeatherDaily> parse_weather(std::istream& in, std::string source, const ValidationConfig& cfg) {
  Parsed<WeatherDaily> out;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_row(in, source, kWeatherHeader, out.log, [&](const auto& f, std::size_t lineno) {
    WeatherDaily r;
    r.zone_id = std::string(f[0]);
    r.date = to_date(f[1], "date");
    r.t_min = to_double(f[2], "t_min_c");
    r.t_max = to_double(f[3], "t_max_c");
    r.precip = to_double(f[4], "precip_mm");
    r.solar = to_double(f[5], "solar_mj_m2");
    r.humidity = to_double(f[6], "humidity_pct");
    if (auto rej = validate(r, cfg)) throw RowError{rej->message()};
    std::string key = r.zone_id;
    key += '|';
    key += f[1];
    if (auto it = seen.find(key); it != seen.end()) {
      out.log.add(source, lineno,
                  fmt::format("duplicate: zone {} date {} first seen at line {}", r.zone_id, f[1],
                              it->second));
      return;
    }
    seen.emplace(std::move(key), lineno);
    out.records.push_back(std::move(r));
  });
  return out;
}

Parsed<CropRecord> parse_crop(std::istream& in, std::string source, const ValidationConfig& cfg) {
  Parsed<CropRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_row(in, source, kCropHeader, out.log, [&](const auto& f, std::size_t lineno) {
    if (!iequals(f[2], "winter_wheat")) {
      out.log.add(source, lineno, fmt::format("filtered: crop {}", f[2]));
      return;
    }
    CropRecord r;
    r.zone_id = std::string(f[0]);
    r.year = to_int(f[1], "year");
    r.sowing_date = to_date(f[3], "sowing_date");
    r.harvest_date = to_date(f[4], "harvest_date");
    r.yield_t_ha = to_double(f[5], "yield_t_ha");
    if (auto rej = validate(r, cfg)) throw RowError{rej->message()};
    auto key = r.zone_id + '|' + std::to_string(r.year);
    if (auto it = seen.find(key); it != seen.end()) {
      out.log.add(source, lineno,
                  fmt::format("duplicate: zone {} year {} first seen at line {}", r.zone_id, r.year,
                              it->second));
      return;
    }
    seen.emplace(std::move(key), lineno);
    out.records.push_back(std::move(r));
  });
  return out;
}

Parsed<SoilRecord> parse_soil(const std::filesystem::path& path, const ValidationConfig& cfg) {
  auto in = open_input(path);
  return parse_soil(in, path.filename().string(), cfg);
}

Parsed<WeatherDaily> parse_weather(const std::filesystem::path& path, const ValidationConfig& cfg) {
  auto in = open_input(path);
  return parse_weather(in, path.filename().string(), cfg);
}

Parsed<CropRecord> parse_crop(const std::filesystem::path& path, const ValidationConfig& cfg) {
  auto in = open_input(path);
  return parse_crop(in, path.filename().string(), cfg);
}

std::optional<SoilRecord> carry_forward_soil(std::span<const SoilRecord> records,
                                             std::string_view zone_id, int year) {
  const SoilRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.zone_id != zone_id || r.test_year > year) continue;
    if (!best || r.test_year > best->test_year) best = &r;
  }
  if (!best) return std::nullopt;
  return *best;
}

SoilIndex::SoilIndex(std::span<const SoilRecord> records) {
  for (const auto& r : records) by_zone_[r.zone_id].push_back(r);
  for (auto& [zone, tests] : by_zone_) {
    std::stable_sort(tests.begin(), tests.end(),
                     [](const SoilRecord& a, const SoilRecord& b) { return a.test_year < b.test_year; });
  }
}

const SoilRecord* SoilIndex::lookup(std::string_view zone_id, int year) const {
  auto it = by_zone_.find(std::string(zone_id));
  if (it == by_zone_.end()) return nullptr;
  const auto& tests = it->second;
  auto pos = std::upper_bound(tests.begin(), tests.end(), year,
                              [](int y, const SoilRecord& r) { return y < r.test_year; });
  if (pos == tests.begin()) return nullptr;
  return &*std::prev(pos);
}

void write_soil_csv(std::ostream& out, std::span<const SoilRecord> records) {
  out << kSoilHeader << '\n';
  for (const auto& r : records) {
    out << r.zone_id << ',' << r.test_year << ',' << format_number(r.p) << ',' << format_number(r.k)
        << ',' << format_number(r.mg) << ',' << format_number(r.ph) << ',' << r.soil_type << ','
        << r.stone_content << ',' << r.organic_matter << ',' << r.caco3 << '\n';
  }
}

void write_weather_csv(std::ostream& out, std::span<const WeatherDaily> records) {
  out << kWeatherHeader << '\n';
  std::string line;
  for (const auto& r : records) {
    line.clear();
    line += r.zone_id;
    line += ',';
    line += format_date(r.date);
    for (double v : {r.t_min, r.t_max, r.precip, r.solar, r.humidity}) {
      line += ',';
      line += format_number(v);
    }
    line += '\n';
    out << line;
  }
}

void write_crop_csv(std::ostream& out, std::span<const CropRecord> records) {
  out << kCropHeader << '\n';
  for (const auto& r : records) {
    out << r.zone_id << ',' << r.year << ",winter_wheat," << format_date(r.sowing_date) << ','
        << format_date(r.harvest_date) << ',' << format_number(r.yield_t_ha) << '\n';
  }
}

IngestResult ingest_files(const std::filesystem::path& soil, const std::filesystem::path& weather,
                          const std::filesystem::path& crop, const ValidationConfig& cfg) {
  Parsed<SoilRecord> s;
  Parsed<WeatherDaily> w;
  Parsed<CropRecord> c;
  std::exception_ptr errors[3];
#pragma omp parallel sections
  {
#pragma omp section
    {
      try { s = parse_soil(soil, cfg); } catch (...) { errors[0] = std::current_exception(); }
    }
#pragma omp section
    {
      try { w = parse_weather(weather, cfg); } catch (...) { errors[1] = std::current_exception(); }
    }
#pragma omp section
    {
      try { c = parse_crop(crop, cfg); } catch (...) { errors[2] = std::current_exception(); }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  IngestResult out;
  out.data.soil = std::move(s.records);
  out.data.weather = std::move(w.records);
  out.data.crop = std::move(c.records);
  out.log.append(s.log);
  out.log.append(w.log);
  out.log.append(c.log);
  return out;
}

}  // namespace cropyield
