#include "dlorenz/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace dlorenz {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_orbit_csv(std::ostream& os, std::span<const State> points) {
  os << "i,x,y,z\n";
  for (size_t i = 0; i < points.size(); ++i) {
    const State& p = points[i];
    os << i << ',' << g17(p[0]) << ',' << g17(p[1]) << ',' << g17(p[2]) << '\n';
  }
}

void write_records_csv(std::ostream& os, std::span<const EquilibriumRecord> recs) {
  os << "period,x,y,z,re1,im1,re2,im2,re3,im3,sigma,type_s,type_u,variant\n";
  for (const auto& r : recs) {
    const State& p = r.points.at(0);
    os << r.period << ',' << g17(p[0]) << ',' << g17(p[1]) << ',' << g17(p[2]);
    for (const auto& m : r.multipliers)
      os << ',' << g17(m.real()) << ',' << g17(m.imag());
    auto rep = classify(r);
    os << ',' << g17(r.saddle_value) << ',' << r.topo_type.first << ','
       << r.topo_type.second << ','
       << (rep.variant ? variant_name(*rep.variant) : "none") << '\n';
  }
}

void write_ppm(const std::filesystem::path& file, int width, int height,
               std::span<const unsigned char> rgb) {
  if (rgb.size() != static_cast<size_t>(width) * height * 3)
    throw error("ppm buffer size does not match dimensions");
  std::ofstream os(file, std::ios::binary);
  if (!os) throw error("cannot open " + file.string() + " for writing");
  os << "P6\n" << width << ' ' << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(rgb.data()),
           static_cast<std::streamsize>(rgb.size()));
  if (!os) throw error("short write to " + file.string());
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw error("cannot read " + file.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof(buf));
    std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string iso8601_utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_string(std::string_view text, std::string source_name) {
  ConfigFile cf;
  cf.source = source_name;
  cf.text = std::string(text);
  cf.sections.push_back({"", {}});

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        throw usage_error(source_name + ":" + std::to_string(line_no) +
                          ": malformed section header '" + std::string(t) + "'");
      cf.sections.push_back({std::string(trim(t.substr(1, t.size() - 2))), {}});
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string_view::npos)
      throw usage_error(source_name + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got '" + std::string(t) + "'");
    std::string key(trim(t.substr(0, eq)));
    std::string value(trim(t.substr(eq + 1)));
    if (key.empty())
      throw usage_error(source_name + ":" + std::to_string(line_no) + ": empty key");
    cf.sections.back().entries.push_back({key, value, line_no});
  }
  return cf;
}

ConfigFile ConfigFile::parse_file(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw usage_error("cannot read config file " + file.string());
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  ConfigFile cf = parse_string(text, file.string());
  cf.source = file;
  return cf;
}

}  // namespace dlorenz
