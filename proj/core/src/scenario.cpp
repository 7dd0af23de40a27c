#include "dlpa/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dlpa/errors.hpp"

namespace dlpa {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_number_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty element in list for " + key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value for " + key + ": '" + item + "'");
    }
    if (used != item.size())
      throw ConfigError("bad numeric value for " + key + ": '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("missing value for " + key);
  return out;
}

double parse_number(const std::string& key, const std::string& value) {
  const auto list = parse_number_list(key, value);
  if (list.size() != 1)
    throw ConfigError(key + " expects a single value, got a list");
  return list.front();
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  if (v != std::floor(v))
    throw ConfigError(key + " must be an integer, got " + value);
  return static_cast<int>(v);
}

/// Broadcasts a single value to all groups; azimuth means additionally
/// shift by 180 degrees per group so two groups sit on opposite sides.
std::vector<double> per_group(const std::vector<double>& values, int groups,
                              const std::string& key, bool azimuth_offset) {
  if (static_cast<int>(values.size()) == groups) return values;
  if (values.size() == 1) {
    std::vector<double> out(groups, values[0]);
    if (azimuth_offset)
      for (int g = 0; g < groups; ++g) out[g] = values[0] + 180.0 * g;
    return out;
  }
  throw ConfigError(key + " needs 1 or " + std::to_string(groups) +
                    " values, got " + std::to_string(values.size()));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

int Scenario::num_users() const {
  int k = 0;
  for (const auto& g : groups) k += g.users;
  return k;
}

void Scenario::validate() const {
  if (!array.valid()) throw ConfigError("invalid array geometry");
  if (groups.empty()) throw ConfigError("scenario has no user groups");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    const std::string tag = "group " + std::to_string(g + 1);
    if (grp.users < 1) throw ConfigError(tag + ": users must be >= 1");
    if (grp.eaod_spread_deg < 0 || grp.aaod_spread_deg < 0)
      throw ConfigError(tag + ": angle spreads must be >= 0");
    if (grp.mean_eaod_deg - grp.eaod_spread_deg >= 179.0 ||
        grp.mean_eaod_deg + grp.eaod_spread_deg <= 1.0)
      throw ConfigError(tag + ": elevation support lies outside (0, 180)");
  }
  if (link.pathloss_exponent <= 0 || link.noise_power_mw <= 0 ||
      link.total_power_mw <= 0)
    throw ConfigError("link budget values must be strictly positive");
  if (link.num_paths < 1) throw ConfigError("num_paths must be >= 1");
}

std::string Scenario::canonical_text() const {
  std::ostringstream os;
  os << "mx = " << array.mx << "\n";
  os << "my = " << array.my << "\n";
  os << "antenna_spacing = " << format_double(array.spacing_d) << "\n";
  os << "groups = " << groups.size() << "\n";
  auto list = [&](const char* key, auto getter) {
    os << key << " = ";
    for (std::size_t g = 0; g < groups.size(); ++g)
      os << (g ? "," : "") << getter(groups[g]);
    os << "\n";
  };
  list("users_per_group", [](const auto& g) { return g.users; });
  list("mean_eaod_deg",
       [](const auto& g) { return format_double(g.mean_eaod_deg); });
  list("mean_aaod_deg",
       [](const auto& g) { return format_double(g.mean_aaod_deg); });
  list("eaod_spread_deg",
       [](const auto& g) { return format_double(g.eaod_spread_deg); });
  list("aaod_spread_deg",
       [](const auto& g) { return format_double(g.aaod_spread_deg); });
  os << "pathloss_exponent = " << format_double(link.pathloss_exponent)
     << "\n";
  os << "noise_power_mw = " << format_double(link.noise_power_mw) << "\n";
  os << "total_power_mw = " << format_double(link.total_power_mw) << "\n";
  os << "num_paths = " << link.num_paths << "\n";
  return os.str();
}

std::uint64_t Scenario::fingerprint() const {
  // FNV-1a, 64-bit.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_text()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

Scenario parse_scenario(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::string key, value;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      key = trim(line.substr(0, eq));
      value = trim(line.substr(eq + 1));
    } else {
      const auto sp = line.find_first_of(" \t");
      if (sp == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected 'key = value'");
      key = trim(line.substr(0, sp));
      value = trim(line.substr(sp + 1));
    }
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    if (!kv.emplace(key, value).second)
      throw ConfigError("duplicate key '" + key + "'");
  }

  static const char* known[] = {
      "mx", "my", "antenna_spacing", "groups", "users_per_group",
      "mean_eaod_deg", "mean_aaod_deg", "eaod_spread_deg", "aaod_spread_deg",
      "pathloss_exponent", "noise_psd_dbm_per_hz", "bandwidth_hz",
      "tx_power_dbm", "num_paths"};
  for (const auto& [key, value] : kv) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return key == k;
        }) == std::end(known))
      throw ConfigError("unknown scenario key '" + key + "'");
  }

  auto take = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_number(key, it->second);
  };
  auto take_int = [&](const char* key, int fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_int(key, it->second);
  };
  auto take_list = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? std::vector<double>{fallback}
                          : parse_number_list(key, it->second);
  };

  Scenario s;
  s.array.mx = take_int("mx", 16);
  s.array.my = take_int("my", 16);
  s.array.spacing_d = take("antenna_spacing", 0.5);

  const int groups = take_int("groups", 1);
  if (groups < 1) throw ConfigError("groups must be >= 1");

  if (!kv.count("users_per_group"))
    throw ConfigError("missing required key 'users_per_group'");
  const auto users =
      per_group(parse_number_list("users_per_group", kv["users_per_group"]),
                groups, "users_per_group", false);
  const auto eaod = per_group(take_list("mean_eaod_deg", 60.0), groups,
                              "mean_eaod_deg", false);
  const auto aaod = per_group(take_list("mean_aaod_deg", 21.0), groups,
                              "mean_aaod_deg", true);
  const auto espr = per_group(take_list("eaod_spread_deg", 15.0), groups,
                              "eaod_spread_deg", false);
  const auto aspr = per_group(take_list("aaod_spread_deg", 11.0), groups,
                              "aaod_spread_deg", false);

  s.groups.resize(groups);
  for (int g = 0; g < groups; ++g) {
    if (users[g] != std::floor(users[g]) || users[g] < 1)
      throw ConfigError("users_per_group entries must be positive integers");
    s.groups[g] = {eaod[g], aaod[g], espr[g], aspr[g],
                   static_cast<int>(users[g])};
  }

  s.link.pathloss_exponent = take("pathloss_exponent", 3.76);
  const double psd_dbm_hz = take("noise_psd_dbm_per_hz", -174.0);
  const double bandwidth_hz = take("bandwidth_hz", 1e4);
  if (bandwidth_hz <= 0) throw ConfigError("bandwidth_hz must be positive");
  s.link.noise_power_mw = dbm_to_mw(psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
  s.link.total_power_mw = dbm_to_mw(take("tx_power_dbm", 20.0));
  s.link.num_paths = take_int("num_paths", 20);

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace dlpa
