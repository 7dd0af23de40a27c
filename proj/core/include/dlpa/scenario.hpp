#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dlpa/channel.hpp"

namespace dlpa {

/// Complete simulation scenario: array, user groups, link budget.
struct Scenario {
  ArrayGeometry array;
  std::vector<GroupAngularSupport> groups;
  LinkBudget link;

  int num_users() const;
  int num_groups() const { return static_cast<int>(groups.size()); }

  /// Throws ConfigError on any violated invariant (empty groups,
  /// non-positive powers, bad spreads, ...).
  void validate() const;

  /// Canonical flat key/value rendering; input order independent.
  std::string canonical_text() const;

  /// FNV-1a hash of canonical_text(); stored in dataset headers so a
  /// dataset can be matched against the scenario that produced it.
  std::uint64_t fingerprint() const;
};

/// Parses the flat key/value scenario format. One `key = value` pair per
/// line ('=' optional), '#' starts a comment. Unknown keys are errors.
///
/// Keys (defaults in parentheses):
///   mx, my                  antenna counts per axis   (16, 16)
///   antenna_spacing         in wavelengths            (0.5)
///   groups                  number of user groups     (1)
///   users_per_group         required; single value or comma list
///   mean_eaod_deg           (60) single value or per-group list
///   mean_aaod_deg           (21) single value or per-group list; a single
///                           value places group g at value + 180*(g-1)
///   eaod_spread_deg         (15) single value or per-group list
///   aaod_spread_deg         (11) single value or per-group list
///   pathloss_exponent       (3.76)
///   noise_psd_dbm_per_hz    (-174)
///   bandwidth_hz            (10000)
///   tx_power_dbm            (20)
///   num_paths               (20)
///
/// Angles are degrees, distances meters, powers dBm; conversion to
/// milliwatts happens here and nowhere else.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

}  // namespace dlpa
