#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dlpa/features.hpp"
#include "dlpa/pso.hpp"
#include "dlpa/scenario.hpp"

namespace dlpa {

/// Provenance carried with every sample: the unscaled optimal powers,
/// the fitness the optimizer reached, and the seed that regenerates the
/// realization.
struct SampleAux {
  Eigen::VectorXd p_opt_mw;
  double pso_fitness = 0.0;
  std::uint64_t realization_seed = 0;
};

struct LabeledSample {
  FeatureVector features;
  Eigen::VectorXd label;  // scaled optimal powers, max exactly 1
  SampleAux aux;
};

struct DatasetHeader {
  std::uint32_t version = 1;
  std::uint32_t num_users = 0;
  std::uint32_t num_chains = 0;
  std::uint32_t feature_len = 0;
  std::uint64_t sample_count = 0;
  std::uint64_t scenario_fingerprint = 0;
  std::uint64_t creation_seed = 0;
};

struct Dataset {
  DatasetHeader header;
  std::vector<LabeledSample> samples;
};

/// Labels every realization i in [1, count] drawn from seed base_seed+i
/// with the swarm optimizer (its per-sample stream is pso_cfg.seed+i) and
/// assembles the feature/label pairs. The RF stage is designed once. The
/// `workers` argument parallelizes across samples without changing the
/// result. progress, if given, is called with (done, total).
Dataset generate_dataset(
    const Scenario& scenario, std::uint64_t count, const PsoConfig& pso_cfg,
    std::uint64_t base_seed, int workers = 1,
    const std::function<void(std::uint64_t, std::uint64_t)>& progress = {});

/// File layout: "DLPA-DS\0" magic, header fields, contiguous fixed-size
/// records (seed, fitness, optimal powers, scaling, features, label),
/// CRC-32 trailer. Little-endian throughout. Loading is fail-closed: a
/// truncated or corrupt file yields IoError, never a partial dataset.
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

struct DatasetLoadResult {
  Dataset dataset;
  /// Set when expected_fingerprint was given and does not match; the
  /// data is still returned (caller decides how loud to be).
  bool fingerprint_mismatch = false;
};

DatasetLoadResult load_dataset(const std::filesystem::path& path,
                               std::optional<std::uint64_t>
                                   expected_fingerprint = std::nullopt);

/// Completes a partially written dataset file: complete leading records
/// are kept (the header must match the requested scenario/shape), the
/// remaining samples are generated, and the result is byte-identical to
/// a fresh run. Returns the number of salvaged records.
std::uint64_t resume_dataset_file(
    const std::filesystem::path& path, const Scenario& scenario,
    std::uint64_t count, const PsoConfig& pso_cfg, std::uint64_t base_seed,
    int workers = 1,
    const std::function<void(std::uint64_t, std::uint64_t)>& progress = {});

/// Seeded shuffle-then-partition split; disjoint and exhaustive.
struct SplitIndices {
  std::vector<std::uint64_t> train;
  std::vector<std::uint64_t> validation;
};

SplitIndices split_indices(std::uint64_t count, double train_fraction,
                           std::uint64_t seed);

/// Re-checks every persisted invariant: feature range and scaling
/// attainment, label range with max exactly 1, length consistency.
/// Throws ValidationError naming the first offending sample.
void validate_dataset(const Dataset& dataset);

/// Column-stacked feature/label matrices for the given sample indices.
void dataset_matrices(const Dataset& dataset,
                      const std::vector<std::uint64_t>& indices,
                      Eigen::MatrixXd* features, Eigen::MatrixXd* labels);

/// Human-readable sidecar (scenario echo, optimizer echo, timing note)
/// written next to a generated dataset.
void write_dataset_sidecar(const std::filesystem::path& dataset_path,
                           const Scenario& scenario, const PsoConfig& pso_cfg,
                           std::uint64_t base_seed, double elapsed_seconds);

}  // namespace dlpa
