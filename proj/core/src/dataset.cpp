#include "dlpa/dataset.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dlpa/errors.hpp"
#include "dlpa/precoding.hpp"
#include "dlpa/rng.hpp"
#include "parallel.hpp"

namespace dlpa {

namespace {

constexpr char kDatasetMagic[8] = {'D', 'L', 'P', 'A', '-', 'D', 'S', '\0'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::size_t kHeaderBytes = 8 + 4 * 4 + 3 * 8;

std::size_t record_bytes(const DatasetHeader& h) {
  // seed + fitness + optimal powers + 4 scaling coefficients + features
  // + label.
  return 8 + 8 + h.num_users * 8 + 4 * 8 + h.feature_len * 8 +
         h.num_users * 8;
}

void append_pod(std::string& buf, const void* data, std::size_t len) {
  buf.append(static_cast<const char*>(data), len);
}

template <typename T>
void put(std::string& buf, const T& v) {
  append_pod(buf, &v, sizeof v);
}

std::string header_bytes(const DatasetHeader& h) {
  std::string buf;
  buf.reserve(kHeaderBytes);
  append_pod(buf, kDatasetMagic, sizeof kDatasetMagic);
  put(buf, h.version);
  put(buf, h.num_users);
  put(buf, h.num_chains);
  put(buf, h.feature_len);
  put(buf, h.sample_count);
  put(buf, h.scenario_fingerprint);
  put(buf, h.creation_seed);
  return buf;
}

std::string sample_bytes(const LabeledSample& s) {
  std::string buf;
  put(buf, s.aux.realization_seed);
  put(buf, s.aux.pso_fitness);
  for (Eigen::Index i = 0; i < s.aux.p_opt_mw.size(); ++i)
    put(buf, s.aux.p_opt_mw[i]);
  put(buf, s.features.scaling.alpha1);
  put(buf, s.features.scaling.alpha2);
  put(buf, s.features.scaling.alpha3);
  put(buf, s.features.scaling.alpha4);
  for (Eigen::Index i = 0; i < s.features.values.size(); ++i)
    put(buf, s.features.values[i]);
  for (Eigen::Index i = 0; i < s.label.size(); ++i) put(buf, s.label[i]);
  return buf;
}

class Cursor {
 public:
  Cursor(const char* data, std::size_t len) : data_(data), len_(len) {}
  template <typename T>
  T pod() {
    T v;
    if (at_ + sizeof v > len_) throw IoError("truncated dataset record");
    std::memcpy(&v, data_ + at_, sizeof v);
    at_ += sizeof v;
    return v;
  }
  Eigen::VectorXd vector(std::size_t n) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] =
        pod<double>();
    return v;
  }

 private:
  const char* data_;
  std::size_t len_;
  std::size_t at_ = 0;
};

LabeledSample parse_sample(const char* data, const DatasetHeader& h) {
  Cursor c(data, record_bytes(h));
  LabeledSample s;
  s.aux.realization_seed = c.pod<std::uint64_t>();
  s.aux.pso_fitness = c.pod<double>();
  s.aux.p_opt_mw = c.vector(h.num_users);
  s.features.scaling.alpha1 = c.pod<double>();
  s.features.scaling.alpha2 = c.pod<double>();
  s.features.scaling.alpha3 = c.pod<double>();
  s.features.scaling.alpha4 = c.pod<double>();
  s.features.values = c.vector(h.feature_len);
  s.label = c.vector(h.num_users);
  return s;
}

DatasetHeader parse_header(const std::string& buf,
                           const std::string& origin) {
  if (buf.size() < kHeaderBytes)
    throw IoError("file too short for a dataset header: " + origin);
  if (std::memcmp(buf.data(), kDatasetMagic, sizeof kDatasetMagic) != 0)
    throw IoError("not a dataset file: " + origin);
  Cursor c(buf.data() + sizeof kDatasetMagic,
           kHeaderBytes - sizeof kDatasetMagic);
  DatasetHeader h;
  h.version = c.pod<std::uint32_t>();
  if (h.version != kDatasetVersion)
    throw IoError("unsupported dataset format version " +
                  std::to_string(h.version) + " in " + origin);
  h.num_users = c.pod<std::uint32_t>();
  h.num_chains = c.pod<std::uint32_t>();
  h.feature_len = c.pod<std::uint32_t>();
  h.sample_count = c.pod<std::uint64_t>();
  h.scenario_fingerprint = c.pod<std::uint64_t>();
  h.creation_seed = c.pod<std::uint64_t>();
  if (h.num_users == 0 || h.feature_len !=
      static_cast<std::uint32_t>(feature_size(
          static_cast<int>(h.num_chains), static_cast<int>(h.num_users))))
    throw IoError("inconsistent dataset header in " + origin);
  return h;
}

LabeledSample generate_sample(const Scenario& scenario,
                              const RfDesign& design,
                              const PsoConfig& pso_cfg,
                              std::uint64_t realization_seed,
                              std::uint64_t pso_seed) {
  const ChannelRealization realization =
      sample_realization(scenario, realization_seed);
  const HybridPrecoder hp =
      complete_precoder(design, realization, scenario.link);

  PsoConfig cfg = pso_cfg;
  cfg.seed = pso_seed;
  const PsoResult pso = pso_optimize(hp.effective, hp.bb,
                                     scenario.link.noise_power_mw,
                                     scenario.link.total_power_mw, cfg);
  const PowerAllocation opt = scale_to_full_power(
      pso.best_raw, hp.bb, scenario.link.total_power_mw);

  LabeledSample s;
  s.features = build_features(hp.effective, hp.bb);
  s.label = scale_labels(opt.powers_mw);
  s.aux = {opt.powers_mw, pso.best_fitness, realization_seed};
  return s;
}

}  // namespace

Dataset generate_dataset(
    const Scenario& scenario, std::uint64_t count, const PsoConfig& pso_cfg,
    std::uint64_t base_seed, int workers,
    const std::function<void(std::uint64_t, std::uint64_t)>& progress) {
  scenario.validate();
  pso_cfg.validate();
  const RfDesign design = design_rf_stage(scenario);

  Dataset ds;
  ds.header.num_users = static_cast<std::uint32_t>(scenario.num_users());
  ds.header.num_chains = static_cast<std::uint32_t>(design.num_chains());
  ds.header.feature_len = static_cast<std::uint32_t>(
      feature_size(design.num_chains(), scenario.num_users()));
  ds.header.sample_count = count;
  ds.header.scenario_fingerprint = scenario.fingerprint();
  ds.header.creation_seed = base_seed;

  ds.samples.resize(count);
  std::atomic<std::uint64_t> done{0};
  detail::parallel_for_index(count, workers, [&](std::uint64_t i) {
    ds.samples[i] = generate_sample(scenario, design, pso_cfg,
                                    base_seed + 1 + i, pso_cfg.seed + 1 + i);
    const std::uint64_t n = ++done;
    if (progress && (n % 100 == 0 || n == count)) progress(n, count);
  });
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());

  uLong crc = crc32(0L, Z_NULL, 0);
  auto emit = [&](const std::string& chunk) {
    out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(chunk.data()),
                static_cast<uInt>(chunk.size()));
  };
  DatasetHeader header = dataset.header;
  header.sample_count = dataset.samples.size();
  emit(header_bytes(header));
  for (const LabeledSample& s : dataset.samples) emit(sample_bytes(s));
  const auto trailer = static_cast<std::uint32_t>(crc);
  out.write(reinterpret_cast<const char*>(&trailer), sizeof trailer);
  if (!out) throw IoError("failed writing " + path.string());
}

DatasetLoadResult load_dataset(
    const std::filesystem::path& path,
    std::optional<std::uint64_t> expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());

  DatasetLoadResult result;
  DatasetHeader& h = result.dataset.header;
  h = parse_header(buf, path.string());

  const std::size_t rec = record_bytes(h);
  const std::size_t expect = kHeaderBytes + h.sample_count * rec + 4;
  if (buf.size() < expect)
    throw IoError("truncated dataset (have " + std::to_string(buf.size()) +
                  " bytes, need " + std::to_string(expect) + "): " +
                  path.string());
  if (buf.size() > expect)
    throw IoError("trailing bytes in dataset: " + path.string());

  const uLong crc =
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(buf.data()),
            static_cast<uInt>(buf.size() - 4));
  std::uint32_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - 4, 4);
  if (stored != static_cast<std::uint32_t>(crc))
    throw IoError("dataset checksum mismatch: " + path.string());

  result.dataset.samples.reserve(h.sample_count);
  for (std::uint64_t i = 0; i < h.sample_count; ++i)
    result.dataset.samples.push_back(
        parse_sample(buf.data() + kHeaderBytes + i * rec, h));

  if (expected_fingerprint &&
      *expected_fingerprint != h.scenario_fingerprint)
    result.fingerprint_mismatch = true;
  return result;
}

std::uint64_t resume_dataset_file(
    const std::filesystem::path& path, const Scenario& scenario,
    std::uint64_t count, const PsoConfig& pso_cfg, std::uint64_t base_seed,
    int workers,
    const std::function<void(std::uint64_t, std::uint64_t)>& progress) {
  std::uint64_t salvaged = 0;
  Dataset ds;

  std::ifstream in(path, std::ios::binary);
  if (in) {
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    in.close();
    const DatasetHeader h = parse_header(buf, path.string());
    if (h.scenario_fingerprint != scenario.fingerprint() ||
        h.sample_count != count || h.creation_seed != base_seed)
      throw ValidationError(
          "existing file was generated with different settings; refusing "
          "to resume: " + path.string());
    const std::size_t rec = record_bytes(h);
    salvaged = std::min<std::uint64_t>(
        count, buf.size() < kHeaderBytes + 4
                   ? 0
                   : (buf.size() - kHeaderBytes) / rec);
    ds.header = h;
    ds.samples.resize(count);
    for (std::uint64_t i = 0; i < salvaged; ++i) {
      ds.samples[i] = parse_sample(buf.data() + kHeaderBytes + i * rec, h);
      if (ds.samples[i].aux.realization_seed != base_seed + 1 + i)
        throw IoError("corrupt record " + std::to_string(i) +
                      " while resuming " + path.string());
    }
  }

  if (salvaged == 0) {
    ds = generate_dataset(scenario, count, pso_cfg, base_seed, workers,
                          progress);
  } else {
    const RfDesign design = design_rf_stage(scenario);
    std::atomic<std::uint64_t> done{salvaged};
    detail::parallel_for_index(
        count - salvaged, workers, [&](std::uint64_t j) {
          const std::uint64_t i = salvaged + j;
          ds.samples[i] =
              generate_sample(scenario, design, pso_cfg, base_seed + 1 + i,
                              pso_cfg.seed + 1 + i);
          const std::uint64_t n = ++done;
          if (progress && (n % 100 == 0 || n == count)) progress(n, count);
        });
  }
  save_dataset(path, ds);
  return salvaged;
}

SplitIndices split_indices(std::uint64_t count, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  std::vector<std::uint64_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::uint64_t i = count; i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_train = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(count) * train_fraction));
  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train, order.end());
  return split;
}

void validate_dataset(const Dataset& dataset) {
  const DatasetHeader& h = dataset.header;
  if (dataset.samples.size() != h.sample_count)
    throw ValidationError("sample count does not match header");
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const LabeledSample& s = dataset.samples[i];
    const std::string tag = "sample " + std::to_string(i);
    if (s.features.values.size() != static_cast<Eigen::Index>(h.feature_len))
      throw ValidationError(tag + ": feature length mismatch");
    if (s.label.size() != static_cast<Eigen::Index>(h.num_users) ||
        s.aux.p_opt_mw.size() != static_cast<Eigen::Index>(h.num_users))
      throw ValidationError(tag + ": label length mismatch");
    if (s.features.values.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
      throw ValidationError(tag + ": feature outside [-1, 1]");
    const double label_max = s.label.maxCoeff();
    if ((s.label.array() <= 0.0).any() || std::abs(label_max - 1.0) > 1e-12)
      throw ValidationError(tag + ": labels must lie in (0, 1] with max 1");
  }
}

void dataset_matrices(const Dataset& dataset,
                      const std::vector<std::uint64_t>& indices,
                      Eigen::MatrixXd* features, Eigen::MatrixXd* labels) {
  const auto l0 = static_cast<Eigen::Index>(dataset.header.feature_len);
  const auto k = static_cast<Eigen::Index>(dataset.header.num_users);
  features->resize(l0, static_cast<Eigen::Index>(indices.size()));
  labels->resize(k, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const LabeledSample& s = dataset.samples.at(indices[j]);
    features->col(static_cast<Eigen::Index>(j)) = s.features.values;
    labels->col(static_cast<Eigen::Index>(j)) = s.label;
  }
}

void write_dataset_sidecar(const std::filesystem::path& dataset_path,
                           const Scenario& scenario, const PsoConfig& pso_cfg,
                           std::uint64_t base_seed, double elapsed_seconds) {
  std::filesystem::path meta = dataset_path;
  meta += ".meta";
  std::ofstream out(meta, std::ios::trunc);
  if (!out) throw IoError("cannot write " + meta.string());
  out << "# dataset sidecar (informational; not covered by the\n"
         "# byte-determinism guarantee because of the timing line)\n";
  out << "base_seed = " << base_seed << "\n";
  out << "generation_seconds = " << elapsed_seconds << "\n";
  out << "pso_swarm_size = " << pso_cfg.swarm_size << "\n";
  out << "pso_max_iters = " << pso_cfg.max_iters << "\n";
  out << "pso_inertia = " << pso_cfg.inertia_start << " -> "
      << pso_cfg.inertia_end << "\n";
  out << "pso_c1 = " << pso_cfg.cognitive_c1 << "\n";
  out << "pso_c2 = " << pso_cfg.social_c2 << "\n";
  out << "pso_velocity_clamp = " << pso_cfg.velocity_clamp << "\n";
  out << "pso_stall_iters = " << pso_cfg.stall_iters << "\n";
  out << "pso_base_seed = " << pso_cfg.seed << "\n";
  out << "\n# scenario\n" << scenario.canonical_text();
}

}  // namespace dlpa
