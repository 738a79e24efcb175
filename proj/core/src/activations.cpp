#include "hdmf/activations.hpp"

#include <cmath>
#include <random>

#include "hdmf/error.hpp"

namespace hdmf {
namespace {

fs::path activation_path(const fs::path& dir, const std::string& subject, const std::string& event) {
  return dir / ("act_" + subject + "_" + event + ".dmat");
}

}  // namespace

void write_activations(const ActivationSet& set, const std::vector<std::string>& subject_ids, const fs::path& dir) {
  if (set.maps.size() != subject_ids.size()) throw DataError("write_activations: one map set per subject expected");
  fs::create_directories(dir);
  for (std::size_t i = 0; i < subject_ids.size(); ++i) {
    if (set.maps[i].rows() != static_cast<Eigen::Index>(set.events.size())) {
      throw DataError("write_activations: subject '" + subject_ids[i] + "' has the wrong number of events");
    }
    for (std::size_t e = 0; e < set.events.size(); ++e) {
      store_matrix(set.maps[i].row(static_cast<Eigen::Index>(e)), activation_path(dir, subject_ids[i], set.events[e]));
    }
  }
  std::string names;
  for (std::size_t e = 0; e < set.events.size(); ++e) names += (e ? "," : "") + set.events[e];
  MetaFile meta;
  meta.set("events", names);
  meta.write(dir / "events.meta");
}

std::vector<std::string> read_event_manifest(const fs::path& path) {
  const auto meta = MetaFile::read(path);
  auto events = split_list(meta.require("events"));
  if (events.empty()) throw FormatError(path.string() + ": no events listed");
  return events;
}

ActivationSet read_activations(const fs::path& dir, const std::vector<std::string>& subject_ids, std::size_t voxels,
                               const fs::path& manifest) {
  ActivationSet set;
  set.events = read_event_manifest(manifest.empty() ? dir / "events.meta" : manifest);
  std::vector<std::string> missing;
  for (const auto& id : subject_ids) {
    for (const auto& ev : set.events) {
      const auto p = activation_path(dir, id, ev);
      if (!fs::exists(p)) missing.push_back(p.filename().string());
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("missing activation files in '" + dir.string() + "': " + list);
  }
  const auto E = static_cast<Eigen::Index>(set.events.size());
  for (const auto& id : subject_ids) {
    Matrix maps(E, static_cast<Eigen::Index>(voxels));
    for (Eigen::Index e = 0; e < E; ++e) {
      const auto p = activation_path(dir, id, set.events[static_cast<std::size_t>(e)]);
      const Matrix m = load_matrix(p);
      if (m.size() != static_cast<Eigen::Index>(voxels)) {
        throw DataError(p.filename().string() + ": expected " + std::to_string(voxels) + " values, got " +
                        std::to_string(m.size()));
      }
      maps.row(e) = m.reshaped<Eigen::RowMajor>().transpose();
    }
    set.maps.push_back(std::move(maps));
  }
  return set;
}

ActivationSet synthetic_activations(const SyntheticGroundTruth& truth, std::size_t subjects, std::size_t events,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int h = static_cast<int>(truth.group_layers.size());
  std::vector<Matrix> weights;
  for (int j = 0; j < h; ++j) {
    const auto K = truth.group_layers[static_cast<std::size_t>(j)].rows();
    Matrix w(static_cast<Eigen::Index>(events), K);
    for (Eigen::Index a = 0; a < w.size(); ++a) w.data()[a] = normal(rng);
    weights.push_back(std::move(w));
  }
  ActivationSet set;
  for (std::size_t e = 0; e < events; ++e) set.events.push_back("event" + std::to_string(e + 1));
  for (std::size_t i = 0; i < subjects; ++i) {
    Matrix act = weights[0] * truth.subject_scale_map(i, 0);
    for (int j = 1; j < h; ++j) act += weights[static_cast<std::size_t>(j)] * truth.subject_scale_map(i, j);
    const double rms = std::sqrt(act.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(act.size(), 1)));
    for (Eigen::Index a = 0; a < act.size(); ++a) act.data()[a] += 0.05 * rms * normal(rng);
    set.maps.push_back(std::move(act));
  }
  return set;
}

}  // namespace hdmf
