#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdmf/io.hpp"
#include "hdmf/synthetic.hpp"

namespace hdmf {

/// Activation directory: events.meta (events=<name>,<name>,...) and one
/// 1 x S DMAT per subject and event, act_<subject>_<event>.dmat.
struct ActivationSet {
  std::vector<std::string> events;
  /// Per subject, E x S (one row per event, manifest order).
  std::vector<Matrix> maps;
};

void write_activations(const ActivationSet& set, const std::vector<std::string>& subject_ids, const fs::path& dir);

/// Reads the maps of the given subjects. The manifest defaults to
/// dir/events.meta. Every missing file is named in the thrown DataError.
ActivationSet read_activations(const fs::path& dir, const std::vector<std::string>& subject_ids,
                               std::size_t voxels, const fs::path& manifest = {});

std::vector<std::string> read_event_manifest(const fs::path& path);

/// Activation maps that mix the subject's true maps of every scale with
/// event weights shared across subjects, plus 5% white noise.
ActivationSet synthetic_activations(const SyntheticGroundTruth& truth, std::size_t subjects, std::size_t events,
                                    std::uint64_t seed);

}  // namespace hdmf
