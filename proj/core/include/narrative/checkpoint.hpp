#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "narrative/cnn.hpp"
#include "narrative/features.hpp"

namespace narrative {

/// Provenance recorded with a trained model; enough to rebuild the exact
/// data split and featurization for later evaluation runs.
struct TrainMeta {
  std::uint64_t seed = 0;  // aggregation + split + training seed
  std::array<double, 3> fractions = {0.86, 0.07, 0.07};
  int min_agreement = 2;
  bool drop_not_story = true;
};

/// Writes a checkpoint directory: manifest.json, vocab.txt, tagset.txt, and
/// one flat little-endian float32 array per parameter. The manifest records
/// shapes, per-file checksums, the vocabulary hash, and the label order.
void save_checkpoint(const CnnModel& model, const Vocabulary& vocab,
                     const PosTagset& tagset, const TrainMeta& meta,
                     const std::filesystem::path& dir);

struct LoadedCheckpoint {
  CnnModel model;
  Vocabulary vocab;
  PosTagset tagset;
  TrainMeta meta;
};

/// Round-trip exact: the loaded model produces bit-identical forward outputs.
/// Refuses to load on checksum/shape mismatches, and when `expected_vocab` is
/// given and its hash differs from the manifest's.
LoadedCheckpoint load_checkpoint(
    const std::filesystem::path& dir,
    const std::optional<Vocabulary>& expected_vocab = std::nullopt);

}  // namespace narrative
