#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "predism/config.hpp"
#include "predism/damagemap.hpp"
#include "predism/dataset.hpp"
#include "predism/trainer.hpp"

namespace predism {

using TrainedHead = std::variant<OrdinalHead, SoftmaxHead>;

/// Trained reference heads, as stored in a model file.
struct ModelFile {
  int chip_size = kDefaultChipSize;
  std::map<DisasterType, TrainedHead> heads;
};

nlohmann::json to_json(const ModelFile& model);
/// Throws MalformedModel.
ModelFile model_file_from_json(const nlohmann::json& doc);
ModelFile load_model_file(const std::filesystem::path& path);

/// Resolves the backbone registry: declared backends first (reference kinds
/// take their trained head from the model file, or the untrained prior),
/// then any remaining model-file heads. With nothing declared or trained,
/// every disaster type gets the prior ordinal head. Throws
/// BackendStartupFailure when an external backend cannot be started.
Model build_model(const AppConfig& config);

/// Level used when a training scene carries no hazard context.
inline constexpr int kDefaultTrainingHazardLevel = 3;

/// Hazard level and attribute levels recorded for a training scene.
MetaVector scene_meta(const SceneRecord& scene, DisasterType type, const ThresholdTable& thresholds);

/// Chips, features and meta for labeled buildings; unclassified buildings
/// are dropped. Scenes are loaded once each.
std::vector<TrainingSample> build_samples(const EventCatalog& catalog, const std::vector<LabeledBuilding>& buildings,
                                          int chip_size, const ThresholdTable& thresholds,
                                          std::vector<DisasterType>* types = nullptr);

enum class HeadKind { Ordinal, Softmax };

struct CatalogTraining {
  ModelFile model;
  /// Per disaster type: epoch history and validation accuracy.
  nlohmann::json report;
};

/// Splits the catalog, then trains one head per disaster type that has at
/// least two distinct training levels. Throws DegenerateDataset when no type
/// qualifies.
CatalogTraining train_catalog(const EventCatalog& catalog, HeadKind head, const TrainConfig& config, double ratio,
                              int chip_size, const ThresholdTable& thresholds = ThresholdTable::defaults());

/// Footprints (ids and outlines) from a label document; damage subtypes are ignored.
std::vector<Footprint> footprints_of(const LabelDocument& doc);

}  // namespace predism
