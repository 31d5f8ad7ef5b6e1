#include "predism/pipeline.hpp"

#include <exception>
#include <set>

#include "predism/error.hpp"

namespace predism {

using nlohmann::json;

json to_json(const ModelFile& model) {
  json backbones = json::object();
  for (const auto& [type, head] : model.heads) {
    backbones[std::string(to_string(type))] = std::visit([](const auto& h) { return to_json(h); }, head);
  }
  return {{"format", "predism-model"}, {"version", 1}, {"chip_size", model.chip_size}, {"backbones", backbones}};
}

ModelFile model_file_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "predism-model") {
    throw Error(ErrorCode::MalformedModel, "not a predism model file");
  }
  ModelFile model;
  model.chip_size = doc.value("chip_size", kDefaultChipSize);
  if (!doc.contains("backbones") || !doc["backbones"].is_object()) throw Error(ErrorCode::MalformedModel, "missing backbones");
  for (const auto& [name, head] : doc["backbones"].items()) {
    const DisasterType type = parse_disaster_type(name);
    const BackboneKind kind = parse_backbone_kind(head.value("kind", ""));
    if (kind == BackboneKind::ReferenceOrdinal) {
      model.heads.emplace(type, ordinal_head_from_json(head));
    } else if (kind == BackboneKind::ReferenceSoftmax) {
      model.heads.emplace(type, softmax_head_from_json(head));
    } else {
      throw Error(ErrorCode::MalformedModel, "model files hold reference heads only");
    }
  }
  return model;
}

ModelFile load_model_file(const std::filesystem::path& path) {
  try {
    return model_file_from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedModel, path.string() + ": " + e.what());
  }
}

namespace {

std::shared_ptr<const Backbone> reference_backbone(const TrainedHead& head) {
  if (const auto* ordinal = std::get_if<OrdinalHead>(&head)) return std::make_shared<OrdinalBackbone>(*ordinal);
  return std::make_shared<SoftmaxBackbone>(std::get<SoftmaxHead>(head));
}

}  // namespace

Model build_model(const AppConfig& config) {
  validate(config);
  ModelFile file;
  if (!config.model_path.empty()) file = load_model_file(config.model_path);

  auto registry = std::make_shared<BackboneRegistry>();
  for (const auto& [type, decl] : config.backends) {
    switch (decl.kind) {
      case BackboneKind::External: {
        std::unique_ptr<Transport> transport;
        if (!decl.command.empty()) {
          transport = std::make_unique<ProcessTransport>(decl.command);
        } else {
          transport = std::make_unique<HttpTransport>(decl.url);
        }
        registry->add(type, std::make_shared<ExternalBackbone>(std::move(transport), decl.timeout));
        break;
      }
      case BackboneKind::ReferenceOrdinal: {
        auto it = file.heads.find(type);
        const bool trained = it != file.heads.end() && std::holds_alternative<OrdinalHead>(it->second);
        registry->add(type, std::make_shared<OrdinalBackbone>(trained ? std::get<OrdinalHead>(it->second) : OrdinalHead::prior()));
        break;
      }
      case BackboneKind::ReferenceSoftmax: {
        auto it = file.heads.find(type);
        const bool trained = it != file.heads.end() && std::holds_alternative<SoftmaxHead>(it->second);
        registry->add(type, std::make_shared<SoftmaxBackbone>(trained ? std::get<SoftmaxHead>(it->second) : SoftmaxHead::prior()));
        break;
      }
    }
  }
  for (const auto& [type, head] : file.heads) {
    if (!registry->find(type)) registry->add(type, reference_backbone(head));
  }
  if (registry->empty()) {
    for (DisasterType type : kAllDisasterTypes) registry->add(type, std::make_shared<OrdinalBackbone>(OrdinalHead::prior()));
  }
  if (config.cooccurrence) registry->set_cooccurrence(*config.cooccurrence);

  Model model;
  model.registry = std::move(registry);
  model.thresholds = load_thresholds(config.threshold_overrides);
  model.chip_size = config.chip_size;
  model.confidence_threshold = config.confidence_threshold;
  model.palette = palette_with_overrides(config.palette_overrides);
  return model;
}

MetaVector scene_meta(const SceneRecord& scene, DisasterType type, const ThresholdTable& thresholds) {
  AttributeLevels attr_levels{};
  std::optional<HazardLevel> overall;
  if (scene.hazard_attributes && scene.hazard_attributes->any()) {
    attr_levels = attribute_levels(*scene.hazard_attributes, thresholds);
    overall = overall_level(*scene.hazard_attributes, thresholds);
  }
  if (scene.hazard_level) overall = HazardLevel(*scene.hazard_level);
  return meta_vector(type, overall.value_or(HazardLevel(kDefaultTrainingHazardLevel)), attr_levels);
}

std::vector<TrainingSample> build_samples(const EventCatalog& catalog, const std::vector<LabeledBuilding>& buildings,
                                          int chip_size, const ThresholdTable& thresholds,
                                          std::vector<DisasterType>* types) {
  const std::vector<LabeledBuilding> usable = filter_training(buildings);
  std::map<std::string, Scene> scenes;
  for (const auto& b : usable) {
    const std::string key = b.event_id + "/" + b.scene_id;
    if (scenes.count(key)) continue;
    const SceneRecord* record = catalog.find_scene(b.event_id, b.scene_id);
    if (!record) throw Error(ErrorCode::NotFound, "scene " + key + " is not in the catalog");
    Scene scene = load_scene(record->image_path);
    scene.scene_id = record->scene_id;
    scenes.emplace(key, std::move(scene));
  }

  std::vector<TrainingSample> samples(usable.size());
  const int n = static_cast<int>(usable.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      const LabeledBuilding& b = usable[k];
      const Scene& scene = scenes.at(b.event_id + "/" + b.scene_id);
      const BitMask mask = rasterize(b.footprint, scene.pixels.width(), scene.pixels.height());
      const Chip chip = extract_chip(scene, mask, chip_size);
      const SceneRecord* record = catalog.find_scene(b.event_id, b.scene_id);
      samples[k] = {join(extract_features(chip), scene_meta(*record, b.disaster_type, thresholds)), class_to_level(b.damage)};
    } catch (...) {
#pragma omp critical(predism_samples_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (types) {
    types->clear();
    for (const auto& b : usable) types->push_back(b.disaster_type);
  }
  return samples;
}

CatalogTraining train_catalog(const EventCatalog& catalog, HeadKind head_kind, const TrainConfig& config, double ratio,
                              int chip_size, const ThresholdTable& thresholds) {
  const DatasetSplit parts = split(catalog, ratio, config.seed);
  std::vector<DisasterType> train_types, val_types;
  const auto train_samples = build_samples(catalog, parts.train, chip_size, thresholds, &train_types);
  const auto val_samples = build_samples(catalog, parts.validation, chip_size, thresholds, &val_types);

  CatalogTraining out;
  out.model.chip_size = chip_size;
  out.report = json::object();
  for (DisasterType type : kAllDisasterTypes) {
    std::vector<TrainingSample> train_set, val_set;
    for (std::size_t k = 0; k < train_samples.size(); ++k) {
      if (train_types[k] == type) train_set.push_back(train_samples[k]);
    }
    for (std::size_t k = 0; k < val_samples.size(); ++k) {
      if (val_types[k] == type) val_set.push_back(val_samples[k]);
    }
    if (train_set.empty()) continue;
    std::set<int> levels;
    for (const auto& s : train_set) levels.insert(s.level);
    const std::string name(to_string(type));
    if (levels.size() < 2) {
      out.report[name] = {{"skipped", "fewer than two distinct damage levels"}};
      continue;
    }
    json history = json::array();
    auto record = [&](const auto& result) {
      for (const auto& e : result.history) {
        history.push_back({{"epoch", e.epoch}, {"learning_rate", e.learning_rate}, {"loss", e.mean_loss}, {"accuracy", e.accuracy}});
      }
      out.report[name] = {{"train_size", train_set.size()},
                          {"validation_size", val_set.size()},
                          {"train_accuracy", accuracy(result.head, std::span<const TrainingSample>(train_set))},
                          {"validation_accuracy", accuracy(result.head, std::span<const TrainingSample>(val_set))},
                          {"history", history}};
      out.model.heads.emplace(type, result.head);
    };
    if (head_kind == HeadKind::Ordinal) {
      record(train(OrdinalHead{}, train_set, config));
    } else {
      record(train(SoftmaxHead{}, train_set, config));
    }
  }
  if (out.model.heads.empty()) throw Error(ErrorCode::DegenerateDataset, "no disaster type has two distinct damage levels");
  return out;
}

std::vector<Footprint> footprints_of(const LabelDocument& doc) {
  std::vector<Footprint> out;
  out.reserve(doc.buildings.size());
  for (const auto& b : doc.buildings) out.push_back(b.footprint);
  return out;
}

}  // namespace predism
