// predism: command-line front end for the damage forecasting pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "predism/config.hpp"
#include "predism/damagemap.hpp"
#include "predism/dataset.hpp"
#include "predism/error.hpp"
#include "predism/hazard.hpp"
#include "predism/pipeline.hpp"
#include "predism/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace predism;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HazardFlags {
  std::array<std::optional<double>, kHazardAttributeCount> values{};

  void attach(CLI::App* cmd) {
    for (HazardAttribute a : kAllHazardAttributes) {
      std::string flag = "--" + std::string(to_string(a));
      std::replace(flag.begin() + 2, flag.end(), '_', '-');
      cmd->add_option(flag, values[index_of(a)], "hazard attribute " + std::string(to_string(a)));
    }
  }

  std::optional<HazardAttributes> attributes() const {
    HazardAttributes attrs;
    attrs.values = values;
    if (!attrs.any()) return std::nullopt;
    return attrs;
  }
};

struct CommonFlags {
  std::string config_path;
  std::optional<int> chip_size;
  std::optional<double> tau;
  std::string model;

  void attach(CLI::App* cmd, bool with_model) {
    cmd->add_option("--config", config_path, "JSON config file (overrides $PREDISM_CONFIG)");
    cmd->add_option("--chip-size", chip_size, "chip edge length in pixels");
    cmd->add_option("--tau", tau, "confidence threshold for a classified prediction");
    if (with_model) cmd->add_option("--model", model, "trained model file");
  }

  AppConfig resolve() const {
    AppConfig config = load_config(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
    if (chip_size) config.chip_size = *chip_size;
    if (tau) config.confidence_threshold = *tau;
    if (!model.empty()) config.model_path = model;
    validate(config);
    return config;
  }
};

std::vector<HazardLevel> parse_levels(const std::string& text) {
  std::vector<HazardLevel> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      levels.emplace_back(std::stoi(item));
    } catch (const std::logic_error&) {
      throw UsageError("--levels expects comma-separated integers, got '" + text + "'");
    }
  }
  if (levels.empty()) throw UsageError("--levels must not be empty");
  return levels;
}

struct SceneInputs {
  Scene scene;
  LabelDocument labels;
  std::vector<Footprint> footprints;
};

SceneInputs load_inputs(const std::string& scene_path, const std::string& labels_path) {
  SceneInputs in;
  in.scene = load_scene(scene_path);
  in.labels = parse_label_document(read_text_file(labels_path));
  in.footprints = footprints_of(in.labels);
  return in;
}

int run_ingest(const std::string& data, const std::string& out) {
  const EventCatalog catalog = build_catalog(data);
  json types = json::object();
  std::size_t unclassified = 0;
  for (const auto& [type, events] : catalog.groups) {
    json list = json::array();
    for (const auto& [id, event] : events) {
      std::size_t dropped = 0;
      for (const auto& scene : event.scenes) {
        for (const auto& b : scene.buildings) dropped += b.damage == DamageClass::Unclassified;
      }
      unclassified += dropped;
      list.push_back({{"event", id}, {"scenes", event.scenes.size()}, {"buildings", event.building_count()},
                      {"unclassified", dropped}});
    }
    types[std::string(to_string(type))] = list;
  }
  const json summary = {{"disaster_types", types},
                        {"events", catalog.event_count()},
                        {"buildings", catalog.building_count()},
                        {"unclassified", unclassified},
                        {"training_buildings", catalog.building_count() - unclassified}};
  if (!out.empty()) write_text_file(fs::path(out) / "catalog.json", summary.dump(2));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

LossKind parse_loss(const std::string& text) {
  const std::string key = normalize_token(text);
  if (key == "ce" || key == "crossentropy") return LossKind::CrossEntropy;
  if (key == "ordinalce" || key == "ordinalcrossentropy") return LossKind::OrdinalCrossEntropy;
  throw UsageError("--loss must be ce or ordinal-ce");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"predism: per-building damage forecasts for hypothetical hazards"};
  app.require_subcommand(1);
  CommonFlags common;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "build and summarise an event catalog");
  std::string data_root, out_dir;
  ingest->add_option("--data", data_root, "dataset root holding events/")->required();
  ingest->add_option("--out", out_dir, "write catalog.json here");

  // hazard-score
  auto* hazard_cmd = app.add_subcommand("hazard-score", "overall hazard level from impact attributes");
  HazardFlags hazard_flags;
  hazard_flags.attach(hazard_cmd);
  bool hazard_json = false;
  hazard_cmd->add_flag("--json", hazard_json, "print per-attribute levels as JSON");
  hazard_cmd->add_option("--config", common.config_path, "JSON config file");

  // train
  auto* train_cmd = app.add_subcommand("train", "fit reference heads on a labeled catalog");
  std::string loss = "ce", head = "ordinal";
  std::uint64_t seed = 0;
  double ratio = 0.8;
  int epochs = 20, batch_size = 1;
  train_cmd->add_option("--data", data_root, "dataset root holding events/");
  train_cmd->add_option("--loss", loss, "ce | ordinal-ce");
  train_cmd->add_option("--head", head, "ordinal | softmax");
  train_cmd->add_option("--seed", seed, "split and shuffle seed");
  train_cmd->add_option("--ratio", ratio, "training fraction per disaster type");
  train_cmd->add_option("--epochs", epochs, "epochs");
  train_cmd->add_option("--batch-size", batch_size, "examples per optimiser step");
  train_cmd->add_option("--out", out_dir, "output directory")->default_val(".");
  common.attach(train_cmd, false);

  // predict / sweep share inputs
  std::string scene_path, labels_path, type_name, levels_text, map_path;
  std::optional<int> level;
  auto* predict_cmd = app.add_subcommand("predict", "damage map for one hypothetical hazard");
  predict_cmd->add_option("--scene", scene_path, "pre-event scene PNG")->required();
  predict_cmd->add_option("--labels", labels_path, "footprint label JSON")->required();
  predict_cmd->add_option("--type", type_name, "disaster type")->required();
  predict_cmd->add_option("--level", level, "hazard level 1-5 (else derived from attributes)");
  predict_cmd->add_option("--out", out_dir, "output directory")->default_val(".");
  HazardFlags predict_hazard;
  predict_hazard.attach(predict_cmd);
  common.attach(predict_cmd, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "damage maps across hazard levels");
  sweep_cmd->add_option("--scene", scene_path, "pre-event scene PNG")->required();
  sweep_cmd->add_option("--labels", labels_path, "footprint label JSON")->required();
  sweep_cmd->add_option("--type", type_name, "disaster type")->required();
  sweep_cmd->add_option("--levels", levels_text, "comma-separated hazard levels")->default_val("1,2,3,4,5");
  sweep_cmd->add_option("--out", out_dir, "output directory")->required();
  HazardFlags sweep_hazard;
  sweep_hazard.attach(sweep_cmd);
  common.attach(sweep_cmd, true);

  auto* render_cmd = app.add_subcommand("render", "render a damage map over its scene");
  std::string render_out;
  render_cmd->add_option("--scene", scene_path, "scene PNG")->required();
  render_cmd->add_option("--labels", labels_path, "footprint label JSON")->required();
  render_cmd->add_option("--map", map_path, "damage map JSON")->required();
  render_cmd->add_option("--out", render_out, "output PNG")->required();
  render_cmd->add_option("--config", common.config_path, "JSON config file (palette)");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a damage map against gold labels");
  eval_cmd->add_option("--map", map_path, "damage map JSON")->required();
  eval_cmd->add_option("--labels", labels_path, "gold label JSON")->required();
  eval_cmd->add_option("--out", out_dir, "write report.json here");

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API");
  std::string listen, artifact_dir;
  serve_cmd->add_option("--listen", listen, "host:port");
  serve_cmd->add_option("--artifact-dir", artifact_dir, "where sweep artifacts are stored");
  common.attach(serve_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (ingest->parsed()) return run_ingest(data_root, out_dir);

    if (hazard_cmd->parsed()) {
      const auto attrs = hazard_flags.attributes();
      if (!attrs) throw UsageError("give at least one hazard attribute, e.g. --fatality 15000");
      const AppConfig config = load_config(common.config_path.empty() ? std::nullopt : std::optional<fs::path>(common.config_path));
      const ThresholdTable table = load_thresholds(config.threshold_overrides);
      const HazardLevel overall = overall_level(*attrs, table);
      if (hazard_json) {
        json per = json::object();
        const auto levels = attribute_levels(*attrs, table);
        for (HazardAttribute a : kAllHazardAttributes) {
          if (levels[index_of(a)]) per[std::string(to_string(a))] = *levels[index_of(a)];
        }
        std::cout << json{{"per_attribute_levels", per}, {"overall", overall.value()}}.dump() << "\n";
      } else {
        std::cout << overall.value() << "\n";
      }
      return 0;
    }

    if (train_cmd->parsed()) {
      const AppConfig config = common.resolve();
      const fs::path root = data_root.empty() ? config.data_root : fs::path(data_root);
      if (root.empty()) throw UsageError("--data is required (or data_root in the config)");
      TrainConfig tc;
      tc.loss = parse_loss(loss);
      tc.seed = seed;
      tc.epochs = epochs;
      tc.batch_size = batch_size;
      const std::string head_key = normalize_token(head);
      if (head_key != "ordinal" && head_key != "softmax") throw UsageError("--head must be ordinal or softmax");
      const EventCatalog catalog = build_catalog(root);
      const CatalogTraining result = train_catalog(catalog, head_key == "ordinal" ? HeadKind::Ordinal : HeadKind::Softmax,
                                                   tc, ratio, config.chip_size, load_thresholds(config.threshold_overrides));
      write_text_file(fs::path(out_dir) / "model.json", to_json(result.model).dump(2));
      write_text_file(fs::path(out_dir) / "loss_history.json", result.report.dump(2));
      for (const auto& [type, r] : result.report.items()) {
        if (r.contains("skipped")) {
          std::cerr << type << ": skipped (" << r["skipped"].get<std::string>() << ")\n";
        } else {
          std::cout << type << ": train accuracy " << r["train_accuracy"].get<double>() << ", validation accuracy "
                    << r["validation_accuracy"].get<double>() << "\n";
        }
      }
      return 0;
    }

    if (predict_cmd->parsed()) {
      const AppConfig config = common.resolve();
      const Model model = build_model(config);
      const SceneInputs in = load_inputs(scene_path, labels_path);
      HazardInput hazard;
      hazard.attributes = predict_hazard.attributes();
      if (level) hazard.level = HazardLevel(*level);
      if (!hazard.level && !hazard.attributes) throw UsageError("give --level or at least one hazard attribute");
      const DamageMap map = predict_scene(in.scene, in.footprints, parse_disaster_type(type_name), hazard, model);
      const fs::path out(out_dir);
      write_text_file(out / (in.scene.scene_id + "_damage_map.json"), to_json(map).dump(2));
      if (in.scene.geo_bounds) {
        write_text_file(out / (in.scene.scene_id + ".geojson"),
                        to_geojson(map, in.footprints, in.scene.geo_bounds, in.scene.pixels.width(), in.scene.pixels.height()));
      }
      write_png(out / (in.scene.scene_id + "_render.png"), render_map(map, in.scene, in.footprints, model.palette));
      std::cout << to_json(map).dump() << "\n";
      return 0;
    }

    if (sweep_cmd->parsed()) {
      const AppConfig config = common.resolve();
      const auto levels = parse_levels(levels_text);
      const Model model = build_model(config);
      const SceneInputs in = load_inputs(scene_path, labels_path);
      if (!in.scene.geo_bounds) throw Error(ErrorCode::MissingGeoBounds, "sweep needs a <scene>.geo.json sidecar");
      const auto maps = sweep(in.scene, in.footprints, parse_disaster_type(type_name), levels, model, sweep_hazard.attributes());
      const json manifest = write_sweep_artifacts(out_dir, maps, in.scene, in.footprints, model.palette);
      std::cout << manifest.dump(2) << "\n";
      return 0;
    }

    if (render_cmd->parsed()) {
      const AppConfig config = load_config(common.config_path.empty() ? std::nullopt : std::optional<fs::path>(common.config_path));
      const SceneInputs in = load_inputs(scene_path, labels_path);
      const DamageMap map = damage_map_from_json(json::parse(read_text_file(map_path)));
      write_png(render_out, render_map(map, in.scene, in.footprints, palette_with_overrides(config.palette_overrides)));
      return 0;
    }

    if (eval_cmd->parsed()) {
      const DamageMap map = damage_map_from_json(json::parse(read_text_file(map_path)));
      const auto gold = parse_label_file(read_text_file(labels_path));
      const json report = to_json(evaluate(map, gold));
      if (!out_dir.empty()) write_text_file(fs::path(out_dir) / "report.json", report.dump(2));
      std::cout << report.dump(2) << "\n";
      return 0;
    }

    if (serve_cmd->parsed()) {
      AppConfig config = common.resolve();
      if (!listen.empty()) config.listen = listen;
      if (!artifact_dir.empty()) config.artifact_dir = artifact_dir;
      validate(config);
      std::cerr << "listening on " << config.listen << "\n";
      serve(config);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? 1 : 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
