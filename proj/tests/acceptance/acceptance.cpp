// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <omp.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "predism/damagemap.hpp"
#include "predism/error.hpp"
#include "predism/pipeline.hpp"
#include "predism/service.hpp"
#include "synthetic.hpp"

using namespace predism;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// A criterion returns an empty string on success, otherwise what went wrong.
struct Criterion {
  std::string name;
  std::function<std::string()> check;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------- hazard

// Thresholds for levels 5, 4, 3, 2, 1 as published, one row per attribute in
// declaration order.
const std::array<std::array<double, 5>, 7> kPublished = {{
    {10000, 1000, 100, 10, 1},
    {100000, 10000, 1000, 100, 10},
    {500, 100, 50, 10, 1},
    {100, 10, 1, 0.1, 0.01},
    {100, 10, 1, 0.1, 0.01},
    {30, 14, 7, 3, 1},
    {30, 14, 7, 3, 1},
}};

double published(HazardAttribute a, int level) { return kPublished[index_of(a)][static_cast<std::size_t>(5 - level)]; }

std::string hazard_table() {
  const auto start = Clock::now();
  const ThresholdTable table = ThresholdTable::defaults();
  int pairs = 0;
  std::string failures;
  for (HazardAttribute a : kAllHazardAttributes) {
    for (int level = 2; level <= 5; ++level) {
      const double t = published(a, level);
      const int at = score_attribute(a, t, table).value();
      const int above = score_attribute(a, t * (1 + 1e-9), table).value();
      if (at != level - 1 || above != level) {
        failures += std::string(to_string(a)) + "@" + std::to_string(level) + " ";
      }
      ++pairs;
    }
  }
  const double elapsed = seconds_since(start);
  if (pairs != 28) return "expected 28 boundary pairs, checked " + std::to_string(pairs);
  if (!failures.empty()) return "wrong levels at " + failures;
  if (elapsed >= 1.0) return "took " + fmt(elapsed) + " s";
  return "";
}

// Value that scores exactly `level` under the published table.
double value_for(HazardAttribute a, int level) {
  if (level == 1) return published(a, 1) / 2;
  const double lo = published(a, level);
  return level == 5 ? lo * 2 : (lo + published(a, level + 1)) / 2;
}

// Round-half-up mean by integer comparison: largest L with 2 * sum >= (2L - 1) n.
int mean_oracle(const std::vector<int>& levels) {
  const int n = static_cast<int>(levels.size());
  int sum = 0;
  for (int l : levels) sum += l;
  int best = 1;
  for (int L = 1; L <= 5; ++L)
    if (2 * sum >= (2 * L - 1) * n) best = L;
  return best;
}

std::string mean_rule() {
  const auto start = Clock::now();
  const ThresholdTable table = ThresholdTable::defaults();
  const std::vector<int> example = {5, 4, 3, 2, 1, 1, 1};
  HazardAttributes attrs;
  for (HazardAttribute a : kAllHazardAttributes) attrs[a] = value_for(a, example[index_of(a)]);
  const int got = overall_level(attrs, table).value();
  if (got != 2) return "overall_level([5,4,3,2,1,1,1]) = " + std::to_string(got);

  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> levels;
    std::vector<HazardAttribute> present;
    for (HazardAttribute a : kAllHazardAttributes) {
      if (rng() % 3 == 0) continue;
      present.push_back(a);
      levels.push_back(1 + static_cast<int>(rng() % 5));
    }
    if (present.empty()) {
      present.push_back(HazardAttribute::Injury);
      levels.push_back(1 + static_cast<int>(rng() % 5));
    }
    HazardAttributes base;
    for (std::size_t i = 0; i < present.size(); ++i) base[present[i]] = value_for(present[i], levels[i]);
    const int expected = mean_oracle(levels);
    const int level = overall_level(base, table).value();
    if (level != expected) return "set " + std::to_string(t) + ": level " + std::to_string(level) + ", oracle " +
                                  std::to_string(expected);
    // the same levels carried by a shuffled assignment of attributes
    std::vector<int> shuffled = levels;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    HazardAttributes permuted;
    for (std::size_t i = 0; i < present.size(); ++i) permuted[present[i]] = value_for(present[i], shuffled[i]);
    if (overall_level(permuted, table).value() != level) return "permutation changed the level in set " + std::to_string(t);
    if (mean_level(shuffled).value() != level) return "mean_level disagrees in set " + std::to_string(t);
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 1.0) return "took " + fmt(elapsed) + " s";
  return "";
}

// ---------------------------------------------------------------- rasterization

// Even-odd crossing test against a ray to +x, edges half-open in y, decided by
// cross products so dyadic coordinates are exact.
bool inside_oracle(const Footprint& fp, double px, double py) {
  bool inside = false;
  for (const auto& ring : fp.rings) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const Point a = ring[i], b = ring[i + 1];
      if ((a.y > py) == (b.y > py)) continue;
      const double lhs = (px - a.x) * (b.y - a.y);
      const double rhs = (py - a.y) * (b.x - a.x);
      if (b.y > a.y ? lhs < rhs : lhs > rhs) inside = !inside;
    }
  }
  return inside;
}

std::string rasterization() {
  std::mt19937_64 rng(77);
  std::size_t mismatches = 0, pixels = 0;
  for (int t = 0; t < 200; ++t) {
    const int w = 1 + static_cast<int>(rng() % 32), h = 1 + static_cast<int>(rng() % 32);
    std::uniform_int_distribution<int> qx(-8, 4 * w + 8), qy(-8, 4 * h + 8);
    Footprint fp;
    const int rings = 1 + static_cast<int>(rng() % 2);
    for (int r = 0; r < rings; ++r) {
      Ring ring;
      const int n = 3 + static_cast<int>(rng() % 8);
      for (int k = 0; k < n; ++k) ring.push_back({qx(rng) / 4.0, qy(rng) / 4.0});
      ring.push_back(ring.front());
      fp.rings.push_back(ring);
    }
    const BitMask mask = rasterize(fp, w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        mismatches += mask.get(x, y) != inside_oracle(fp, x + 0.5, y + 0.5);
        ++pixels;
      }
    }
  }
  if (mismatches) return std::to_string(mismatches) + " of " + std::to_string(pixels) + " pixels differ";
  return "";
}

// ---------------------------------------------------------------- numerics

template <typename Head>
double gradient_error(const Head& head, const InputVector& x, int level, LossKind kind) {
  const LossGradient lg = loss_and_gradient(head, x, level, kind);
  const std::vector<double> params = head.parameters();
  double diff = 0.0, norm_a = 0.0, norm_n = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Head plus = head, minus = head;
    auto p = params;
    p[i] += h;
    plus.set_parameters(p);
    p[i] -= 2 * h;
    minus.set_parameters(p);
    const double numeric =
        (loss_value(plus.probs(x), level, kind) - loss_value(minus.probs(x), level, kind)) / (2 * h);
    diff += (numeric - lg.gradient[i]) * (numeric - lg.gradient[i]);
    norm_a += lg.gradient[i] * lg.gradient[i];
    norm_n += numeric * numeric;
  }
  return std::sqrt(diff) / std::max({std::sqrt(norm_a), std::sqrt(norm_n), 1e-12});
}

std::string numerics() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int t = 0; t < 1000; ++t) {
    Logits z;
    for (auto& v : z) v = u(rng);
    const double shift = u(rng) * 100;
    Logits shifted = z;
    for (auto& v : shifted) v += shift;
    const Probs a = softmax(z), b = softmax(shifted);
    for (int k = 0; k < 5; ++k)
      if (std::abs(a[k] - b[k]) > 1e-12) return "softmax not shift-invariant in case " + std::to_string(t);

    const int y = 1 + static_cast<int>(rng() % 5);
    const double ce = cross_entropy(a, y), oce = ordinal_cross_entropy(a, y);
    if (oce < ce) return "ordinal CE below CE in case " + std::to_string(t);
    const bool right = argmax_level(a) == y;
    if (right != (oce == ce)) return "ordinal CE equality does not track a correct prediction in case " + std::to_string(t);

    CutPoints cuts;
    for (auto& c : cuts) c = u(rng);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 1; k < 4; ++k) cuts[k] = std::max(cuts[k], cuts[k - 1] + 1e-3);
    const Probs p = ordinal_probs(u(rng) * 2, cuts);
    double sum = 0.0;
    for (double v : p) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) return "ordinal_probs sums to " + fmt(sum);
  }

  std::uniform_real_distribution<double> ux(-1.5, 1.5), uw(-1, 1);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    InputVector x;
    for (auto& v : x) v = ux(rng);
    const int level = 1 + t % 5;
    const LossKind kind = t % 2 ? LossKind::OrdinalCrossEntropy : LossKind::CrossEntropy;
    OrdinalHead ordinal;
    for (auto& w : ordinal.weights) w = uw(rng);
    ordinal.cut_points = {-1.2 + 0.2 * uw(rng), -0.3 + 0.2 * uw(rng), 0.4 + 0.2 * uw(rng), 1.3 + 0.2 * uw(rng)};
    SoftmaxHead soft;
    for (auto& row : soft.weights)
      for (auto& w : row) w = 0.5 * uw(rng);
    for (auto& b : soft.bias) b = 0.5 * uw(rng);
    worst = std::max({worst, gradient_error(ordinal, x, level, kind), gradient_error(soft, x, level, kind)});
  }
  if (worst >= 1e-4) return "gradient relative error " + fmt(worst);
  return "";
}

// ---------------------------------------------------------------- monotonicity

Model single_backbone_model(DisasterType type, std::shared_ptr<const Backbone> backbone, int chip_size) {
  auto registry = std::make_shared<BackboneRegistry>();
  registry->add(type, std::move(backbone));
  Model model;
  model.registry = registry;
  model.chip_size = chip_size;
  return model;
}

std::string monotonicity() {
  const auto samples = synth::separable_samples(500, 11);
  const OrdinalHead trained = train(OrdinalHead{}, samples, TrainConfig{}).head;

  synth::GridSpec grid;
  std::mt19937_64 rng(99);
  std::vector<std::uint8_t> grays(100);
  for (auto& g : grays) g = static_cast<std::uint8_t>(rng() % 256);
  std::vector<Footprint> footprints;
  const Scene scene = synth::grid_scene("mono", grid, grays, footprints);
  const std::vector<HazardLevel> levels = {HazardLevel(1), HazardLevel(2), HazardLevel(3), HazardLevel(4),
                                           HazardLevel(5)};
  std::size_t violations = 0;
  for (const OrdinalHead& head : {trained, OrdinalHead::prior()}) {
    const Model model = single_backbone_model(DisasterType::Flood, std::make_shared<OrdinalBackbone>(head), 32);
    const auto maps = sweep(scene, footprints, DisasterType::Flood, levels, model);
    if (maps.size() != 5 || maps[0].entries.size() != 100) return "sweep returned the wrong shape";
    for (std::size_t b = 0; b < 100; ++b) {
      for (std::size_t i = 1; i < 5; ++i) {
        violations += expected_level(maps[i].entries[b].probs) < expected_level(maps[i - 1].entries[b].probs);
      }
    }
  }
  if (violations) return std::to_string(violations) + " decreases of expected level";
  return "";
}

// ---------------------------------------------------------------- learning

std::string desk_learning() {
  omp_set_num_threads(1);
  std::string failures;
  for (int kind = 0; kind < 2; ++kind) {
    const auto start = Clock::now();
    const auto train_set = synth::separable_samples(500, 1);
    const auto held_out = synth::separable_samples(500, 2);
    TrainConfig config;
    config.seed = 3;
    double train_acc = 0.0, held_acc = 0.0;
    if (kind == 0) {
      const auto result = train(OrdinalHead{}, train_set, config);
      train_acc = accuracy(result.head, train_set);
      held_acc = accuracy(result.head, held_out);
    } else {
      const auto result = train(SoftmaxHead{}, train_set, config);
      train_acc = accuracy(result.head, train_set);
      held_acc = accuracy(result.head, held_out);
    }
    const double elapsed = seconds_since(start);
    const std::string name = kind == 0 ? "ordinal" : "softmax";
    std::cout << "  " << name << ": train " << fmt(train_acc) << ", held-out " << fmt(held_acc) << ", " << fmt(elapsed)
              << " s\n";
    if (train_acc < 0.95 || held_acc < 0.85 || elapsed >= 60.0) failures += name + " ";
  }
  omp_set_num_threads(omp_get_num_procs());
  if (!failures.empty()) return "below target: " + failures;
  return "";
}

// ---------------------------------------------------------------- determinism

int run_cli(const std::string& args) {
  const std::string command = std::string(PREDISM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string determinism() {
  const fs::path root = synth::temp_dir("acceptance-determinism");
  synth::CorpusSpec spec;
  spec.buildings = 100;
  const auto corpus = synth::write_corpus(root, spec);
  std::vector<fs::path> outs;
  for (const char* run : {"run1", "run2"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    if (run_cli("train --data " + q(root) + " --seed 5 --out " + q(dir)) != 0) return "train failed";
    if (run_cli("sweep --scene " + q(corpus.scenes[2]) + " --labels " + q(corpus.labels[2]) +
                " --type flood --levels 1,2,3,4,5 --model " + q(dir / "model.json") + " --out " + q(dir / "sweep")) != 0) {
      return "sweep failed";
    }
    outs.push_back(dir / "sweep");
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(outs[0])) {
    const auto ext = entry.path().extension();
    if (ext != ".geojson" && ext != ".png") continue;
    const fs::path other = outs[1] / entry.path().filename();
    if (!fs::exists(other)) return "second run lacks " + entry.path().filename().string();
    if (read_text_file(entry.path()) != read_text_file(other)) return entry.path().filename().string() + " differs";
    ++compared;
  }
  fs::remove_all(root);
  if (compared != 10) return "expected 5 GeoJSON and 5 PNG files, compared " + std::to_string(compared);
  return "";
}

// ---------------------------------------------------------------- external backend

std::string stub(const std::string& args) { return std::string(STUB_BACKEND_PATH) + " " + args; }

Probs hand_softmax(const std::array<double, 5>& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0.0;
  Probs p;
  for (int k = 0; k < 5; ++k) sum += p[k] = std::exp(z[k] - m);
  for (auto& v : p) v /= sum;
  return p;
}

std::string external_backend() {
  synth::GridSpec grid;
  std::vector<Footprint> footprints;
  const Scene scene = synth::grid_scene("ext", grid, {90, 200}, footprints);
  const ChipSet chips = chip_set(scene, footprints, 32);
  const MetaVector meta = meta_vector(DisasterType::Flood, HazardLevel(3));

  const std::array<double, 5> a = {1, 2, 3, 4, 5}, b = {0, 0, 3, 0, 0};
  BackboneRegistry registry;
  registry.add(DisasterType::Flood, std::make_shared<ExternalBackbone>(std::make_unique<ProcessTransport>(stub("fixed 1 2 3 4 5"))));
  registry.add(DisasterType::Hurricane,
               std::make_shared<ExternalBackbone>(std::make_unique<ProcessTransport>(stub("fixed 0 0 3 0 0"))));

  // one backbone routed alone
  const Probs alone = ensemble_predict(chips.chips[0], meta, registry, route(DisasterType::Flood, registry));
  const Probs pa = hand_softmax(a), pb = hand_softmax(b);
  for (int k = 0; k < 5; ++k)
    if (std::abs(alone[k] - pa[k]) > 1e-12) return "single-backbone output differs from softmax of the fixed logits";

  // co-occurrence 3:1 between flood and hurricane
  CooccurrenceMatrix c{};
  c[index_of(DisasterType::Flood)][index_of(DisasterType::Flood)] = 3;
  c[index_of(DisasterType::Flood)][index_of(DisasterType::Hurricane)] = 1;
  c[index_of(DisasterType::Hurricane)][index_of(DisasterType::Flood)] = 1;
  c[index_of(DisasterType::Hurricane)][index_of(DisasterType::Hurricane)] = 1;
  registry.set_cooccurrence(c);
  for (const Chip& chip : chips.chips) {
    const Probs mixed = ensemble_predict(chip, meta, registry, route(DisasterType::Flood, registry));
    for (int k = 0; k < 5; ++k) {
      const double hand = 0.75 * pa[k] + 0.25 * pb[k];
      if (std::abs(mixed[k] - hand) > 1e-12) return "mixture differs from the hand-computed 0.75/0.25 blend";
    }
    const Probs even = ensemble_predict(chip, meta, registry, route(DisasterType::Hurricane, registry));
    for (int k = 0; k < 5; ++k)
      if (std::abs(even[k] - 0.5 * (pa[k] + pb[k])) > 1e-12) return "mixture differs from the hand-computed 0.5/0.5 blend";
  }

  // a backend slower than its timeout fails the request with HTTP 500
  const fs::path dir = synth::temp_dir("acceptance-timeout");
  AppConfig config;
  config.artifact_dir = dir;
  BackendDecl slow;
  slow.kind = BackboneKind::External;
  slow.command = stub("sleep 3000 0 0 0 0 0");
  slow.timeout = std::chrono::milliseconds(300);
  config.backends[DisasterType::Flood] = slow;

  ErrorCode code = ErrorCode::InvalidArgument;
  try {
    BackboneRegistry r;
    r.add(DisasterType::Flood, std::make_shared<ExternalBackbone>(std::make_unique<ProcessTransport>(slow.command), slow.timeout));
    ensemble_predict(chips.chips[0], meta, r, route(DisasterType::Flood, r));
  } catch (const Error& e) {
    code = e.code();
  }
  if (code != ErrorCode::BackboneFailure) return "timeout raised " + std::string(error_code_name(code));

  Service service(config);
  const int port = service.bind_any_port("127.0.0.1");
  std::thread server([&] { service.run(); });
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(20, 0);
  json labels = json::array();
  for (const auto& fp : footprints) labels.push_back({{"wkt", to_wkt(fp)}, {"uid", fp.building_id}});
  const json body = {{"scene_b64", base64_encode(encode_png(scene.pixels))},
                     {"labels", labels},
                     {"disaster_type", "flood"},
                     {"hazard_level", 3}};
  auto reply = client.Post("/predict", body.dump(), "application/json");
  service.stop();
  server.join();
  fs::remove_all(dir);
  if (!reply) return "no HTTP reply";
  if (reply->status != 500) return "HTTP status " + std::to_string(reply->status);
  if (json::parse(reply->body)["error"]["code"] != "BackboneFailure") return "error body " + reply->body;
  return "";
}

// ---------------------------------------------------------------- unclassified

std::string unclassified_rules() {
  const fs::path root = synth::temp_dir("acceptance-unclassified");
  synth::CorpusSpec spec;
  spec.buildings = 500;
  spec.unclassified_fraction = 0.2;
  const auto corpus = synth::write_corpus(root, spec);
  if (corpus.unclassified != 100) return "corpus holds " + std::to_string(corpus.unclassified) + " unclassified labels";

  const EventCatalog catalog = build_catalog(root);
  const auto all = catalog.all_buildings();
  const auto kept = filter_training(all);
  const std::set<std::string> expected_dropped(corpus.unclassified_ids.begin(), corpus.unclassified_ids.end());
  std::set<std::string> kept_ids, all_ids;
  for (const auto& b : all) all_ids.insert(b.building_id());
  for (const auto& b : kept) kept_ids.insert(b.building_id());
  std::set<std::string> dropped;
  std::set_difference(all_ids.begin(), all_ids.end(), kept_ids.begin(), kept_ids.end(),
                      std::inserter(dropped, dropped.begin()));
  if (all.size() != 500 || kept.size() != 400) return "kept " + std::to_string(kept.size()) + " of " + std::to_string(all.size());
  if (dropped != expected_dropped) return "dropped records differ from the unclassified labels";
  const auto samples = build_samples(catalog, kept, 16, ThresholdTable::defaults());
  if (samples.size() != 400) return "training samples " + std::to_string(samples.size());
  const DatasetSplit parts = split(catalog, 0.8, 1);
  if (parts.train.size() + parts.validation.size() != 400) return "split sizes do not add up to 400";
  for (const auto& part : {parts.train, parts.validation})
    for (const auto& b : part)
      if (expected_dropped.count(b.building_id())) return "unclassified record " + b.building_id() + " in a split";
  fs::remove_all(root);

  const Probs uniform = {0.2, 0.2, 0.2, 0.2, 0.2};
  if (classify(uniform, 0.35).has_value()) return "uniform distribution classified";

  // through the whole inference path: a backend answering equal logits
  synth::GridSpec grid;
  std::vector<Footprint> footprints;
  const Scene scene = synth::grid_scene("uniform", grid, {60, 120, 180}, footprints);
  Model model = single_backbone_model(
      DisasterType::Flood, std::make_shared<ExternalBackbone>(std::make_unique<ProcessTransport>(stub("fixed 0 0 0 0 0"))),
      32);
  model.confidence_threshold = 0.35;
  HazardInput hazard;
  hazard.level = HazardLevel(4);
  const DamageMap map = predict_scene(scene, footprints, DisasterType::Flood, hazard, model);
  for (const auto& e : map.entries) {
    if (e.level) return e.building_id + " classified at level " + std::to_string(*e.level);
    for (double p : e.probs)
      if (std::abs(p - 0.2) > 1e-12) return e.building_id + " is not uniform";
  }
  return "";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"hazard table oracle", hazard_table},
      {"mean-of-meta rule", mean_rule},
      {"rasterization equivalence", rasterization},
      {"loss and head numerics", numerics},
      {"monotonicity across sweep levels", monotonicity},
      {"desk-scale learning", desk_learning},
      {"pipeline determinism", determinism},
      {"external backend protocol", external_backend},
      {"unclassified rules", unclassified_rules},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    std::string detail;
    try {
      detail = c.check();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      std::cout << "PASS " << c.name << "\n";
    } else {
      std::cout << "FAIL " << c.name << ": " << detail << "\n";
      ++failed;
    }
    std::cout.flush();
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
