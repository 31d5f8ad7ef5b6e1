// Parallel kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include <random>

#include "predism/chip.hpp"
#include "predism/geometry.hpp"
#include "predism/reference.hpp"

namespace {

using namespace predism;

struct Fixture {
  Scene scene;
  std::vector<Footprint> footprints;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.scene.scene_id = "bench";
    out.scene.pixels = RgbImage(1024, 1024);
    std::mt19937_64 rng(7);
    for (auto& b : out.scene.pixels.bytes()) b = static_cast<std::uint8_t>(rng() & 0xFF);
    std::uniform_real_distribution<double> jitter(-3.0, 3.0);
    for (int gy = 0; gy < 32; ++gy) {
      for (int gx = 0; gx < 32; ++gx) {
        const double cx = gx * 32 + 16, cy = gy * 32 + 16;
        Footprint fp;
        fp.building_id = "b" + std::to_string(gy * 32 + gx);
        Ring ring;
        for (int k = 0; k < 6; ++k) {
          const double a = k * 3.14159265358979 / 3.0;
          ring.push_back({cx + (10 + jitter(rng)) * std::cos(a), cy + (10 + jitter(rng)) * std::sin(a)});
        }
        ring.push_back(ring.front());
        fp.rings.push_back(ring);
        out.footprints.push_back(std::move(fp));
      }
    }
    return out;
  }();
  return f;
}

void BM_RasterizeScanline(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    for (const auto& fp : f.footprints) benchmark::DoNotOptimize(rasterize(fp, 1024, 1024));
  }
}
BENCHMARK(BM_RasterizeScanline)->Unit(benchmark::kMillisecond);

void BM_RasterizeBruteforce(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    for (int i = 0; i < 16; ++i) benchmark::DoNotOptimize(reference::rasterize_bruteforce(f.footprints[i], 1024, 1024));
  }
  state.SetLabel("16 footprints");
}
BENCHMARK(BM_RasterizeBruteforce)->Unit(benchmark::kMillisecond);

void BM_ChipSetParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(chip_set(f.scene, f.footprints, 64));
}
BENCHMARK(BM_ChipSetParallel)->Unit(benchmark::kMillisecond);

void BM_ChipSetSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(reference::chip_set_serial(f.scene, f.footprints, 64));
}
BENCHMARK(BM_ChipSetSerial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
