// Benchmark of the OpenMP kernels against their serial references.
// The parallel variants are bit-identical to the serial ones by construction;
// this target reports the timing side and verifies the equality on the way.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sbtherm/bath.hpp"
#include "sbtherm/kernels.hpp"
#include "sbtherm/rng.hpp"
#include "sbtherm/spectrum.hpp"
#include "sbtherm/system.hpp"

using namespace sbtherm;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_it(F&& f) {
  const double t0 = now_s();
  f();
  return now_s() - t0;
}

bool frames_equal(const std::vector<SpectrumFrame>& a, const std::vector<SpectrumFrame>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].psd != b[i].psd || a[i].t != b[i].t) return false;
  }
  return true;
}

void report(const char* name, double serial_s, double omp_s, bool identical) {
  std::printf("%-22s serial %8.3f s   omp %8.3f s   speedup %5.2fx   %s\n", name, serial_s,
              omp_s, serial_s / omp_s, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n_frames = 4000;
  if (argc > 1) n_frames = std::strtoull(argv[1], nullptr, 10);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (compiled without OpenMP)\n");
#endif

  const SystemParams sys = aalto_drum();
  const GridSpec grid = default_grid(sys);

  std::vector<FrameModel> models(n_frames);
  std::vector<double> times(n_frames);
  std::vector<std::uint64_t> seeds(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    FrameModel m;
    m.area = 5000.0 + 10.0 * static_cast<double>(i % 17);
    m.width_hz = 250.0 + static_cast<double>(i % 11);
    m.center_hz = static_cast<double>(i % 23) - 11.0;
    m.background = 100.0;
    models[i] = m;
    times[i] = static_cast<double>(i + 1);
    seeds[i] = derive_seed(42, i);
  }

  std::vector<SpectrumFrame> fa(n_frames), fb(n_frames);
  const double synth_serial = time_it([&] {
    synth_frames_serial(models.data(), times.data(), seeds.data(), n_frames, grid, 10,
                        fa.data());
  });
  const double synth_omp = time_it([&] {
    synth_frames_omp(models.data(), times.data(), seeds.data(), n_frames, grid, 10, fb.data());
  });
  report("frame synthesis", synth_serial, synth_omp, frames_equal(fa, fb));

  const std::size_t window = std::max<std::size_t>(2, n_frames / 8);
  std::vector<SpectrumFrame> ba, bb;
  const double box_serial = time_it([&] { ba = boxcar_frames_serial(fa, window); });
  const double box_omp = time_it([&] { bb = boxcar_frames_omp(fa, window); });
  report("sliding average", box_serial, box_omp, frames_equal(ba, bb));

  const std::vector<double> series = ou_path(1.0, 400.0, 1.0, 8 * n_frames, 7);
  std::vector<double> ra, rb;
  const double ac_serial = time_it([&] { ra = autocovariance_serial(series, series.size() / 2, true); });
  const double ac_omp = time_it([&] { rb = autocovariance_omp(series, series.size() / 2, true); });
  report("autocovariance", ac_serial, ac_omp, ra == rb);

  std::vector<double> freqs(series.size() / 4);
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    freqs[j] = static_cast<double>(j + 1) / static_cast<double>(series.size());
  }
  std::vector<double> sa, sb;
  const double wk_serial = time_it([&] { sa = wk_psd_serial(ra, 1.0, freqs); });
  const double wk_omp = time_it([&] { sb = wk_psd_omp(ra, 1.0, freqs); });
  report("spectral transform", wk_serial, wk_omp, sa == sb);

  return 0;
}
