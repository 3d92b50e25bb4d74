// Serial reference kernels against their OpenMP counterparts on square grids.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "mwht/em/fdtd.hpp"
#include "mwht/thermal/pennes.hpp"

using namespace mwht;
namespace ek = mwht::em::kernels;

namespace {

struct EmFixture {
  ek::Layout layout;
  std::vector<double> ez, hx, hy, jp;
  std::vector<std::uint16_t> material;
  std::vector<ek::EMaterial> table;

  explicit EmFixture(int n) : ez(n * n), hx(n * n), hy(n * n), jp(n * n), material(n * n) {
    layout.nx = layout.ny = n;
    for (int k = 0; k < n * n; ++k) {
      ez[k] = 1e-3 * (k % 97);
      hx[k] = 1e-6 * (k % 89);
      hy[k] = -1e-6 * (k % 83);
      material[k] = (k / n - n / 2) * (k / n - n / 2) + (k % n - n / 2) * (k % n - n / 2) < n * n / 9 ? 1 : 0;
    }
    table.push_back({1.0, 1e-3, 0.0, 0.0, 0.0});
    table.push_back(em::debye_update_coefficients(tissues::fibroglandular_debye, 8.25e-13));
  }
  ek::FieldArrays arrays() { return {ez.data(), hx.data(), hy.data(), jp.data()}; }
};

template <auto Kernel>
void bm_update_h(benchmark::State& state) {
  EmFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Kernel(f.layout, f.arrays(), 1e-3);
    benchmark::DoNotOptimize(f.hx.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <auto Kernel>
void bm_update_e(benchmark::State& state) {
  EmFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Kernel(f.layout, f.arrays(), f.material.data(), f.table.data(), 2000.0);
    benchmark::DoNotOptimize(f.ez.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <auto Kernel>
void bm_pennes(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GridSpec g;
  g.nx = g.ny = n;
  MediaMap m(g, TissueLabel::water);
  m.paint_disk({0.0, 0.0}, 0.4 * n * g.dx, TissueCell::of(TissueLabel::fibroglandular));
  const thermal::PennesModel model(m);
  std::vector<double> t(static_cast<std::size_t>(n * n), 37.0), t_new(static_cast<std::size_t>(n * n)), q(static_cast<std::size_t>(n * n), 1e4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Kernel(n, n, t.data(), t_new.data(), q.data(), 1.0, model.dt(), model.coeffs(),
                                    model.tissue().values().data(), -1));
    t.swap(t_new);
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

}  // namespace

BENCHMARK(bm_update_h<ek::update_h_serial>)->Name("update_h/serial")->Arg(200)->Arg(400)->Arg(800);
BENCHMARK(bm_update_h<ek::update_h_omp>)->Name("update_h/omp")->Arg(200)->Arg(400)->Arg(800);
BENCHMARK(bm_update_e<ek::update_e_serial>)->Name("update_e/serial")->Arg(200)->Arg(400)->Arg(800);
BENCHMARK(bm_update_e<ek::update_e_omp>)->Name("update_e/omp")->Arg(200)->Arg(400)->Arg(800);
BENCHMARK(bm_pennes<thermal::kernels::pennes_serial>)->Name("pennes/serial")->Arg(200)->Arg(400)->Arg(800);
BENCHMARK(bm_pennes<thermal::kernels::pennes_omp>)->Name("pennes/omp")->Arg(200)->Arg(400)->Arg(800);

BENCHMARK_MAIN();
