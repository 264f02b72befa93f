// Parallel kernels against their serial references on the bundled hierarchy.
//   hcbr_bench --benchmark_filter=Solve

#include <benchmark/benchmark.h>
#include <omp.h>

#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hcbr/mermaid.hpp"
#include "hcbr/scenariogen.hpp"

using namespace hcbr;

namespace {

std::shared_ptr<const Hierarchy> cato() {
  static const auto h =
      std::make_shared<const Hierarchy>(load_hierarchy(std::string(HCBR_DATA_DIR) + "/cato.mmd"));
  return h;
}

GenConfig config(std::size_t n) {
  GenConfig cfg;
  cfg.seed = 1;
  cfg.instance_count = n;
  return cfg;
}

std::vector<Scenario> scenarios(std::size_t n) {
  std::vector<Scenario> out;
  for (auto& inst : generate_dataset(cato(), config(n)).instances) out.push_back(inst.scenario);
  return out;
}

template <auto Fn>
void BM_Generate(benchmark::State& state) {
  const auto cfg = config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(cato(), cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

template <auto Fn>
void BM_Solve(benchmark::State& state) {
  const auto in = scenarios(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(in));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

void check_agreement() {
  const auto cfg = config(253);
  std::ostringstream par, ser;
  write_dataset(par, generate_dataset(cato(), cfg));
  write_dataset(ser, generate_dataset_serial(cato(), cfg));
  if (par.str() != ser.str()) {
    throw std::runtime_error("generator variants disagree");
  }
  const auto in = scenarios(253);
  if (solve_batch(in) != solve_batch_serial(in)) throw std::runtime_error("solver variants disagree");
}

}  // namespace

BENCHMARK(BM_Generate<generate_dataset_serial>)->Name("Generate/serial")->Arg(253)->Arg(4096);
BENCHMARK(BM_Generate<generate_dataset>)->Name("Generate/omp")->Arg(253)->Arg(4096);
BENCHMARK(BM_Solve<solve_batch_serial>)->Name("Solve/serial")->Arg(253)->Arg(4096);
BENCHMARK(BM_Solve<solve_batch>)->Name("Solve/omp")->Arg(253)->Arg(4096);

int main(int argc, char** argv) {
  check_agreement();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
