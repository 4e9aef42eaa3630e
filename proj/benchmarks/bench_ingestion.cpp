#include <memory>

#include <benchmark/benchmark.h>

#include "pmdata/ingestion.hpp"
#include "pmdata/simulator.hpp"
#include "pmdata/storage.hpp"

static void BM_Backfill(benchmark::State& state) {
    pmdata::SimConfig c;
    c.n_markets = static_cast<int>(state.range(0));
    c.horizon_days = 14;
    const auto u = std::make_shared<const pmdata::Universe>(pmdata::generate_lifecycle(c));
    for (auto _ : state) {
        pmdata::Store store(":memory:");
        pmdata::SimulatorSource source(u);
        pmdata::SyncEngine(store, source).backfill(c.genesis_block, u->final_block);
        benchmark::DoNotOptimize(store.cached_timestamp_count());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * u->fills.size()));
    state.counters["fills"] = static_cast<double>(u->fills.size());
}
BENCHMARK(BM_Backfill)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
