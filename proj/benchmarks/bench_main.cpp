#include <benchmark/benchmark.h>

#include "datamap/analysis.hpp"
#include "datamap/metrics.hpp"
#include "datamap/regions.hpp"
#include "datamap/render.hpp"
#include "datamap/rng.hpp"
#include "datamap/trainer.hpp"

using namespace datamap;

namespace {

dynlog::TrainingRunLog make_log(std::size_t n, int epochs) {
    Rng rng(17);
    std::vector<dynlog::EpochRecord> recs;
    recs.reserve(n * static_cast<std::size_t>(epochs));
    for (std::size_t i = 0; i < n; ++i) {
        char id[24];
        std::snprintf(id, sizeof id, "b%06zu", i);
        for (int e = 0; e < epochs; ++e) {
            const double p = rng.uniform();
            recs.push_back({e, id, 0, {p, 1.0 - p}});
        }
    }
    return dynlog::TrainingRunLog::from_records(std::move(recs));
}

metrics::CartographyTable make_table(std::size_t n) {
    Rng rng(29);
    metrics::CartographyTable t;
    t.num_epochs = 10;
    for (std::size_t i = 0; i < n; ++i) {
        char id[24];
        std::snprintf(id, sizeof id, "b%06zu", i);
        metrics::InstanceStats row;
        row.instance_id = id;
        row.confidence = rng.uniform();
        row.variability = 0.5 * rng.uniform();
        row.correctness = static_cast<double>(rng.uniform_int(11)) / 10.0;
        row.forgetting = static_cast<int>(rng.uniform_int(10));
        t.rows.push_back(row);
    }
    return t;
}

void bm_compute_table(benchmark::State& state) {
    const auto log = make_log(static_cast<std::size_t>(state.range(0)), 10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::compute_table(log));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_compute_table)->Arg(1000)->Arg(10000);

void bm_rank_select(benchmark::State& state) {
    const auto table = make_table(static_cast<std::size_t>(state.range(0)));
    const regions::SelectionSpec spec{regions::Strategy::ambiguous, 0.33, 0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(regions::rank_select(table, spec));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_rank_select)->Arg(1000)->Arg(10000)->Arg(100000);

void bm_train_epoch(benchmark::State& state) {
    trainer::SyntheticSpec spec;
    spec.n_per_class = 250;
    spec.seed = 3;
    const auto data = trainer::gen_synthetic(spec);
    trainer::TrainConfig cfg;
    cfg.family = state.range(0) ? trainer::Family::mlp : trainer::Family::linear;
    cfg.epochs = 1;
    cfg.seed = 3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(trainer::train(data, cfg));
    }
    state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(bm_train_epoch)->Arg(0)->Arg(1);

void bm_pearson(benchmark::State& state) {
    Rng rng(41);
    std::vector<double> x, y;
    for (int i = 0; i < state.range(0); ++i) {
        x.push_back(rng.uniform());
        y.push_back(rng.uniform());
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(analysis::pearson(x, y));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_pearson)->Arg(10000);

void bm_render_map(benchmark::State& state) {
    const auto table = make_table(static_cast<std::size_t>(state.range(0)));
    render::MapStyle style;
    style.annotate_regions = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(render::render_map(table, {}, style));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_render_map)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
