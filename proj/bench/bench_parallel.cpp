// OpenMP paths against their serial references.

#include <benchmark/benchmark.h>

#include "pcfm/cli_io.hpp"
#include "pcfm/gn_oracle.hpp"
#include "pcfm/link_engine.hpp"
#include "pcfm/polyfit.hpp"

using namespace pcfm;

namespace {

struct Cls {
    LinkSpan span;
    SppGrid spp;
    std::vector<PolyProfile> profiles;
};

const Cls& cls() {
    static const Cls c = [] {
        Cls x;
        x.span = io::load_named_scenario("paper_cls_100km").spans[0];
        x.spp = solve_span_spp(x.span, 1001);
        x.profiles = fit_spp_serial(x.spp, 9);
        return x;
    }();
    return c;
}

struct Desk {
    LinkSpan span;
    SppGrid spp;
};

const Desk& desk() {
    static const Desk d = [] {
        Desk x;
        x.span = io::load_named_scenario("desk_7ch").spans[0];
        x.spp = solve_span_spp(x.span, 1001);
        return x;
    }();
    return d;
}

oracle::ReferenceOptions desk_oracle() {
    oracle::ReferenceOptions o;
    o.lozenge_domains = false;
    o.include_mci = false;
    o.rel_tol = 1e-4;
    return o;
}

void BM_FitSpp(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(fit_spp(cls().spp, 9));
}
void BM_FitSppSerial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(fit_spp_serial(cls().spp, 9));
}

void BM_SpanNliAll(benchmark::State& st) {
    const auto& c = cls();
    for (auto _ : st)
        benchmark::DoNotOptimize(span_nli_all(c.span.plan, c.span.fiber, c.spp, c.profiles));
}
void BM_SpanNliAllSerial(benchmark::State& st) {
    const auto& c = cls();
    for (auto _ : st)
        benchmark::DoNotOptimize(span_nli_all_serial(c.span.plan, c.span.fiber, c.spp, c.profiles));
}

void BM_Oracle(benchmark::State& st) {
    const auto& d = desk();
    const auto o = desk_oracle();
    for (auto _ : st)
        benchmark::DoNotOptimize(oracle::full_gn_reference(d.span.plan, d.span.fiber, d.spp, o));
}
void BM_OracleSerial(benchmark::State& st) {
    const auto& d = desk();
    const auto o = desk_oracle();
    for (auto _ : st)
        benchmark::DoNotOptimize(
            oracle::full_gn_reference_serial(d.span.plan, d.span.fiber, d.spp, o));
}

}  // namespace

BENCHMARK(BM_FitSpp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitSppSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpanNliAll)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpanNliAllSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Oracle)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK(BM_OracleSerial)->Unit(benchmark::kMillisecond)->Iterations(3);

int main(int argc, char** argv) {
    // build the shared fixtures outside the timed loops
    cls();
    desk();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
