#include <benchmark/benchmark.h>

// Linked against libbenchmark rather than libbenchmark_main: the packaged
// static main is LTO bytecode tied to one compiler version.
BENCHMARK_MAIN();
