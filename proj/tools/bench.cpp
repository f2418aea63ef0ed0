// Times the parallel pipeline against the serial reference on the same inputs.
#include <CLI11.hpp>

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <iostream>

#include "sleepscan/pipeline.hpp"

using namespace sleepscan;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

std::vector<std::string> findings_of(const RunResult& r) {
    std::vector<std::string> out;
    for (const auto& rep : r.reports) {
        for (const auto& f : rep.findings) out.push_back(rep.contract + ":" + std::string(short_code(f.type)) + ":" + f.function);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial reference vs parallel analysis timing"};
    RunConfig config;
    int reps = 3;
    bool no_prune = false;
    app.add_option("paths", config.inputs, "Inputs")->required();
    app.add_option("--reps", reps, "Repetitions, best time reported")->capture_default_str();
    app.add_option("--jobs", config.jobs, "Worker threads")->capture_default_str();
    app.add_flag("--no-prune", no_prune, "Explore every callable function");
    CLI11_PARSE(app, argc, argv);
    config.prune = !no_prune;

    RunResult serial;
    RunResult parallel;
    const double ts = best_of(reps, [&] { serial = run_serial(config); });
    const double tp = best_of(reps, [&] { parallel = run(config); });
    std::printf("threads   %d\n", config.jobs > 0 ? config.jobs : omp_get_max_threads());
    std::printf("serial    %10.2f ms\n", ts);
    std::printf("parallel  %10.2f ms\n", tp);
    std::printf("speedup   %10.2fx\n", tp > 0 ? ts / tp : 0.0);
    const bool same = findings_of(serial) == findings_of(parallel);
    std::printf("findings  %s\n", same ? "identical" : "DIFFER");
    return same ? 0 : 1;
}
