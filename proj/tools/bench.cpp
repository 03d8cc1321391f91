// Benchmark: the replicate harness run serially vs with OpenMP.
// Usage: bench [repeats] [T]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fdrstream/gamma_schedule.hpp"
#include "fdrstream/rules.hpp"
#include "fdrstream/sim.hpp"

using namespace fdrstream;

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 20;
    const long T = argc > 2 ? std::atol(argv[2]) : 5000;
    const double alpha = 0.1, w0 = 0.05;
    const GammaSchedule gamma = GammaSchedule::javanmard_finite(T);

    auto run_fn = [&](std::uint64_t seed, int) {
        NormalMeansConfig cfg;
        cfg.T = T;
        cfg.pi1 = 0.3;
        cfg.seed = seed;
        const std::vector<HypothesisEvent> events = generate_normal_means(cfg);
        LordPPRule rule(alpha, w0, gamma);
        return run_stream(rule, alpha, w0, events, /*store_trajectory=*/false);
    };

    auto timed = [&](ExecPolicy policy) {
        const auto start = std::chrono::steady_clock::now();
        ExperimentReport rep = run_experiment(run_fn, repeats, 42, policy);
        const auto stop = std::chrono::steady_clock::now();
        const double sec = std::chrono::duration<double>(stop - start).count();
        return std::make_pair(sec, rep);
    };

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("replicates=%d  T=%ld  max_threads=%d\n", repeats, T, threads);

    auto [serial_sec, serial_rep] = timed(ExecPolicy::serial);
    std::printf("serial : %8.3f s   mean_fdp=%.6f mean_tdp=%.6f\n", serial_sec,
                serial_rep.mean_final_fdp, serial_rep.mean_tdp);
    auto [par_sec, par_rep] = timed(ExecPolicy::openmp);
    std::printf("openmp : %8.3f s   mean_fdp=%.6f mean_tdp=%.6f\n", par_sec,
                par_rep.mean_final_fdp, par_rep.mean_tdp);
    std::printf("speedup: %.2fx\n", par_sec > 0.0 ? serial_sec / par_sec : 0.0);

    bool identical = serial_rep.rows.size() == par_rep.rows.size();
    for (std::size_t i = 0; identical && i < serial_rep.rows.size(); ++i) {
        const auto& a = serial_rep.rows[i];
        const auto& b = par_rep.rows[i];
        identical = a.seed == b.seed && a.max_fdp == b.max_fdp &&
                    a.final_fdp == b.final_fdp && a.tdp == b.tdp && a.R == b.R && a.V == b.V;
    }
    std::printf("reports identical: %s\n", identical ? "yes" : "no");
    return identical ? 0 : 1;
}
