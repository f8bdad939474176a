// Times the parallel kernels against their serial reference twins on the
// genus-2 group and checks the outputs agree element for element. Not a
// test target; run it by hand to gauge what the thread pool buys on a
// given machine.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "horoflow/density.hpp"
#include "horoflow/fuchsian.hpp"
#include "horoflow/hyperbolic.hpp"

using namespace horoflow;

namespace {

double seconds_for(const char* label, int repeats, double baseline,
                   const std::function<void()>& body) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        body();
        const double took =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (took < best)
            best = took;
    }
    if (baseline > 0.0)
        std::printf("  %-28s %9.3f ms   speedup %.2fx\n", label, best * 1e3,
                    baseline / best);
    else
        std::printf("  %-28s %9.3f ms\n", label, best * 1e3);
    return best;
}

bool same_elements(const std::vector<GroupElement>& a,
                   const std::vector<GroupElement>& b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k].word != b[k].word || a[k].matrix.a != b[k].matrix.a ||
            a[k].matrix.b != b[k].matrix.b || a[k].matrix.c != b[k].matrix.c ||
            a[k].matrix.d != b[k].matrix.d)
            return false;
    return true;
}

bool same_samples(const OrbitSample& a, const OrbitSample& b) {
    if (a.count != b.count || a.frames.size() != b.frames.size())
        return false;
    for (std::size_t k = 0; k < a.frames.size(); ++k)
        if (a.frames[k].base.re != b.frames[k].base.re ||
            a.frames[k].base.im != b.frames[k].base.im ||
            a.frames[k].direction != b.frames[k].direction)
            return false;
    return true;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    const GroupPresentation G = genus2_octagon_group();
    const int repeats = 3;

    {
        EnumerationOptions opt;
        opt.max_word_length = 7;
        std::printf("enumerate_elements, words up to %d\n", opt.max_word_length);
        std::vector<GroupElement> serial, parallel;
        const double base = seconds_for("serial reference", repeats, 0.0,
                                        [&] { serial = enumerate_elements_serial(G, opt); });
        seconds_for("buffered parallel", repeats, base,
                    [&] { parallel = enumerate_elements(G, opt); });
        std::printf("  elements %zu, outputs %s\n", parallel.size(),
                    same_elements(serial, parallel) ? "identical" : "DIFFER");
    }

    {
        const Frame u = frame_at(HPoint{0.31, 1.17}, 0.83);
        const double budget = 20000.0, ds = 0.37;
        std::printf("sample_orbit, horocycle budget %.0f at step %.2f\n", budget, ds);
        OrbitSample serial, parallel;
        const double base = seconds_for("serial reference", repeats, 0.0, [&] {
            serial = sample_orbit_serial(G, u, FlowKind::HOROCYCLE, budget, ds);
        });
        seconds_for("parallel sweep", repeats, base, [&] {
            parallel = sample_orbit(G, u, FlowKind::HOROCYCLE, budget, ds);
        });
        std::printf("  frames %d, outputs %s\n", parallel.count,
                    same_samples(serial, parallel) ? "identical" : "DIFFER");
    }

    return 0;
}
