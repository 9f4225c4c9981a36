// Times the OpenMP panel-pair assembly against the serial reference on a few
// mesh sizes and reports the max entrywise deviation (expected: exactly 0,
// the parallel path scatters per-pair blocks in a fixed order).
#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fracneu/assembly.hpp"

using namespace fracneu;
using clk = std::chrono::steady_clock;

static double seconds(clk::time_point a, clk::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

int main(int argc, char** argv) {
    double s = argc > 1 ? std::atof(argv[1]) : 0.4;
    int threads = 0;
#ifdef _OPENMP
    if (const char* env = std::getenv("FRAC_NEUMANN_THREADS")) threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);
    threads = omp_get_max_threads();
#endif
    std::printf("s = %.3f, threads = %d\n", s, threads > 0 ? threads : 1);
    std::printf("%-18s %12s %12s %9s %12s\n", "mesh", "serial [s]", "parallel [s]", "speedup",
                "max |diff|");
    for (int ni : {64, 128, 256}) {
        int ne = ni / 4;
        RadialMesh mesh = build_mesh(ni, ne, 8.0, 2.0);
        KernelConfig cfg(1, s);
        AssemblyOptions opts;
        opts.estimate_error = false;

        auto t0 = clk::now();
        BilinearForms ref = assemble_forms_reference(mesh, cfg, opts);
        auto t1 = clk::now();
        BilinearForms par = assemble_forms(mesh, cfg, opts);
        auto t2 = clk::now();

        double diff = (ref.stiffness - par.stiffness).cwiseAbs().maxCoeff();
        char label[32];
        std::snprintf(label, sizeof label, "%d/%d", ni, ne);
        std::printf("%-18s %12.3f %12.3f %9.2f %12.3e\n", label, seconds(t0, t1), seconds(t1, t2),
                    seconds(t0, t1) / seconds(t1, t2), diff);
    }
    return 0;
}
