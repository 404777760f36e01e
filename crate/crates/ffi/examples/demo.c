/* Minimal C consumer of the corrsense ABI: build a seeded instance, run the
 * weighted l1 solver, print the diagnostics, and verify a dual certificate.
 *
 * Build (from the workspace root, after `cargo build -p corrsense-ffi`):
 *   cc -std=c99 -Icrates/ffi/include crates/ffi/examples/demo.c \
 *      target/debug/libcorrsense_ffi.a -lpthread -ldl -lm -o demo
 */
#include <stdio.h>
#include <stdlib.h>

#include "corrsense.h"

static void fail(const char *what)
{
    char *msg = corrsense_last_error();
    fprintf(stderr, "%s failed: %s\n", what, msg ? msg : "(no detail)");
    corrsense_string_free(msg);
    exit(1);
}

int main(void)
{
    printf("corrsense %s\n", corrsense_version());

    CorrsenseInstance *inst = NULL;
    if (corrsense_instance_new(31, 20, 2, 0.2, 7, false, &inst) != CORRSENSE_STATUS_OK)
        fail("instance_new");
    printf("instance: n=%zu m=%zu\n", corrsense_instance_n(inst), corrsense_instance_m(inst));

    CorrsenseResult *result = NULL;
    if (corrsense_solve(inst, 0.7, 0, &result) != CORRSENSE_STATUS_OK)
        fail("solve");

    CorrsenseSolveStats stats;
    if (corrsense_result_stats(result, &stats) != CORRSENSE_STATUS_OK)
        fail("result_stats");
    printf("objective=%.9f iterations=%zu converged=%d exact=%d rel_err_x=%.3e\n",
           stats.objective, stats.iterations, stats.converged, stats.exact, stats.rel_err_x);

    double *signal = malloc(2 * corrsense_instance_n(inst) * sizeof(double));
    if (corrsense_result_signal(result, signal, 2 * corrsense_instance_n(inst)) != CORRSENSE_STATUS_OK)
        fail("result_signal");
    free(signal);

    bool pass = false;
    if (corrsense_certify(inst, 0.7, 42, &pass, NULL) != CORRSENSE_STATUS_OK)
        fail("certify");
    printf("certificate pass=%d\n", pass);

    corrsense_result_free(result);
    corrsense_instance_free(inst);
    return stats.exact ? 0 : 2;
}
