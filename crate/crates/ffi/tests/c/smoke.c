#include <stdio.h>
#include <stdlib.h>
#include "vilwav.h"

int main(void) {
    size_t parent[7] = {0, 3, 3, 0, 5, 0, 2};
    VilwavSystem *sys = NULL;
    if (vilwav_system_build(parent, 7, NULL, &sys) != VILWAV_STATUS_OK) {
        fprintf(stderr, "build: %s\n", vilwav_last_error());
        return 1;
    }
    size_t len = 0;
    int32_t lo = 0, hi = 0;
    vilwav_system_psi(sys, 2, NULL, 0, &len, &lo, &hi);
    double *buf = malloc(2 * len * sizeof(double));
    if (vilwav_system_psi(sys, 2, buf, len, &len, &lo, &hi) != VILWAV_STATUS_OK) return 1;
    double dev = 1.0;
    enum VilwavStatus st = vilwav_system_verify(sys, 0, 1e-12, &dev);
    printf("p=%zu M=%zu psi_len=%zu window=[%d,%d) verify=%d\n",
           vilwav_system_p(sys), vilwav_system_m(sys), len, lo, hi, (int)st);
    free(buf);
    vilwav_system_free(sys);

    size_t cyc[3] = {0, 2, 1};
    if (vilwav_system_build(cyc, 3, NULL, &sys) != VILWAV_STATUS_INVALID_TREE) return 1;
    printf("%s\n", vilwav_last_error());
    return st == VILWAV_STATUS_OK ? 0 : 1;
}
