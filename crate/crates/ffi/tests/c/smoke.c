#include <math.h>
#include <stdio.h>
#include "bergman.h"

int main(void) {
    BergmanEgg *egg = NULL;
    double k = 0.0, v = 0.0, tail = 0.0;
    if (bergman_egg_new(2.0, &egg) != BERGMAN_STATUS_OK) return 10;
    if (bergman_egg_kernel(egg, 0.0, 0.0, &k) != BERGMAN_STATUS_OK) return 11;
    if (bergman_egg_kernel_series(egg, 0.1, 0.2, 1e-12, &v, &tail) != BERGMAN_STATUS_OK) return 12;
    bergman_egg_free(egg);
    if (fabs(k - 3.0 / (2.0 * M_PI * M_PI)) > 1e-14) return 13;
    if (bergman_egg_new(-1.0, &egg) != BERGMAN_STATUS_VALIDATION) return 14;
    if (bergman_last_error() == NULL) return 15;
    printf("%.17g\n", k);
    return 0;
}
