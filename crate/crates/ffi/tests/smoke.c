/* Links against the static library through the generated header. */
#include <math.h>
#include <stdio.h>
#include "lqg_landscape.h"

int main(void) {
    const double a[] = {1, 1, 0, 1}, b[] = {0, 1}, c[] = {1, 0};
    const double w[] = {5, 5, 5, 5}, q[] = {5, 5, 5, 5}, one[] = {1};
    LqgPlant *plant = NULL;
    LqgController *k = NULL;
    double j = 0;
    if (lqg_plant_new(2, 1, 1, a, b, c, w, one, q, one, false, &plant) != LQG_STATUS_OK) return 1;
    if (lqg_riccati_controller(plant, &k, &j) != LQG_STATUS_OK) return 2;
    if (fabs(j - 750.0) > 1e-6) return 3;
    LqgStatus st = lqg_cost(plant, NULL, &j);
    if (st != LQG_STATUS_NULL_POINTER) return 4;
    printf("%s: %s\n", lqg_status_string(st), lqg_last_error_message());
    lqg_controller_free(k);
    lqg_plant_free(plant);
    return 0;
}
