/* Closed-box run from C: prints the discrete energy every 100 steps. */
#include <stdio.h>

#include "mixwave.h"

int main(void) {
    MwSimulation *sim = NULL;
    if (mw_simulation_new(MW_SCENARIO_CAVITY, 3, 0.0, 0, &sim) != MW_STATUS_OK) {
        char msg[256];
        mw_last_error_message(msg, sizeof msg);
        fprintf(stderr, "mixwave: %s\n", msg);
        return 1;
    }
    MwSimulationInfo info;
    for (int k = 0; k <= 5; ++k) {
        mw_simulation_info(sim, &info);
        printf("step %4llu  t = %.4f  energy = %.15e\n", (unsigned long long)info.step, info.time, info.energy);
        if (k < 5 && mw_simulation_step(sim, 100) != MW_STATUS_OK) {
            mw_simulation_free(sim);
            return 1;
        }
    }
    mw_simulation_free(sim);
    return 0;
}
