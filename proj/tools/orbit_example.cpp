// Follows one GDA orbit around the saddle and prints how well the quartic
// invariant is conserved, then evaluates f and its gradient at the start point.
#include <cstdio>

#include "gdapl/gdapl.hpp"

int main() {
    using namespace gdapl;
    const Objective obj = Objective::calibrated();
    const Point z0{1.6, 0.0};

    const auto traj = simulate_gda(obj, z0, 100.0, default_gda_config(), /*stop_at_return=*/true);
    const PeriodReport rep = detect_period(traj, z0);
    std::printf("period        %.10f\n", rep.period_T);
    std::printf("return dist   %.3e\n", rep.return_distance);
    std::printf("g drift (rel) %.3e\n", rep.max_g_drift_rel);

    const ValueAndGrad vg = obj.evaluate(z0);
    std::printf("f(z0)         %.12f\n", vg.value);
    std::printf("grad f(z0)    (%.12f, %.12f)\n", vg.gradient.grad.x, vg.gradient.grad.y);
}
