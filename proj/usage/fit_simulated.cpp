// Simulate one dataset from the homogeneous-normal design, fit the
// coefficient path and compare it with the truth and the naive fit.

#include <cstdio>
#include <cstdlib>

#include "recurq/estimator.hpp"
#include "recurq/inference.hpp"
#include "recurq/sim.hpp"

int main(int argc, char** argv) {
  using namespace recurq;
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 300;
  const DGPSpec spec = DGPSpec::paper(DGPKind::homogeneous_normal, n, 2024);
  const SimulatedDataset sim = generate_dataset(spec);
  std::printf("%zu subjects, %.2f events per subject\n", sim.data.size(), mean_events_per_subject(sim.data));

  const FitResult fr = fit(sim.data);
  std::printf("converged: %s after %zu iterations\n\n", fr.converged ? "yes" : "no", fr.iterations);
  std::printf(" tau   coef       fitted    naive     truth\n");
  const char* names[] = {"intercept", "x1", "x2"};
  for (double tau : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const Vector b = fr.path.evaluate(tau);
    const Vector nb = fr.naive_path.evaluate(tau);
    const Vector truth = true_coefficients(spec, tau);
    for (int j = 0; j < 3; ++j)
      std::printf("%5.2f  %-9s %8.3f  %8.3f  %8.3f\n", tau, names[j], b[j], nb[j], truth[j]);
  }
  std::printf("\naverage x1 effect over [0.1, 0.9]: %.3f\n", average_effect(fr.path, 1));
  return 0;
}
