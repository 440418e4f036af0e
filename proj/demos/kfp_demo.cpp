// Walks through the Kramers-Fokker-Planck example: Hamilton map, singular
// space, predicted spectrum and a Galerkin cross-check.

#include <iomanip>
#include <iostream>

#include "quadspec/quadspec.hpp"

int main() {
  using namespace quadspec;
  const QuadraticForm q = kfp_form(1.0);

  std::cout << "Hamilton map F:\n" << hamilton_map(q).F << "\n\n";

  const SingularSpaceReport S = analyze_singular_space(q);
  std::cout << "dim S = " << S.S.dim() << ", symplectic: " << S.is_symplectic
            << ", partially elliptic: " << S.is_partially_elliptic << "\n";

  const SymplecticSplit sp = split(q, S);
  const SpectrumPrediction pred = predict_spectrum(q, S, &sp);
  std::cout << "generators (mu, r):";
  for (const auto& g : pred.generators) std::cout << " (" << g.mu << ", " << g.r << ")";
  std::cout << "\ndecay rate a = " << pred.decay_rate << "\n\n";

  const ConvergedEigenvalues conv = numerical_spectrum(q, 30, 10, 6);
  std::cout << std::setprecision(10) << "predicted vs Galerkin (N = 30/40):\n";
  for (std::size_t i = 0; i < conv.values.size() && i < pred.lattice.size(); ++i)
    std::cout << "  " << pred.lattice[i].value << "  " << conv.values[i].value << "\n";
  return 0;
}
