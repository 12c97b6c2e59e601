#pragma once

namespace riesz {

/// Central tolerance set shared by the checker, the analysis module and the
/// scenario runner. Relative tolerances scale with max(1, ||A||).
struct Tolerances {
  double realness = 1e-8;       // max |Im lambda| / max(|lambda|, 1)
  double hermitian = 1e-10;     // hermitian_residual
  double psd = 1e-10;           // PSD / PD thresholds
  double invertibility = 1e-10; // min Hermitian eigenvalue floor for "invertible"
  double similarity = 1e-10;    // C Hermiticity and S C S^-1 factorization
  double isospectrality = 1e-8; // Hausdorff gap sigma(C) vs sigma(L_K^-1)
  double endpoint = 1e-10;      // density values on the boundary
  double kernel = 1e-3;         // relative discrete kernel residual of generators
  double factorization = 1e-11; // (L^-1 + K) vs (I + KL) L^-1
};

}  // namespace riesz
