#pragma once

// Posterior draws on disk, one directory per chain:
//
//   manifest.txt  key=value: format, S, P, P2, seed, burn_in, sigma_form
//   beta.csv      draw, b1..bP
//   sigma.csv     sigma_form=full:   draw, s11, s12, ... (row-major P2 x P2)
//                 sigma_form=scaled: draw, scale
//   structure.csv sigma_form=scaled only: the fixed R, row-major, one row
//   tau2.csv      draw, tau2
//
// Numbers are written in shortest round-trip form, so reading back gives the
// same doubles bit for bit.

#include <string>

#include "axecv/gibbs.hpp"

namespace axecv {

void write_draws(const std::string& dir, const PosteriorDraws& draws);

/// Throws ManifestMismatch when a file disagrees with the manifest and
/// NotPositiveDefinite (naming the draw) when a Sigma draw is not SPD.
PosteriorDraws read_draws(const std::string& dir);

}  // namespace axecv
